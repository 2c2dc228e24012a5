"""Reflection/transmission of zero-thickness perfectly conducting strip arrays.

The screen is a 1D-periodic array of strips in the plane z = 0 (period
``Lambda``, strip width ``a``, strip centre ``x0``), invariant along y.  At
imaginary frequency the scalar problem reduces to the 2D modified Helmholtz
equation with effective wavenumber ``K = sqrt(kappa^2 + k_y^2)``.

Dirichlet strips carry a single-layer density ``sigma`` (even scattered
field, so ``T = R``); Neumann strips carry a jump ``mu`` of the field (odd
scattered field, ``T = -R``).  Both unknowns are expanded on the strip,
``x = x0 + h t`` with ``h = a/2``, in edge-adapted Chebyshev functions

    Dirichlet:  T_m(t) / sqrt(1 - t^2)
    Neumann:    sqrt(1 - t^2) U_m(t)

whose Fourier transforms are ``pi (-i)^m J_m(k h)`` and
``pi (-i)^m (m+1) J_{m+1}(k h) / (k h)``.  The Galerkin matrices are
therefore order sums

    S^D_lm = sum_n  J_l(k_n h) J_m(k_n h) / (2 Lambda q_n)
    S^N_lm = sum_n  q_n j_l(k_n h) j_m(k_n h) / (2 Lambda),  j_m(z) = (m+1) J_{m+1}(z)/z

and the Neumann hypersingular operator never appears in real space.  The
sums converge like ``1/N``; they are evaluated with a smooth cutoff window
whose complement is replaced by the non-oscillatory Hankel asymptotics of
the Bessel products, summed in closed form with Hurwitz zeta functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from scipy.special import gamma, jv, zeta

from .errors import ConvergenceError, DegenerateFrequencyError, DomainError
from .wavemodes import (
    Channel,
    EM_TO_SCALAR,
    OrderBasis,
    ReflectionBlock,
    TransmissionBlock,
    empty_amplitudes,
    mirror_amplitudes,
    offset_phase,
)


@dataclass(frozen=True)
class StripScreen:
    """One strip of width ``width`` per period, centred at ``offset``."""

    period: float
    width: float
    offset: float = 0.0

    def __post_init__(self):
        if not self.period > 0:
            raise DomainError(f"period must be positive, got {self.period}")
        if not 0 <= self.width <= self.period:
            raise DomainError(f"strip width must lie in [0, period], got {self.width}")
        off = math.fmod(self.offset, self.period)
        if off < 0:
            off += self.period
        if off >= self.period:
            off = 0.0
        object.__setattr__(self, "offset", off)

    @classmethod
    def from_fill(cls, period, fill, offset=0.0):
        return cls(period, fill * period, offset)

    @property
    def fill(self) -> float:
        return self.width / self.period

    @property
    def is_full(self) -> bool:
        return self.width == self.period

    @property
    def is_empty(self) -> bool:
        return self.width == 0

    def complement(self) -> "StripScreen":
        """The gaps of this screen, centred half a period away (offsets live in [0, period))."""
        half = 0.5 * self.period
        off = self.offset + half if self.offset < half else self.offset - half
        return StripScreen(self.period, self.period - self.width, off)

    def perimeter_per_area(self) -> float:
        """Edge length per unit area: two edges per period (0 for full/empty)."""
        return 0.0 if self.is_full or self.is_empty else 2.0 / self.period


@dataclass(frozen=True)
class SolverParams:
    """Truncations of the strip solver.

    n_basis : edge-adapted functions per strip.
    orders : diffraction-order cutoff ``P`` of the returned blocks.
    tol : admissible relative residual of the Galerkin solve.
    n_kernel : half-width of the directly summed order range in the kernel
        sums; ``None`` picks it from ``n_basis`` and the strip width.
    """

    n_basis: int = 16
    orders: int = 4
    tol: float = 1e-10
    n_kernel: int | None = None

    def __post_init__(self):
        if self.n_basis < 1:
            raise DomainError("n_basis must be >= 1")
        if self.orders < 0:
            raise DomainError("orders must be >= 0")
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if self.n_kernel is not None and self.n_kernel < 8:
            raise DomainError("n_kernel must be >= 8")


def suggest_params(screen: StripScreen, d: float, tol: float = 1e-9, tol_solve: float = 1e-10):
    """Truncation adequate for round trips across a gap ``d``.

    Orders are kept while ``exp(-2 q_p d)`` exceeds ``tol``; the basis must
    resolve the fastest kept order across the half-width of the wider of the
    strip and its gap so that a screen and its complement get the same
    resolution.
    """
    lam = screen.period
    # smallest |k_P| over the Brillouin zone is (2P - 1) pi / Lambda
    P = int(math.ceil(0.5 * (math.log(1.0 / tol) * lam / (2.0 * math.pi * d) + 1.0)))
    P = max(P, 2)
    half = 0.5 * max(screen.width, screen.period - screen.width)
    kmax = (2 * P + 1) * math.pi / lam
    # large-K boundary layers at the edges scale like sqrt(K h)
    kd = 0.5 * math.log(1.0 / tol) / d
    n_basis = int(math.ceil(kmax * half + 2.0 * math.sqrt(kd * half) + 8))
    return SolverParams(n_basis=n_basis, orders=P, tol=tol_solve)


def _window(x):
    """C-infinity step: 1 for x <= 0, 0 for x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(x < 1.0, np.exp(-1.0 / np.where(x < 1.0, 1.0 - x, 1.0)), 0.0)
        b = np.where(x > 0.0, np.exp(-1.0 / np.where(x > 0.0, x, 1.0)), 0.0)
    return a / (a + b)


def _bessel_table(m_max: int, z) -> np.ndarray:
    """``J_m(z)`` for m = 0..m_max, rows indexed by m.

    Upward recurrence is stable where ``|z| > m_max``; the remaining columns
    go through :func:`scipy.special.jv`.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty((m_max + 1, z.size))
    big = np.abs(z) > m_max + 1
    if np.any(~big):
        out[:, ~big] = jv(np.arange(m_max + 1)[:, None], z[~big][None, :])
    if np.any(big):
        zb = z[big]
        rows = np.empty((m_max + 1, zb.size))
        rows[0] = jv(0, zb)
        if m_max >= 1:
            rows[1] = jv(1, zb)
        for m in range(1, m_max):
            rows[m + 1] = (2.0 * m / zb) * rows[m] - rows[m - 1]
        out[:, big] = rows
    return out


def _jinc_orders(nb: int, z: np.ndarray) -> np.ndarray:
    """``(m+1) J_{m+1}(z) / z`` for m = 0..nb-1, rows indexed by m."""
    m = np.arange(nb)[:, None]
    z = np.asarray(z, dtype=float)[None, :]
    small = np.abs(z) < 1e-8
    zs = np.where(small, 1.0, z)
    out = (m + 1) * _bessel_table(nb, zs[0])[1:] / zs
    if np.any(small):
        series = 0.5 * (0.5 * z) ** m / gamma(m + 1.0)
        out = np.where(small, series, out)
    return out


def _nonosc_coefficients(L, M):
    """Non-oscillatory part of ``J_L(z) J_M(z)``:
    ``(c0 + c1/z + c2/z^2) / (pi z) + O(z^-4)``."""
    quarter = np.mod(M - L, 4)
    cos_d = np.choose(quarter, [1.0, 0.0, -1.0, 0.0])
    sin_d = np.choose(quarter, [0.0, 1.0, 0.0, -1.0])
    muL, muM = 4.0 * L * L, 4.0 * M * M
    c1 = sin_d * (muM - muL) / 8.0
    c2 = cos_d * (2.0 * (muL - 1) * (muM - 1) - (muL - 1) * (muL - 9) - (muM - 1) * (muM - 9)) / 128.0
    return cos_d, c1, c2


_MAX_KERNEL = 2_000_000


class StripSolver:
    """Galerkin solver for one screen, boundary condition and Bloch momentum.

    Everything that depends only on ``k_x`` (Bessel matrices, kernel tails)
    is built once; :meth:`reflection` then costs one Gram product and one
    Cholesky solve per effective wavenumber ``K``.
    """

    def __init__(self, screen: StripScreen, bc, kx: float, params: SolverParams, k_max: float = 0.0):
        self.screen = screen
        self.bc = Channel.parse(bc)
        if not self.bc.is_scalar:
            raise DomainError("StripSolver handles the scalar D/N problems")
        self.kx = float(kx)
        self.params = params
        self.period = lam = screen.period
        self.trivial = screen.is_full or screen.is_empty
        if self.trivial:
            return

        nb = params.n_basis
        h = self.h = 0.5 * screen.width
        dk = 2.0 * np.pi / lam
        if params.n_kernel is None:
            # Hankel asymptotics need k h >> n_basis^2 at the window start
            n1 = max(256, math.ceil((nb + 1) ** 2 / (dk * h)), math.ceil(4.0 * k_max / dk))
        else:
            n1 = params.n_kernel
        if n1 > _MAX_KERNEL:
            raise ConvergenceError(
                f"kernel window of {n1} orders needed (strip half-width {h:.3g} vs period {lam:.3g}); "
                "the screen is too close to empty or full for this basis size"
            )
        n_tot = 2 * n1
        self.n_window = (n1, n_tot)
        n = np.arange(-n_tot, n_tot + 1)
        k = self.kx + dk * n
        self._k2 = k * k
        z = k * h
        self._B = _bessel_table(nb - 1, z) if self.bc is Channel.DIRICHLET else _jinc_orders(nb, z)
        self._wts = _window((np.abs(n) - n1) / (n_tot - n1))

        l = np.arange(nb)[:, None]
        m = np.arange(nb)[None, :]
        if self.bc is Channel.DIRICHLET:
            c0, c1, c2 = _nonosc_coefficients(l, m)
            pref = 1.0 / (2.0 * lam * np.pi * h)
            ksign = -0.5
        else:
            c0, c1, c2 = _nonosc_coefficients(l + 1, m + 1)
            pref = (l + 1) * (m + 1) / (2.0 * lam * np.pi * h**3)
            ksign = 0.5
        parity = np.where((l + m) % 2 == 0, 1.0, -1.0)
        nu = self.kx / dk
        pos, neg = n > n1, n < -n1
        absk = np.abs(k)
        tails = {}
        for power in (2, 3, 4):
            tp = dk ** (-power) * zeta(power, n1 + 1 + nu) - np.sum(self._wts[pos] * absk[pos] ** (-power))
            tm = dk ** (-power) * zeta(power, n1 + 1 - nu) - np.sum(self._wts[neg] * absk[neg] ** (-power))
            tails[power] = tp + parity * tm
        self._tail0 = pref * (c0 * tails[2] + (c1 / h) * tails[3] + (c2 / h**2) * tails[4])
        self._tailK = pref * (ksign * c0) * tails[4]

        self.basis_orders = np.arange(-params.orders, params.orders + 1)
        kp = self.kx + dk * self.basis_orders
        self._kp2 = kp * kp
        self._J = jv(np.arange(nb)[:, None], kp * h) if self.bc is Channel.DIRICHLET else _jinc_orders(nb, kp * h)
        self._phase = offset_phase(OrderBasis(lam, params.orders, 1.0, self.kx), screen.offset)

    def gram(self, K: float) -> np.ndarray:
        q = np.sqrt(K * K + self._k2)
        if np.any(q == 0.0):
            raise DegenerateFrequencyError("kappa = k_x = k_y = 0 leaves the zeroth order undamped")
        lam = self.period
        w = 1.0 / (2.0 * lam * q) if self.bc is Channel.DIRICHLET else q / (2.0 * lam)
        S = (self._B * (w * self._wts)) @ self._B.T
        return S + self._tail0 + (K * K) * self._tailK

    def reflection(self, K: float) -> np.ndarray:
        """Flux-normalized reflection matrix at effective wavenumber ``K``."""
        P = self.params.orders
        if self.trivial:
            dim = 2 * P + 1
            if self.screen.is_empty:
                return np.zeros((dim, dim))
            return (-1.0 if self.bc is Channel.DIRICHLET else 1.0) * np.eye(dim)

        qp = np.sqrt(K * K + self._kp2)
        if np.any(qp == 0.0):
            raise DegenerateFrequencyError("kappa = k_x = k_y = 0 leaves the zeroth order undamped")
        S = self.gram(K)
        try:
            factor = cho_factor(S, lower=False, check_finite=False)
        except LinAlgError as exc:
            raise ConvergenceError(f"Galerkin matrix not positive definite: {exc}") from exc
        Y = cho_solve(factor, self._J, check_finite=False)
        resid = np.linalg.norm(S @ Y - self._J) / max(np.linalg.norm(self._J), 1e-300)
        if not resid <= self.params.tol:
            raise ConvergenceError(
                f"Galerkin solve residual {resid:.2e} exceeds tol {self.params.tol:.1e}"
            )
        X = self._J.T @ Y
        sq = np.sqrt(qp)
        lam = self.period
        if self.bc is Channel.DIRICHLET:
            R = -X / (2.0 * lam) / sq[:, None] / sq[None, :]
        else:
            R = X / (2.0 * lam) * sq[:, None] * sq[None, :]
        R = 0.5 * (R + R.T)
        if self.screen.offset != 0.0:
            ph = self._phase
            R = ph[:, None] * R * ph.conj()[None, :]
            if np.allclose(R.imag, 0.0, atol=1e-15 * max(1.0, np.abs(R).max())):
                R = R.real
        return R


def _kt(kt):
    if kt is None:
        return 0.0, 0.0
    if np.isscalar(kt):
        return float(kt), 0.0
    kx, ky = kt
    return float(kx), float(ky)


def _basis(screen, kappa, kt, params):
    kx, ky = _kt(kt)
    return OrderBasis(screen.period, params.orders, kappa, kx, ky)


def solve_scalar(screen: StripScreen, bc, kappa: float, kt=(0.0, 0.0), params: SolverParams | None = None):
    """Reflection and transmission blocks of ``screen`` for a scalar condition.

    Parameters
    ----------
    screen : StripScreen
    bc : {'D', 'N'} or Channel
    kappa : float
        Imaginary frequency.
    kt : (k_x, k_y)
        Transverse momentum; k_x is the Bloch momentum across the strips.
    params : SolverParams

    Returns
    -------
    (ReflectionBlock, TransmissionBlock)
    """
    params = params or SolverParams()
    ch = Channel.parse(bc)
    if not ch.is_scalar:
        raise DomainError(f"bc must be D or N, got {bc!r}")
    basis = _basis(screen, kappa, kt, params)
    if basis.dim and np.any(basis.q == 0.0) and not screen.is_empty and not screen.is_full:
        raise DegenerateFrequencyError("kappa = k_x = k_y = 0 is excluded")
    if screen.is_full:
        return mirror_amplitudes(ch, basis)
    if screen.is_empty:
        return empty_amplitudes(ch, basis)
    R = StripSolver(screen, ch, basis.kx, params, k_max=basis.k_eff).reflection(basis.k_eff)
    T = R.copy() if ch is Channel.DIRICHLET else -R
    return ReflectionBlock(ch, ch, R, basis), TransmissionBlock(ch, ch, T, basis)


def solve_reflection(screen, bc, kappa, kt=(0.0, 0.0), params=None) -> ReflectionBlock:
    return solve_scalar(screen, bc, kappa, kt, params)[0]


def solve_transmission(screen, bc, kappa, kt=(0.0, 0.0), params=None) -> TransmissionBlock:
    """Forward-scattering block; equals ``R`` for Dirichlet and ``-R`` for Neumann."""
    return solve_scalar(screen, bc, kappa, kt, params)[1]


def em_blocks_from_scalar(screen: StripScreen, kappa, kt=(0.0, 0.0), params=None):
    """EM block set of a y-invariant strip array.

    The M polarization (E along the strips) is the Dirichlet problem and the
    E polarization (H along the strips) the Neumann problem, both at
    ``K = sqrt(kappa^2 + k_y^2)``.  Polarization mixing vanishes in this basis.
    """
    from .babinet import EmBlockSet

    blocks = {}
    for pol in (Channel.M, Channel.E):
        R, T = solve_scalar(screen, EM_TO_SCALAR[pol], kappa, kt, params)
        name = pol.value * 2
        blocks["R_" + name] = R.matrix
        blocks["T_" + name] = T.matrix
    return EmBlockSet.from_matrices(R.basis, **blocks)


def convergence_sweep_basis(screen, bc, kappa, kt, params: SolverParams, n_values):
    """Reflection blocks for a list of ``n_basis`` values (other params fixed)."""
    return [solve_reflection(screen, bc, kappa, kt, replace(params, n_basis=int(n))) for n in n_values]
