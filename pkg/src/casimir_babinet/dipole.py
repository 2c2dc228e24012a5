"""Casimir-Polder interactions of small perforations, treated via their complements.

A small hole in a perfect conductor interacts like the disc that would fill
it.  This module provides the disc polarizability, the retarded dipole-dipole
energy between two static polarizabilities, the dipole-mirror energy, lattice
sums of the pair energy between two square arrays of discs, the resulting
lateral force, and the dilute-hole correction to the plate-plate energy.

Energies carry a factor ``hbar c`` (default 1); lengths are in any consistent
unit and polarizabilities have units of length^3.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

CAVEATS = (
    "magnetic polarizability ignored",
    "dipole order in R/d and R/spacing; multiple scattering between holes neglected",
)

# |13 tr(a1 a2)| + |56 n.a1.a2.n| + |63 (n.a1.n)(n.a2.n)| <= 158 |a1| |a2|
_PAIR_BOUND = 13 * 3 + 56 + 63


def as_polarizability(alpha) -> np.ndarray:
    """Validate a 3x3 symmetric, positive semidefinite polarizability tensor.

    Scalars are promoted to isotropic tensors.
    """
    a = np.asarray(alpha, dtype=float)
    if a.ndim == 0:
        if a < 0:
            raise DomainError("scalar polarizability must be >= 0")
        return float(a) * np.eye(3)
    if a.shape != (3, 3):
        raise DomainError(f"polarizability must be 3x3, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max()))
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * scale):
        raise DomainError("polarizability tensor must be symmetric")
    a = 0.5 * (a + a.T)
    if np.linalg.eigvalsh(a).min() < -1e-12 * scale:
        raise DomainError("polarizability tensor must be positive semidefinite")
    return a


def disc_polarizability(R: float) -> np.ndarray:
    """Static electric polarizability of a perfectly conducting disc of radius R.

    Only the two in-plane components are nonzero; the disc normal is the
    z axis.

    Parameters
    ----------
    R : float
        Disc radius, ``R >= 0``.  ``R = 0`` gives the zero tensor.
    """
    if not R >= 0:
        raise DomainError(f"disc radius must be >= 0, got {R}")
    a = 4.0 * R**3 / (3.0 * math.pi)
    return np.diag([a, a, 0.0])


def _pair_parts(a1, a2, r):
    r2 = float(r @ r)
    if r2 == 0.0:
        raise DomainError("dipole pair at zero separation")
    t = float(np.trace(a1 @ a2))
    B = 0.5 * (a1 @ a2 + a2 @ a1)
    rBr = float(r @ B @ r)
    r1, r2_ = float(r @ a1 @ r), float(r @ a2 @ r)
    return r2, t, B, rBr, r1, r2_


def dipole_pair_energy(alpha1, alpha2, r_vec, hbar_c: float = 1.0) -> float:
    r"""Retarded (large-separation) interaction energy of two static dipoles.

    .. math::

        E = -\frac{\hbar c}{8\pi r^7}\left[13\,\mathrm{tr}(\alpha_1\alpha_2)
            - 56\,\mathrm{tr}(\alpha_1\alpha_2\Omega)
            + 63\,\mathrm{tr}(\Omega\alpha_1\Omega\alpha_2)\right],
        \qquad \Omega = \hat n \hat n^T

    Parameters
    ----------
    alpha1, alpha2 : array_like (3, 3) or float
    r_vec : array_like (3,)
        Separation vector; its sign is irrelevant.
    """
    a1, a2 = as_polarizability(alpha1), as_polarizability(alpha2)
    r = np.asarray(r_vec, dtype=float)
    r2, t, _, rBr, r1, r2_ = _pair_parts(a1, a2, r)
    bracket = 13.0 * t - 56.0 * rBr / r2 + 63.0 * r1 * r2_ / r2**2
    return -hbar_c * bracket / (8.0 * math.pi * r2**3.5)


def dipole_pair_gradient(alpha1, alpha2, r_vec, hbar_c: float = 1.0) -> np.ndarray:
    """Gradient of :func:`dipole_pair_energy` with respect to ``r_vec``."""
    a1, a2 = as_polarizability(alpha1), as_polarizability(alpha2)
    r = np.asarray(r_vec, dtype=float)
    r2, t, B, rBr, r1, r2_ = _pair_parts(a1, a2, r)
    g = (
        -7.0 * 13.0 * t * r / r2**4.5
        - 56.0 * (2.0 * B @ r / r2**4.5 - 9.0 * rBr * r / r2**5.5)
        + 63.0 * (2.0 * (a1 @ r) * r2_ + 2.0 * r1 * (a2 @ r)) / r2**5.5
        - 63.0 * 11.0 * r1 * r2_ * r / r2**6.5
    )
    return -hbar_c * g / (8.0 * math.pi)


def dipole_plate_energy(alpha, d: float, hbar_c: float = 1.0, nodes: int = 24) -> float:
    """First-reflection energy of a static dipole a distance d from a perfect mirror.

    Integrates ``-(hbar c / 2 pi) int_0^inf dkappa tr(alpha G_R(kappa))`` where
    ``G_R`` is the mirror-reflected Green tensor at the dipole, evaluated with
    Gauss-Laguerre quadrature in ``x = 2 kappa d``.  For isotropic ``alpha``
    this is ``-3 hbar c alpha / (8 pi d^4)``.
    """
    if not d > 0:
        raise DomainError(f"distance to the plate must be positive, got {d}")
    a = as_polarizability(alpha)
    x, w = np.polynomial.laguerre.laggauss(nodes)
    # e^{-x} stripped by the Laguerre weight; G_R = [diag(1,1,2)(1+x)/8 + diag(1,1,0) x^2/8] / d^3
    diag_a = np.diag(a)
    tr = (diag_a[0] + diag_a[1]) * ((1.0 + x) / 8.0 + x**2 / 8.0) + diag_a[2] * (1.0 + x) / 4.0
    integral = float(w @ tr) / d**3 / (2.0 * d)
    return -hbar_c * integral / (2.0 * math.pi)


@dataclass(frozen=True)
class LatticeSpec:
    """Two parallel plates with square arrays of circular holes.

    spacing : centre-to-centre hole separation Delta
    radius : hole radius R
    d : plate separation
    delta : lateral displacement of plate 1 along x, or an (x, y) pair
    n_cut : real-space shells summed; ``None`` picks the smallest cutoff
        meeting the tail tolerance
    """

    spacing: float
    radius: float
    d: float
    delta: float | tuple = 0.0
    n_cut: int | None = None

    def __post_init__(self):
        if not self.spacing > 0:
            raise DomainError("hole spacing must be positive")
        if not self.d > 0:
            raise DomainError("plate separation must be positive")
        if not self.radius >= 0:
            raise DomainError("hole radius must be >= 0")
        if not self.radius < 0.5 * self.spacing:
            raise DomainError("holes overlap: radius must be below half the spacing")
        if self.n_cut is not None and self.n_cut < 1:
            raise DomainError("n_cut must be >= 1")
        if self.radius > 0.25 * self.d or self.radius > 0.25 * self.spacing:
            warnings.warn(
                f"R/d = {self.radius / self.d:.3g}, R/spacing = {self.radius / self.spacing:.3g}: "
                "dipole approximation is outside its small-hole regime",
                stacklevel=2,
            )

    @property
    def offset(self) -> np.ndarray:
        dl = np.atleast_1d(np.asarray(self.delta, dtype=float))
        if dl.size == 1:
            return np.array([dl[0], 0.0])
        if dl.size != 2:
            raise DomainError("delta must be a scalar or an (x, y) pair")
        return dl

    @property
    def along_axis(self) -> bool:
        return self.offset[1] == 0.0

    @property
    def alpha(self) -> np.ndarray:
        return disc_polarizability(self.radius)


def _reduce(x, period):
    """Map ``x`` into ``[-period/2, period/2)``."""
    y = math.fmod(x + 0.5 * period, period)
    if y < 0:
        y += period
    return y - 0.5 * period


def _axis_sites(shift, spacing, n_cut):
    """Site coordinates along one axis and their window weights.

    Sites strictly inside ``|c| < (n_cut + 1/2) spacing`` get weight 1, sites
    on the boundary 1/2.  The window is symmetric under ``c -> -c``, which
    makes the truncated sum even in the displacement.
    """
    X = (n_cut + 0.5) * spacing
    k = np.arange(-n_cut - 1, n_cut + 2)
    c = k * spacing + shift
    on_edge = np.isclose(np.abs(c), X, rtol=1e-13, atol=0.0)
    w = np.where(on_edge, 0.5, np.where(np.abs(c) < X, 1.0, 0.0))
    keep = w > 0
    return c[keep], w[keep]


def _sites(spec: LatticeSpec, n_cut: int):
    off = spec.offset
    sx = _reduce(off[0], spec.spacing)
    sy = _reduce(off[1], spec.spacing)
    cx, wx = _axis_sites(sx, spec.spacing, n_cut)
    cy, wy = _axis_sites(sy, spec.spacing, n_cut)
    X, Y = np.meshgrid(cx, cy, indexing="ij")
    W = np.outer(wx, wy)
    r = np.stack([X.ravel(), Y.ravel(), np.full(X.size, spec.d)], axis=1)
    return r, W.ravel()


def _pair_terms(a1, a2, r, hbar_c):
    """Vectorized pair energies and gradients for an (N, 3) array of separations."""
    r2 = np.einsum("ij,ij->i", r, r)
    t = float(np.trace(a1 @ a2))
    B = 0.5 * (a1 @ a2 + a2 @ a1)
    Br, a1r, a2r = r @ B, r @ a1, r @ a2
    rBr = np.einsum("ij,ij->i", r, Br)
    r1 = np.einsum("ij,ij->i", r, a1r)
    r2_ = np.einsum("ij,ij->i", r, a2r)
    pref = -hbar_c / (8.0 * math.pi)
    energy = pref * (13.0 * t - 56.0 * rBr / r2 + 63.0 * r1 * r2_ / r2**2) / r2**3.5
    grad = pref * (
        -91.0 * t * r / r2[:, None] ** 4.5
        - 56.0 * (2.0 * Br / r2[:, None] ** 4.5 - 9.0 * (rBr / r2**5.5)[:, None] * r)
        + 63.0 * (2.0 * a1r * r2_[:, None] + 2.0 * r1[:, None] * a2r) / r2[:, None] ** 5.5
        - 693.0 * (r1 * r2_ / r2**6.5)[:, None] * r
    )
    return energy, grad


def tail_bound(spec: LatticeSpec, n_cut: int, hbar_c: float = 1.0) -> float:
    """Rigorous bound on the pair energies omitted beyond ``n_cut`` shells.

    Every omitted site has in-plane distance ``rho >= X = (n_cut + 1/2) spacing``
    and each lattice cell lies within ``s = spacing/sqrt(2)`` of its site, so

        sum r^-7 <= (2 pi / spacing^2) int_{u0}^inf (u + s) (u^2 + d^2)^{-7/2} du
                 <= (2 pi / spacing^2) (u0^2 + d^2)^{-5/2} (1 + s/u0) / 5

    with ``u0 = X - 2 s``.
    """
    lam = np.linalg.eigvalsh(spec.alpha).max()
    C = _PAIR_BOUND * lam * lam * abs(hbar_c) / (8.0 * math.pi)
    s = spec.spacing / math.sqrt(2.0)
    u0 = (n_cut + 0.5) * spec.spacing - 2.0 * s
    if u0 <= 0:
        return math.inf
    return C * 2.0 * math.pi / spec.spacing**2 * (u0 * u0 + spec.d**2) ** -2.5 * (1.0 + s / u0) / 5.0


def required_cutoff(spec: LatticeSpec, rtol: float, scale: float, hbar_c: float = 1.0, n_max: int = 4096) -> int:
    """Smallest ``n_cut`` whose tail bound is below ``rtol * scale``."""
    target = rtol * abs(scale)
    n = 1
    while tail_bound(spec, n, hbar_c) > target:
        n = n * 2 if n < 64 else n + 64
        if n > n_max:
            raise ConvergenceError(f"no cutoff up to {n_max} shells meets rtol = {rtol:g}")
    # back off to the smallest cutoff in the last bracket
    while n > 1 and tail_bound(spec, n - 1, hbar_c) <= target:
        n -= 1
    return n


@dataclass(frozen=True)
class LatticeResult:
    """Lattice sum with its truncation data."""

    energy: float
    force: float
    n_cut: int
    tail_bound: float
    sites: int


def lattice_sum(spec: LatticeSpec, rtol: float = 1e-7, hbar_c: float = 1.0) -> LatticeResult:
    """Energy per unit cell and lateral force per area for the disc arrays.

    One disc of plate 1 sits at lateral offset ``delta``; all discs of plate 2
    within ``n_cut`` shells are summed.  The displacement is reduced into
    ``[-spacing/2, spacing/2)`` first, so the result is exactly periodic.

    Raises
    ------
    ConvergenceError
        If a fixed ``spec.n_cut`` leaves a tail bound above ``rtol`` times
        the nearest-image energy.
    """
    a = spec.alpha
    if not np.any(a):
        return LatticeResult(0.0, 0.0, spec.n_cut or 0, 0.0, 0)
    # the nearest image sets the scale the tolerance refers to
    near = abs(dipole_pair_energy(a, a, (0.0, 0.0, spec.d), hbar_c))
    if spec.n_cut is None:
        n_cut = required_cutoff(spec, rtol, near, hbar_c)
    else:
        n_cut = spec.n_cut
        if tail_bound(spec, n_cut, hbar_c) > rtol * near:
            raise ConvergenceError(
                f"n_cut = {n_cut} leaves tail bound {tail_bound(spec, n_cut, hbar_c):.3e} "
                f"above rtol = {rtol:g} of the nearest-image energy"
            )
    r, w = _sites(spec, n_cut)
    e, g = _pair_terms(a, a, r, hbar_c)
    # fixed summation order: site arrays are built deterministically
    energy = float(np.sum(w * e))
    dE = float(np.sum(w * g[:, 0]))
    return LatticeResult(
        energy=energy,
        force=-dE / spec.spacing**2,
        n_cut=n_cut,
        tail_bound=tail_bound(spec, n_cut, hbar_c),
        sites=int(w.size),
    )


def lattice_energy(spec: LatticeSpec, rtol: float = 1e-7, hbar_c: float = 1.0) -> float:
    """Hole-hole energy per unit cell (see :func:`lattice_sum`)."""
    return lattice_sum(spec, rtol, hbar_c).energy


def lateral_force(spec: LatticeSpec, rtol: float = 1e-7, hbar_c: float = 1.0) -> float:
    """Lateral force per area along x, ``-dE/d(delta) / spacing^2``.

    Uses the closed-form gradient of the pair energies.  Negative values
    for small positive ``delta`` pull the plates back into alignment.
    """
    return lattice_sum(spec, rtol, hbar_c).force


def hole_correction(spec: LatticeSpec, hbar_c: float = 1.0) -> float:
    """Energy per area added by the holes of one plate facing a solid mirror.

    Removing metal weakens the attraction, so this is minus the disc-plate
    energy per unit cell; it is positive.
    """
    return -dipole_plate_energy(spec.alpha, spec.d, hbar_c) / spec.spacing**2


def hole_corrected_plate_energy(spec: LatticeSpec, hbar_c: float = 1.0) -> float:
    """Perforated plate facing a solid mirror, dilute holes: energy per area.

    Parallel-plate energy ``-pi^2 hbar c / (720 d^3)`` plus
    :func:`hole_correction`.
    """
    hole_area = math.pi * spec.radius**2 / spec.spacing**2
    if hole_area > 0.2:
        warnings.warn(f"hole area fraction {hole_area:.3g} is not dilute", stacklevel=2)
    return -math.pi**2 * hbar_c / (720.0 * spec.d**3) + hole_correction(spec, hbar_c)
