"""Casimir energy per area between a strip screen and a perfect mirror.

With the screen and the mirror a distance ``d`` apart, each polarization
channel contributes

    E/A = 1/(4 pi) int_0^inf K dK  int_BZ dk_x/(2 pi)  tr ln(I - M(K, k_x))

where ``K = sqrt(kappa^2 + k_y^2)`` (the (kappa, k_y) half plane collapses
to its radial variable because strips are y-invariant) and
``M = R0 U R U`` is the round-trip operator.  The first-reflection energy
replaces ``ln(I - M)`` by ``-M``.  Results are the dimensionless
coefficient of ``hbar c A / d^3``.

Reference values per scalar channel: full ``-pi^2/1440``, first reflection
``-1/(16 pi^2)``; the EM problem is the sum of one Dirichlet and one
Neumann channel.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, InvariantViolation
from .grating import SolverParams, StripScreen, StripSolver, suggest_params
from .quadrature import composite, graded_breaks, semi_infinite_breaks
from .wavemodes import Channel, check_same_basis

PLATE_SCALAR = -math.pi**2 / 1440.0
PLATE_EM = -math.pi**2 / 720.0
PLATE_FIRST_SCALAR = -1.0 / (16.0 * math.pi**2)
PLATE_FIRST_EM = -1.0 / (8.0 * math.pi**2)
ALPHA_AREA = math.pi**2 / 720.0


def plate_energy(channel="em", order="full") -> float:
    """Closed-form parallel perfect-mirror coefficient of ``hbar c A / d^3``."""
    em = str(channel).lower() == "em"
    if order == "full":
        return PLATE_EM if em else PLATE_SCALAR
    if order == "first":
        return PLATE_FIRST_EM if em else PLATE_FIRST_SCALAR
    raise DomainError(f"order must be 'first' or 'full', got {order!r}")


def _channels(channel):
    if str(channel).lower() == "em":
        return (Channel.DIRICHLET, Channel.NEUMANN)
    ch = Channel.parse(channel)
    if ch is Channel.M:
        return (Channel.DIRICHLET,)
    if ch is Channel.E:
        return (Channel.NEUMANN,)
    return (ch,)


def _mirror_sign(ch: Channel) -> float:
    return -1.0 if ch is Channel.DIRICHLET else 1.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Node layout for the (K, k_x) integral.

    ``K`` is integrated in ``x = 2 K d`` over ``[0, x_max]``: geometric grading
    toward 0 below ``x_grade`` then panels growing outward, ``n_radial``
    Gauss nodes per panel.  ``k_x`` covers half the Brillouin zone
    ``[0, pi/Lambda]`` (the trace is even in k_x) with ``n_bloch`` nodes on
    each of ``bloch_levels + 1`` panels graded toward ``k_x = 0``.
    """

    n_radial: int = 8
    n_bloch: int = 6
    radial_levels: int = 3
    bloch_levels: int = 2
    x_grade: float = 1.0
    x_max: float = 50.0
    ratio: float = 0.15
    tol: float = 1e-3

    def __post_init__(self):
        if self.n_radial < 2 or self.n_bloch < 2:
            raise DomainError("node counts must be >= 2")
        if not self.tol > 0:
            raise DomainError("tol must be positive")

    def coarse(self) -> "QuadratureSpec":
        """A cheaper rule used to estimate the quadrature error."""
        from dataclasses import replace

        return replace(self, n_radial=max(2, self.n_radial - 2), n_bloch=max(2, self.n_bloch - 2))

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        from dataclasses import replace

        return replace(self, n_radial=self.n_radial * factor, n_bloch=self.n_bloch * factor)

    def radial_rule(self, d: float):
        x, w = composite(semi_infinite_breaks(self.x_grade, self.x_max, self.radial_levels, self.ratio), self.n_radial)
        return x / (2.0 * d), w / (2.0 * d)

    def bloch_rule(self, period: float):
        return composite(graded_breaks(math.pi / period, self.bloch_levels, self.ratio), self.n_bloch)


@dataclass
class EnergyResult:
    """Energy per area as a coefficient of ``hbar c A / d^3``."""

    value: float
    reflection_order: str
    quad_error: float
    metadata: dict = field(default_factory=dict)

    def energy_per_area(self, d: float, hbar_c: float = 1.0) -> float:
        return self.value * hbar_c / d**3

    def total_energy(self, area: float, d: float, hbar_c: float = 1.0) -> float:
        return area * self.energy_per_area(d, hbar_c)

    def to_dict(self) -> dict:
        return asdict(self)


def roundtrip(R0, U, R) -> np.ndarray:
    """Round-trip operator ``M = R0 U R U`` on a shared order basis."""
    check_same_basis(R0.basis, U.basis, R.basis)
    u = U.entries
    return R0.matrix @ (u[:, None] * R.matrix * u[None, :])


def _trace_terms(sign: float, u: np.ndarray, R: np.ndarray, node_info):
    """``(-tr M, tr ln(I - M))`` for ``M = sign * U R U`` with ``R`` Hermitian."""
    A = sign * (u[:, None] * R * u[None, :])
    first = -float(np.real(np.trace(A)))
    lam = np.linalg.eigvalsh(A)
    if lam.size and lam.max() >= 1.0:
        raise InvariantViolation(
            f"round-trip eigenvalue {lam.max():.6g} >= 1: I - M is not positive definite",
            diagnostics=dict(node_info, max_eigenvalue=float(lam.max())),
        )
    return first, float(np.sum(np.log1p(-lam)))


def _bloch_column(task):
    """Integrate over K at one k_x node; returns per-channel (first, full) K-integrals."""
    screen, channels, kx, d, params, K_nodes, K_weights = task
    k_max = float(K_nodes.max()) if K_nodes.size else 0.0
    first = np.zeros(len(channels))
    full = np.zeros(len(channels))
    for i, ch in enumerate(channels):
        solver = StripSolver(screen, ch, kx, params, k_max=k_max)
        sign = _mirror_sign(ch)
        kp = kx + 2.0 * np.pi * np.arange(-params.orders, params.orders + 1) / screen.period
        for K, w in zip(K_nodes, K_weights):
            R = solver.reflection(K)
            u = np.exp(-np.sqrt(K * K + kp * kp) * d)
            f1, fl = _trace_terms(sign, u, R, {"channel": ch.value, "K": K, "kx": kx, "d": d})
            first[i] += w * K * f1
            full[i] += w * K * fl
    return first, full


def _integrate(screen, channels, d, params, quad, workers):
    K_nodes, K_weights = quad.radial_rule(d)
    kx_nodes, kx_weights = quad.bloch_rule(screen.period)
    tasks = [(screen, channels, kx, d, params, K_nodes, K_weights) for kx in kx_nodes]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(_bloch_column, tasks))
    else:
        columns = [_bloch_column(t) for t in tasks]
    # fixed summation order, independent of the worker count
    first = np.zeros(len(channels))
    full = np.zeros(len(channels))
    for w, (f1, fl) in zip(kx_weights, columns):
        first += w * f1
        full += w * fl
    # 1/(4 pi) * 2/(2 pi) from the half Brillouin zone, times d^3
    scale = d**3 / (4.0 * math.pi**2)
    return scale * first, scale * full, len(K_nodes) * len(kx_nodes)


def casimir_energy(screen: StripScreen, d: float, channel="em", quad: QuadratureSpec | None = None,
                   params: SolverParams | None = None, workers: int = 1) -> dict:
    """First-reflection and full energies from one pass over the quadrature nodes.

    Returns ``{"first": EnergyResult, "full": EnergyResult}``.
    """
    if not d > 0:
        raise DomainError(f"separation must be positive, got {d}")
    quad = quad or QuadratureSpec()
    params = params or suggest_params(screen, d)
    channels = _channels(channel)
    first, full, nodes = _integrate(screen, channels, d, params, quad, workers)
    c_first, c_full, _ = _integrate(screen, channels, d, params, quad.coarse(), workers)

    def result(order, fine, coarse):
        value = float(np.sum(fine))
        err = abs(value - float(np.sum(coarse))) / abs(value) if value != 0 else float(abs(np.sum(coarse)))
        return EnergyResult(
            value=value,
            reflection_order=order,
            quad_error=err,
            metadata={
                "channel": str(channel),
                "per_channel": {ch.value: float(v) for ch, v in zip(channels, fine)},
                "orders": params.orders,
                "n_basis": params.n_basis,
                "nodes": nodes,
                "period_over_d": screen.period / d,
                "fill": screen.fill,
            },
        )

    return {"first": result("first", first, c_first), "full": result("full", full, c_full)}


def energy_full(screen, d, channel="em", quad=None, params=None, workers=1) -> EnergyResult:
    """Full trace-log energy of ``screen`` facing a perfect mirror."""
    return casimir_energy(screen, d, channel, quad, params, workers)["full"]


def energy_first_reflection(screen, d, channel="em", quad=None, params=None, workers=1) -> EnergyResult:
    """Energy with ``tr ln(I - M)`` replaced by ``-tr M``."""
    return casimir_energy(screen, d, channel, quad, params, workers)["first"]


def pfa_energy(screen: StripScreen, d: float = 1.0, channel="em") -> EnergyResult:
    """Proximity-force estimate: fill fraction times the parallel-plate value."""
    return EnergyResult(
        value=screen.fill * plate_energy(channel, "full"),
        reflection_order="full",
        quad_error=0.0,
        metadata={"method": "pfa", "fill": screen.fill, "channel": str(channel)},
    )


@dataclass(frozen=True)
class EdgeFit:
    """Result of fitting ``E d^3 = -(alpha_A f + alpha_P p d + c d^2)``.

    ``p`` is the perimeter per unit area; uncertainties are one standard
    deviation from the fit covariance.
    """

    alpha_A: float
    alpha_P: float
    c: float
    sigma_A: float
    sigma_P: float
    sigma_c: float
    residual: float
    condition: float


def fit_edge_coefficients(results, screen: StripScreen, max_condition: float = 1e10) -> EdgeFit:
    """Least-squares area/perimeter/next-order fit over a small-``d`` window.

    Parameters
    ----------
    results : sequence of (d, EnergyResult)
        Energies of ``screen`` at separations ``d`` (coefficients of ``A/d^3``).
    screen : StripScreen

    The fitted model is ``E(d) = -(alpha_A f / d^3 + alpha_P P / d^2 + c / d)``
    with ``P = 2 / Lambda`` the perimeter per area.  Point weights come from
    the reported quadrature errors; the covariance is scaled by the reduced
    chi-square when there are spare degrees of freedom, never below the
    propagated quadrature errors.
    """
    pts = sorted((float(d), r) for d, r in results)
    ds = np.array([d for d, _ in pts])
    if len(np.unique(ds)) < 3:
        raise DomainError("edge fit needs at least three distinct separations")
    y = -np.array([r.value for _, r in pts])
    sig = np.array([max(abs(r.value) * r.quad_error, 1e-15) for _, r in pts])
    perim = screen.perimeter_per_area()
    X = np.column_stack([np.full_like(ds, screen.fill), perim * ds, ds**2])
    Xw = X / sig[:, None]
    yw = y / sig
    cond = float(np.linalg.cond(Xw))
    if not cond < max_condition:
        raise ConvergenceError(f"edge fit ill-conditioned (cond = {cond:.2e}); widen the d window")
    coef, *_ = np.linalg.lstsq(Xw, yw, rcond=None)
    cov = np.linalg.inv(Xw.T @ Xw)
    resid = yw - Xw @ coef
    dof = len(ds) - 3
    if dof > 0:
        cov = cov * max(1.0, float(resid @ resid) / dof)
    err = np.sqrt(np.diag(cov))
    return EdgeFit(
        alpha_A=float(coef[0]),
        alpha_P=float(coef[1]),
        c=float(coef[2]),
        sigma_A=float(err[0]),
        sigma_P=float(err[1]),
        sigma_c=float(err[2]),
        residual=float(np.sqrt(np.mean((y - X @ coef) ** 2))),
        condition=cond,
    )


def _combine(parts, order):
    """EM result from the two scalar results of one separation."""
    value = sum(p.value for p in parts)
    err = sum(abs(p.value) * p.quad_error for p in parts) / abs(value) if value else 0.0
    meta = dict(parts[0].metadata)
    meta["channel"] = "em"
    meta["per_channel"] = {k: v for p in parts for k, v in p.metadata["per_channel"].items()}
    return EnergyResult(value=value, reflection_order=order, quad_error=err, metadata=meta)


def edge_scan(screen: StripScreen, d_values, quad: QuadratureSpec | None = None, tol: float = 1e-6,
              workers: int = 1) -> dict:
    """Energies over a list of separations for both scalar channels and EM.

    Returns ``{order: {channel: [(d, EnergyResult), ...]}}`` with orders
    ``"first"``/``"full"`` and channels ``"D"``, ``"N"``, ``"em"``; truncations
    follow :func:`~casimir_babinet.grating.suggest_params` at ``tol``.
    """
    quad = quad or QuadratureSpec()
    out = {o: {"D": [], "N": [], "em": []} for o in ("first", "full")}
    for d in sorted(float(x) for x in d_values):
        params = suggest_params(screen, d, tol=tol)
        per = {ch: casimir_energy(screen, d, ch, quad, params, workers) for ch in ("D", "N")}
        for order in ("first", "full"):
            for ch in ("D", "N"):
                out[order][ch].append((d, per[ch][order]))
            out[order]["em"].append((d, _combine([per["D"][order], per["N"][order]], order)))
    return out
