"""Can a real metal film stand in for a zero-thickness perfect conductor?

The idealization holds when the film thickness ``t`` sits well between the
skin depth at the relevant frequency ``omega ~ 2 pi c / d`` and the
separation ``d``.  "Well between" is read as a factor ``margin`` on each
side.  SI units throughout this module.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import DomainError

CONSTANTS = {
    "mu0": 4.0e-7 * math.pi,  # vacuum permeability, H/m
    "c": 2.998e8,  # speed of light, m/s
}

GOLD_CONDUCTIVITY = 4.5e7  # S/m


@dataclass(frozen=True)
class ConductorSpec:
    """Metal film: conductivity (S/m), thickness (m) and separation (m)."""

    sigma: float
    thickness: float
    d: float

    def __post_init__(self):
        for name in ("sigma", "thickness", "d"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")


def skin_depth(sigma: float, d: float) -> float:
    """Skin depth ``sqrt(2 / (mu0 omega sigma))`` at ``omega = 2 pi c / d``.

    Equivalently ``sqrt(d / (pi c mu0 sigma))``.  ``sigma = inf`` returns 0.

    Examples
    --------
    >>> round(skin_depth(4.5e7, 1e-6) * 1e9, 2)
    4.33
    """
    if not sigma > 0:
        raise DomainError(f"conductivity must be positive, got {sigma}")
    if not d > 0:
        raise DomainError(f"separation must be positive, got {d}")
    if math.isinf(sigma):
        return 0.0
    return math.sqrt(d / (math.pi * CONSTANTS["c"] * CONSTANTS["mu0"] * sigma))


@dataclass(frozen=True)
class ThicknessWindow:
    t_min: float
    t_max: float
    verdict: str
    margin: float
    skin_depth: float
    thickness: float | None = None

    @property
    def feasible(self) -> bool:
        return self.t_min < self.t_max

    def to_dict(self) -> dict:
        out = asdict(self)
        out["units"] = "m"
        return out


def thickness_window(sigma: float, d: float, margin: float = 5.0, t: float | None = None) -> ThicknessWindow:
    """Admissible film thicknesses ``margin * skin_depth < t < d / margin``.

    Verdicts: ``"valid"`` / ``"invalid"`` when ``t`` is given, otherwise
    ``"feasible"``; an empty window is always ``"infeasible"``.
    """
    if not margin > 1:
        raise DomainError(f"margin must exceed 1, got {margin}")
    if t is not None and not t > 0:
        raise DomainError(f"thickness must be positive, got {t}")
    delta = skin_depth(sigma, d)
    t_min, t_max = margin * delta, d / margin
    if not t_min < t_max:
        verdict = "infeasible"
    elif t is None:
        verdict = "feasible"
    else:
        verdict = "valid" if t_min < t < t_max else "invalid"
    return ThicknessWindow(t_min, t_max, verdict, margin, delta, t)


def check_conductor(spec: ConductorSpec, margin: float = 5.0) -> ThicknessWindow:
    return thickness_window(spec.sigma, spec.d, margin, spec.thickness)
