"""Diffraction-order basis at imaginary frequency.

A 1D-periodic screen of period ``Lambda`` in the plane z = 0 couples the
plane waves ``exp(i k_p x + i k_y y)`` with ``k_p = k_x + 2 pi p / Lambda``.
At imaginary frequency ``kappa`` every order decays along z with

    q_p = sqrt(kappa^2 + k_y^2 + k_p^2).

Amplitude matrices are stored in the flux-normalized basis, i.e. the field
coefficient of order p' produced by unit incidence in order p is
``R[p', p] * sqrt(q_p / q_p')``.  In that basis the identity operator of
the continuum basis becomes the Kronecker identity and reciprocity makes
the matrices symmetric.

Natural units hbar = c = 1 are used throughout.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import BasisMismatchError, DomainError


class Channel(enum.Enum):
    """Boundary-condition (scalar) or polarization (EM) label."""

    DIRICHLET = "D"
    NEUMANN = "N"
    E = "E"
    M = "M"
    # short aliases
    D = "D"
    N = "N"

    @classmethod
    def parse(cls, value: "Channel | str") -> "Channel":
        if isinstance(value, Channel):
            return value
        key = str(value).strip().upper()
        aliases = {"DIRICHLET": "D", "NEUMANN": "N", "TM": "E", "TE": "M"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown channel {value!r}") from None

    @property
    def is_scalar(self) -> bool:
        return self in (Channel.DIRICHLET, Channel.NEUMANN)

    def dual(self) -> "Channel":
        """Channel exchanged by the complement transform."""
        return {
            Channel.DIRICHLET: Channel.NEUMANN,
            Channel.NEUMANN: Channel.DIRICHLET,
            Channel.E: Channel.M,
            Channel.M: Channel.E,
        }[self]


# The M polarization has its electric field along the strip axis and obeys the
# Dirichlet problem; the E polarization carries H along the strips (Neumann).
EM_TO_SCALAR = {Channel.M: Channel.DIRICHLET, Channel.E: Channel.NEUMANN}
SCALAR_TO_EM = {v: k for k, v in EM_TO_SCALAR.items()}


def axial_decay(kappa, kx, ky, p, period):
    """Decay constant ``q_p`` of diffraction order ``p``.

    Parameters
    ----------
    kappa : float
        Imaginary-frequency wavenumber, ``kappa >= 0``.
    kx, ky : float
        Bloch momentum across the strips and momentum along them.
    p : int or array_like
        Diffraction order(s).
    period : float
        Screen period, ``period > 0``.

    Returns
    -------
    float or ndarray
        ``sqrt(kappa**2 + ky**2 + (kx + 2 pi p / period)**2)``.
    """
    if not period > 0:
        raise DomainError(f"period must be positive, got {period}")
    if not (np.isfinite(kappa) and kappa >= 0):
        raise DomainError(f"kappa must be finite and non-negative, got {kappa}")
    kp = kx + 2.0 * np.pi * np.asarray(p) / period
    return np.sqrt(kappa * kappa + ky * ky + kp * kp)


@dataclass(frozen=True)
class OrderBasis:
    """Orders ``p = -P..P`` at fixed ``(kappa, k_x, k_y)`` for one period."""

    period: float
    P: int
    kappa: float
    kx: float = 0.0
    ky: float = 0.0
    q: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.P) != self.P or self.P < 0:
            raise DomainError(f"order cutoff must be a non-negative integer, got {self.P}")
        object.__setattr__(self, "P", int(self.P))
        q = axial_decay(self.kappa, self.kx, self.ky, self.orders, self.period)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.P, self.P + 1)

    @property
    def dim(self) -> int:
        return 2 * self.P + 1

    @property
    def k_parallel(self) -> np.ndarray:
        """In-plane momenta ``k_p`` across the strips."""
        return self.kx + 2.0 * np.pi * self.orders / self.period

    @property
    def k_eff(self) -> float:
        """``sqrt(kappa^2 + k_y^2)``; the 2D problem only sees this combination."""
        return float(np.hypot(self.kappa, self.ky))

    def same_as(self, other: "OrderBasis") -> bool:
        return (
            self.P == other.P
            and np.isclose(self.period, other.period, rtol=1e-14, atol=0)
            and np.isclose(self.kappa, other.kappa, rtol=1e-14, atol=1e-300)
            and np.isclose(self.kx, other.kx, rtol=1e-14, atol=1e-300)
            and np.isclose(self.ky, other.ky, rtol=1e-14, atol=1e-300)
        )


def check_same_basis(*bases: OrderBasis) -> None:
    first = bases[0]
    for b in bases[1:]:
        if not first.same_as(b):
            raise BasisMismatchError(f"basis mismatch: {first} vs {b}")


@dataclass(frozen=True)
class ReflectionBlock:
    channel_in: Channel
    channel_out: Channel
    matrix: np.ndarray
    basis: OrderBasis

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise BasisMismatchError(
                f"matrix shape {m.shape} does not match basis dimension {self.basis.dim}"
            )
        object.__setattr__(self, "matrix", m)

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.matrix)))) if self.basis.dim else 0.0

    def with_matrix(self, matrix, channel_in=None, channel_out=None):
        return type(self)(
            channel_in or self.channel_in,
            channel_out or self.channel_out,
            matrix,
            self.basis,
        )


class TransmissionBlock(ReflectionBlock):
    pass


@dataclass(frozen=True)
class TranslationDiagonal:
    basis: OrderBasis
    separation: float
    entries: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.entries)


def translation_diagonal(basis: OrderBasis, d: float) -> TranslationDiagonal:
    """Propagation over a gap ``d``: ``diag(exp(-q_p d))``."""
    if not d >= 0:
        raise DomainError(f"separation must be non-negative, got {d}")
    return TranslationDiagonal(basis, float(d), np.exp(-basis.q * d))


def offset_phase(basis: OrderBasis, shift: float) -> np.ndarray:
    """Diagonal phases ``exp(-i k_p shift)`` that move a screen by ``shift`` along x.

    A block computed for a screen centred at 0 becomes the block for the
    screen centred at ``shift`` via ``Phi @ R @ Phi.conj()``.
    """
    return np.exp(-1j * basis.k_parallel * shift)


def shift_matrix(matrix: np.ndarray, basis: OrderBasis, shift: float) -> np.ndarray:
    ph = offset_phase(basis, shift)
    out = ph[:, None] * matrix * ph.conj()[None, :]
    if np.isrealobj(matrix) and np.allclose(out.imag, 0.0, atol=1e-14 * max(1.0, np.abs(out).max())):
        return out.real
    return out


def mirror_amplitudes(channel, basis: OrderBasis):
    """Reflection and transmission blocks of an unbroken perfect mirror.

    Dirichlet / M: ``R = -I``; Neumann / E: ``R = +I``; every channel has
    ``T = -I`` (the incident wave is cancelled behind the mirror).
    """
    ch = Channel.parse(channel)
    sign = -1.0 if ch in (Channel.DIRICHLET, Channel.M) else 1.0
    eye = np.eye(basis.dim)
    return (
        ReflectionBlock(ch, ch, sign * eye, basis),
        TransmissionBlock(ch, ch, -eye, basis),
    )


def empty_amplitudes(channel, basis: OrderBasis):
    """Amplitudes of the null screen (no scattering at all)."""
    ch = Channel.parse(channel)
    zero = np.zeros((basis.dim, basis.dim))
    return ReflectionBlock(ch, ch, zero, basis), TransmissionBlock(ch, ch, zero.copy(), basis)
