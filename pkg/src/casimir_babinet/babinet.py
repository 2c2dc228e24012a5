"""Amplitude-level Babinet transforms between a screen and its complement.

Scalar fields: a Dirichlet screen and the Neumann complement satisfy

    R^D - R~^N = -I,    T^D + T~^N = -I,

and symmetrically with D and N exchanged (``R^N - R~^D = +I``).

Electromagnetic fields exchange the two polarizations::

    [ R^MM - R~^EE    R^ME + R~^EM ]         [ -1  0 ]
    [ R^EM + R~^ME    R^EE - R~^MM ]  =  I   [  0  1 ]

    [ T^MM + T~^EE    T^ME - T~^EM ]         [ -1  0 ]
    [ T^EM - T~^ME    T^EE + T~^MM ]  =  I   [  0 -1 ]

All functions are pure and work for any block layout whose identity is the
Kronecker identity of the order basis.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import BasisMismatchError, DomainError
from .wavemodes import (
    Channel,
    OrderBasis,
    ReflectionBlock,
    TransmissionBlock,
    check_same_basis,
    offset_phase,
)


@dataclass(frozen=True)
class EmBlockSet:
    """The eight polarization blocks of one screen on one order basis.

    ``R_EM`` is the M -> E reflection (outgoing polarization first).
    """

    R_EE: ReflectionBlock
    R_EM: ReflectionBlock
    R_ME: ReflectionBlock
    R_MM: ReflectionBlock
    T_EE: TransmissionBlock
    T_EM: TransmissionBlock
    T_ME: TransmissionBlock
    T_MM: TransmissionBlock

    def __post_init__(self):
        check_same_basis(*(getattr(self, f.name).basis for f in fields(self)))

    @property
    def basis(self) -> OrderBasis:
        return self.R_EE.basis

    @classmethod
    def from_matrices(cls, basis: OrderBasis, **mats) -> "EmBlockSet":
        """Build a block set from bare matrices; missing blocks are zero."""
        zero = np.zeros((basis.dim, basis.dim))
        blocks = {}
        for f in fields(cls):
            kind = ReflectionBlock if f.name[0] == "R" else TransmissionBlock
            out, inn = Channel(f.name[2]), Channel(f.name[3])
            blocks[f.name] = kind(inn, out, mats.get(f.name, zero), basis)
        return cls(**blocks)

    def matrices(self) -> dict:
        return {f.name: getattr(self, f.name).matrix for f in fields(self)}


def mirror_block_set(basis: OrderBasis) -> EmBlockSet:
    """Perfect conducting plane: ``R^MM = -I``, ``R^EE = +I``, ``T = -I``."""
    eye = np.eye(basis.dim)
    return EmBlockSet.from_matrices(basis, R_EE=eye, R_MM=-eye, T_EE=-eye, T_MM=-eye)


def null_block_set(basis: OrderBasis) -> EmBlockSet:
    return EmBlockSet.from_matrices(basis)


def _scalar_bc(block: ReflectionBlock, bc) -> Channel:
    ch = Channel.parse(bc) if bc is not None else block.channel_in
    if not ch.is_scalar:
        raise DomainError(f"scalar Babinet transform needs D or N, got {ch}")
    return ch


def complement_reflection_scalar(R: ReflectionBlock, bc=None) -> ReflectionBlock:
    """Reflection block of the complementary screen with the dual condition.

    ``R~^N = R^D + I`` for a Dirichlet input, ``R~^D = R^N - I`` for Neumann.
    """
    ch = _scalar_bc(R, bc)
    eye = np.eye(R.basis.dim)
    mat = R.matrix + eye if ch is Channel.DIRICHLET else R.matrix - eye
    dual = ch.dual()
    return ReflectionBlock(dual, dual, mat, R.basis)


def complement_transmission_scalar(T: TransmissionBlock, bc=None) -> TransmissionBlock:
    """``T~ = -I - T`` with the boundary condition flipped."""
    ch = _scalar_bc(T, bc)
    dual = ch.dual()
    return TransmissionBlock(dual, dual, -np.eye(T.basis.dim) - T.matrix, T.basis)


def complement_em(blocks: EmBlockSet) -> EmBlockSet:
    """Blocks of the complementary screen, E and M roles exchanged."""
    m = blocks.matrices()
    eye = np.eye(blocks.basis.dim)
    return EmBlockSet.from_matrices(
        blocks.basis,
        R_EE=m["R_MM"] + eye,
        R_MM=m["R_EE"] - eye,
        R_EM=-m["R_ME"],
        R_ME=-m["R_EM"],
        T_EE=-eye - m["T_MM"],
        T_MM=-eye - m["T_EE"],
        T_EM=m["T_ME"].copy(),
        T_ME=m["T_EM"].copy(),
    )


def _maxabs(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def babinet_residual(sigma: EmBlockSet, sigma_c: EmBlockSet) -> float:
    """Largest entry of any EM Babinet constraint matrix; 0 for an exact pair."""
    if not sigma.basis.same_as(sigma_c.basis):
        raise BasisMismatchError("block sets live on different order bases")
    a, b = sigma.matrices(), sigma_c.matrices()
    eye = np.eye(sigma.basis.dim)
    constraints = (
        a["R_MM"] - b["R_EE"] + eye,
        a["R_ME"] + b["R_EM"],
        a["R_EM"] + b["R_ME"],
        a["R_EE"] - b["R_MM"] - eye,
        a["T_MM"] + b["T_EE"] + eye,
        a["T_ME"] - b["T_EM"],
        a["T_EM"] - b["T_ME"],
        a["T_EE"] + b["T_MM"] + eye,
    )
    return max(_maxabs(c) for c in constraints)


def scalar_babinet_residual(R, T, R_c, T_c) -> float:
    """Residual of the scalar relations for ``(R, T)`` on a screen and ``(R_c, T_c)``
    with the dual condition on its complement.  ``T`` / ``T_c`` may be None."""
    check_same_basis(R.basis, R_c.basis)
    if not R.channel_in.is_scalar or R_c.channel_in is not R.channel_in.dual():
        raise DomainError(
            f"need a D/N pair, got {R.channel_in.value} and {R_c.channel_in.value}"
        )
    eye = np.eye(R.basis.dim)
    sign = 1.0 if R.channel_in is Channel.DIRICHLET else -1.0
    res = _maxabs(R.matrix - R_c.matrix + sign * eye)
    if T is not None and T_c is not None:
        res = max(res, _maxabs(T.matrix + T_c.matrix + eye))
    return res


def conjugate_blocks(blocks: EmBlockSet, phases) -> EmBlockSet:
    """Apply ``diag(phases) @ X @ diag(phases)^*`` to every block.

    This is how the translation relating a self-complementary screen to
    its complement is supplied; the module never guesses it.
    """
    ph = np.asarray(phases)
    out = {}
    for name, mat in blocks.matrices().items():
        new = ph[:, None] * mat * ph.conj()[None, :]
        if np.isrealobj(mat) and np.allclose(new.imag, 0.0, atol=1e-13):
            new = new.real
        out[name] = new
    return EmBlockSet.from_matrices(blocks.basis, **out)


def shift_blocks(blocks: EmBlockSet, shift: float) -> EmBlockSet:
    """Blocks of the same screen translated by ``shift`` along x."""
    return conjugate_blocks(blocks, offset_phase(blocks.basis, shift))
