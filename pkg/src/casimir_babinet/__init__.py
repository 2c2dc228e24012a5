"""Casimir energies of perforated mirrors and Babinet relations between complementary screens."""

__version__ = "0.1.0"

from .babinet import (
    EmBlockSet,
    babinet_residual,
    complement_em,
    complement_reflection_scalar,
    complement_transmission_scalar,
    scalar_babinet_residual,
)
from .dipole import (
    LatticeSpec,
    disc_polarizability,
    dipole_pair_energy,
    dipole_plate_energy,
    hole_corrected_plate_energy,
    lattice_energy,
    lateral_force,
)
from .energy import (
    ALPHA_AREA,
    PLATE_EM,
    PLATE_FIRST_EM,
    EnergyResult,
    QuadratureSpec,
    casimir_energy,
    energy_first_reflection,
    edge_scan,
    energy_full,
    fit_edge_coefficients,
    plate_energy,
)
from .errors import (
    BasisMismatchError,
    CasimirError,
    ConfigError,
    ConvergenceError,
    DomainError,
    InvariantViolation,
)
from .feasibility import skin_depth, thickness_window
from .grating import SolverParams, StripScreen, em_blocks_from_scalar, solve_reflection, solve_transmission
from .wavemodes import Channel, OrderBasis, ReflectionBlock, TransmissionBlock, translation_diagonal
