"""Dissipative three-state Landau-Zener model: spectra, propagation and sweeps."""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    IntegrationError,
    IntegratorConfig,
    Trajectory,
    basis_state,
    convergence_check,
    evolve,
    evolve_lindblad4,
    lz_two_state_reference,
    transfer_efficiency,
)
from .model import (  # noqa: E402
    DecayParams,
    ModelParams,
    build_effective_hamiltonian,
    build_four_level_hamiltonian,
    build_ideal_hamiltonian,
    chi,
)
from .spectrum import (  # noqa: E402
    CrossingClass,
    CrossingTag,
    DepressedCubic,
    characteristic_coeffs,
    classify_crossing,
    crossing_rhs,
    eigenvalues_ideal,
    min_gap,
)
from .sweep import Axis, SweepResult, SweepSpec, figure_spec, run_sweep  # noqa: E402
