"""Parameter types and Hamiltonians of the three-state avoided-crossing model.

Natural units throughout: hbar = 1 and, by convention, the 1-2 / 2-3
coupling Omega sets the energy scale. The bare basis is ordered
|1>, |2>, |3> (plus the ground state |4> for the four-level model).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Ideal-model parameters.

    kappa
        Sweep rate of the bare energies -kappa*t and +kappa*t.
    Omega
        Coupling between |1>-|2> and |2>-|3>.
    omega
        Direct |1>-|3> coupling.
    phi, varphi
        Phases of the Omega and omega couplings.
    t0
        Half-window; evolution runs over [-t0, t0].
    """

    kappa: float
    Omega: float = 1.0
    omega: float = 0.0
    phi: float = 0.0
    varphi: float = 0.0
    t0: float = 500.0

    def __post_init__(self):
        for name in ("kappa", "Omega", "omega", "phi", "varphi", "t0"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.Omega < 0:
            raise ValueError(f"Omega must be >= 0, got {self.Omega}")
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        if self.t0 <= 0:
            raise ValueError(f"t0 must be > 0, got {self.t0}")


@dataclass(frozen=True)
class DecayParams:
    """Decay rates Gamma_n (half the Lindblad rates), the |2> detuning and the
    ground-state offset omega_g (|4> sits at energy -omega_g)."""

    gamma1: float = 0.0
    gamma2: float = 0.0
    gamma3: float = 0.0
    delta: float = 0.0
    omega_g: float = 1.0

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma3", "delta", "omega_g"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        for name in ("gamma1", "gamma2", "gamma3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def gammas(self) -> np.ndarray:
        return np.array([self.gamma1, self.gamma2, self.gamma3])

    @property
    def is_zero(self) -> bool:
        return self.gamma1 == self.gamma2 == self.gamma3 == self.delta == 0.0


def chi(p: ModelParams) -> float:
    """Gauge-invariant phase 2*phi - varphi, reduced to (-pi, pi]."""
    x = math.remainder(2.0 * p.phi - p.varphi, 2.0 * math.pi)
    if x <= -math.pi:
        x += 2.0 * math.pi
    return x


def _couplings(p: ModelParams) -> np.ndarray:
    a = p.Omega * np.exp(1j * p.phi)
    b = p.omega * np.exp(1j * p.varphi)
    return np.array(
        [[0, a, b], [np.conj(a), 0, a], [np.conj(b), np.conj(a), 0]],
        dtype=complex,
    )


def sweep_diagonal(p: ModelParams, dim: int = 3) -> np.ndarray:
    """The time-proportional part B of H(t) = A + t*B."""
    d = np.zeros(dim, dtype=complex)
    d[0] = -p.kappa
    d[2] = p.kappa
    return np.diag(d)


def constant_part(p: ModelParams, d: DecayParams | None = None) -> np.ndarray:
    """The time-independent part A of the (possibly non-Hermitian) 3x3
    Hamiltonian H(t) = A + t*B."""
    A = _couplings(p)
    if d is not None:
        A[1, 1] += d.delta
        A -= 1j * np.diag(d.gammas)
    return A


def build_ideal_hamiltonian(p: ModelParams, t: float) -> np.ndarray:
    H = _couplings(p)
    H[0, 0] = -p.kappa * t
    H[2, 2] = p.kappa * t
    return H


def build_effective_hamiltonian(p: ModelParams, d: DecayParams, t: float) -> np.ndarray:
    """Ideal Hamiltonian plus diag(-i*Gamma1, Delta - i*Gamma2, -i*Gamma3)."""
    H = build_ideal_hamiltonian(p, t)
    H[0, 0] -= 1j * d.gamma1
    H[1, 1] += d.delta - 1j * d.gamma2
    H[2, 2] -= 1j * d.gamma3
    return H


def build_four_level_hamiltonian(p: ModelParams, d: DecayParams, t: float) -> np.ndarray:
    """Hermitian 4x4 Hamiltonian: the 3x3 block (with Delta on |2>) and a
    decoupled ground state |4> at energy -omega_g."""
    H = np.zeros((4, 4), dtype=complex)
    H[:3, :3] = build_ideal_hamiltonian(p, t)
    H[1, 1] += d.delta
    H[3, 3] = -d.omega_g
    return H


def is_hermitian(H: np.ndarray, atol: float = 0.0) -> bool:
    return bool(np.all(np.abs(H - H.conj().T) <= atol))
