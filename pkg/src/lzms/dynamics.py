"""Time propagation: Schroedinger (Hermitian and non-Hermitian) dynamics of
the three-state model, the zero-temperature four-level Lindblad equation,
and the two-state Landau-Zener reference.

Every generator here is linear in time, M(t) = M0 + t*M1, which the
compiled propagator in ``_kernels`` exploits: each step is a single matrix
exponential of the fourth-order Magnus generator

    h*M(t_mid) + h^3/12 [M1, M(t_mid)]

(or of h*M(t_mid) alone for the second-order exponential midpoint rule),
with adaptive step size from step doubling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .model import (
    DecayParams,
    ModelParams,
    build_four_level_hamiltonian,
    constant_part,
    sweep_diagonal,
)

METHODS = {"midpoint": 2, "magnus4": 4}


class IntegrationError(RuntimeError):
    """Propagation could not be completed (step-size underflow or overflow)."""

    def __init__(self, message: str, t: float, step: float):
        super().__init__(message)
        self.t = t
        self.step = step


@dataclass(frozen=True)
class IntegratorConfig:
    """Step control for the exponential propagator.

    ``max_step`` and ``init_step`` default to span/100 and a fraction of
    the inverse Hamiltonian norm; ``max_step`` is always capped at span/100.
    With ``adaptive=False`` the propagator takes uniform steps of at most
    ``max_step``. ``sample_count`` samples are recorded on a uniform grid
    over [-t0, t0] (endpoints included).
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float | None = None
    init_step: float | None = None
    sample_count: int = 2
    method: str = "magnus4"
    adaptive: bool = True

    def __post_init__(self):
        if not 0.0 < self.rel_tol <= 1e-6:
            raise ValueError(f"rel_tol must be in (0, 1e-6], got {self.rel_tol}")
        if not self.abs_tol > 0.0:
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol}")
        if self.max_step is not None and not self.max_step > 0.0:
            raise ValueError(f"max_step must be > 0, got {self.max_step}")
        if self.init_step is not None and not self.init_step > 0.0:
            raise ValueError(f"init_step must be > 0, got {self.init_step}")
        if self.sample_count < 2:
            raise ValueError(f"sample_count must be >= 2, got {self.sample_count}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {sorted(METHODS)}, got {self.method!r}")
        if not self.adaptive and self.max_step is None:
            raise ValueError("fixed-step mode needs max_step")

    def tightened(self, factor: float = 10.0) -> IntegratorConfig:
        return replace(self, rel_tol=self.rel_tol / factor, abs_tol=self.abs_tol / factor)


@dataclass(frozen=True)
class Trajectory:
    """Samples of a propagation.

    ``states`` has shape (n, 3) for state vectors or (n, 4, 4) for density
    matrices; ``norms`` holds the vector 2-norm or the density-matrix trace.
    """

    times: np.ndarray
    states: np.ndarray
    populations: np.ndarray
    norms: np.ndarray
    accepted_steps: int
    rejected_steps: int

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_populations(self) -> np.ndarray:
        return self.populations[-1]


def basis_state(n: int, dim: int = 3) -> np.ndarray:
    """Bare basis state |n> (1-based)."""
    if not 1 <= n <= dim:
        raise ValueError(f"state index must be in 1..{dim}, got {n}")
    psi = np.zeros(dim, dtype=complex)
    psi[n - 1] = 1.0
    return psi


def _propagate(M0, M1, y0, t0, cfg, herm_dim=0):
    span = 2.0 * t0
    h_max = span / 100.0
    if cfg.max_step is not None:
        h_max = min(h_max, cfg.max_step)
    if cfg.init_step is not None:
        h_init = min(cfg.init_step, h_max)
    else:
        scale = max(np.abs(M0 - t0 * M1).sum(axis=0).max(), np.abs(M0).sum(axis=0).max(), 1e-300)
        h_init = min(h_max, 0.1 / scale)
    t_out = np.linspace(-t0, t0, cfg.sample_count)
    states = np.empty((cfg.sample_count, y0.shape[0]), dtype=complex)
    status, t, h, accepted, rejected = _kernels.propagate_linear(
        np.ascontiguousarray(M0, dtype=complex),
        np.ascontiguousarray(M1, dtype=complex),
        np.ascontiguousarray(y0, dtype=complex),
        t_out,
        float(cfg.rel_tol),
        float(cfg.abs_tol),
        float(h_init),
        float(h_max),
        1e-14 * t0,
        METHODS[cfg.method],
        bool(cfg.adaptive),
        int(herm_dim),
        states,
    )
    if status == _kernels.STATUS_STEP_UNDERFLOW:
        raise IntegrationError(
            f"step size underflow at t={t:.12g}: step {h:.3e} below {1e-14 * t0:.3e}", t, h
        )
    if status == _kernels.STATUS_NONFINITE:
        raise IntegrationError(f"non-finite state at t={t:.12g} (step {h:.3e})", t, h)
    return t_out, states, accepted, rejected


def evolve(p: ModelParams, d: DecayParams | None, initial,
           cfg: IntegratorConfig | None = None) -> Trajectory:
    """Solve i dpsi/dt = H(t) psi over [-t0, t0].

    H is the ideal Hamiltonian when ``d`` is None, the non-Hermitian
    effective one otherwise. ``initial`` must be normalized.
    """
    cfg = cfg or IntegratorConfig()
    psi0 = np.asarray(initial, dtype=complex).reshape(-1)
    if psi0.shape != (3,):
        raise ValueError(f"initial state must have 3 amplitudes, got shape {psi0.shape}")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise ValueError("initial state must be normalized")
    M0 = -1j * constant_part(p, d)
    M1 = -1j * sweep_diagonal(p)
    times, states, acc, rej = _propagate(M0, M1, psi0, p.t0, cfg)
    pops = np.abs(states) ** 2
    return Trajectory(times, states, pops, np.sqrt(pops.sum(axis=1)), acc, rej)


def transfer_efficiency(p: ModelParams, d: DecayParams | None = None, source: int = 1,
                        target: int = 3, cfg: IntegratorConfig | None = None) -> float:
    """Final population of bare state ``target`` after starting in ``source``."""
    basis_state(target)
    tr = evolve(p, d, basis_state(source), cfg)
    return float(tr.final_populations[target - 1])


def final_populations(p: ModelParams, d: DecayParams | None = None, source: int = 1,
                      cfg: IntegratorConfig | None = None) -> np.ndarray:
    return evolve(p, d, basis_state(source), cfg).final_populations


def convergence_check(p: ModelParams, d: DecayParams | None = None,
                      cfg: IntegratorConfig | None = None, source: int = 1,
                      target: int = 3) -> tuple[float, float]:
    """Re-run with both tolerances divided by 10; return the tighter value and
    the absolute change as an error estimate."""
    cfg = cfg or IntegratorConfig()
    loose = transfer_efficiency(p, d, source, target, cfg)
    tight = transfer_efficiency(p, d, source, target, cfg.tightened(10.0))
    return tight, abs(tight - loose)


def lz_two_state_reference(omega: float, varphi: float, kappa: float, t0: float,
                           cfg: IntegratorConfig | None = None) -> float:
    """Final upper-state population of [[-kappa t, omega e^{i varphi}], [c.c., kappa t]]
    started in the lower-index state at -t0."""
    if kappa <= 0 or t0 <= 0 or omega < 0:
        raise ValueError("need kappa > 0, t0 > 0, omega >= 0")
    cfg = cfg or IntegratorConfig()
    c = omega * np.exp(1j * varphi)
    M0 = -1j * np.array([[0, c], [np.conj(c), 0]], dtype=complex)
    M1 = -1j * np.diag([-kappa, kappa]).astype(complex)
    _, states, _, _ = _propagate(M0, M1, np.array([1, 0], dtype=complex), t0, cfg)
    return float(abs(states[-1, 1]) ** 2)


def landau_zener_asymptotic(omega: float, kappa: float) -> float:
    """Adiabatic transfer probability 1 - exp(-pi omega^2 / kappa) of the
    infinite-time two-state sweep with diabatic energies -/+ kappa t."""
    return 1.0 - math.exp(-math.pi * omega**2 / kappa)


# --- four-level Lindblad equation -------------------------------------------------


def jump_operators(d: DecayParams) -> list[np.ndarray]:
    """L_n = sqrt(2 Gamma_n) |4><n| for n = 1..3."""
    ops = []
    for n, g in enumerate(d.gammas):
        L = np.zeros((4, 4), dtype=complex)
        L[3, n] = math.sqrt(2.0 * g)
        ops.append(L)
    return ops


def liouvillian(H: np.ndarray, jumps: list[np.ndarray]) -> np.ndarray:
    """Superoperator acting on row-major vec(rho)."""
    n = H.shape[0]
    eye = np.eye(n)
    out = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for L in jumps:
        LdL = L.conj().T @ L
        out += np.kron(L, L.conj()) - 0.5 * (np.kron(LdL, eye) + np.kron(eye, LdL.T))
    return out


def _check_density_matrix(rho: np.ndarray):
    if rho.shape != (4, 4):
        raise ValueError(f"density matrix must be 4x4, got {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=1e-12):
        raise ValueError("density matrix must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ValueError("density matrix must have unit trace")
    if np.linalg.eigvalsh(rho).min() < -1e-9:
        raise ValueError("density matrix must be positive semidefinite")


def evolve_lindblad4(p: ModelParams, d: DecayParams, rho0,
                     cfg: IntegratorConfig | None = None) -> Trajectory:
    """Zero-temperature master equation on the four-level system,

        drho/dt = -i[H4(t), rho] + sum_n (L_n rho L_n^+ - 1/2 {L_n^+ L_n, rho}),

    propagated as a vectorized 16x16 linear system. Hermiticity is restored
    after every step.
    """
    cfg = cfg or IntegratorConfig()
    rho0 = np.asarray(rho0, dtype=complex)
    _check_density_matrix(rho0)
    H0 = build_four_level_hamiltonian(p, d, 0.0)
    B = sweep_diagonal(p, dim=4)
    L0 = liouvillian(H0, jump_operators(d))
    L1 = liouvillian(B, [])
    times, states, acc, rej = _propagate(L0, L1, rho0.reshape(-1), p.t0, cfg, herm_dim=4)
    rhos = states.reshape(-1, 4, 4)
    pops = np.real(np.einsum("kii->ki", rhos))
    return Trajectory(times, rhos, pops, pops.sum(axis=1), acc, rej)
