"""Self-checks run by ``lzms validate``: spectrum residuals and eigensolver
agreement, the no-crossing witness, norm behaviour, gauge invariance,
Lindblad/non-Hermitian equivalence and tolerance convergence."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dynamics import (
    IntegratorConfig,
    basis_state,
    convergence_check,
    evolve,
    evolve_lindblad4,
)
from .model import DecayParams, ModelParams, build_ideal_hamiltonian
from .spectrum import characteristic_coeffs, eigenvalues_ideal, min_gap


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_model(rng: np.random.Generator, t0: float = 20.0) -> ModelParams:
    return ModelParams(
        kappa=rng.uniform(0.05, 3.0),
        Omega=rng.uniform(0.2, 2.0),
        omega=rng.uniform(0.0, 2.0),
        phi=rng.uniform(-math.pi, math.pi),
        varphi=rng.uniform(-math.pi, math.pi),
        t0=t0,
    )


def random_decay(rng: np.random.Generator) -> DecayParams:
    return DecayParams(
        gamma1=rng.uniform(0.0, 0.5),
        gamma2=rng.uniform(0.0, 0.5),
        gamma3=rng.uniform(0.0, 0.5),
        delta=rng.uniform(-0.5, 0.5),
        omega_g=rng.uniform(0.5, 5.0),
    )


def check_spectrum(n: int = 2000, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_res = worst_vieta = worst_eig = 0.0
    for _ in range(n):
        p = random_model(rng)
        t = rng.uniform(-10.0, 10.0)
        c = characteristic_coeffs(p, t)
        lam = np.array(eigenvalues_ideal(p, t))
        scale = max(1.0, np.abs(lam).max())
        worst_res = max(worst_res, np.abs(lam**3 + c.p * lam + c.q).max() / scale**3)
        l1, l2, l3 = lam
        worst_vieta = max(
            worst_vieta,
            abs(l1 + l2 + l3) / scale,
            abs(l1 * l2 + l1 * l3 + l2 * l3 - c.p) / scale**2,
            abs(l1 * l2 * l3 + c.q) / scale**3,
        )
        ref = np.linalg.eigvalsh(build_ideal_hamiltonian(p, t))[::-1]
        worst_eig = max(worst_eig, np.abs(lam - ref).max() / scale)
    ok = worst_res < 1e-9 and worst_vieta < 1e-9 and worst_eig < 1e-10
    return CheckResult(
        "spectrum residual / Vieta / eigensolver",
        ok,
        f"residual {worst_res:.2e}, Vieta {worst_vieta:.2e}, eigvalsh {worst_eig:.2e}",
    )


def check_no_crossing() -> CheckResult:
    worst = math.inf
    for r in (0.0, 0.3, 0.7, 1.3, 2.0):
        for x in (0.0, math.pi / 2, math.pi):
            p = ModelParams(kappa=1.0, omega=r, varphi=-x, t0=10.0)
            worst = min(worst, min_gap(p)[0])
    degenerate = max(
        min_gap(ModelParams(kappa=1.0, omega=1.0, varphi=v, t0=10.0))[0] for v in (0.0, math.pi)
    )
    ok = worst > 0 and degenerate < 1e-8
    return CheckResult("no-crossing witness", ok,
                       f"smallest gap (omega != Omega) {worst:.3e}, degenerate presets {degenerate:.1e}")


def check_norms(seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    p = random_model(rng)
    cfg = IntegratorConfig(sample_count=401)
    ideal = evolve(p, None, basis_state(1), cfg)
    drift = np.abs(ideal.norms - 1.0).max()
    lossy = evolve(p, random_decay(rng), basis_state(1), cfg)
    rise = max(0.0, np.diff(lossy.norms).max())
    ok = drift < 1e-9 and rise <= 1e-12
    return CheckResult("norm conservation / monotone decay", ok,
                       f"ideal drift {drift:.1e}, largest norm increase {rise:.1e}")


def check_gauge(n: int = 3, seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        p = random_model(rng)
        d = random_decay(rng)
        delta = rng.uniform(-math.pi, math.pi)
        q = ModelParams(p.kappa, p.Omega, p.omega, p.phi + delta, p.varphi + 2 * delta, p.t0)
        a = evolve(p, d, basis_state(1)).final_populations
        b = evolve(q, d, basis_state(1)).final_populations
        worst = max(worst, np.abs(a - b).max())
    return CheckResult("gauge invariance", worst < 1e-8, f"max population change {worst:.1e}")


def check_lindblad(n: int = 3, seed: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = trace = 0.0
    cfg = IntegratorConfig(sample_count=21)
    for _ in range(n):
        p = random_model(rng)
        d = random_decay(rng)
        rho = evolve_lindblad4(p, d, np.diag([1.0, 0, 0, 0]).astype(complex), cfg)
        psi = evolve(p, d, basis_state(1), cfg)
        outer = np.einsum("ki,kj->kij", psi.states, psi.states.conj())
        worst = max(worst, np.abs(rho.states[:, :3, :3] - outer).max())
        trace = max(trace, np.abs(rho.norms - 1.0).max())
    ok = worst < 1e-6 and trace < 1e-8
    return CheckResult("Lindblad / non-Hermitian equivalence", ok,
                       f"block difference {worst:.1e}, trace drift {trace:.1e}")


def check_convergence() -> CheckResult:
    _, e_ideal = convergence_check(ModelParams(kappa=0.5, omega=0.5, t0=100.0))
    _, e_stiff = convergence_check(ModelParams(kappa=1.0, omega=1.0, t0=50.0),
                                   DecayParams(gamma2=1e5))
    ok = e_ideal < 1e-6 and e_stiff < 1e-5
    return CheckResult("tolerance convergence", ok,
                       f"ideal {e_ideal:.1e}, Gamma2=1e5 {e_stiff:.1e}")


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_spectrum,
    check_no_crossing,
    check_norms,
    check_gauge,
    check_lindblad,
    check_convergence,
)


def run_all() -> list[CheckResult]:
    return [check() for check in CHECKS]
