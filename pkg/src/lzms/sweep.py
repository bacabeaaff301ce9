"""Deterministic 1D/2D parameter sweeps of the final populations, plus
presets for every panel of the five figures.

All axis coordinates are dimensionless in units of the base Omega: omega/Omega,
kappa/Omega^2, log10(Gamma/Omega), phases in radians.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import multiprocessing as mp
from typing import Callable

import numpy as np

from .dynamics import IntegrationError, IntegratorConfig, final_populations
from .model import DecayParams, ModelParams

GAMMA_AXES = ("log10_Gamma1", "log10_Gamma2", "log10_Gamma3")
AXIS_NAMES = (
    "omega_over_Omega",
    "kappa_over_Omega2",
    *GAMMA_AXES,
    "phi",
    "varphi",
    # a rate swept on the channel picked by a companion decay_channel axis
    "log10_Gamma",
    "decay_channel",
)
_LOG_AXES = GAMMA_AXES + ("log10_Gamma",)


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    n: int
    scale: str = ""

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"unknown axis {self.name!r}; valid: {', '.join(AXIS_NAMES)}")
        if not self.scale:
            object.__setattr__(self, "scale", "log10" if self.name in _LOG_AXES else "linear")
        if self.scale not in ("linear", "log10"):
            raise ValueError(f"axis scale must be linear or log10, got {self.scale!r}")
        if self.scale == "log10" and self.name not in _LOG_AXES:
            raise ValueError(f"log10 scale is only valid for decay-rate axes, not {self.name}")
        if self.n < 1:
            raise ValueError(f"axis {self.name}: n must be >= 1")
        if self.n > 1 and not self.min < self.max:
            raise ValueError(f"axis {self.name}: need min < max when n > 1")
        if self.name == "decay_channel":
            vals = self.values()
            if np.any(vals != np.round(vals)) or vals.min() < 1 or vals.max() > 3:
                raise ValueError("decay_channel axis must take integer values in 1..3")

    def values(self) -> np.ndarray:
        if self.n == 1:
            return np.array([float(self.min)])
        return np.linspace(self.min, self.max, self.n)

    def describe(self) -> str:
        return f"{self.name} min={self.min!r} max={self.max!r} n={self.n} scale={self.scale}"


@dataclass(frozen=True)
class SweepSpec:
    axis1: Axis
    axis2: Axis | None = None
    model: ModelParams = field(default_factory=lambda: ModelParams(kappa=0.1))
    decay: DecayParams = field(default_factory=DecayParams)
    source: int = 1
    target: int = 3
    cfg: IntegratorConfig = field(default_factory=IntegratorConfig)
    label: str = ""

    def __post_init__(self):
        names = [self.axis1.name] + ([self.axis2.name] if self.axis2 else [])
        if len(set(names)) != len(names):
            raise ValueError("axis names must be distinct")
        if ("log10_Gamma" in names) != ("decay_channel" in names):
            raise ValueError("log10_Gamma and decay_channel axes must be used together")
        for n in (self.source, self.target):
            if n not in (1, 2, 3):
                raise ValueError(f"state index must be in 1..3, got {n}")
        # every corner of the grid must be a valid parameter point
        for v1 in (self.axis1.values()[0], self.axis1.values()[-1]):
            for v2 in self.axis2.values()[[0, -1]] if self.axis2 else (None,):
                point_params(self, v1, v2)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.axis1.n, self.axis2.n if self.axis2 else 1)


def point_params(spec: SweepSpec, v1: float, v2: float | None) -> tuple[ModelParams, DecayParams]:
    """Base parameters overridden by the axis coordinates (v1, v2)."""
    m = {}
    dec = {}
    Om = spec.model.Omega
    pairs = [(spec.axis1, v1)] + ([(spec.axis2, v2)] if spec.axis2 else [])
    channel = None
    shared_rate = None
    for ax, v in pairs:
        rate = Om * (10.0 ** v if ax.scale == "log10" else v)
        if ax.name == "omega_over_Omega":
            m["omega"] = v * Om
        elif ax.name == "kappa_over_Omega2":
            m["kappa"] = v * Om * Om
        elif ax.name in ("phi", "varphi"):
            m[ax.name] = v
        elif ax.name in GAMMA_AXES:
            dec["gamma" + ax.name[-1]] = rate
        elif ax.name == "log10_Gamma":
            shared_rate = rate
        elif ax.name == "decay_channel":
            channel = int(round(v))
    if channel is not None:
        dec["gamma" + str(channel)] = shared_rate
    return replace(spec.model, **m), replace(spec.decay, **dec)


@dataclass
class SweepResult:
    """Final populations on the sweep grid, axis1 outer and axis2 inner.

    Failed points carry NaN populations and an entry in ``errors``.
    """

    spec: SweepSpec
    axis1: np.ndarray
    axis2: np.ndarray | None
    populations: np.ndarray  # (n1, n2, 3)
    failed: np.ndarray  # (n1, n2) bool
    errors: dict = field(default_factory=dict)

    @property
    def leak(self) -> np.ndarray:
        return 1.0 - self.populations.sum(axis=-1)

    @property
    def efficiency(self) -> np.ndarray:
        return self.populations[..., self.spec.target - 1]

    def rows(self):
        """(axis1, axis2 | None, P1, P2, P3, leak) in grid order."""
        leak = self.leak
        for i, a in enumerate(self.axis1):
            for j in range(self.populations.shape[1]):
                b = None if self.axis2 is None else self.axis2[j]
                P = self.populations[i, j]
                yield (a, b, P[0], P[1], P[2], leak[i, j])


def _run_rows(spec: SweepSpec, rows: list[int]):
    a1 = spec.axis1.values()
    a2 = spec.axis2.values() if spec.axis2 else [None]
    out = []
    for i in rows:
        pops = np.full((len(a2), 3), np.nan)
        errs = {}
        for j, v2 in enumerate(a2):
            mp_, dp = point_params(spec, a1[i], v2)
            try:
                pops[j] = final_populations(mp_, dp, spec.source, spec.cfg)
            except IntegrationError as exc:
                errs[(i, j)] = f"axis1={a1[i]!r} axis2={v2!r}: {exc}"
        out.append((i, pops, errs))
    return out


def default_workers() -> int:
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, workers: int | None = None,
              progress: Callable[[int, int], None] | None = None) -> SweepResult:
    """Evaluate every grid point.

    Each grid row is one task; results land in preallocated slots indexed by
    row, so the output does not depend on scheduling or worker count.
    Integration failures are flagged per point rather than raised.
    """
    n1, n2 = spec.shape
    workers = max(1, min(workers or default_workers(), n1))
    pops = np.full((n1, n2, 3), np.nan)
    failed = np.zeros((n1, n2), dtype=bool)
    errors = {}
    done = 0

    def store(chunk):
        nonlocal done
        for i, row, errs in chunk:
            pops[i] = row
            for key, msg in errs.items():
                failed[key] = True
                errors[key] = msg
            done += n2
            if progress:
                progress(done, n1 * n2)

    if workers == 1:
        for i in range(n1):
            store(_run_rows(spec, [i]))
    else:
        with ProcessPoolExecutor(workers, mp_context=mp.get_context("spawn")) as pool:
            for chunk in pool.map(_run_rows, [spec] * n1, [[i] for i in range(n1)]):
                store(chunk)

    return SweepResult(
        spec=spec,
        axis1=spec.axis1.values(),
        axis2=spec.axis2.values() if spec.axis2 else None,
        populations=pops,
        failed=failed,
        errors=errors,
    )


# --- figure presets ------------------------------------------------------------

_PHASES = {"a": 0.0, "b": math.pi / 2, "c": math.pi}
FIGURE_IDS = tuple(f"fig{k}{s}" for k in range(1, 6) for s in "abc")


def figure_spec(fig_id: str, n: int | None = None, n_gamma: int | None = None,
                cfg: IntegratorConfig | None = None) -> SweepSpec:
    """Sweep reproducing one figure panel.

    ``n`` overrides the 2D grid resolution (default 101 per axis) and
    ``n_gamma`` the 1D decay-rate sweeps of fig2 (default 201 points).
    In fig2 the three curves of a panel are the three values of the
    decay_channel axis.
    """
    if fig_id not in FIGURE_IDS:
        raise ValueError(f"unknown figure id {fig_id!r}; valid ids: {', '.join(FIGURE_IDS)}")
    n = n or 101
    n_gamma = n_gamma or 201
    cfg = cfg or IntegratorConfig()
    fig, panel = int(fig_id[3]), fig_id[4]
    omega_axis = Axis("omega_over_Omega", 0.0, 2.0, n)
    gamma2_axis = Axis("log10_Gamma2", -5.0, 5.0, n)

    if fig == 1:
        model = ModelParams(kappa=0.05, phi=0.0, varphi=_PHASES[panel], t0=500.0)
        return SweepSpec(omega_axis, Axis("kappa_over_Omega2", 0.05, 5.0, n), model,
                         DecayParams(), cfg=cfg, label=fig_id)
    if fig == 2:
        omega, kappa, t0 = {"a": (0.0, 0.1, 500.0), "b": (1.0, 0.1, 500.0),
                            "c": (1.0, 1.0, 50.0)}[panel]
        model = ModelParams(kappa=kappa, omega=omega, t0=t0)
        return SweepSpec(Axis("log10_Gamma", -5.0, 5.0, n_gamma),
                         Axis("decay_channel", 1, 3, 3), model, DecayParams(),
                         cfg=cfg, label=fig_id)
    if fig == 3:
        model = ModelParams(kappa=0.05, omega={"a": 0.0, "b": 0.5, "c": 1.0}[panel], t0=500.0)
        return SweepSpec(gamma2_axis, Axis("kappa_over_Omega2", 0.05, 1.0, n), model,
                         DecayParams(), cfg=cfg, label=fig_id)
    kappa, t0 = (0.1, 500.0) if fig == 4 else (1.0, 50.0)
    model = ModelParams(kappa=kappa, phi=0.0, varphi=_PHASES[panel], t0=t0)
    return SweepSpec(gamma2_axis, omega_axis, model, DecayParams(), cfg=cfg, label=fig_id)
