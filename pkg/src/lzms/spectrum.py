"""Closed-form spectrum and exact crossing analysis of the ideal Hamiltonian.

The characteristic polynomial of the ideal 3x3 Hamiltonian is a depressed
cubic  lambda^3 + p*lambda + q  with

    p = -(2 Omega^2 + omega^2 + kappa^2 t^2),   q = -2 Omega^2 omega cos(chi),

so its three (real) roots come straight from the trigonometric formula.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, chi

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DepressedCubic:
    """lambda^3 + p*lambda + q = 0."""

    p: float
    q: float

    def __call__(self, lam):
        return lam**3 + self.p * lam + self.q


class CrossingTag(enum.Enum):
    NO_CROSSING = "NoCrossing"
    TOP_ISOLATED = "TopIsolated"
    BOTTOM_ISOLATED = "BottomIsolated"


@dataclass(frozen=True)
class CrossingClass:
    tag: CrossingTag
    crossing_time: float | None = None


def characteristic_coeffs(p: ModelParams, t: float) -> DepressedCubic:
    return DepressedCubic(
        p=-(2.0 * p.Omega**2 + p.omega**2 + (p.kappa * t) ** 2),
        q=-2.0 * p.Omega**2 * p.omega * math.cos(chi(p)),
    )


def _polish(c: DepressedCubic, lam: float) -> float:
    # one guarded Newton step; near a double root the derivative vanishes
    f = c(lam)
    df = 3.0 * lam * lam + c.p
    if df == 0.0 or f == 0.0:
        return lam
    new = lam - f / df
    return new if abs(c(new)) < abs(f) else lam


def cubic_roots(c: DepressedCubic) -> tuple[float, float, float]:
    """Real roots of a depressed cubic with three real roots, descending."""
    if c.p >= 0.0:
        # only reachable for p == q == 0 on the physical domain
        return (0.0, 0.0, 0.0)
    m = 2.0 * math.sqrt(-c.p / 3.0)
    arg = (3.0 * c.q / (2.0 * c.p)) * math.sqrt(-3.0 / c.p)
    arg = min(1.0, max(-1.0, arg))
    theta = math.acos(arg) / 3.0
    roots = [_polish(c, m * math.cos(theta - 2.0 * math.pi * k / 3.0)) for k in range(3)]
    roots.sort(reverse=True)
    return roots[0], roots[1], roots[2]


def eigenvalues_ideal(p: ModelParams, t: float) -> tuple[float, float, float]:
    """Eigenvalues of the ideal Hamiltonian at time t, sorted descending."""
    return cubic_roots(characteristic_coeffs(p, t))


def crossing_rhs(p: ModelParams) -> float:
    """Right-hand side R of the double-root condition kappa^2 t^2 = R.

    R = -Omega^2 [x^3 - 3 (cos^2 chi)^(1/3) x + 2] with x = (omega^2/Omega^2)^(1/3),
    written without dividing by Omega so Omega = 0 is handled.
    """
    c = math.cos(chi(p)) ** 2
    return -(
        p.omega**2
        - 3.0 * c ** (1.0 / 3.0) * p.Omega ** (4.0 / 3.0) * p.omega ** (2.0 / 3.0)
        + 2.0 * p.Omega**2
    )


def classify_crossing(p: ModelParams, tol: float = 1e-9) -> CrossingClass:
    """Classify the level structure from (omega/Omega, chi).

    A degeneracy exists only at t = 0, for omega = Omega and chi a multiple
    of pi: the top level stays isolated for even multiples, the bottom one
    for odd multiples. ``tol`` is applied to |omega/Omega - 1| and to the
    distance of chi from the nearest multiple of pi.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if p.Omega == 0.0:
        if p.omega == 0.0:
            raise ValueError("fully uncoupled model (Omega = omega = 0) has a triple crossing")
        return CrossingClass(CrossingTag.NO_CROSSING)
    if abs(p.omega / p.Omega - 1.0) > tol:
        return CrossingClass(CrossingTag.NO_CROSSING)
    x = chi(p)
    if abs(x) <= tol:
        return CrossingClass(CrossingTag.TOP_ISOLATED, 0.0)
    if math.pi - abs(x) <= tol:
        return CrossingClass(CrossingTag.BOTTOM_ISOLATED, 0.0)
    return CrossingClass(CrossingTag.NO_CROSSING)


def _gap(p: ModelParams, t: float) -> float:
    l1, l2, l3 = eigenvalues_ideal(p, t)
    return min(l1 - l2, l2 - l3)


def min_gap(p: ModelParams, t_range: tuple[float, float] | None = None,
            n_samples: int = 401) -> tuple[float, float]:
    """Smallest level spacing min(l1 - l2, l2 - l3) over ``t_range``.

    Sampled on a uniform grid, then refined by 60 golden-section iterations
    inside the bracket around the best sample. Defaults to [-t0, t0].
    Returns (gap, t_at).
    """
    if n_samples < 3:
        raise ValueError("n_samples must be >= 3")
    a, b = t_range if t_range is not None else (-p.t0, p.t0)
    ts = np.linspace(a, b, n_samples)
    gaps = np.array([_gap(p, t) for t in ts])
    i = int(np.argmin(gaps))
    best_t, best = float(ts[i]), float(gaps[i])

    lo, hi = float(ts[max(i - 1, 0)]), float(ts[min(i + 1, n_samples - 1)])
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = _gap(p, x1), _gap(p, x2)
    for _ in range(60):
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = _gap(p, x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = _gap(p, x2)
    for t, g in ((x1, f1), (x2, f2)):
        if g < best:
            best, best_t = g, t
    return best, best_t
