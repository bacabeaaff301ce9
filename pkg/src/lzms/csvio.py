"""CSV serialization of sweep results.

Layout: a ``#``-prefixed metadata block (tool version, axes, every base
parameter, integrator settings, failed points), then the header
``axis1,axis2,P1,P2,P3,leak`` (no axis2 column for 1D sweeps) and one row
per grid point, axis1 outer. Numbers carry 12 significant digits; failed
points are written as ``nan``.
"""

from __future__ import annotations

import contextlib
import dataclasses
import io
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .sweep import SweepResult


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def metadata_lines(result: SweepResult) -> list[str]:
    spec = result.spec
    lines = [f"lzms {__version__}"]
    if spec.label:
        lines.append(f"label = {spec.label}")
    lines.append(f"axis1 = {spec.axis1.describe()}")
    if spec.axis2 is not None:
        lines.append(f"axis2 = {spec.axis2.describe()}")
    for obj in (spec.model, spec.decay, spec.cfg):
        for f in dataclasses.fields(obj):
            lines.append(f"{f.name} = {getattr(obj, f.name)!r}")
    lines.append(f"from = {spec.source}")
    lines.append(f"to = {spec.target}")
    for (i, j), msg in sorted(result.errors.items()):
        lines.append(f"failed[{i},{j}] = {msg}")
    return lines


def _write(result: SweepResult, fh) -> None:
    for line in metadata_lines(result):
        fh.write(f"# {line}\n")
    two_d = result.axis2 is not None
    fh.write("axis1,axis2,P1,P2,P3,leak\n" if two_d else "axis1,P1,P2,P3,leak\n")
    for a, b, p1, p2, p3, leak in result.rows():
        cols = [a] + ([b] if two_d else []) + [p1, p2, p3, leak]
        fh.write(",".join(_fmt(c) for c in cols) + "\n")


def emit_csv(result: SweepResult, destination) -> None:
    """Write ``result`` to a path, an open text stream, or ``-`` (stdout)."""
    if destination == "-" or destination is None:
        _write(result, sys.stdout)
        return
    if isinstance(destination, io.TextIOBase) or hasattr(destination, "write"):
        _write(result, destination)
        return
    path = Path(destination)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            _write(result, fh)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc


@dataclass
class CsvTable:
    meta: dict[str, str]
    axis1: np.ndarray
    axis2: np.ndarray | None
    populations: np.ndarray  # (n1, n2, 3)
    leak: np.ndarray  # (n1, n2)


def read_csv(source) -> CsvTable:
    """Parse a file written by :func:`emit_csv` back into grid form."""
    with contextlib.ExitStack() as stack:
        if hasattr(source, "read"):
            fh = source
        else:
            fh = stack.enter_context(open(source, encoding="utf-8"))
        text = fh.read()
    meta: dict[str, str] = {}
    rows = []
    header = None
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" = ")
            if value:
                meta[key] = value
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append([float(x) for x in line.split(",")])
    if header is None:
        raise ValueError("no header line found")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    two_d = header[1] == "axis2"
    a1 = list(dict.fromkeys(data[:, 0]))
    a2 = list(dict.fromkeys(data[:, 1])) if two_d else None
    n1, n2 = len(a1), (len(a2) if two_d else 1)
    off = 2 if two_d else 1
    pops = data[:, off:off + 3].reshape(n1, n2, 3)
    leak = data[:, off + 3].reshape(n1, n2)
    return CsvTable(meta, np.array(a1), None if a2 is None else np.array(a2), pops, leak)
