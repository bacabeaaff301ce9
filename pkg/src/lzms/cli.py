"""Command-line frontend.

Physical flags are dimensionless, matching the figure axes: --kappa is
kappa/Omega^2, --omega is omega/Omega, --gamma2 is Gamma2/Omega, --t0 is
Omega*t0 (and --t is Omega*t). Results go to --output or stdout; a short
human-readable summary goes to stderr.

Exit codes: 0 success, 1 failed validation, 2 bad arguments or I/O,
3 integration failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .csvio import emit_csv
from .dynamics import (
    IntegrationError,
    IntegratorConfig,
    basis_state,
    convergence_check,
    evolve,
    lz_two_state_reference,
    transfer_efficiency,
)
from .model import DecayParams, ModelParams, chi
from .spectrum import characteristic_coeffs, classify_crossing, eigenvalues_ideal, min_gap
from .sweep import FIGURE_IDS, Axis, SweepSpec, default_workers, figure_spec, run_sweep

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_INTEGRATION = 3


class UsageError(Exception):
    pass


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror or exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--config {path}:{lineno}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _axis(text: str) -> Axis:
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise argparse.ArgumentTypeError(f"axis must be name:min:max:n[:scale], got {text!r}")
    try:
        return Axis(parts[0], float(parts[1]), float(parts[2]), int(parts[3]),
                    parts[4] if len(parts) == 5 else "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _model_flags(p: argparse.ArgumentParser, kappa: float | None = 0.1) -> None:
    g = p.add_argument_group("model (units of Omega)")
    g.add_argument("--Omega", type=float, default=1.0, help="energy unit Omega (default 1)")
    g.add_argument("--kappa", type=float, default=kappa, help="kappa/Omega^2")
    g.add_argument("--omega", type=float, default=0.0, help="omega/Omega")
    g.add_argument("--phi", type=float, default=0.0, help="phase phi (rad)")
    g.add_argument("--varphi", type=float, default=0.0, help="phase varphi (rad)")
    g.add_argument("--t0", type=float, default=500.0, help="Omega*t0")


def _decay_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("decay (units of Omega)")
    for n in (1, 2, 3):
        g.add_argument(f"--gamma{n}", type=float, default=0.0, help=f"Gamma{n}/Omega")
    g.add_argument("--delta", type=float, default=0.0, help="Delta/Omega")
    g.add_argument("--omega-g", dest="omega_g", type=float, default=1.0, help="omega_g/Omega")


def _integrator_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("integrator")
    g.add_argument("--rtol", type=float, default=1e-10)
    g.add_argument("--atol", type=float, default=1e-12)
    g.add_argument("--max-step", dest="max_step", type=float, default=None)
    g.add_argument("--method", choices=("magnus4", "midpoint"), default="magnus4")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lzms", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"lzms {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key = value file; command-line flags take precedence")
        return p

    p = command("spectrum", "eigenvalues and crossing analysis of the ideal Hamiltonian")
    _model_flags(p, kappa=1.0)
    p.add_argument("--t", type=float, default=0.0, help="Omega*t")
    p.add_argument("--tol", type=float, default=1e-9, help="crossing classification tolerance")

    p = command("evolve", "trajectory of the populations")
    _model_flags(p)
    _decay_flags(p)
    _integrator_flags(p)
    p.add_argument("--from", dest="source", type=int, default=1, choices=(1, 2, 3))
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("-o", "--output", default="-")

    p = command("efficiency", "final population of a target state")
    _model_flags(p)
    _decay_flags(p)
    _integrator_flags(p)
    p.add_argument("--from", dest="source", type=int, default=1, choices=(1, 2, 3))
    p.add_argument("--to", dest="target", type=int, default=3, choices=(1, 2, 3))
    p.add_argument("--check", action="store_true", help="also estimate the error by tightening tolerances")

    p = command("sweep", "1D/2D parameter sweep to CSV")
    p.add_argument("--axis1", type=_axis, required=True, help="name:min:max:n[:scale]")
    p.add_argument("--axis2", type=_axis, default=None, help="name:min:max:n[:scale]")
    _model_flags(p)
    _decay_flags(p)
    _integrator_flags(p)
    p.add_argument("--from", dest="source", type=int, default=1, choices=(1, 2, 3))
    p.add_argument("--to", dest="target", type=int, default=3, choices=(1, 2, 3))
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--workers", type=int, default=None)

    p = command("figure", "reproduce one figure panel as CSV")
    p.add_argument("figure_id", choices=FIGURE_IDS, metavar="figure_id",
                   help=", ".join(FIGURE_IDS))
    p.add_argument("--n", type=int, default=None, help="2D grid points per axis (default 101)")
    p.add_argument("--n-gamma", dest="n_gamma", type=int, default=None,
                   help="points of the fig2 rate sweeps (default 201)")
    _integrator_flags(p)
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--workers", type=int, default=None)

    command("validate", "run the built-in property checks")
    return parser


def _parse(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known_args, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if not a.startswith("-")), None)
    if known_args.config and command in COMMANDS:
        _load_config(parser, command, known_args.config)
    return parser.parse_args(argv)


def _load_config(parser: argparse.ArgumentParser, command: str, path: str) -> None:
    values = parse_config_file(path)
    sub = parser._subparsers._group_actions[0].choices[command]  # noqa: SLF001
    known = {}
    for a in sub._actions:  # noqa: SLF001
        if not a.option_strings or a.dest in ("help", "config"):
            continue
        known[a.dest] = a
        for opt in a.option_strings:
            if opt.startswith("--"):
                known[opt[2:].replace("-", "_")] = a
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise UsageError(f"--config {path}: unknown key(s) for '{command}': " + ", ".join(unknown))
    defaults = {}
    for key, text in values.items():
        action = known[key]
        if action.nargs == 0:
            defaults[action.dest] = text.lower() in ("1", "true", "yes", "on")
            continue
        try:
            value = action.type(text) if action.type else text
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"--config {path}: bad value for {key}: {exc}") from exc
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"--config {path}: {key} must be one of {list(action.choices)}")
        defaults[action.dest] = value
        # a required option may be satisfied by the file
        action.required = False
    sub.set_defaults(**defaults)


def _model(args) -> ModelParams:
    Om = args.Omega
    return ModelParams(kappa=args.kappa * Om * Om, Omega=Om, omega=args.omega * Om,
                       phi=args.phi, varphi=args.varphi, t0=args.t0 / Om if Om > 0 else args.t0)


def _decay(args) -> DecayParams:
    Om = args.Omega
    return DecayParams(args.gamma1 * Om, args.gamma2 * Om, args.gamma3 * Om,
                       args.delta * Om, args.omega_g * Om)


def _integrator(args, samples: int = 2) -> IntegratorConfig:
    return IntegratorConfig(rel_tol=args.rtol, abs_tol=args.atol, max_step=args.max_step,
                            sample_count=samples, method=args.method)


def _open_output(path: str):
    if path == "-":
        return sys.stdout
    try:
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise UsageError(f"--output: cannot write {path}: {exc.strerror or exc}") from exc


def cmd_spectrum(args) -> int:
    p = _model(args)
    t = args.t / args.Omega if args.Omega > 0 else args.t
    lam = eigenvalues_ideal(p, t)
    print(" ".join(_fmt(x) for x in lam))
    c = characteristic_coeffs(p, t)
    _log(f"depressed cubic: p = {_fmt(c.p)}, q = {_fmt(c.q)}; chi = {_fmt(chi(p))}")
    if p.Omega > 0 or p.omega > 0:
        cls = classify_crossing(p, args.tol)
        gap, t_at = min_gap(p)
        _log(f"crossing class: {cls.tag.value}; min gap over [-t0, t0] = {gap:.6g} at t = {t_at:.6g}")
    return EXIT_OK


def cmd_evolve(args) -> int:
    p, d = _model(args), _decay(args)
    tr = evolve(p, None if d.is_zero else d, basis_state(args.source),
                _integrator(args, args.samples))
    fh = _open_output(args.output)
    try:
        fh.write(f"# lzms {__version__} evolve from={args.source}\n")
        fh.write("t,re_c1,im_c1,re_c2,im_c2,re_c3,im_c3,P1,P2,P3,norm\n")
        for t, c, P, nrm in zip(tr.times, tr.states, tr.populations, tr.norms):
            cols = [t, c[0].real, c[0].imag, c[1].real, c[1].imag, c[2].real, c[2].imag, *P, nrm]
            fh.write(",".join(_fmt(x) for x in cols) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    P = tr.final_populations
    _log(f"final populations P1={P[0]:.10f} P2={P[1]:.10f} P3={P[2]:.10f}; "
         f"{tr.accepted_steps} steps ({tr.rejected_steps} rejected)")
    return EXIT_OK


def cmd_efficiency(args) -> int:
    p, d = _model(args), _decay(args)
    d = None if d.is_zero else d
    cfg = _integrator(args)
    if args.check:
        value, err = convergence_check(p, d, cfg, args.source, args.target)
    else:
        value, err = transfer_efficiency(p, d, args.source, args.target, cfg), None
    print(_fmt(value))
    msg = f"P{args.target}(t0) from |{args.source}> = {value:.10f}"
    if err is not None:
        msg += f" (estimated error {err:.1e})"
    _log(msg)
    if {args.source, args.target} == {1, 3} and p.omega > 0:
        ref = lz_two_state_reference(p.omega, p.varphi, p.kappa, p.t0, cfg)
        _log(f"two-state Landau-Zener reference (|2> removed): {ref:.10f}")
    return EXIT_OK


def _progress(label: str):
    start = time.monotonic()
    last = [0.0]

    def report(done: int, total: int) -> None:
        now = time.monotonic()
        if now - last[0] > 5.0 or done == total:
            last[0] = now
            _log(f"{label}: {done}/{total} points, {now - start:.0f} s")

    return report


def _finish_sweep(result, output: str) -> int:
    try:
        emit_csv(result, output)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    eff = result.efficiency
    ok = ~result.failed
    if ok.any():
        _log(f"efficiency range [{np.nanmin(eff):.6f}, {np.nanmax(eff):.6f}] over {int(ok.sum())} points")
    if result.errors:
        for msg in list(result.errors.values())[:10]:
            _log(f"integration failure: {msg}")
        _log(f"{len(result.errors)} point(s) failed")
        return EXIT_INTEGRATION
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec(args.axis1, args.axis2, _model(args), _decay(args), args.source,
                     args.target, _integrator(args))
    result = run_sweep(spec, args.workers, _progress("sweep"))
    return _finish_sweep(result, args.output)


def cmd_figure(args) -> int:
    spec = figure_spec(args.figure_id, args.n, args.n_gamma, _integrator(args))
    workers = args.workers or default_workers()
    _log(f"{args.figure_id}: {spec.shape[0]}x{spec.shape[1]} grid on {workers} worker(s)")
    result = run_sweep(spec, workers, _progress(args.figure_id))
    return _finish_sweep(result, args.output)


def cmd_validate(args) -> int:
    from .validation import CHECKS

    failed = 0
    for check in CHECKS:
        res = check()
        failed += not res.passed
        print(f"{'PASS' if res.passed else 'FAIL'}  {res.name}: {res.detail}")
    _log(f"{len(CHECKS) - failed}/{len(CHECKS)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


COMMANDS = {
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "efficiency": cmd_efficiency,
    "sweep": cmd_sweep,
    "figure": cmd_figure,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        if getattr(args, "workers", None) is not None and args.workers < 1:
            raise UsageError("--workers must be >= 1")
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        _log(f"lzms: error: {exc}")
        return EXIT_USAGE
    except IntegrationError as exc:
        _log(f"lzms: integration failure: {exc}")
        return EXIT_INTEGRATION
    except ValueError as exc:
        _log(f"lzms: error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
