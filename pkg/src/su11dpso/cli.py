"""Command-line front end: single points, sweeps, figure data and oracle validation.

Exit codes: 0 success, 2 invalid arguments, 3 validation threshold breached,
4 degenerate parameter point.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from typing import Sequence

from .optimizer import OBJECTIVES, NoFeasiblePointError, optimize_dpso_t
from .params import MODES, DegenerateStateError, InterferometerParams
from .qfi import DegenerateLimitsError
from .sweep import (FIGURES, QUANTITIES, SWEEP_VARS, SweepSpec, columns_for, evaluate_row,
                    figure_spec, run_sweep, write_rows)
from .validate import VALIDATE_COLUMNS, ValidationGrid, breached, run_validate

log = logging.getLogger("su11dpso")

EXIT_OK, EXIT_USAGE, EXIT_BREACH, EXIT_DEGENERATE = 0, 2, 3, 4

PARAM_FLAGS = {"m": int, "alpha": float, "g": float, "T": float, "eta": float, "phi": float,
               "s": float, "t": float}


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


# Config keys accepted besides the physical parameters.
OPTION_TYPES = {
    **PARAM_FLAGS, "mode": str, "v": int, "format": str, "jobs": int, "pin_t": float,
    "var": str, "lo": float, "hi": float, "n": int, "quantity": str, "modes": _str_list, "ms": _int_list,
    "points": int, "objective": str, "ts": _float_list, "gs": _float_list, "alphas": _float_list,
    "Ts": _float_list, "out": str,
}


class UsageError(Exception):
    pass


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever ``sys.stderr`` is at emit time."""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, _value):
        pass


def _setup_logging(quiet: bool) -> None:
    if not any(isinstance(h, _StderrHandler) for h in log.handlers):
        handler = _StderrHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
        log.addHandler(handler)
        log.propagate = False
    log.setLevel(logging.WARNING if quiet else logging.INFO)


def _common(parser: argparse.ArgumentParser, params: bool = True) -> None:
    if params:
        g = parser.add_argument_group("parameters")
        g.add_argument("--m", type=int, help="subtraction order (default 1)")
        g.add_argument("--alpha", type=float, help="coherent amplitude (default 1)")
        g.add_argument("--g", type=float, help="OPA gain (default 1)")
        g.add_argument("--T", type=float, help="internal transmissivity (default 1)")
        g.add_argument("--eta", type=float, help="mode-a transmissivity for lossy QFI (default 1)")
        g.add_argument("--phi", type=float, help="phase shift (default 1)")
        g.add_argument("--s", type=float, help="weight on mode a; t = 1 - s")
        g.add_argument("--t", type=float, help="weight on mode b; s = 1 - t")
        g.add_argument("--mode", choices=sorted(MODES),
                       help="named subtraction; dpso optimizes t (default: use --s/--t as given)")
    parser.add_argument("--v", type=int, help="number of measurements for the QCRB (default 1)")
    parser.add_argument("--pin-t", dest="pin_t", type=float, help="fix the D-PSO weight instead of optimizing")
    parser.add_argument("--out", help="output file (default stdout)")
    parser.add_argument("--format", choices=("csv", "jsonl"), help="output format (default csv)")
    parser.add_argument("--jobs", type=int, help="worker processes (default 1)")
    parser.add_argument("--config", help="key=value file; command-line flags win")
    parser.add_argument("--quiet", action="store_true", help="suppress the parameter log on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="su11dpso",
        description="Phase sensitivity and Fisher information of an SU(1,1) interferometer "
                    "with delocalized photon subtraction.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (("sensitivity", "intensity-detection phase sensitivity at one point"),
                       ("qfi", "ideal quantum Fisher information"),
                       ("qfi-lossy", "Fisher information with loss eta on mode a"),
                       ("limits", "sensitivity with QCRB, SQL and HL")):
        _common(sub.add_parser(name, help=text))

    p = sub.add_parser("sweep", help="sweep one variable over a grid")
    _common(p)
    p.add_argument("--var", choices=SWEEP_VARS, help="swept variable")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--n", type=int, help="number of points (>= 2)")
    p.add_argument("--quantity", choices=QUANTITIES, help="default sensitivity")
    p.add_argument("--modes", type=_str_list, help="comma list (default standard,mode_a,mode_b,dpso)")
    p.add_argument("--ms", type=_int_list, help="comma list of orders (default 1,2,3)")

    p = sub.add_parser("figure", help="data behind a published figure")
    p.add_argument("name", choices=sorted(FIGURES, key=lambda k: int(k[3:])))
    p.add_argument("--points", type=int, help="override the number of sweep points")
    _common(p, params=False)

    p = sub.add_parser("validate", help="compare closed forms with the Fock oracle")
    p.add_argument("--ms", type=_int_list, help="default 0,1,2,3")
    p.add_argument("--ts", type=_float_list, help="default 0,0.5,1")
    p.add_argument("--gs", type=_float_list, help="default 0.5,1")
    p.add_argument("--alphas", type=_float_list, help="default 0.5,1,2")
    p.add_argument("--Ts", type=_float_list, help="default 0.7,1")
    p.add_argument("--phi", type=float, help="default 1")
    p.add_argument("--eta", type=float, help="default 0.7")
    p.add_argument("--printed-variance", dest="printed", action="store_true",
                   help="use the misprinted n_a variance in the lossy Fisher information")
    _common(p, params=False)

    p = sub.add_parser("optimize-t", help="optimal D-PSO weight t")
    _common(p)
    p.add_argument("--objective", choices=OBJECTIVES, help="default sensitivity")
    return parser


def _read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (x.strip() for x in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _apply_config(args: argparse.Namespace) -> None:
    if not args.config:
        return
    for key, text in _read_config(args.config).items():
        if key not in OPTION_TYPES or not hasattr(args, key):
            raise UsageError(f"config key {key!r} is not valid for '{args.command}'")
        if getattr(args, key) is None:
            try:
                setattr(args, key, OPTION_TYPES[key](text))
            except ValueError as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None


def _explicit_params(args) -> dict:
    return {k: getattr(args, k) for k in PARAM_FLAGS if getattr(args, k, None) is not None}


def _params(args) -> InterferometerParams:
    kw = _explicit_params(args)
    if "s" in kw and "t" not in kw:
        kw["t"] = 1.0 - kw["s"]
    elif "t" in kw and "s" not in kw:
        kw["s"] = 1.0 - kw["t"]
    return InterferometerParams(**kw)


@contextlib.contextmanager
def _output(args):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            yield fh
    else:
        yield sys.stdout


def _emit(args, rows, columns) -> int:
    with _output(args) as fh:
        return write_rows(rows, columns, fh, args.format or "csv")


def _single(args, quantity: str) -> int:
    params = _params(args)
    log.info("parameters: %s mode=%s", params.as_dict(), args.mode)
    row = evaluate_row(params, args.mode, quantity, args.v or 1, args.pin_t)
    row["point"] = 0
    _emit(args, [row], columns_for(quantity))
    if row["status"] == "degenerate":
        log.error("degenerate parameter point: photon subtraction leaves no state")
        return EXIT_DEGENERATE
    return EXIT_OK


def _sweep(args, spec: SweepSpec) -> int:
    log.info("sweep %s in [%r, %r] x %d, quantity=%s, modes=%s, m=%s, base=%s, pin_t=%s",
             spec.variable, spec.lo, spec.hi, spec.n, spec.quantity, spec.modes, spec.ms,
             spec.base.as_dict(), spec.pin_t)
    _emit(args, run_sweep(spec, args.jobs or 1), columns_for(spec.quantity))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    missing = [k for k in ("var", "lo", "hi", "n") if getattr(args, k) is None]
    if missing:
        raise UsageError(f"sweep needs --{', --'.join(missing)}")
    fixed = _explicit_params(args)
    if args.var == "t" and "s" in fixed:
        raise UsageError("t is both swept and fixed (via --s)")
    cleared = {args.var: None, "s": None} if args.var == "t" else {args.var: None}
    base = _params(argparse.Namespace(**{**vars(args), **cleared}))
    spec = SweepSpec(args.var, args.lo, args.hi, args.n, base,
                     args.modes or ("standard", "mode_a", "mode_b", "dpso"), args.ms or (1, 2, 3),
                     args.quantity or "sensitivity", args.v or 1, args.pin_t, frozenset(fixed))
    return _sweep(args, spec)


def _cmd_figure(args) -> int:
    return _sweep(args, figure_spec(args.name, args.points, args.pin_t, args.v or 1))


def _cmd_validate(args) -> int:
    defaults = ValidationGrid()
    grid = ValidationGrid(
        ms=args.ms or defaults.ms, ts=args.ts or defaults.ts, gs=args.gs or defaults.gs,
        alphas=args.alphas or defaults.alphas, Ts=args.Ts or defaults.Ts,
        phi=defaults.phi if args.phi is None else args.phi,
        eta=defaults.eta if args.eta is None else args.eta,
    )
    log.info("validation grid: %s printed_variance=%s", grid, args.printed)
    bad = 0

    def rows():
        nonlocal bad
        for row in run_validate(grid, args.printed, args.jobs or 1):
            if breached(row):
                bad += 1
                log.warning("point %d: %s", row["point"], row["status"])
            yield row

    total = _emit(args, rows(), VALIDATE_COLUMNS)
    log.info("%d of %d points within thresholds", total - bad, total)
    return EXIT_BREACH if bad else EXIT_OK


def _cmd_optimize_t(args) -> int:
    params = _params(args)
    objective = args.objective or "sensitivity"
    log.info("parameters: %s objective=%s", params.as_dict(), objective)
    res = optimize_dpso_t(params, objective)
    row = {**params.replace(s=1.0 - res.argmin, t=res.argmin).as_dict(), "objective": objective,
           "value": res.value, "evaluations": res.evaluations, "degenerate": res.degenerate}
    cols = ["m", "g", "alpha", "s", "t", "T", "phi", "eta", "objective", "value", "evaluations", "degenerate"]
    _emit(args, [row], cols)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.quiet)
    try:
        _apply_config(args)
        if getattr(args, "jobs", None) is not None and args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        if getattr(args, "v", None) is not None and args.v < 1:
            raise UsageError("--v must be at least 1")
        handlers = {"sensitivity": lambda a: _single(a, "sensitivity"), "qfi": lambda a: _single(a, "qfi"),
                    "qfi-lossy": lambda a: _single(a, "qfi_lossy"), "limits": lambda a: _single(a, "limits"),
                    "sweep": _cmd_sweep, "figure": _cmd_figure, "validate": _cmd_validate,
                    "optimize-t": _cmd_optimize_t}
        return handlers[args.command](args)
    except (DegenerateStateError, DegenerateLimitsError, NoFeasiblePointError) as exc:
        log.error("degenerate parameter point: %s", exc)
        return EXIT_DEGENERATE
    except (UsageError, ValueError, OSError) as exc:
        parser.print_usage(sys.stderr)
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
