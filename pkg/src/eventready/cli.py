"""Command-line front end.

Angles on the command line and in every output are degrees.  Results are
printed as ``key=value`` lines, preceded by a ``manifest.*`` block holding the
resolved parameters, so any run can be repeated from its own output.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 no violation
(or no Hardy settings) where one was asked for.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import math
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .core_model import (
    BeamSplitter,
    ExperimentConfig,
    Geometry,
    bell_pair_probability,
    fourfold_probability,
    fourfold_terms,
    partial_entanglement_probability,
    singles_probability_d1,
    singles_probability_d2,
)
from .event_sim import (
    GENERATOR,
    TrialConfig,
    postselected_probability,
    proper_probabilities,
    simulate_ch,
)
from .hardy import DEFAULT_EPS, hardy_check, hardy_search
from .inequalities import ch_loopholefree, ch_ratio
from .optimizer import SweepRow, minimize_threshold, sweep_surface
from .verify import verify_random_configs

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_NO_VIOLATION = 0, 1, 2, 3

CSV_HEADER = ["v", "rho", "R", "eta_min", "theta1_deg", "theta2_deg", "theta1p_deg", "theta2p_deg"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    """Canonical float text: 12 significant digits; ``None`` becomes empty."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def _emit(records: Iterable[tuple[str, object]], out=None):
    out = sys.stdout if out is None else out
    for key, value in records:
        print(f"{key}={fmt(value)}", file=out)


def _manifest(command: str, params: dict) -> list[tuple[str, object]]:
    rec = [
        ("manifest.subcommand", command),
        ("manifest.version", __version__),
        ("manifest.timestamp", _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")),
    ]
    rec += [(f"manifest.{k}", v) for k, v in sorted(params.items()) if v is not None and k not in ("func", "config")]
    return rec


def read_config_file(path: str) -> dict[str, str]:
    """``key = value`` lines; blank lines and ``#`` comments ignored; keys match flag names."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


# ---------------------------------------------------------------- helpers


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"missing required flag --{name.replace('_', '-')}")


def _rad(deg: Optional[float]) -> Optional[float]:
    return None if deg is None else math.radians(deg)


def _deg(rad: float) -> float:
    return math.degrees(rad)


def _experiment(args) -> ExperimentConfig:
    _require(args, "r", "theta1", "theta2")
    if not 0.0 <= args.r <= 1.0:
        raise UsageError("--r must lie in [0, 1]")
    geometry_flags = [args.z1, args.z2, args.L, args.dz]
    geometry = None
    if any(g is not None for g in geometry_flags):
        if args.v is not None or args.phi is not None:
            raise UsageError("--v/--phi cannot be combined with geometry flags (--z1 --z2 --L --dz)")
        for flag, value in zip(("z1", "z2", "L", "dz"), geometry_flags):
            if value is None:
                raise UsageError(f"missing required flag --{flag} for geometry input")
        try:
            geometry = Geometry(args.z1, args.z2, args.L, args.dz)
        except ValueError as exc:
            raise UsageError(f"--L/--dz: {exc}") from None
    if args.v is not None and not 0.0 <= args.v <= 1.0:
        raise UsageError("--v must lie in [0, 1]")
    if not 0.0 < args.eta <= 1.0:
        raise UsageError("--eta must lie in (0, 1]")
    return ExperimentConfig(
        BeamSplitter.from_reflectivity(args.r),
        theta1=_rad(args.theta1),
        theta2=_rad(args.theta2),
        theta1p=_rad(args.theta1p),
        theta2p=_rad(args.theta2p),
        eta=args.eta,
        geometry=geometry,
        v=None if geometry is not None else args.v,
        phi=None if geometry is not None else _rad(args.phi),
    )


# ---------------------------------------------------------------- commands


def cmd_probability(args) -> int:
    exp = _experiment(args)
    bs, kind = exp.bs, args.kind
    A, B = fourfold_terms(exp)
    if kind == "fourfold":
        value = fourfold_probability(exp)
    elif kind == "bellpair":
        value = bell_pair_probability(bs, exp.visibility, exp.theta1, exp.theta2, exp.eta)
    elif kind == "singles1":
        value = singles_probability_d1(bs, exp.theta1, exp.eta)
    elif kind == "singles2":
        value = singles_probability_d2(bs, exp.theta2, exp.eta)
    else:
        value = partial_entanglement_probability(bs, exp.theta1, exp.theta2)
    _emit(_manifest("probability", vars(args)))
    _emit(
        [
            ("kind", kind),
            ("value", float(value)),
            ("A", A),
            ("B", B),
            ("phi_deg", _deg(exp.phase)),
            ("v", exp.visibility),
            ("s", bs.s),
            ("rho", bs.rho),
            ("R", bs.R),
            ("eta", exp.eta),
        ]
    )
    return EXIT_OK


def cmd_threshold(args) -> int:
    _require(args, "v", "rho")
    if not 0.0 <= args.v <= 1.0:
        raise UsageError("--v must lie in [0, 1]")
    if not args.rho > 0:
        raise UsageError("--rho must be positive")
    result = minimize_threshold(args.v, args.rho, grid_points=args.grid_points, n_seeds=args.seeds)
    _emit(_manifest("threshold", vars(args)))
    if not result.converged:
        _emit([("result", "no violation"), ("converged", False), ("iterations", result.iterations)])
        return EXIT_NO_VIOLATION
    names = ("theta1_deg", "theta2_deg", "theta1p_deg", "theta2p_deg")
    _emit(
        [("eta_min", result.eta_min)]
        + [(n, _deg(a)) for n, a in zip(names, result.angles)]
        + [("converged", True), ("iterations", result.iterations)]
    )
    return EXIT_OK


def _linspace(lo, hi, steps, flag):
    if steps < 1:
        raise UsageError(f"--{flag}-steps must be at least 1")
    return [lo] if steps == 1 else list(np.linspace(lo, hi, steps))


def sweep_rows_to_csv(rows: Sequence[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            angles = row.angles if row.angles is not None else (None,) * 4
            writer.writerow(
                [fmt(row.v), fmt(row.rho), fmt(row.R), fmt(row.eta_min)]
                + [fmt(None if a is None else _deg(a)) for a in angles]
            )


def read_sweep_csv(path) -> list[SweepRow]:
    """Parse a sweep CSV back into rows (angles returned in radians)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header!r}")
        for rec in reader:
            v, rho, R, eta = (float(x) if x else None for x in rec[:4])
            angles = None if rec[4] == "" else tuple(math.radians(float(x)) for x in rec[4:8])
            rows.append(SweepRow(v=v, rho=rho, R=R, eta_min=eta, angles=angles))
    return rows


def cmd_sweep(args) -> int:
    _require(args, "out")
    v_grid = _linspace(args.v_min, args.v_max, args.v_steps, "v")
    rho_grid = _linspace(args.rho_min, args.rho_max, args.rho_steps, "rho")
    if any(not 0.0 <= v <= 1.0 for v in v_grid):
        raise UsageError("--v-min/--v-max must lie in [0, 1]")
    if any(not r > 0 for r in rho_grid):
        raise UsageError("--rho-min/--rho-max must be positive")
    rows = sweep_surface(v_grid, rho_grid, workers=args.workers, grid_points=args.grid_points, n_seeds=args.seeds)
    sweep_rows_to_csv(rows, args.out)
    manifest = _manifest("sweep", vars(args))
    with open(f"{args.out}.manifest", "w") as fh:
        _emit(manifest, fh)
    _emit(manifest)
    _emit([("rows", len(rows)), ("out", args.out)])
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    report = verify_random_configs(args.n, args.seed, b_scale=(1 + 1e-6) if args.perturb else 1.0)
    _emit(_manifest("verify", vars(args)))
    _emit(
        [
            ("n", report.n),
            ("max_abs_diff", report.max_abs_diff),
            ("tolerance", report.tolerance),
            ("result", "pass" if report.passed else "fail"),
        ]
    )
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_simulate(args) -> int:
    exp = _experiment(args)
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    theta1_alt = exp.theta1 + math.pi / 4 if args.theta1_alt is None else _rad(args.theta1_alt)
    theta2_alt = exp.theta2 + math.pi / 4 if args.theta2_alt is None else _rad(args.theta2_alt)
    config = TrialConfig(exp, args.n, args.seed, args.preselector_efficiency)
    tally = simulate_ch(config, theta1_alt, theta2_alt)
    probs = proper_probabilities(tally)

    params = dict(vars(args), generator=GENERATOR, theta1_alt=_deg(theta1_alt), theta2_alt=_deg(theta2_alt))
    records = _manifest("simulate", params)
    records += [
        ("v", exp.visibility),
        ("rho", exp.bs.rho),
        ("R", exp.bs.R),
        ("eta", exp.eta),
        ("seed", args.seed),
        ("n_trials", args.n),
    ]
    for label, t in tally.items():
        records += [(f"block{label}.{k}", val) for k, val in t.as_record().items()]
        for i, a in enumerate(("a", "a_perp")):
            for j, b in enumerate(("b", "b_perp")):
                if t.coincidences.sum() > 0:
                    records.append((f"block{label}.postselected.{a}.{b}", postselected_probability(t, (i, j))))
    records += [(f"proper.{k}", getattr(probs, k)) for k in ("p11", "p12", "p21", "p22", "s1", "s2", "pinf", "p1inf", "pinf2")]
    records.append(("ch.loopholefree", ch_loopholefree(probs)))
    records.append(("ch.ratio", ch_ratio(probs) if probs.pinf > 0 else None))
    _emit(records)
    if args.out:
        with open(args.out, "w") as fh:
            _emit(records, fh)
    return EXIT_OK


def cmd_hardy(args) -> int:
    _require(args, "r", "v")
    if not 0.0 < args.r < 1.0:
        raise UsageError("--r must lie in (0, 1)")
    if not 0.0 <= args.v <= 1.0:
        raise UsageError("--v must lie in [0, 1]")
    if not args.epsilon > 0:
        raise UsageError("--epsilon must be positive")
    settings = hardy_search(args.r, args.v, args.epsilon)
    _emit(_manifest("hardy", vars(args)))
    if settings is None:
        _emit([("result", "not found")])
        return EXIT_NO_VIOLATION
    report = hardy_check(settings, args.v)
    _emit(
        [
            ("result", "found"),
            ("theta1_deg", _deg(settings.theta1)),
            ("theta1p_deg", _deg(settings.theta1p)),
            ("theta2_deg", _deg(settings.theta2)),
            ("theta2p_deg", _deg(settings.theta2p)),
            ("ratio1", report.ratio1),
            ("ratio2", report.ratio2),
            ("residual1", report.residual1),
            ("residual2", report.residual2),
            ("p_positive", report.p_positive),
            ("p_zero", report.p_zero),
            ("margin", report.margin),
            ("violating", report.violating),
        ]
    )
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_experiment_flags(p):
    p.add_argument("--r", type=float, help="beam-splitter reflectivity R")
    p.add_argument("--v", type=float, help="visibility override (default 1)")
    p.add_argument("--phi", type=float, help="phase override, degrees (default 0)")
    p.add_argument("--z1", type=float, help="D1' transverse position")
    p.add_argument("--z2", type=float, help="D2' transverse position")
    p.add_argument("--L", type=float, help="fringe spacing")
    p.add_argument("--dz", type=float, help="detector opening width")
    p.add_argument("--theta1", type=float, help="P1 angle, degrees")
    p.add_argument("--theta2", type=float, help="P2 angle, degrees")
    p.add_argument("--theta1p", type=float, default=90.0, help="P1' angle, degrees (default 90)")
    p.add_argument("--theta2p", type=float, default=0.0, help="P2' angle, degrees (default 0)")
    p.add_argument("--eta", type=float, default=1.0, help="detection efficiency")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eventready", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="key = value file supplying defaults for any flag")
        p.set_defaults(func=func)
        return p

    p = add("probability", cmd_probability, "closed-form detection probabilities")
    _add_experiment_flags(p)
    p.add_argument("--kind", choices=("fourfold", "bellpair", "singles1", "singles2", "partial"), default="fourfold")

    p = add("threshold", cmd_threshold, "minimal detection efficiency over analyzer angles")
    p.add_argument("--v", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--grid-points", type=int, default=24)
    p.add_argument("--seeds", type=int, default=8)

    p = add("sweep", cmd_sweep, "efficiency threshold over a (v, rho) grid, as CSV")
    p.add_argument("--v-min", type=float, default=0.6)
    p.add_argument("--v-max", type=float, default=1.0)
    p.add_argument("--v-steps", type=int, default=9)
    p.add_argument("--rho-min", type=float, default=0.1)
    p.add_argument("--rho-max", type=float, default=1.0)
    p.add_argument("--rho-steps", type=int, default=10)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, help="parallel workers (default: EVENTREADY_THREADS or all CPUs)")
    p.add_argument("--grid-points", type=int, default=24)
    p.add_argument("--seeds", type=int, default=8)

    p = add("verify", cmd_verify, "closed form vs Fock-space oracle on random configurations")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb", action="store_true", help="corrupt B by 1e-6 (checks the checker)")

    p = add("simulate", cmd_simulate, "Monte Carlo tallies for the four CH setting pairs")
    _add_experiment_flags(p)
    p.add_argument("--theta1-alt", type=float, help="alternative P1 angle, degrees (default theta1 + 45)")
    p.add_argument("--theta2-alt", type=float, help="alternative P2 angle, degrees (default theta2 + 45)")
    p.add_argument("--n", type=int, default=100_000, help="emitted systems per setting pair")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preselector-efficiency", type=float, default=1.0)
    p.add_argument("--out")

    p = add("hardy", cmd_hardy, "search Hardy settings and report the conditions")
    p.add_argument("--r", type=float)
    p.add_argument("--v", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPS)
    return parser


def _apply_config(parser, args, argv):
    """Fill flags not given on the command line from ``--config``."""
    if not getattr(args, "config", None):
        return args
    try:
        values = read_config_file(args.config)
    except OSError as exc:
        raise UsageError(f"--config: {exc}") from None
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    given = {a.dest for a in sub._actions for opt in a.option_strings if any(x == opt or x.startswith(opt + "=") for x in argv)}
    for key, raw in values.items():
        if key not in known or key in ("config", "help"):
            raise UsageError(f"--config: unknown key {key!r}")
        if key in given:
            continue
        action = known[key]
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes")
        else:
            try:
                value = action.type(raw) if action.type else raw
            except ValueError:
                raise UsageError(f"--config: bad value for {key}: {raw!r}") from None
            if action.choices and value not in action.choices:
                raise UsageError(f"--config: {key} must be one of {sorted(action.choices)}")
        setattr(args, key, value)
    return args


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(parser, args, argv)
        return args.func(args)
    except UsageError as exc:
        print(f"eventready {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
