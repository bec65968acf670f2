"""Command-line front end.

Subcommands: ``bound`` (one bound from summary statistics), ``simulate``
(coverage experiment), ``compare`` (tightness table) and ``verify`` (oracle
suite). Exit codes: 0 success, 1 internal error, 2 usage or precondition
error. ``verify`` also exits 1 when a check fails.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .individual import (
    DEFAULT_C,
    bernstein_adaptive,
    bernstein_fixed_lambda,
    hoeffding_azuma_radius,
    kl_drift_bound,
)
from .oracle import CHECKS, MAX_MGF_N, verification_report
from .pac_bayes import (
    HypothesisSummary,
    pb_bernstein_adaptive,
    pb_bernstein_fixed_lambda,
    pb_ha_adaptive,
    pb_ha_fixed_lambda,
    pb_kl_bound,
    pb_pinsker_bound,
)
from .simulation import (
    BOUND_IDS,
    GENERATOR_ID,
    REPORT_COLUMNS,
    TIGHTNESS_COLUMNS,
    ScenarioSpec,
    coverage_experiment,
    fmt_number,
    report_rows,
    rows_to_csv,
    tightness_table,
)

OUTPUT_DIR_ENV = "MARTINGALE_BOUNDS_OUTPUT_DIR"
DEFAULT_DELTA = 0.05
DEFAULT_SEED = 0
DEFAULT_TRIALS = 1000

BOUND_CHOICES = (
    "kl-drift",
    "hoeffding-azuma",
    "bernstein",
    "bernstein-fixed",
    "pb-kl",
    "pb-pinsker",
    "pb-ha",
    "pb-ha-fixed",
    "pb-bernstein",
    "pb-bernstein-fixed",
)
SCENARIOS = {"iid": "iid_bernoulli", "dependent": "dependent_bounded", "mds": "mds_bounded", "iw": "iw_sampling"}
DEFAULT_SWEEP = [(100, q) for q in (0.01, 0.05, 0.1, 0.125, 0.15, 0.25, 0.5)] + [
    (1000, q) for q in (0.01, 0.05, 0.125, 0.5)
]


class UsageError(ValueError):
    pass


# --- parsing helpers -------------------------------------------------------


def parse_floats(text) -> np.ndarray:
    """'0.7,0.3' -> array; 'vxk' repeats v k times; a path to a JSON list is read."""
    if isinstance(text, (list, tuple)):
        return np.asarray(text, dtype=float)
    if isinstance(text, (int, float)):
        return np.asarray([text], dtype=float)
    text = str(text).strip()
    if text.endswith(".json") or (os.path.sep in text and Path(text).is_file()):
        try:
            return np.asarray(json.loads(Path(text).read_text()), dtype=float)
        except OSError as exc:
            raise UsageError(f"cannot read {text}: {exc}") from exc
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        value, _, count = part.partition("x")
        try:
            out.extend([float(value)] * (int(count) if count else 1))
        except ValueError as exc:
            raise UsageError(f"cannot parse number list {text!r}") from exc
    return np.asarray(out, dtype=float)


def _need(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"--bound {args.bound} needs --{name.replace('_', '-')}")


def _ranges(args):
    if args.ranges is not None:
        pairs = []
        for part in filter(None, (p.strip() for p in args.ranges.split(","))):
            lo, _, hi = part.partition(":")
            pairs.append((float(lo), float(hi)))
        return np.asarray(pairs, dtype=float)
    _need(args, "widths")
    w = parse_floats(args.widths)
    if np.any(w < 0):
        raise ValueError("widths must be nonnegative")
    return np.stack([-w / 2.0, w / 2.0], axis=1)


def _weights(args, H: int | None):
    rho = parse_floats(args.rho) if args.rho is not None else None
    if args.pi is not None:
        pi = parse_floats(args.pi)
    else:
        # without per-hypothesis statistics the weights fix |H|
        H = H if H is not None else (rho.size if rho is not None else 1)
        pi = np.full(H, 1.0 / H)
    rho = rho if rho is not None else pi
    return rho, pi


def _summary(args) -> HypothesisSummary:
    _need(args, "n")
    S = parse_floats(args.s) if args.s is not None else None
    M = parse_floats(args.m) if args.m is not None else None
    V = parse_floats(args.v) if args.v is not None else None
    ranges = _ranges(args) if (args.widths is not None or args.ranges is not None) else None
    return HypothesisSummary(n=args.n, S=S, M=M, V=V, ranges=ranges, K=args.K)


def _scalar(values, name):
    values = parse_floats(values)
    if values.size != 1:
        raise UsageError(f"--{name} takes a single value for individual bounds")
    return float(values[0])


def compute_bound(args) -> dict:
    bound, delta, c = args.bound, args.delta, args.c
    if bound is None:
        raise UsageError("--bound is required")
    if bound == "kl-drift":
        _need(args, "n", "s")
        res = kl_drift_bound(_scalar(args.s, "s"), args.n, delta)
    elif bound == "hoeffding-azuma":
        res = hoeffding_azuma_radius(_ranges(args), delta)
    elif bound == "bernstein":
        _need(args, "n", "K")
        V = args.v_upper if args.v_upper is not None else (_scalar(args.v, "v") if args.v is not None else None)
        if V is None:
            raise UsageError("--bound bernstein needs --v or --v-upper")
        res = bernstein_adaptive(V, args.K, args.n, delta, c)
    elif bound == "bernstein-fixed":
        _need(args, "v", "lam")
        res = bernstein_fixed_lambda(_scalar(args.v, "v"), args.lam, delta, args.K if args.K is not None else 1.0)
    else:
        summary = _summary(args)
        rho, pi = _weights(args, summary.size)
        if bound == "pb-kl":
            res = pb_kl_bound(summary, rho, pi, delta)
        elif bound == "pb-pinsker":
            res = pb_pinsker_bound(summary, rho, pi, delta)
        elif bound == "pb-ha":
            res = pb_ha_adaptive(summary, rho, pi, delta, c)
        elif bound == "pb-ha-fixed":
            _need(args, "lam")
            res = pb_ha_fixed_lambda(summary, rho, pi, args.lam, delta)
        elif bound == "pb-bernstein-fixed":
            _need(args, "lam", "K")
            res = pb_bernstein_fixed_lambda(summary, rho, pi, args.lam, delta)
        else:
            _need(args, "K")
            res = pb_bernstein_adaptive(summary, rho, pi, delta, c, V_upper=args.v_upper)
    row = {"bound": bound}
    row.update(res.to_dict())
    row["c"] = c
    return row


def _spec(args) -> ScenarioSpec:
    kind = SCENARIOS[args.scenario]
    if kind == "iid_bernoulli":
        return ScenarioSpec.iid_bernoulli(args.b, args.n, args.seed)
    if kind == "dependent_bounded":
        return ScenarioSpec.dependent_bounded(args.b, args.strength, args.n, args.seed)
    if kind == "mds_bounded":
        return ScenarioSpec.mds_bounded(args.alpha, args.beta, args.n, args.shape, args.seed)
    if args.rewards is not None:
        rewards = parse_floats(args.rewards)
    else:
        rewards = np.round(np.linspace(0.1, 0.9, args.H), 12) if args.H > 1 else np.array([0.5])
    return ScenarioSpec.iw_sampling(rewards, args.pmin, args.n, args.adaptive, args.seed)


def _bound_list(args):
    if not args.bound:
        return None
    out = []
    for item in args.bound:
        out.extend(p.strip() for p in item.split(",") if p.strip())
    return tuple(out)


def parse_scenarios(text) -> list[dict]:
    """'n:S_n[:V_n];...' inline, a JSON file, or a list of dicts from a config."""
    if isinstance(text, list):
        return text
    text = text.strip()
    if not text:
        return []
    if text.endswith(".json"):
        return json.loads(Path(text).read_text())
    rows = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        fields = part.split(":")
        if len(fields) not in (2, 3):
            raise UsageError(f"scenario {part!r} must be n:S_n or n:S_n:V_n")
        row = {"n": int(fields[0]), "S_n": float(fields[1])}
        if len(fields) == 3:
            row["V_n"] = float(fields[2])
        rows.append(row)
    return rows


# --- output ----------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else fmt_number(x)
    return obj


def dump_json(payload) -> str:
    return json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n"


def _metadata(args, **extra) -> dict:
    meta = {"command": args.command, "version": __version__}
    for key in ("delta", "c", "seed", "trials"):
        if hasattr(args, key):
            meta[key] = getattr(args, key)
    meta.update(extra)
    return meta


def _columns(rows, first) -> list[str]:
    rest = sorted({k for row in rows for k in row} - set(first))
    return [c for c in first if any(c in row for row in rows)] + rest


def render(args, rows: list[dict], columns, meta: dict, extra: dict | None = None) -> str:
    if args.format == "csv":
        return rows_to_csv(rows, columns)
    payload = {"metadata": meta, "rows": rows}
    if extra:
        payload.update(extra)
    return dump_json(payload)


def emit(args, text: str) -> None:
    if args.output is None:
        sys.stdout.write(text)
        return
    path = Path(args.output)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# --- commands --------------------------------------------------------------

BOUND_FIRST = ("bound", "radius", "lower", "upper", "branch", "lambda_used", "grid_size", "kl_term", "delta", "c")


def cmd_bound(args) -> int:
    row = compute_bound(args)
    emit(args, render(args, [row], _columns([row], BOUND_FIRST), _metadata(args)))
    return 0


def cmd_simulate(args) -> int:
    if args.scenario is None:
        raise UsageError("simulate needs --scenario")
    spec = _spec(args)
    report = coverage_experiment(
        spec,
        _bound_list(args),
        delta=args.delta,
        trials=args.trials,
        master_seed=args.seed,
        c=args.c,
        gibbs_gamma=None if args.gamma <= 0 else args.gamma,
        variance_bound=args.variance_bound,
    )
    rows = report_rows(report)
    for row in rows:
        row.update(delta=args.delta, c=args.c, seed=args.seed, generator=GENERATOR_ID)
        row.pop("branch_counts", None)
    columns = list(REPORT_COLUMNS) + ["delta", "c", "seed", "generator"]
    meta = _metadata(args, generator=GENERATOR_ID, scenario=report.scenario, gibbs_gamma=args.gamma)
    extra = {"passed": report.passed, "crossover": report.crossover}
    emit(args, render(args, rows, columns, meta, extra))
    return 0


def cmd_compare(args) -> int:
    if args.scenarios is None:
        scenarios = [{"n": n, "S_n": n * q, "label": f"n={n} S_n/n={q:g}"} for n, q in DEFAULT_SWEEP]
    else:
        scenarios = parse_scenarios(args.scenarios)
    rows = tightness_table(scenarios, args.delta, args.c)
    for row in rows:
        row.update(delta=args.delta, c=args.c)
    columns = list(TIGHTNESS_COLUMNS) + ["delta", "c"]
    emit(args, render(args, rows, columns, _metadata(args)))
    return 0


def cmd_verify(args) -> int:
    checks = []
    for item in args.check or CHECKS:
        checks.extend(p.strip() for p in item.split(",") if p.strip())
    if not 1 <= args.n_max <= MAX_MGF_N:
        raise UsageError(f"--n-max must lie in [1, {MAX_MGF_N}]")
    report = verification_report(checks, args.n_max, args.mc_samples, args.seed)
    if args.format == "csv":
        rows = [{"check": name, "passed": entry["passed"]} for name, entry in report["checks"].items()]
        text = rows_to_csv(rows, ["check", "passed"])
    else:
        report["metadata"] = _metadata(args, generator=GENERATOR_ID)
        text = dump_json(report)
    emit(args, text)
    return 0 if report["passed"] else 1


# --- parser ----------------------------------------------------------------


def _probability(text: str) -> float:
    x = float(text)
    if not 0.0 < x < 1.0:
        raise argparse.ArgumentTypeError(f"delta must lie in the open interval (0, 1), got {text}")
    return x


def _ratio(text: str) -> float:
    x = float(text)
    if not x > 1.0:
        raise argparse.ArgumentTypeError(f"c must be > 1, got {text}")
    return x


def _positive_int(text: str) -> int:
    x = int(text)
    if x < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return x


def _seed(text: str) -> int:
    x = int(text)
    if not 0 <= x < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return x


def _common(p: argparse.ArgumentParser, delta: bool = True) -> None:
    p.add_argument("--config", help="JSON file whose keys match the long flag names; flags win")
    p.add_argument("--format", choices=("csv", "json"), default="json", help="output format (default: json)")
    p.add_argument(
        "--output",
        help=f"output file (default: stdout); relative paths go under ${OUTPUT_DIR_ENV} when it is set",
    )
    if delta:
        p.add_argument("--delta", type=_probability, default=DEFAULT_DELTA, help="confidence parameter (default: 0.05)")
        p.add_argument("--c", type=_ratio, default=DEFAULT_C, help="lambda-grid ratio (default: 1.1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="martingale-bounds", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="evaluate one bound from summary statistics")
    _common(p)
    p.add_argument("--bound", choices=BOUND_CHOICES, help="bound to evaluate (required, may come from --config)")
    p.add_argument("--n", type=_positive_int, help="number of rounds")
    p.add_argument("--s", help="S_n, or comma list of per-hypothesis sums")
    p.add_argument("--m", help="comma list of per-hypothesis martingale values M_n(h)")
    p.add_argument("--v", help="V_n, or comma list of per-hypothesis conditional variances")
    p.add_argument("--v-upper", type=float, help="upper bound on V_n (or <V_n, rho>); may be sample-dependent")
    p.add_argument("--K", type=float, help="almost-sure bound on |Z_i|")
    p.add_argument("--lam", type=float, help="fixed lambda")
    p.add_argument("--widths", help="per-round range widths, e.g. 1x100 or 0.5,1,1")
    p.add_argument("--ranges", help="per-round ranges alpha:beta, comma separated")
    p.add_argument("--rho", help="posterior weights inline (0.7,0.3) or a JSON file (default: pi)")
    p.add_argument("--pi", help="reference weights inline or a JSON file (default: uniform)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("simulate", help="run a coverage experiment")
    _common(p)
    p.add_argument("--scenario", choices=tuple(SCENARIOS))
    p.add_argument("--n", type=_positive_int, default=100, help="rounds per trial (default: 100)")
    p.add_argument("--b", type=float, default=0.5, help="drift for iid/dependent (default: 0.5)")
    p.add_argument("--strength", type=float, default=0.5, help="dependence strength in [0, 1] (default: 0.5)")
    p.add_argument("--alpha", type=float, default=-0.5, help="mds lower range (default: -0.5)")
    p.add_argument("--beta", type=float, default=0.5, help="mds upper range (default: 0.5)")
    p.add_argument("--shape", choices=("two_point", "adaptive"), default="two_point")
    p.add_argument("--H", type=_positive_int, default=5, help="number of hypotheses for iw (default: 5)")
    p.add_argument("--rewards", help="iw rewards (default: evenly spaced in [0.1, 0.9])")
    p.add_argument("--pmin", type=float, default=0.1, help="iw sampling floor (default: 0.1)")
    p.add_argument("--adaptive", action="store_true", help="iw greedy-with-floor policy")
    p.add_argument("--bound", action="append", help=f"bounds to test, repeatable; one of {', '.join(BOUND_IDS)}")
    p.add_argument("--trials", type=_positive_int, default=DEFAULT_TRIALS, help="default: 1000")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="64-bit master seed (default: 0)")
    p.add_argument("--gamma", type=float, default=5.0, help="Gibbs posterior inverse temperature; <= 0 disables")
    p.add_argument("--variance-bound", choices=("exact", "sample"), default="exact")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="tightness table for fixed S_n, n, V_n")
    _common(p)
    p.add_argument("--scenarios", help="'n:S_n[:V_n];...' or a JSON file; empty string gives an empty table")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="run the oracle verification suite")
    _common(p, delta=False)
    p.add_argument("--check", action="append", help=f"repeatable; one of {', '.join(CHECKS)} (default: all)")
    p.add_argument("--n-max", type=int, default=MAX_MGF_N, help="largest n for exact-mgf (default: 2000)")
    p.add_argument("--mc-samples", type=_positive_int, default=200_000, help="default: 200000")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_verify)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(config, dict):
        raise UsageError("config must be a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in subparser._actions}
    defaults = {}
    for key, value in config.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest not in known or dest in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        action = next(a for a in subparser._actions if a.dest == dest)
        if action.type is not None and isinstance(value, (int, float, str)) and not isinstance(value, bool):
            try:
                value = action.type(str(value))
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
        if isinstance(action, argparse._AppendAction) and isinstance(value, str):
            value = [value]
        if action.choices is not None:
            for item in value if isinstance(value, list) else [value]:
                if item not in action.choices:
                    raise UsageError(f"config key {key!r}: {item!r} is not one of {tuple(action.choices)}")
        defaults[dest] = value
    subparser.set_defaults(**defaults)
    args = parser.parse_args(argv)
    if args.command == "simulate" and isinstance(args.bound, list):
        args.bound = [str(x) for x in args.bound]
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
