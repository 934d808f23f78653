"""Command-line front end.

Subcommands: moments, abel, korovkin, rate, sequences.  Settings resolve in
the order defaults < config file (flat ``key = value``) < environment
(``MKZLAB_<KEY>``, e.g. ``MKZLAB_TAIL_TOL``) < command-line flags.

Exit codes: 0 pass, 1 assertion failed, 2 configuration error, 3 truncation
budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import approx_lab as lab
from . import summability as sm
from .functions import by_name, e0, e1, e2
from .operators import OperatorFamily, moment_report
from .qcalc import QDomainError, TruncationPolicy

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DEFICIT = 0, 1, 2, 3
SCHEMA = "mkzlab.rows/1"
ENV_PREFIX = "MKZLAB_"

FAMILY_ALIASES = {
    "classical-mkz": "classical-mkz",
    "mkz": "classical-mkz",
    "q-mkz": "q-mkz",
    "durrmeyer": "durrmeyer-q-mkz",
    "durrmeyer-q-mkz": "durrmeyer-q-mkz",
}

COLUMNS = {
    "moments": ["n", "q", "x", "m0", "m1", "m2", "e2_checked", "lower", "upper",
                "e0_err", "e1_err", "lower_violation", "upper_violation", "tail_bound", "slack"],
    "abel": ["kind", "seq", "target", "y", "value", "tail_bound", "terms", "deficit",
             "horizon", "count", "density", "max_power_gap", "max_inv_bracket", "verdict"],
    "korovkin": ["family", "seq", "f", "y", "error_norm", "tail_bound", "grid_step",
                 "horizon", "deficit", "verdict"],
    "rate": ["family", "seq", "f", "y", "lhs", "lhs_tail", "phi", "grid_step", "omega",
             "rhs", "margin", "slack", "omega_floor", "mu", "lhs_over_mu"],
    "sequences": ["n", "q_n", "inv_bracket", "durrmeyer_ratio"],
}


class ConfigError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part[1:]:
                a, b = part.split("-", 1)
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers like 3,5,10 or 3-10, got {text!r}")
    return out


def _family(text: str) -> str:
    try:
        return FAMILY_ALIASES[text]
    except KeyError:
        raise argparse.ArgumentTypeError(
            f"unknown family {text!r}; choose from {', '.join(FAMILY_ALIASES)}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--tail-tol", type=float, default=1e-12, help="series tail tolerance")
    g.add_argument("--max-terms", type=int, default=10**6, help="term budget per series")
    g.add_argument("--out", default="-", help="output file ('-' for stdout)")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--start-index", type=int, default=None,
                   help="first sequence index kept in Abel sums")
    g.add_argument("--config", default=None, help="flat key = value settings file")

    p = argparse.ArgumentParser(prog="mkzlab", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("moments", parents=[common], help="moment and envelope checks")
    m.add_argument("--family", type=_family, default="q-mkz")
    m.add_argument("--q", type=float, default=1.0)
    m.add_argument("--n", type=_int_list, default=[3, 5, 10])
    m.add_argument("--grid", type=int, default=11, help="number of x points on [0, x-max]")
    m.add_argument("--x-max", type=float, default=0.99)
    m.add_argument("--slack", type=float, default=1e-9)

    a = sub.add_parser("abel", parents=[common], help="Abel profiles of q-sequence quantities")
    a.add_argument("--seq", default="cube")
    a.add_argument("--target", choices=("inv-bracket", "durr-ratio", "qseq"), default="inv-bracket")
    a.add_argument("--ys", type=_float_list, default=None)
    a.add_argument("--check", choices=("none", "classical"), default="none")
    a.add_argument("--horizon", type=int, default=1000)
    a.add_argument("--density", type=int, default=0,
                   help="estimate the density of indices with q_n = 0 up to N")

    k = sub.add_parser("korovkin", parents=[common], help="Abel-weighted error norms")
    k.add_argument("--family", type=_family, default="q-mkz")
    k.add_argument("--seq", default=None)
    k.add_argument("--q", type=float, default=None)
    k.add_argument("--f", default="sinpi")
    k.add_argument("--ys", type=_float_list, default=[0.9, 0.99])
    k.add_argument("--grid", type=int, default=101)
    k.add_argument("--x-max", type=float, default=0.99)
    k.add_argument("--threshold", type=float, default=math.inf)

    r = sub.add_parser("rate", parents=[common], help="rate bound via the modulus of continuity")
    r.add_argument("--family", type=_family, default="durrmeyer-q-mkz")
    r.add_argument("--seq", default=None)
    r.add_argument("--q", type=float, default=None)
    r.add_argument("--f", default="abshalf")
    r.add_argument("--ys", type=_float_list, default=[0.5, 0.75, 0.9])
    r.add_argument("--mu", default=None, help="gauge mu(y) as an expression in y, e.g. '1-y'")
    r.add_argument("--grid", type=int, default=101)
    r.add_argument("--x-max", type=float, default=0.99)

    s = sub.add_parser("sequences", parents=[common], help="tabulate a q-sequence")
    s.add_argument("--seq", default="cube")
    s.add_argument("--n-max", type=int, default=30)
    return p


def _read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, value = (s.strip() for s in line.split("=", 1))
                out[key.replace("-", "_")] = value
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return out


def _apply_overrides(parser: argparse.ArgumentParser, argv: Sequence[str]):
    """Parse argv with config-file and environment values as defaults."""
    pre, _ = parser.parse_known_args(argv)
    subparser = parser._subparsers._group_actions[0].choices[pre.command]
    dests = {a.dest for a in subparser._actions}
    overrides = {}
    if pre.config:
        overrides.update(_read_config(pre.config))
    for key, value in os.environ.items():
        if key.startswith(ENV_PREFIX):
            overrides[key[len(ENV_PREFIX):].lower()] = value
    unknown = sorted(set(overrides) - dests - {"config"})
    if unknown:
        raise ConfigError(f"unknown setting(s) for {pre.command}: {', '.join(unknown)}")
    overrides.pop("config", None)
    subparser.set_defaults(**overrides)
    return parser.parse_args(argv)


def _policy(args) -> TruncationPolicy:
    return TruncationPolicy(args.tail_tol, args.max_terms, "flag")


def _qseq(args) -> sm.QSequence:
    if args.seq is not None and args.q is not None:
        raise ConfigError("give either --seq or --q, not both")
    if args.q is not None:
        return sm.constant_qseq(args.q)
    return sm.qseq_by_name(args.seq or "const:1")


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "" if v is None else str(v)


def emit(rows: list[dict], command: str, fmt: str, out: str):
    """Write rows as CSV (fixed column order) or JSON lines."""
    cols = COLUMNS[command]
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([_num(row.get(c)) for c in cols])
    else:
        for row in rows:
            obj = {"schema": SCHEMA, "command": command}
            for c in cols:
                v = row.get(c)
                if isinstance(v, (np.floating, np.integer, np.bool_)):
                    v = v.item()
                if isinstance(v, float) and not math.isfinite(v):
                    v = repr(v)
                obj[c] = v
            buf.write(json.dumps(obj) + "\n")
    text = buf.getvalue()
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _grid(args) -> np.ndarray:
    if args.grid < 1 or not 0.0 <= args.x_max <= 1.0:
        raise ConfigError("--grid must be >= 1 and --x-max in [0, 1]")
    return lab.default_x_grid(args.grid, args.x_max)


def cmd_moments(args):
    if any(n < 3 for n in args.n):
        raise ConfigError("moment envelopes need n >= 3")
    if args.family == "durrmeyer-q-mkz" and not 0.0 < args.q < 1.0:
        raise ConfigError("the Durrmeyer q-integral needs 0 < q < 1")
    if not 0.0 < args.q <= 1.0:
        raise ConfigError("q must lie in (0, 1]")
    family = OperatorFamily(args.family, sm.constant_qseq(args.q), _policy(args))
    xs = _grid(args)
    rows, failed, deficit = [], False, False
    for n in args.n:
        rep = moment_report(family, n, xs)
        deficit |= rep.deficit_flag
        failed |= not rep.ok(args.slack, args.slack)
        m0, m1, m2 = rep.moments
        checked = m2 - xs * xs if family.is_durrmeyer else m2
        for i, x in enumerate(xs):
            rows.append(dict(
                n=n, q=args.q, x=x, m0=m0[i], m1=m1[i], m2=m2[i], e2_checked=checked[i],
                lower=rep.lower[i], upper=rep.upper[i], e0_err=abs(m0[i] - 1.0),
                e1_err=abs(m1[i] - x), lower_violation=max(0.0, rep.lower[i] - checked[i]),
                upper_violation=max(0.0, checked[i] - rep.upper[i]),
                tail_bound=args.tail_tol, slack=args.slack))
    return rows, (EXIT_DEFICIT if deficit else EXIT_FAIL if failed else EXIT_OK)


def cmd_abel(args):
    qseq = sm.qseq_by_name(args.seq)
    ys = args.ys if args.ys is not None else sm.default_schedule()
    if args.target == "inv-bracket":
        rule, start, bound = sm.inv_bracket(qseq), 3, 1.0
    elif args.target == "durr-ratio":
        rule, start, bound = sm.durrmeyer_ratio(qseq), 2, 2.0
    else:
        rule, start, bound = qseq, 1, 1.0
    if args.start_index is not None:
        if args.start_index < start:
            raise ConfigError(f"--start-index must be >= {start} for {args.target}")
        start = args.start_index
    prof = sm.abel_profile(rule, ys, start, bound, _policy(args))
    rows = [dict(kind="abel", seq=qseq.name, target=args.target, y=y, value=v, tail_bound=t,
                 terms=nt, deficit=d)
            for y, v, t, nt, d in zip(prof.y_schedule, prof.values, prof.tail_bounds,
                                      prof.terms_used, prof.deficits)]
    if args.density:
        est = sm.density_estimate(lambda n: qseq(n) == 0.0, args.density)
        rows.append(dict(kind="density", seq=qseq.name, horizon=est.N, count=est.count,
                         density=est.density))
    if args.check == "classical":
        rep = sm.classical_conditions_check(qseq, args.horizon)
        rows.append(dict(kind="classical", seq=qseq.name, horizon=rep.horizon,
                         max_power_gap=rep.max_power_gap, max_inv_bracket=rep.max_inv_bracket,
                         verdict=rep.verdict))
    return rows, (EXIT_DEFICIT if any(prof.deficits) else EXIT_OK)


def cmd_korovkin(args):
    qseq = _qseq(args)
    family = OperatorFamily(args.family, qseq, _policy(args))
    f = by_name(args.f)
    funcs = [f] + [g for g in (e0, e1, e2) if g.name != f.name]
    start = 3 if args.start_index is None else args.start_index
    runs = lab.korovkin_runs(family, funcs, args.ys, _grid(args), start, family.policy)
    rows, deficit = [], False
    verdict_main = runs[f.name].verdict(args.threshold)
    for g in funcs:
        run = runs[g.name]
        ok = run.verdict(args.threshold)
        for y, v, t, h, d in zip(run.y_schedule, run.values, run.tail_bounds, run.horizons,
                                 run.deficits):
            deficit |= d
            rows.append(dict(family=family.kind, seq=qseq.name, f=g.name, y=y, error_norm=v,
                             tail_bound=t, grid_step=run.grid_step, horizon=h, deficit=d,
                             verdict="consistent" if ok else "inconsistent"))
    return rows, (EXIT_DEFICIT if deficit else EXIT_OK if verdict_main else EXIT_FAIL)


_MU_NAMES = {name: getattr(math, name) for name in
             ("sqrt", "log", "exp", "sin", "cos", "pi", "e", "log1p", "expm1")}


def _mu(expr: str | None):
    if expr is None:
        return None
    try:
        code = compile(expr, "<mu>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"bad --mu expression {expr!r}: {exc.msg}")
    for name in code.co_names:
        if name != "y" and name not in _MU_NAMES:
            raise ConfigError(f"--mu may only use y and {', '.join(_MU_NAMES)}; got {name!r}")
    return lambda y: float(eval(code, {"__builtins__": {}}, dict(_MU_NAMES, y=y)))


def cmd_rate(args):
    qseq = _qseq(args)
    if args.family == "durrmeyer-q-mkz" and args.seq is None and args.q is None:
        raise ConfigError("the Durrmeyer family needs --q or --seq")
    family = OperatorFamily(args.family, qseq, _policy(args))
    f = by_name(args.f)
    mu = _mu(args.mu)
    start = 3 if args.start_index is None else args.start_index
    xs = _grid(args)
    rep = lab.rate_report(family, f, args.ys, xs, family.policy, mu, start)
    rows = []
    for i, y in enumerate(rep.y_schedule):
        rows.append(dict(
            family=family.kind, seq=qseq.name, f=f.name, y=y, lhs=rep.lhs[i],
            lhs_tail=rep.tail_bounds[i], phi=rep.phi[i], grid_step=lab._grid_step(xs),
            omega=rep.omega_at_phi[i], rhs=rep.rhs[i], margin=rep.margin[i], slack=rep.slack[i],
            omega_floor=rep.omega_floor_used[i], mu=mu(y) if mu else None,
            lhs_over_mu=rep.mu_ratio[i] if rep.mu_ratio else None))
    return rows, (EXIT_OK if rep.ok() else EXIT_FAIL)


def cmd_sequences(args):
    qseq = sm.qseq_by_name(args.seq)
    ib, dr = sm.inv_bracket(qseq), sm.durrmeyer_ratio(qseq)
    rows = [dict(n=n, q_n=qseq(n), inv_bracket=ib(n) if n >= 3 else None,
                 durrmeyer_ratio=dr(n) if n >= 2 else None)
            for n in range(0, args.n_max + 1)]
    return rows, EXIT_OK


COMMANDS = {"moments": cmd_moments, "abel": cmd_abel, "korovkin": cmd_korovkin,
            "rate": cmd_rate, "sequences": cmd_sequences}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_overrides(parser, argv)
        rows, code = COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    except (ConfigError, QDomainError, KeyError, ValueError) as exc:
        print(f"mkzlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    emit(rows, args.command, args.format, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
