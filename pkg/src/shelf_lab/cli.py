"""``shelf-lab`` command line.

Exit codes: 0 success, 2 usage error, 3 oracle budget refusal, 4 finding
under ``audit --strict``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import oracle, theory
from .montecarlo import ExperimentConfig, SCHEMA_VERSION, histogram_csv, iter_words, run_experiment
from .shuffle import ShuffleSpec, parse_rational, word_to_permutation

EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_STRICT = 4


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonnegative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def load_bias(path: str, m: int) -> tuple[Fraction, ...]:
    """Read a JSON array of ``"p/q"`` strings, one per pile."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read bias file {path}: {exc}") from None
    if not isinstance(raw, list):
        raise UsageError(f"bias file {path}: expected a JSON array of \"p/q\" strings")
    if len(raw) != 2 * m:
        raise UsageError(f"bias file {path}: has {len(raw)} entries, expected 2m = {2 * m}")
    probs = []
    for k, entry in enumerate(raw, start=1):
        if not isinstance(entry, str):
            raise UsageError(f"bias file {path}: entry {k} ({entry!r}) is not a \"p/q\" string")
        try:
            q = parse_rational(entry)
        except (TypeError, ValueError, ZeroDivisionError):
            raise UsageError(f"bias file {path}: entry {k} ({entry!r}) is not a rational") from None
        if q < 0:
            raise UsageError(f"bias file {path}: entry {k} ({entry!r}) is negative")
        probs.append(q)
    if sum(probs) != 1:
        raise UsageError(f"bias file {path}: entries sum to {sum(probs)}, not 1")
    return tuple(probs)


def _spec(args, n: int | None = None) -> ShuffleSpec:
    probs = load_bias(args.bias, args.m) if getattr(args, "bias", None) else None
    try:
        return ShuffleSpec(args.n if n is None else n, args.m, probs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(args, text: str) -> None:
    if not text:
        return
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2)


def _frac(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def cmd_sample(args) -> int:
    spec = _spec(args)
    pairs = [
        (list(w.letters), list(word_to_permutation(w).one_line))
        for w in iter_words(spec, args.samples, args.seed, args.chunk_size)
    ]
    if args.format == "json":
        _emit(args, _dumps({
            "schema_version": SCHEMA_VERSION,
            "n": spec.n,
            "m": spec.m,
            "seed": str(args.seed),
            "samples": [{"word": w, "permutation": p} for w, p in pairs],
        }))
    elif args.format == "csv":
        rows = [" ".join(map(str, w)) + "," + " ".join(map(str, p)) for w, p in pairs]
        _emit(args, "\n".join(["word,permutation", *rows]) if rows else "")
    else:
        _emit(args, "\n".join(f"{w} -> {p}" for w, p in pairs))
    return 0


def cmd_simulate(args) -> int:
    spec = _spec(args)
    config = ExperimentConfig(
        spec, args.statistic, args.samples, args.seed, args.chunk_size, args.threads
    )
    report = run_experiment(config)
    print(f"wall time {report.wall_time:.2f}s", file=sys.stderr)
    if args.format == "json":
        _emit(args, report.to_json())
    elif args.format == "csv":
        _emit(args, report.histogram_csv())
    else:
        s = report.summary
        lines = [
            f"n={spec.n} m={spec.m} statistic={args.statistic} samples={s.count}",
            f"mean={float(s.mean):.6f} variance={float(s.variance):.6f} min={s.min} max={s.max}",
            f"standardized mean={report.standardized_mean:.6f} variance={report.standardized_variance:.6f}",
            f"empirical d_K={report.empirical_kd:.6f}",
        ]
        if report.coupling_max_abs_dev is not None:
            lines.append(f"max |d - B| = {report.coupling_max_abs_dev} (bound {4 * spec.m - 1})")
        lines += [f"{k} = {v:.6g}" for k, v in report.bound_values.items()]
        if report.limit_variance_residuals:
            lines += [f"residual vs {k} = {v:+.6f}" for k, v in report.limit_variance_residuals.items()]
        _emit(args, "\n".join(lines))
    return 0


def cmd_oracle(args) -> int:
    spec = _spec(args)
    dist = oracle.enumerate_distribution(spec, args.statistic, args.budget, args.threads)
    doc = {"schema_version": SCHEMA_VERSION, **dist.to_dict()}
    if spec.pile_probs is not None:
        doc["masses"] = {str(v): _frac(p) for v, p in sorted(dist.masses.items())}
    if args.format == "json":
        _emit(args, _dumps(doc))
    elif args.format == "csv":
        _emit(args, histogram_csv(dist.counts))
    else:
        lines = [f"{v}: {c}" for v, c in sorted(dist.counts.items())]
        lines.append(f"total {dist.total}  mean {doc['mean']}  variance {doc['variance']}")
        _emit(args, "\n".join(lines))
    return 0


def cmd_audit(args) -> int:
    grid = [(n, m) for m in args.m for n in args.n]
    report = oracle.audit_formulas(grid, args.budget, args.threads, skip_refusals=True)
    if args.format == "json":
        _emit(args, _dumps({"schema_version": SCHEMA_VERSION, **report.to_dict()}))
    elif args.format == "csv":
        rows = ["n,m,quantity,formula,oracle,formula_value,difference,status"]
        rows += [",".join(str(v) for v in r.to_dict().values()) for r in report.rows]
        _emit(args, "\n".join(rows))
    else:
        _emit(args, report.to_table())
    if report.skipped:
        print(f"{len(report.skipped)} grid point(s) skipped for budget", file=sys.stderr)
    if args.strict and report.findings:
        return EXIT_STRICT
    return 0


def cmd_clt(args) -> int:
    rows = []
    reports = []
    for n in args.n:
        spec = _spec(args, n)
        config = ExperimentConfig(
            spec, args.statistic, args.samples, args.seed, args.chunk_size, args.threads
        )
        report = run_experiment(config)
        reports.append(report)
        if args.statistic == "inversions":
            bound, kind = theory.kd_bound_constant() / math.sqrt(n), "kd_bound"
        else:
            bound, kind = theory.slutsky_error(n, args.m), "slutsky_error"
        rows.append({"n": n, "empirical_kd": report.empirical_kd, "bound": bound, "bound_kind": kind})
        print(f"n={n}: d_K={report.empirical_kd:.6f} ({report.wall_time:.1f}s)", file=sys.stderr)
    csv = "n,empirical_kd,bound,bound_kind\n" + "".join(
        f"{r['n']},{r['empirical_kd']!r},{r['bound']!r},{r['bound_kind']}\n" for r in rows
    )
    if args.format == "json":
        _emit(args, _dumps({
            "schema_version": SCHEMA_VERSION,
            "reports": [r.to_dict() for r in reports],
            "summary": rows,
        }))
    elif args.format == "csv":
        _emit(args, csv)
    else:
        _emit(args, "\n".join(
            f"n={r['n']:>7}  d_K={r['empirical_kd']:.6f}  {r['bound_kind']}={r['bound']:.6g}" for r in rows
        ))
    return 0


def cmd_formulas(args) -> int:
    if args.name is None or args.name not in theory.FORMULAS:
        names = ", ".join(sorted(theory.FORMULAS))
        if args.name is None:
            _emit(args, names)
            return 0
        raise UsageError(f"unknown formula {args.name!r}; available: {names}")
    func, params = theory.FORMULAS[args.name]
    values = {}
    for p in params:
        v = getattr(args, p)
        if v is None:
            raise UsageError(f"formula {args.name} needs --{p}")
        values[p] = v[0] if isinstance(v, list) else v
    try:
        value = func(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if isinstance(value, (int, Fraction)):
        exact = _frac(value)
        text = {"json": None, "csv": f"name,exact,decimal\n{args.name},{exact},{float(value)!r}",
                "text": f"{exact}\n{float(value)!r}"}[args.format]
        doc = {"name": args.name, **values, "exact": exact, "decimal": repr(float(value))}
    else:
        text = {"json": None, "csv": f"name,exact,decimal\n{args.name},,{value!r}",
                "text": repr(value)}[args.format]
        doc = {"name": args.name, **values, "exact": None, "decimal": repr(value)}
    if text is None:
        text = _dumps({"schema_version": SCHEMA_VERSION, **doc})
    _emit(args, text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shelf-lab", description="Shelf-shuffle simulation and verification lab")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("json", "csv", "text"), default="json"):
        p.add_argument("--format", choices=formats, default=default)
        p.add_argument("--out", help="write output here instead of stdout")

    def sampling(p, samples_default):
        p.add_argument("--samples", type=_nonnegative, default=samples_default)
        p.add_argument("--seed", type=_nonnegative, default=0)
        p.add_argument("--chunk-size", type=_positive, default=1 << 16)

    p = sub.add_parser("sample", help="emit sampled words and their permutations")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--bias", help="JSON array of 2m \"p/q\" pile probabilities")
    sampling(p, 1)
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("simulate", help="one Monte Carlo experiment")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--statistic", choices=("inversions", "descents"), default="inversions")
    p.add_argument("--bias")
    p.add_argument("--threads", type=_positive, default=1)
    sampling(p, 100_000)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="exact distribution by exhaustive enumeration")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--statistic", choices=oracle.STATISTICS, default="inversions")
    p.add_argument("--budget", type=_positive, default=None)
    p.add_argument("--bias")
    p.add_argument("--threads", type=_positive, default=1)
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("audit", help="closed forms against exhaustive enumeration")
    p.add_argument("--n", type=_positive, nargs="+", default=list(range(1, 8)))
    p.add_argument("--m", type=_positive, nargs="+", default=[1, 2, 3])
    p.add_argument("--budget", type=_positive, default=None)
    p.add_argument("--threads", type=_positive, default=1)
    p.add_argument("--strict", action="store_true", help="exit 4 when any finding is reported")
    common(p, default="text")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("clt", help="empirical Kolmogorov distance against n")
    p.add_argument("--n", type=_positive, nargs="+", required=True)
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--statistic", choices=("inversions", "descents"), default="inversions")
    p.add_argument("--bias")
    p.add_argument("--threads", type=_positive, default=1)
    sampling(p, 100_000)
    common(p, default="csv")
    p.set_defaults(func=cmd_clt)

    p = sub.add_parser("formulas", help="evaluate a closed form exactly")
    p.add_argument("name", nargs="?")
    p.add_argument("--n", type=_positive)
    p.add_argument("--m", type=_positive)
    common(p, default="text")
    p.set_defaults(func=cmd_formulas)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "command", None) in ("simulate", "clt") and args.samples < 1:
            raise UsageError("--samples must be at least 1 for experiments")
        return args.func(args)
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"shelf-lab: error: {exc}\n")
    except oracle.BudgetExceeded as exc:
        print(f"shelf-lab: budget refusal: {exc.states} words exceed budget {exc.budget}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
