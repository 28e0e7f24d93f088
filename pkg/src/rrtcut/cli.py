"""Command-line experiment runner.

Every experiment writes one row per (trial, statistic) with the columns
``experiment,n,trial,stat,raw,normalized,ref_cdf`` as CSV or JSONL, and a
summary block on stderr.  Exit codes: 0 success, 2 invalid usage, 3 I/O
failure.  For a fixed seed the data output does not depend on the number
of threads.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import batch, stats
from .coupling import cauchy_statistic_array
from .percolation import schweinsberg_statistic, supercritical_p

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3

COLUMNS = ("experiment", "n", "trial", "stat", "raw", "normalized", "ref_cdf")


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: tuple[int, ...]
    trials: int = 1000
    seed: int = 0
    threads: int | None = None
    params: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise UsageError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise UsageError("trials must be >= 1")
        if not self.n:
            raise UsageError("at least one n is required")
        if self.format not in ("csv", "jsonl"):
            raise UsageError("format must be csv or jsonl")
        if self.seed < 0:
            raise UsageError("seed must be nonnegative")
        if self.threads is not None and self.threads < 1:
            raise UsageError("threads must be >= 1")


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    n: int
    trial: int
    stat: str
    raw: float
    normalized: float
    ref_cdf: float | None


@dataclass(frozen=True, eq=False)
class StatColumn:
    """One statistic over all trials, with what the summary checks."""

    name: str
    raw: np.ndarray
    normalized: np.ndarray
    ref: Callable | None = None
    ks_tol: float | None = None
    target_mean: float | None = None
    mean_tol: float | None = None  # absolute

    def ref_values(self) -> np.ndarray | None:
        return None if self.ref is None else np.asarray(self.ref(self.normalized), dtype=np.float64)


# ---------------------------------------------------------------------------
# experiments: (n, trials, seed, threads, params) -> list of StatColumn


def _ln_scale(n: int) -> float:
    return math.log(n) / n


def _need(n: int, lo: int) -> None:
    if n < lo:
        raise UsageError(f"this experiment needs n >= {lo}")


def _ell(params, default: int, lo: int = 1) -> int:
    ell = params.get("ell") or default
    if ell < lo:
        raise UsageError(f"ell must be >= {lo}")
    return ell


def exp_isolate_root(n, trials, seed, threads, params):
    _need(n, 3)
    x, _, _, _ = batch.root_batch(n, seed, trials, threads=threads)
    return [
        StatColumn("X", x, cauchy_statistic_array(x, n), stats.cauchy_limit_cdf, ks_tol=0.1),
        StatColumn("X_lln", x, x * _ln_scale(n), target_mean=1.0, mean_tol=0.07),
    ]


def exp_isolate_multi(n, trials, seed, threads, params):
    _need(n, 3)
    ell = _ell(params, 3)
    if ell > n + 1:
        raise UsageError("ell must be <= n+1")
    stages, sizes = batch.multi_batch(n, ell, seed, trials, threads)
    total = stages.sum(axis=1)
    cols = [StatColumn(f"X'_{ell}", total, cauchy_statistic_array(total, n), stats.cauchy_limit_cdf, ks_tol=0.1)]
    for i in range(1, ell):
        # log stage size over log n; uniform in the limit
        with np.errstate(divide="ignore"):
            z = np.log(sizes[:, i]) / math.log(n)
        cols.append(StatColumn(f"stage_size_{i}", sizes[:, i], z, stats.uniform_cdf, ks_tol=0.1))
    return cols


def _running(name, out, n, ref_for, tol):
    s = _ln_scale(n)
    return [StatColumn(f"{name}_{k + 1}", out[:, k], out[:, k] * s, ref_for(k + 1), ks_tol=tol) for k in range(out.shape[1])]


def exp_random_targets(n, trials, seed, threads, params):
    _need(n, 2)
    ell = _ell(params, 1)
    out = batch.targets_batch(n, ell, batch.MODE_Y, seed, trials, threads)
    return _running("Y", out, n, lambda k: (lambda x: stats.beta_cdf(x, k, 1)), 0.1)


def exp_last_targets(n, trials, seed, threads, params):
    _need(n, 2)
    ell = _ell(params, 1)
    if ell > n:
        raise UsageError("ell must be <= n")
    out = batch.targets_batch(n, ell, batch.MODE_Z, seed, trials, threads)
    return _running("Z", out, n, lambda k: (lambda x: stats.beta_cdf(x, k, 1)), 0.1)


def _disconnect(name, mode, n, trials, seed, threads, params):
    _need(n, 2)
    ell = _ell(params, 2, lo=2)
    if ell > n + 1:
        raise UsageError("ell must be <= n+1")
    out = batch.targets_batch(n, ell, mode, seed, trials, threads)
    s = _ln_scale(n)
    return [
        StatColumn(
            f"{name}_{k + 2}",
            out[:, k],
            out[:, k] * s,
            (lambda i: (lambda x: stats.order_stat_cdf(x, i, ell)))(k + 1),
            ks_tol=0.12,
        )
        for k in range(ell - 1)
    ]


def exp_disconnect(n, trials, seed, threads, params):
    return _disconnect("A", batch.MODE_A, n, trials, seed, threads, params)


def exp_first_targets_disconnect(n, trials, seed, threads, params):
    return _disconnect("B", batch.MODE_B, n, trials, seed, threads, params)


def exp_component_tree(n, trials, seed, threads, params):
    _need(n, 2)
    th = (0.5, 1.0, 2.0)
    _, _, top, cnt = batch.root_batch(n, seed, trials, thresholds=th, threads=threads)
    cols = [StatColumn("gen1_max", top, top, lambda x: stats.frechet_cdf(x, 1.0), ks_tol=0.05)]
    for j, a in enumerate(th):
        cols.append(StatColumn(f"gen1_count_ge_{a:g}", cnt[:, j], cnt[:, j].astype(np.float64), target_mean=1 / a, mean_tol=0.1 / a))
    return cols


def exp_cut_tree(n, trials, seed, threads, params):
    _need(n, 2)
    trunk, branch = batch.trunk_batch(n, seed, trials, threads)
    s = _ln_scale(n)
    return [
        StatColumn("trunk", trunk, trunk * s, target_mean=1.0, mean_tol=0.07),
        StatColumn("max_branch", branch, branch * s),
    ]


def exp_ordered(n, trials, seed, threads, params):
    _need(n, 2)
    deg, height, sat = batch.ordered_batch(n, seed, trials, threads)
    ln = math.log(n)
    a_minus, a_plus = stats.alpha_constants()
    return [
        StatColumn("root_degree", deg, (deg - ln) / math.sqrt(ln), stats.normal_cdf, ks_tol=0.05),
        StatColumn("height", height, height / ln, target_mean=a_plus, mean_tol=0.5),
        StatColumn("saturation", sat, sat / ln, target_mean=a_minus, mean_tol=0.1),
    ]


def exp_coalescent(n, trials, seed, threads, params):
    # n + 1 labels, so the collision count has the law of X_n
    _need(n, 3)
    c = batch.small_law_batch(n, "gm_collisions", seed, trials, threads=threads)
    return [StatColumn("collisions", c, cauchy_statistic_array(c, n), stats.cauchy_limit_cdf, ks_tol=0.1)]


def exp_percolation(n, trials, seed, threads, params):
    _need(n, 3)
    t = params.get("t") or 1.0
    try:
        p = supercritical_p(n, t)
    except ValueError as e:
        raise UsageError(str(e)) from None
    root, ranked = batch.percolation_batch(n, p, seed, trials, 1, threads)
    frac = root / n
    c1 = ranked[:, 0]
    e = math.exp(-t)
    return [
        StatColumn("C0", root, frac, target_mean=e, mean_tol=0.02 * e),
        StatColumn("C1", c1, c1 * _ln_scale(n), lambda x: stats.frechet_cdf(x, t * e), ks_tol=0.08),
        StatColumn("schweinsberg", root, schweinsberg_statistic(frac, n, t), lambda y: stats.schweinsberg_limit_cdf(y, t)),
    ]


def _prob(params) -> float:
    p = params.get("p")
    p = 0.5 if p is None else p
    if not 0 <= p <= 1:
        raise UsageError("p must lie in [0, 1]")
    return p


def exp_urn(n, trials, seed, threads, params):
    _need(n, 1)
    p = _prob(params)
    red = batch.urn_batch(n, p, seed, trials, threads)
    return [StatColumn("red", red, red / n**p)]


def exp_yule(n, trials, seed, threads, params):
    _need(n, 1)
    p = _prob(params)
    r, rho = batch.yule_batch(n, p, seed, trials, threads)
    return [StatColumn("root_type", r, r / n**p), StatColumn("rho", rho, rho - math.log(n))]


def exp_walk(n, trials, seed, threads, params):
    _need(n, 3)
    L, over = batch.walk_batch(n, seed, trials, threads)
    # log1p keeps the atom at overshoot 0 finite
    z = np.log1p(over) / math.log(n)
    return [
        StatColumn("L", L, cauchy_statistic_array(L, n), stats.cauchy_limit_cdf, ks_tol=0.1),
        StatColumn("overshoot", over, z, stats.uniform_cdf, ks_tol=0.1),
    ]


@dataclass(frozen=True)
class Experiment:
    run: Callable
    statistic: str
    description: str


EXPERIMENTS: dict[str, Experiment] = {
    "isolate-root": Experiment(exp_isolate_root, "X_n", "cuts to isolate the root; Cauchy centering and law of large numbers"),
    "isolate-multi": Experiment(exp_isolate_multi, "X'_{n,ell}", "staged isolation of 0..ell-1 and log stage sizes"),
    "random-targets": Experiment(exp_random_targets, "Y_{n,k}", "cuts to isolate k i.i.d. uniform vertices, k = 1..ell"),
    "last-targets": Experiment(exp_last_targets, "Z_{n,k}", "cuts to isolate the last k vertices, k = 1..ell"),
    "disconnect": Experiment(exp_disconnect, "A_{n,k}", "steps until ell random vertices span k components"),
    "first-targets-disconnect": Experiment(exp_first_targets_disconnect, "B_{n,k}", "the same for vertices 0..ell-1"),
    "component-tree": Experiment(exp_component_tree, "B^(n) generation 1", "largest normalized severed size and counts above thresholds"),
    "cut-tree": Experiment(exp_cut_tree, "Trunk(T_n)", "trunk length and deepest branch of the cut-tree"),
    "ordered": Experiment(exp_ordered, "d_n(0), H_n, saturation", "root degree, height and saturation of the ordered cut-tree"),
    "coalescent": Experiment(exp_coalescent, "collisions", "collision count of the coalescent on n+1 labels"),
    "percolation": Experiment(exp_percolation, "C_{0,n}, C_{1,n}", "supercritical percolation at p = 1 - t/ln n"),
    "urn": Experiment(exp_urn, "red balls", "Polya-Hoppe urn after n draws"),
    "yule": Experiment(exp_yule, "root type", "Yule process with clone probability p, stopped at n+1"),
    "walk": Experiment(exp_walk, "L(n)", "last passage of the xi walk below n and its overshoot"),
}

SUBCOMMANDS = tuple(EXPERIMENTS) + ("oracle", "sweep")


# ---------------------------------------------------------------------------
# output


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(v)


def _json_num(v):
    if v is None:
        return None
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else str(v)


def iter_rows(experiment: str, n: int, columns: Sequence[StatColumn]):
    """Rows in trial order, then statistic order within a trial."""
    refs = [c.ref_values() for c in columns]
    trials = columns[0].raw.size
    for i in range(trials):
        for c, r in zip(columns, refs):
            yield ResultRow(experiment, n, i, c.name, c.raw[i], c.normalized[i], None if r is None else r[i])


def write_rows(rows, fh, fmt: str) -> None:
    if fmt == "csv":
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([r.experiment, r.n, r.trial, r.stat, _num(r.raw), _num(r.normalized), _num(r.ref_cdf)])
    else:
        for r in rows:
            rec = {
                "experiment": r.experiment,
                "n": r.n,
                "trial": r.trial,
                "stat": r.stat,
                "raw": _json_num(r.raw),
                "normalized": _json_num(r.normalized),
                "ref_cdf": _json_num(r.ref_cdf),
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class StatSummary:
    stat: str
    mean: float
    variance: float
    ks: float | None
    verdict: str  # pass, fail or n/a

    def line(self) -> str:
        ks = "" if self.ks is None else f" ks={self.ks:.6f}"
        return f"stat={self.stat} mean={self.mean:.6g} var={self.variance:.6g}{ks} verdict={self.verdict}"


def summarize(col: StatColumn) -> StatSummary:
    z = np.asarray(col.normalized, dtype=np.float64)
    finite = z[np.isfinite(z)]
    mean = float(finite.mean()) if finite.size else float("nan")
    var = float(finite.var()) if finite.size else float("nan")
    ks = None
    checks = []
    if col.ref is not None:
        ks = stats.ks_statistic(z, col.ref)
        if col.ks_tol is not None:
            checks.append(ks <= col.ks_tol)
    if col.target_mean is not None:
        checks.append(abs(mean - col.target_mean) <= col.mean_tol)
    verdict = "n/a" if not checks else ("pass" if all(checks) else "fail")
    return StatSummary(col.name, mean, var, ks, verdict)


def _open_output(path: str | None):
    if path is None or path == "-":
        return io.TextIOWrapper(sys.stdout.buffer, encoding="utf-8", newline="\n", write_through=True), False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def run(config: ExperimentConfig, err=None) -> int:
    """Run one experiment for each n in the config; rows go to the output."""
    err = err or sys.stderr
    exp = EXPERIMENTS[config.experiment]
    results = []
    for n in config.n:
        cols = exp.run(n, config.trials, config.seed, config.threads, config.params)
        results.append((n, cols))
    try:
        fh, close = _open_output(config.output)
        try:
            rows = (r for n, cols in results for r in iter_rows(config.experiment, n, cols))
            write_rows(rows, fh, config.format)
            fh.flush()
        finally:
            if close:
                fh.close()
            else:
                fh.detach()
    except OSError as e:
        print(f"error: {e}", file=err)
        return EXIT_IO
    for n, cols in results:
        print(f"# summary experiment={config.experiment} n={n} trials={config.trials} seed={config.seed}", file=err)
        for c in cols:
            print("# " + summarize(c).line(), file=err)
    return EXIT_OK


@dataclass(frozen=True)
class SweepReport:
    stat: str
    ns: tuple[int, ...]
    ks: tuple[float, ...]

    @property
    def nonincreasing(self) -> bool:
        return all(b <= a for a, b in zip(self.ks, self.ks[1:]))


def sweep(config: ExperimentConfig, stat: str | None = None) -> list[SweepReport]:
    """Per-n KS distances for every referenced statistic of the experiment."""
    if len(config.n) < 2:
        raise UsageError("a sweep needs at least two values of n")
    exp = EXPERIMENTS[config.experiment]
    per_n = [exp.run(n, config.trials, config.seed, config.threads, config.params) for n in config.n]
    names = [c.name for c in per_n[0] if c.ref is not None]
    if stat is not None:
        if stat not in names:
            raise UsageError(f"statistic {stat!r} has no reference law in {config.experiment}")
        names = [stat]
    reports = []
    for name in names:
        ks = tuple(stats.ks_statistic(c.normalized, c.ref) for cols in per_n for c in cols if c.name == name)
        reports.append(SweepReport(name, tuple(config.n), ks))
    return reports


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser, many_n: bool = False) -> None:
    if many_n:
        p.add_argument("--n", type=int, nargs="+", required=True, help="values of n (at least two)")
    else:
        p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help=f"defaults to ${batch.THREADS_ENV} or the CPU count")
    p.add_argument("--ell", type=int, default=None)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rrtcut", description="Random cutting of random recursive trees.")
    parser.add_argument("--list", action="store_true", help="list experiments and their statistics")
    sub = parser.add_subparsers(dest="command")
    for name, exp in EXPERIMENTS.items():
        _add_common(sub.add_parser(name, help=exp.description))
    o = sub.add_parser("oracle", help="exact law by enumeration")
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--statistic", required=True)
    o.add_argument("--ell", type=int, default=None)
    o.add_argument("--k", type=int, default=None)
    o.add_argument("--v", type=int, default=None)
    o.add_argument("--targets", type=int, nargs="+", default=None)
    s = sub.add_parser("sweep", help="KS trend of an experiment over several n")
    s.add_argument("--experiment", required=True, choices=tuple(EXPERIMENTS))
    s.add_argument("--stat", default=None)
    _add_common(s, many_n=True)
    return parser


def _params(args) -> dict:
    return {k: getattr(args, k) for k in ("ell", "t", "p") if getattr(args, k, None) is not None}


def _config(args, experiment: str, ns) -> ExperimentConfig:
    return ExperimentConfig(
        experiment=experiment,
        n=tuple(ns),
        trials=args.trials,
        seed=args.seed,
        threads=args.threads,
        params=_params(args),
        output=args.output,
        format=args.format,
    )


def _run_oracle(args, out) -> int:
    from . import oracle

    params = {}
    for key in ("ell", "k", "v"):
        if getattr(args, key) is not None:
            params[key] = getattr(args, key)
    if args.targets is not None:
        params["targets"] = tuple(args.targets)
    if args.statistic == "X" and not params:
        law = oracle.exact_isolation_law(args.n)
    else:
        law = oracle.exhaustive_destruction(args.n, args.statistic, **params)
    out.write(f"# exact law of {args.statistic} at n={args.n}\n")
    out.write("value\tprobability\n")
    for v, q in zip(law.support, law.probs):
        out.write(f"{v}\t{q}\n")
    out.write(f"# mean {law.mean()}\n")
    return EXIT_OK


def _run_sweep(args, out, err) -> int:
    cfg = _config(args, args.experiment, args.n)
    reports = sweep(cfg, args.stat)
    try:
        out.write("stat\tn\tks\n")
        for r in reports:
            for n, ks in zip(r.ns, r.ks):
                out.write(f"{r.stat}\t{n}\t{ks!r}\n")
    except OSError as e:
        print(f"error: {e}", file=err)
        return EXIT_IO
    for r in reports:
        verdict = "nonincreasing" if r.nonincreasing else "not monotone"
        print(f"# sweep experiment={args.experiment} stat={r.stat} verdict={verdict}", file=err)
    return EXIT_OK


def list_experiments() -> str:
    lines = [f"{name:26s} {exp.statistic:24s} {exp.description}" for name, exp in EXPERIMENTS.items()]
    lines.append(f"{'oracle':26s} {'exact laws':24s} enumeration over all trees and removal orders (n <= 6)")
    lines.append(f"{'sweep':26s} {'KS trend':24s} KS distance per n and a monotonicity verdict")
    return "\n".join(lines) + "\n"


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    if args.list:
        out.write(list_experiments())
        return EXIT_OK
    if args.command is None:
        parser.print_usage(err)
        return EXIT_USAGE
    try:
        if args.command == "oracle":
            return _run_oracle(args, out)
        if args.command == "sweep":
            return _run_sweep(args, out, err)
        return run(_config(args, args.command, (args.n,)), err)
    except (UsageError, ValueError) as e:
        print(f"error: {e}", file=err)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
