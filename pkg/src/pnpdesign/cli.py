"""Command-line interface: ``pnpdesign <command> [options]``.

Commands: ingest, design, evaluate, bench, synth, mine.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 resource error (memory budget, knapsack table size).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import synth as synth_mod
from .config import ConfigError, RunConfig, parse_pairs, read_config
from .design import (
    KnapsackTooLarge,
    aggregate_scores,
    design_budget,
    design_cardinality,
)
from .evaluation import baseline_popular, baseline_top, compare_designs, cross_validate, movie_means
from .graph import (
    FilterThresholds,
    IngestError,
    RatingRange,
    align,
    dataset_hash,
    filter_core,
    read_membership,
    read_ratings,
    summary,
)
from .io import BundleError, load_bundle, save_bundle, write_report, write_tsv
from .itemsets import (
    TransactionDb,
    independence_test,
    level_sizes,
    mine,
    type_combination_report,
    write_itemsets,
)
from .walks import (
    MemoryBudgetError,
    PathWeights,
    TargetSet,
    UnknownUserError,
    aggregate_fast,
    fit_operators,
    infer_rows,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RESOURCE = 0, 1, 2, 3

_log = logging.getLogger("pnpdesign")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ------------------------------------------------------------------ helpers


def _kv_list(text: str, cast=float) -> dict:
    """``"actor=6,genre=2"`` -> ``{"actor": 6, "genre": 2}``."""
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise UsageError(f"expected label=value, got {part!r}")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = cast(v)
        except ValueError:
            raise UsageError(f"cannot parse {part!r}") from None
    return out


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


_FLAG_KEYS = {
    "ratings": "ratings",
    "membership": "membership",
    "bundle": "bundle",
    "alpha": "alpha",
    "beta": "beta",
    "gamma": "gamma",
    "delta": "delta",
    "target": "target",
    "folds": "folds",
    "mode": "mode",
    "costs": "costs",
    "resolution": "resolution",
    "knn_k": "knn_k",
    "seed": "seed",
    "workers": "workers",
    "out": "out",
    "min_users_per_movie": "min_users_per_movie",
    "min_features_per_movie": "min_features_per_movie",
    "min_movies_per_user": "min_movies_per_user",
    "min_movies_per_feature": "min_movies_per_feature",
    "rating_low": "rating_low",
    "rating_high": "rating_high",
    "duplicates": "duplicates",
}


def resolve_config(args) -> RunConfig:
    """Config file first, then explicit flags on top."""
    cfg = read_config(args.config) if getattr(args, "config", None) else RunConfig()
    pairs = []
    for flag, key in _FLAG_KEYS.items():
        v = getattr(args, flag, None)
        if v is not None:
            pairs.append((key, v))
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        pairs.append(tuple(s.strip() for s in item.split("=", 1)))
    if getattr(args, "cap", None):
        pairs.extend((f"cap.{k}", v) for k, v in _kv_list(args.cap, int).items())
    if getattr(args, "budget", None):
        pairs.extend((f"budget.{k}", v) for k, v in _kv_list(args.budget, float).items())
    cfg = parse_pairs(pairs, cfg)
    if getattr(args, "strict", False):
        cfg.strict = True
    if getattr(args, "ties_negative", False):
        cfg.ties_positive = False
    return cfg


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_graph(cfg: RunConfig):
    """Ratings and membership from a bundle or the two input files, aligned."""
    if cfg.bundle:
        if not Path(cfg.bundle).exists():
            raise DataError(f"bundle not found: {cfg.bundle}")
        ratings, membership, _ = load_bundle(cfg.bundle)
        return align(ratings, membership)
    if not cfg.ratings or not cfg.membership:
        raise UsageError("give --bundle, or both --ratings and --membership")
    for p in (cfg.ratings, cfg.membership):
        if not Path(p).exists():
            raise DataError(f"input file not found: {p}")
    ratings = read_ratings(cfg.ratings, RatingRange(cfg.rating_low, cfg.rating_high), cfg.duplicates)
    membership = read_membership(cfg.membership)
    return align(ratings, membership)


def _target(cfg: RunConfig, ratings) -> TargetSet:
    if cfg.target == "all":
        return TargetSet.everyone(ratings.shape[0])
    path = Path(cfg.target)
    if not path.exists():
        raise DataError(f"target file not found: {path}")
    ids = []
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            ids.append(int(s))
        except ValueError:
            raise DataError(f"{path}:{n}: not a user id: {s!r}") from None
    if not ids:
        raise DataError(f"{path}: empty target set")
    return TargetSet.from_ids(ids, ratings.user_ids)


def _read_costs(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise DataError(f"cost file not found: {p}")
    costs = {}
    for n, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split("\t")
        if len(parts) != 2:
            raise DataError(f"{p}:{n}: expected feature_id<TAB>cost")
        try:
            costs[int(parts[0])] = float(parts[1])
        except ValueError:
            if n == 1:
                continue  # header line
            raise DataError(f"{p}:{n}: cannot parse {s!r}") from None
    return costs


def _emit(args, text: str, report: dict, out: Path | None, name: str) -> None:
    sys.stdout.write(text)
    if out is not None and args.json:
        write_report(out / f"{name}.json", report)


# ----------------------------------------------------------------- commands


def cmd_ingest(args) -> int:
    cfg = resolve_config(args).validate()
    ratings, membership = _load_graph(cfg)
    before = summary(ratings, membership)
    if args.no_filter:
        kept_r, kept_f, rounds, removed = ratings, membership, 0, {}
    else:
        th = FilterThresholds(
            cfg.min_users_per_movie, cfg.min_features_per_movie, cfg.min_movies_per_user, cfg.min_movies_per_feature
        )
        res = filter_core(ratings, membership, th)
        if res.empty:
            raise DataError(f"empty core: filtering removed everything ({res.removed})")
        kept_r, kept_f, rounds, removed = res.ratings, res.membership, res.rounds, res.removed
    stats = summary(kept_r, kept_f)
    out = _out_dir(cfg)
    digest = save_bundle(out / "bundle.npz", kept_r, kept_f, stats)
    write_tsv(out / "summary.tsv", ["entity", "count"], stats.items())
    report = {
        "command": "ingest",
        "config": cfg.resolved(),
        "dataset_hash": dataset_hash(kept_r, kept_f),
        "bundle_hash": digest,
        "input": before,
        "filtered": stats,
        "filter_rounds": rounds,
        "removed": removed,
    }
    lines = ["entity\tcount"] + [f"{k}\t{v}" for k, v in stats.items()]
    _emit(args, "\n".join(lines) + "\n", report, out, "ingest")
    return EXIT_OK


def _design_for(cfg: RunConfig, scores, catalog, costs):
    if cfg.mode == "cardinality":
        return design_cardinality(scores, catalog, cfg.caps, strict=cfg.strict)
    if costs is None:
        raise UsageError("budget modes need --costs")
    return design_budget(scores, catalog, costs, cfg.budget, mode=cfg.mode, resolution=cfg.resolution)


def _design_text(report: dict) -> str:
    lines = [f"method\t{report['method']}", f"objective\t{report['objective']!r}"]
    lines.append(f"expected_conversions\t{report['expected_conversions']!r}")
    lines.append("type\tfeature_id\tscore" + ("\tcost" if report.get("has_costs") else ""))
    for label, rows in report["selection"].items():
        for r in rows:
            extra = f"\t{r['cost']!r}" if "cost" in r else ""
            lines.append(f"{label}\t{r['feature_id']}\t{r['score']!r}{extra}")
    return "\n".join(lines) + "\n"


def cmd_design(args) -> int:
    cfg = resolve_config(args).validate()
    ratings, membership = _load_graph(cfg)
    target = _target(cfg, ratings)
    ops = fit_operators(ratings, membership, cfg.delta, cfg.ties_positive)
    fast = aggregate_fast(ops, target, cfg.weights)
    scores = aggregate_scores(fast)
    cat = membership.catalog
    costs = _read_costs(cfg.costs) if cfg.costs else None
    design = _design_for(cfg, scores, cat, costs)
    rows = infer_rows(ops, target.indices, cfg.weights)
    sel = design.indices
    design.expected_conversions = float(
        np.clip(0.5 * (rows[:, sel].sum(axis=1) + 1.0), 0.0, 1.0).sum()
    )
    cost_arr = None
    if costs is not None:
        cost_arr = np.array([costs.get(int(k), np.nan) for k in cat.feature_ids])
    rep = design.report(cat, scores.values, cost_arr)
    rep["has_costs"] = cost_arr is not None
    text = _design_text(rep)
    report = {
        "command": "design",
        "config": cfg.resolved(),
        "dataset_hash": ops.dataset_hash,
        "target_size": len(target),
        "design": rep,
    }
    if args.compare:
        means = movie_means(ratings, target)
        include = means > 0 if args.exclude_unrated else None
        designs = {
            "pnp": design,
            "popular": baseline_popular(ratings, membership, target, cfg.caps),
            "top": baseline_top(ratings, membership, target, cfg.caps),
        }
        cmp = compare_designs(designs, membership, means, cfg.knn_k, include)
        report["comparison"] = {
            name: {**cmp[name], "design": designs[name].report(cat)} for name in designs
        }
        text += "design\tknn\twknn\n" + "".join(
            f"{n}\t{v['knn']!r}\t{v['wknn']!r}\n" for n, v in cmp.items()
        )
    out = _out_dir(cfg)
    (out / "design.txt").write_text(text, encoding="utf-8")
    _emit(args, text, report, out, "design")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = resolve_config(args).validate(needs_seed=True)
    ratings, membership = _load_graph(cfg)
    folds = None if args.only_folds is None else [int(x) for x in args.only_folds.split(",")]
    if folds is not None and any(not 0 <= f < cfg.folds for f in folds):
        raise UsageError(f"--only-folds entries must lie in [0, {cfg.folds})")
    out = _out_dir(cfg)

    def run(weights, delta):
        return cross_validate(
            ratings, membership, weights, delta, k=cfg.folds, seed=cfg.seed, folds=folds,
            workers=cfg.workers, ties_positive=cfg.ties_positive,
        )

    base = run(cfg.weights, cfg.delta)
    report = {
        "command": "evaluate",
        "config": cfg.resolved(),
        "dataset_hash": dataset_hash(ratings, membership),
        "auc": base.as_dict(),
    }
    lines = [
        f"mean_auc\t{base.mean!r}",
        f"std_auc_users\t{base.std!r}",
        f"std_auc_folds\t{base.fold_std!r}",
        "fold\tmean_auc",
    ] + [f"{f}\t{m!r}" for f, m in zip(base.params["folds"], base.fold_means)]
    if args.auc_tsv:
        write_tsv(
            out / "auc_per_user.tsv",
            ["user_id", "auc"],
            ((int(ratings.user_ids[u]), repr(a)) for u, a in base.per_user.items()),
        )
    if args.deltas:
        sweep = []
        for d in _floats(args.deltas):
            if d < 0:
                raise UsageError("delta values must be nonnegative")
            r = run(cfg.weights, d)
            sweep.append((d, r.mean, r.std, r.fold_std))
        write_tsv(out / "delta_sweep.tsv", ["delta", "mean_auc", "std_users", "std_folds"], sweep)
        report["delta_sweep"] = [dict(zip(("delta", "mean_auc", "std_users", "std_folds"), s)) for s in sweep]
        means = [s[1] for s in sweep]
        report["delta_sweep_range"] = max(means) - min(means)
        lines.append("delta\tmean_auc")
        lines += [f"{s[0]!r}\t{s[1]!r}" for s in sweep]
    if args.alpha_grid or args.gamma_grid:
        if not (args.alpha_grid and args.gamma_grid):
            raise UsageError("--alpha-grid and --gamma-grid go together")
        grid = []
        for a in _floats(args.alpha_grid):
            for g in _floats(args.gamma_grid):
                b = 1.0 - a - g
                if a < 0 or g < 0 or b < -1e-9:
                    continue
                w = PathWeights(a, max(b, 0.0), g)
                grid.append((a, w.beta, g, run(w, cfg.delta).mean))
        write_tsv(out / "weight_grid.tsv", ["alpha", "beta", "gamma", "mean_auc"], grid)
        report["weight_grid"] = [dict(zip(("alpha", "beta", "gamma", "mean_auc"), g)) for g in grid]
        lines.append("alpha\tbeta\tgamma\tmean_auc")
        lines += [f"{a!r}\t{b!r}\t{g!r}\t{m!r}" for a, b, g, m in grid]
    _emit(args, "\n".join(lines) + "\n", report, out, "evaluate")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = resolve_config(args).validate(needs_seed=True)
    grid = [int(x) for x in _floats(args.grid)]
    methods = tuple(m.strip() for m in args.methods.split(","))
    bad = [m for m in methods if m not in bench_mod.METHODS]
    if bad or not grid or min(grid) < 1:
        raise UsageError(f"bad --methods {bad} or --grid {args.grid!r}")
    rows, diffs = bench_mod.bench(grid, methods, cfg.seed, args.repeats, weights=cfg.weights, delta=cfg.delta)
    out = _out_dir(cfg)
    bench_mod.write_tsv(out / "bench.tsv", rows)
    report = {
        "command": "bench",
        "config": cfg.resolved(),
        "rows": [r.__dict__ for r in rows],
        "max_abs_diff": diffs,
    }
    if len(grid) > 1:
        report["loglog_slope"] = {m: bench_mod.loglog_slope(rows, m) for m in methods}
    text = "nnz\tmethod\tseconds\tpeak_bytes\n" + "".join(
        f"{r.nnz}\t{r.method}\t{r.seconds:.6g}\t{r.peak_bytes}\n" for r in rows
    )
    _emit(args, text, report, out, "bench")
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = resolve_config(args).validate(needs_seed=True)
    kw = dict(seed=cfg.seed)
    for name in ("n_users", "n_movies", "groups", "ratings_per_user", "noise", "like_rate"):
        v = getattr(args, name)
        if v is not None:
            kw[name] = v
    if args.features:
        kw["features"] = _kv_list(args.features, int)
    if args.per_movie:
        kw["per_movie"] = _kv_list(args.per_movie, int)
    if args.scale:
        lo, hi, step = _floats(args.scale)
        kw.update(rating_low=lo, rating_high=hi, rating_step=step)
    try:
        spec = synth_mod.SyntheticSpec(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = synth_mod.generate(spec)
    out = _out_dir(cfg)
    rp, mp = synth_mod.write(data, out)
    stats = summary(data.ratings, data.membership)
    report = {
        "command": "synth",
        "config": cfg.resolved(),
        "spec": spec.__dict__,
        "dataset_hash": dataset_hash(data.ratings, data.membership),
        "summary": stats,
        "files": [str(rp), str(mp)],
    }
    _emit(args, "entity\tcount\n" + "".join(f"{k}\t{v}\n" for k, v in stats.items()), report, out, "synth")
    return EXIT_OK


def cmd_mine(args) -> int:
    cfg = resolve_config(args).validate()
    if (args.min_support is None) == (args.min_count is None):
        raise UsageError("give exactly one of --min-support or --min-count")
    if args.min_support is not None and not 0 < args.min_support <= 1:
        raise UsageError("--min-support must lie in (0, 1]")
    if args.min_count is not None and args.min_count < 1:
        raise UsageError("--min-count must be at least 1")
    if cfg.bundle:
        _, membership = _load_graph(cfg)
    else:
        if not cfg.membership:
            raise UsageError("give --membership or --bundle")
        if not Path(cfg.membership).exists():
            raise DataError(f"input file not found: {cfg.membership}")
        membership = read_membership(cfg.membership)
    db = TransactionDb.from_membership(membership)
    frequent = mine(db, args.min_support, args.min_count, args.max_size)
    tally = type_combination_report(frequent, membership.catalog)
    out = _out_dir(cfg)
    write_itemsets(out / "itemsets.tsv", frequent)
    write_tsv(out / "type_combinations.tsv", ["types", "count"], ((",".join(t), c) for t, c in tally))
    verdicts = []
    if args.test_pairs:
        for fi in frequent:
            if fi.size == 2:
                v = independence_test(db, fi.items, args.tolerance)
                verdicts.append(v)
        write_tsv(
            out / "dependencies.tsv",
            ["item_a", "item_b", "count_a", "count_b", "count_ab", "n", "lift", "dependent"],
            (
                (*v.pair, v.count_a, v.count_b, v.count_ab, v.n,
                 "undefined" if v.undefined else repr(v.lift), v.dependent)
                for v in verdicts
            ),
        )
    report = {
        "command": "mine",
        "config": cfg.resolved(),
        "min_support": args.min_support,
        "min_count": args.min_count,
        "transactions": len(db),
        "level_sizes": level_sizes(frequent),
        "type_combinations": [{"types": list(t), "count": c} for t, c in tally],
        "dependencies": [v.__dict__ for v in verdicts],
    }
    text = "size\tcount\n" + "".join(f"{k}\t{v}\n" for k, v in level_sizes(frequent).items())
    _emit(args, text, report, out, "mine")
    return EXIT_OK


# ------------------------------------------------------------------- parser


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="flat key = value config file; flags override it")
    p.add_argument("--seed", type=int, default=d, help="seed for randomized commands (mandatory there)")
    p.add_argument("--workers", type=int, default=d, help="worker threads (results do not depend on it)")
    p.add_argument("--out", default=d, help="output directory (default: current directory)")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS if suppress else False,
                   help="also write machine-readable JSON reports")
    p.add_argument("--set", action="append", default=d, metavar="KEY=VALUE", help="override any config key")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False)


def _graph_flags(p):
    p.add_argument("--ratings", help="ratings TSV: user_id, movie_id, rating")
    p.add_argument("--membership", help="membership TSV: movie_id, feature_id, type")
    p.add_argument("--bundle", help="bundle written by 'ingest' (instead of the two TSVs)")


def _walk_flags(p):
    p.add_argument("--alpha", type=float, help="weight of the direct 2-step path (default 0.5)")
    p.add_argument("--beta", type=float, help="weight of the user-based 4-step path (default 0.2)")
    p.add_argument("--gamma", type=float, help="weight of the feature-based 4-step path (default 0.3)")
    p.add_argument("--delta", type=float, help="reweighing exponent, >= 0 (default 0.5)")
    p.add_argument("--ties-negative", action="store_true", help="send ratings equal to the user mean to the negative graph")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pnpdesign", description=__doc__.split("\n")[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("ingest", help="read, filter and bundle a dataset")
    _global_flags(p, True)
    _graph_flags(p)
    p.add_argument("--rating-low", dest="rating_low", type=float)
    p.add_argument("--rating-high", dest="rating_high", type=float)
    p.add_argument("--duplicates", choices=("last", "first", "error"))
    for name, default in (("users-per-movie", 20), ("features-per-movie", 2), ("movies-per-user", 20), ("movies-per-feature", 2)):
        p.add_argument(f"--min-{name}", dest="min_" + name.replace("-", "_"), type=int, help=f"default {default}")
    p.add_argument("--no-filter", action="store_true", help="bundle without core filtering")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("design", help="design a feature bundle for a target audience")
    _global_flags(p, True)
    _graph_flags(p)
    _walk_flags(p)
    p.add_argument("--target", help="'all' or a file with one user id per line")
    p.add_argument("--mode", choices=("cardinality", "exact", "greedy"))
    p.add_argument(
        "--cap",
        help="per-type caps, e.g. actor=6,director=2,genre=2,producer=1,studio=1 "
        "(default; the producer and studio caps are invented defaults)",
    )
    p.add_argument("--strict", action="store_true", help="fill every cap exactly, even with negative scores")
    p.add_argument("--budget", help="per-type budgets for exact/greedy mode, e.g. actor=10,genre=3")
    p.add_argument("--costs", help="TSV feature_id<TAB>cost for budget modes")
    p.add_argument("--resolution", type=int, help="decimal digits kept when scaling costs (default 2)")
    p.add_argument("--compare", action="store_true", help="add Popular/Top baselines scored by kNN and w-kNN")
    p.add_argument("--knn-k", dest="knn_k", type=int, help="neighbors for kNN scoring (default 20)")
    p.add_argument("--exclude-unrated", action="store_true", help="drop movies no target user rated from neighbor sets")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("evaluate", help="k-fold per-user AUC of like/dislike prediction")
    _global_flags(p, True)
    _graph_flags(p)
    _walk_flags(p)
    p.add_argument("--folds", type=int, help="number of folds (default 5)")
    p.add_argument("--only-folds", help="comma-separated fold numbers to run (e.g. 0 for a smoke run)")
    p.add_argument("--deltas", help="delta sweep, e.g. 0,0.5,1,1.5")
    p.add_argument("--alpha-grid", help="alpha values for the weight grid (beta = 1 - alpha - gamma)")
    p.add_argument("--gamma-grid", help="gamma values for the weight grid")
    p.add_argument("--auc-tsv", action="store_true", help="write per-user AUC TSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="time fast vs. naive target queries over rating counts")
    _global_flags(p, True)
    _walk_flags(p)
    p.add_argument("--grid", default="1000,10000,100000", help="rating counts")
    p.add_argument("--methods", default="fast,naive", help=f"any of {','.join(bench_mod.METHODS)}")
    p.add_argument("--repeats", type=int, default=3)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="write planted-preference ratings and membership files")
    _global_flags(p, True)
    p.add_argument("--users", dest="n_users", type=int)
    p.add_argument("--movies", dest="n_movies", type=int)
    p.add_argument("--features", help="features per type, e.g. actor=120,genre=15")
    p.add_argument("--per-movie", help="features of each type per movie, e.g. actor=2,genre=1")
    p.add_argument("--groups", type=int, help="latent user groups")
    p.add_argument("--noise", type=float, help="like/dislike flip probability in [0, 0.5)")
    p.add_argument("--ratings-per-user", dest="ratings_per_user", type=int)
    p.add_argument("--like-rate", dest="like_rate", type=float)
    p.add_argument("--scale", help="rating scale low,high,step (default 1,5,0.5)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mine", help="apriori frequent feature sets and pairwise dependence")
    _global_flags(p, True)
    _graph_flags(p)
    p.add_argument("--min-support", type=float, help="relative support s in (0, 1]")
    p.add_argument("--min-count", type=int, help="absolute support count")
    p.add_argument("--max-size", type=int)
    p.add_argument("--test-pairs", action="store_true", help="lift test for every frequent pair")
    p.add_argument("--tolerance", type=float, default=0.05, help="|lift - 1| above this is dependent")
    p.set_defaults(func=cmd_mine)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, IngestError, BundleError, UnknownUserError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (MemoryBudgetError, KnapsackTooLarge, MemoryError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        # remaining ValueErrors come from inconsistent input data
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

