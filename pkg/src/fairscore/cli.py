"""Command-line interface.

Commands: sample, sample-roi, rank, up, suggest, audit, stable, arrange.
Reports go to stdout (JSON by default, CSV with --format csv); diagnostics
go to stderr. Exit codes: 0 success, 1 usage error, 2 data error,
3 computation error. Every run is reproducible from its flag set and seed;
the flags are echoed in the report metadata and no timestamps are written,
so identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import plots
from .data_io import IngestConfig, Report, export_report, load_csv
from .errors import (
    EmptyDataset,
    FairscoreError,
    ParseError,
    SchemaError,
    UnknownGroup,
)
from .estimators import (
    RankingScope,
    audit_reference,
    estimate_up,
    stable_rankings,
    suggest_fair,
)
from .rng import RngStream
from .sampler import (
    DEFAULT_GAMMA,
    RegionOfInterest,
    build_cdf_table,
    sample_cap_batch,
    sample_sphere_batch,
)
from .arrangement import new_arrangement
from .scoring import (
    FairnessConstraint,
    all_ordering_exchanges,
    check_fairness,
    group_counts,
    rank,
)

_DATA_ERRORS = (SchemaError, ParseError, EmptyDataset, UnknownGroup, FileNotFoundError)


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the CLI contract is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p: _Parser):
    p.add_argument("--seed", type=int, default=None, help="random seed (falls back to FAIRSCORE_SEED, then 0)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--plot-dir", default=None, help="directory for rendered figures")


def _add_data(p: _Parser):
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--scoring-cols", required=True, help="comma-separated scoring columns")
    p.add_argument("--id-col", default=None)
    p.add_argument("--sensitive", default=None, help="sensitive-attribute column")
    p.add_argument("--normalize", action="store_true", help="min-max scale scoring columns on load")


def _add_roi(p: _Parser):
    p.add_argument("--weights", required=True, help="comma-separated reference weights")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--theta", type=float, default=None, help="cap half-angle in radians")
    group.add_argument("--cos-sim", type=float, default=None, help="minimum cosine similarity (alternative to --theta)")
    p.add_argument("--gamma", type=int, default=DEFAULT_GAMMA, help="CDF table partitions")


def _add_mc(p: _Parser):
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--threads", type=int, default=1, help="worker cap; does not change results")


def _add_constraints(p: _Parser):
    p.add_argument(
        "--constraint",
        action="append",
        default=[],
        metavar="GROUP:K:MIN[:MAX]",
        help="fairness constraint, repeatable",
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="fairscore", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[], help="uniform samples from the whole function space")
    p.add_argument("--d", type=int, required=True, help="dimension")
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--nonnegative", action="store_true", help="fold into the non-negative orthant")
    _add_common(p)

    p = sub.add_parser("sample-roi", help="uniform samples from a vicinity cap")
    _add_roi(p)
    p.add_argument("--samples", type=int, default=10)
    _add_common(p)

    p = sub.add_parser("rank", help="rank a dataset under fixed weights")
    _add_data(p)
    p.add_argument("--weights", required=True)
    p.add_argument("--k", type=int, default=None, help="report group counts over the top k")
    _add_constraints(p)
    _add_common(p)

    p = sub.add_parser("up", help="estimate the unfair portion of a vicinity")
    _add_data(p)
    _add_roi(p)
    _add_mc(p)
    _add_constraints(p)
    _add_common(p)

    p = sub.add_parser("suggest", help="search the vicinity for a fair function")
    _add_data(p)
    _add_roi(p)
    _add_mc(p)
    _add_constraints(p)
    p.add_argument("--mode", choices=("closest", "first"), default="closest")
    _add_common(p)

    p = sub.add_parser("audit", help="stability of the reference function's output")
    _add_data(p)
    _add_roi(p)
    _add_mc(p)
    p.add_argument("--scope", choices=("full", "top-k"), default="full")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--ordered", action="store_true", help="top-k scope compares sequences, not sets")
    _add_common(p)

    p = sub.add_parser("stable", help="histogram of outputs across the vicinity")
    _add_data(p)
    _add_roi(p)
    _add_mc(p)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--scope", choices=("full", "top-k"), default="full")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--ordered", action="store_true")
    _add_common(p)

    p = sub.add_parser("arrange", help="approximate arrangement of ordering exchanges")
    _add_data(p)
    _add_roi(p)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--max-planes", type=int, default=None, help="insert at most this many exchange hyperplanes")
    _add_common(p)

    return parser


def _seed(ns) -> int:
    if ns.seed is not None:
        return ns.seed
    env = os.environ.get("FAIRSCORE_SEED")
    return int(env) if env else 0


def _weights(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise FairscoreError(f"--weights must be comma-separated numbers, got {text!r}") from None


def _theta(ns) -> float:
    if ns.theta is not None:
        return ns.theta
    if not -1.0 <= ns.cos_sim <= 1.0:
        raise FairscoreError(f"--cos-sim must lie in [-1, 1], got {ns.cos_sim}")
    return math.acos(ns.cos_sim)


def _constraints(ns) -> list[FairnessConstraint]:
    return [FairnessConstraint.parse(text) for text in ns.constraint]


def _scope(ns) -> RankingScope:
    if ns.scope == "full":
        return RankingScope.full()
    if ns.k is None:
        raise FairscoreError("--scope top-k requires --k")
    return RankingScope.top_k(ns.k, ordered=ns.ordered)


def _dataset(ns):
    config = IngestConfig(
        scoring_columns=tuple(c.strip() for c in ns.scoring_cols.split(",")),
        id_column=ns.id_col,
        sensitive_column=ns.sensitive,
        normalization="min-max" if ns.normalize else "none",
    )
    return load_csv(ns.data, config)


def _metadata(ns, seed: int, data=None, roi: RegionOfInterest | None = None) -> dict:
    echo = {
        k: (list(v) if isinstance(v, (list, tuple)) else v)
        for k, v in sorted(vars(ns).items())
        if k not in ("plot_dir",)
    }
    meta = {"seed": seed, "args": echo, "created_at": None}
    if data is not None:
        meta["dataset_digest"] = data.digest()
        meta["n"] = data.n
        meta["d"] = data.d
    if roi is not None:
        meta["roi"] = {"rho": roi.rho.tolist(), "theta": roi.theta}
    return meta


def _emit(ns, report: Report, figure=None):
    sys.stdout.write(export_report(report, ns.format).decode("utf-8"))
    if ns.plot_dir and figure is not None:
        path = figure(ns.plot_dir)
        print(f"figure written to {path}", file=sys.stderr)


def _cmd_sample(ns) -> int:
    seed = _seed(ns)
    samples = sample_sphere_batch(ns.d, RngStream(seed), ns.samples, nonnegative=ns.nonnegative)
    payload = {"samples": samples.tolist(), "d": ns.d, "nonnegative": ns.nonnegative}
    report = Report(kind="sample", payload=payload, metadata=_metadata(ns, seed))
    _emit(ns, report, lambda out: plots.plot_samples(samples, f"{out}/sample.png"))
    return 0


def _cmd_sample_roi(ns) -> int:
    seed = _seed(ns)
    roi = RegionOfInterest.around(_weights(ns.weights), _theta(ns))
    table = build_cdf_table(roi.theta, ns.gamma, roi.dimension) if roi.dimension >= 3 else None
    samples = sample_cap_batch(roi, table, RngStream(seed), ns.samples)
    payload = {"samples": samples.tolist(), "d": roi.dimension, "theta": roi.theta}
    report = Report(kind="sample", payload=payload, metadata=_metadata(ns, seed, roi=roi))
    _emit(ns, report, lambda out: plots.plot_samples(samples, f"{out}/sample-roi.png"))
    return 0


def _cmd_rank(ns) -> int:
    seed = _seed(ns)
    data = _dataset(ns)
    w = _weights(ns.weights)
    ranking = rank(data, w)
    constraints = _constraints(ns)
    groups = {rid: g for rid, g in zip(data.ids, data.groups)}
    payload = {
        "order": list(ranking.order),
        "scores": list(ranking.scores),
        "groups": [groups[rid] for rid in ranking.order],
        "weights": w.tolist(),
    }
    if ns.k is not None:
        payload["k"] = ns.k
        payload["group_counts"] = group_counts(ranking, data, ns.k)
    if constraints:
        payload["fair"] = check_fairness(ranking, data, constraints)
        payload["constraints"] = [vars(c) for c in constraints]
    report = Report(kind="rank", payload=payload, metadata=_metadata(ns, seed, data))
    _emit(ns, report)
    return 0


def _cmd_up(ns) -> int:
    seed = _seed(ns)
    data = _dataset(ns)
    roi = RegionOfInterest.around(_weights(ns.weights), _theta(ns))
    estimate = estimate_up(
        data, _constraints(ns), roi, ns.samples, ns.alpha, RngStream(seed),
        gamma=ns.gamma, threads=ns.threads,
    )
    payload = {
        "up": estimate.up,
        "error": estimate.error,
        "alpha": estimate.alpha,
        "samples": estimate.samples,
    }
    report = Report(kind="up", payload=payload, metadata=_metadata(ns, seed, data, roi))
    _emit(ns, report, lambda out: plots.plot_up_estimate(payload, f"{out}/up.png"))
    return 0


def _cmd_suggest(ns) -> int:
    seed = _seed(ns)
    data = _dataset(ns)
    w = _weights(ns.weights)
    roi = RegionOfInterest.around(w, _theta(ns))
    suggestion = suggest_fair(
        data, _constraints(ns), roi, ns.samples, RngStream(seed),
        mode=ns.mode, gamma=ns.gamma, threads=ns.threads,
    )
    payload = {
        "found": suggestion.found,
        "function": suggestion.function.tolist() if suggestion.found else None,
        "samples_used": suggestion.samples_used,
        "angular_gap": suggestion.angular_gap,
        "reference": w.tolist(),
        "mode": ns.mode,
    }
    report = Report(kind="suggestion", payload=payload, metadata=_metadata(ns, seed, data, roi))
    _emit(ns, report, lambda out: plots.plot_suggestion(payload, f"{out}/suggest.png"))
    return 0


def _cmd_audit(ns) -> int:
    seed = _seed(ns)
    data = _dataset(ns)
    w = _weights(ns.weights)
    roi = RegionOfInterest.around(w, _theta(ns))
    result = audit_reference(
        data, w, roi, ns.samples, ns.alpha, RngStream(seed),
        scope=_scope(ns), gamma=ns.gamma, threads=ns.threads,
    )
    payload = {
        "stability": result.stability,
        "error": result.error,
        "alpha": result.alpha,
        "samples": result.samples,
        "matches": result.matches,
        "scope": ns.scope,
    }
    report = Report(kind="audit", payload=payload, metadata=_metadata(ns, seed, data, roi))
    _emit(ns, report)
    return 0


def _cmd_stable(ns) -> int:
    seed = _seed(ns)
    data = _dataset(ns)
    w = _weights(ns.weights)
    roi = RegionOfInterest.around(w, _theta(ns))
    scope = _scope(ns)
    report_data = stable_rankings(
        data, roi, ns.samples, ns.top, scope, RngStream(seed),
        alpha=ns.alpha, reference=w, gamma=ns.gamma, threads=ns.threads,
    )
    top_entries = [
        {
            "fingerprint": e.fingerprint,
            "count": e.count,
            "stability": e.stability,
            "ids": list(e.ids),
            "weights": e.weights.tolist(),
        }
        for e in report_data.top_rankings
    ]
    payload = {
        "top_rankings": top_entries,
        "histogram": report_data.histogram,
        "total_samples": report_data.total_samples,
        "scope": {"kind": scope.kind, "k": scope.k, "ordered": scope.ordered},
        "reference_stability": list(report_data.reference_stability),
    }
    report = Report(kind="stability", payload=payload, metadata=_metadata(ns, seed, data, roi))
    _emit(ns, report, lambda out: plots.plot_stability_histogram(payload, f"{out}/stable.png"))
    return 0


def _cmd_arrange(ns) -> int:
    seed = _seed(ns)
    data = _dataset(ns)
    roi = RegionOfInterest.around(_weights(ns.weights), _theta(ns))
    arr = new_arrangement(roi, ns.samples, RngStream(seed), gamma=ns.gamma)
    planes = all_ordering_exchanges(data)
    if ns.max_planes is not None:
        planes = planes[: ns.max_planes]
    splits = sum(arr.insert(h) for h in planes)
    region_entries = [
        {
            "first": region.first,
            "last": region.last,
            "count": region.size,
            "volume_estimate": vol,
            "signature": list(region.signature),
        }
        for region, vol in arr.regions()
    ]
    payload = {
        "regions": region_entries,
        "region_count": arr.region_count,
        "samples": ns.samples,
        "hyperplanes": len(planes),
        "splits": splits,
    }
    report = Report(kind="arrangement", payload=payload, metadata=_metadata(ns, seed, data, roi))
    _emit(ns, report, lambda out: plots.plot_arrangement_volumes(payload, f"{out}/arrange.png"))
    return 0


_COMMANDS = {
    "sample": _cmd_sample,
    "sample-roi": _cmd_sample_roi,
    "rank": _cmd_rank,
    "up": _cmd_up,
    "suggest": _cmd_suggest,
    "audit": _cmd_audit,
    "stable": _cmd_stable,
    "arrange": _cmd_arrange,
}


def run(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return _COMMANDS[ns.command](ns)
    except _DATA_ERRORS as exc:
        print(f"fairscore: data error: {exc}", file=sys.stderr)
        return 2
    except (FairscoreError, ValueError) as exc:
        print(f"fairscore: {exc}", file=sys.stderr)
        return 3


def main() -> None:  # console-script entry point
    raise SystemExit(run())


if __name__ == "__main__":
    main()
