"""Command-line interface.

Exit codes: 0 success, 1 domain error (message on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import report as report_mod
from .alignment import corpus_alignment_stats, layer_paths
from .coarse import aggregate_profiles, layer_averaged_scalar, per_sample_profiles
from .errors import AnalysisError
from .fixture import FixtureSpec, fixture_spec_from_manifest, generate_fixture, planted_path_accuracy
from .intervene import OPERATORS, STRATEGIES, apply_plans, build_plans, save_plans
from .regression import correlate_groups, fits_to_json, load_predictors, load_scores, write_fits_csv
from .report import AGGREGATE_LABEL, RegressionPlot, ReportBundle, render_report
from .store import ActivationSet

# recorded in every report so aggregate semantics are explicit
AGGREGATION_NOTES = {
    "profile_estimator": "per-sample metric values, averaged per layer",
    "sample_order": "lexicographic sample id",
    "rho_reduction": "per-layer rank correlation, averaged over layers then samples",
}


def _metrics(arg: str) -> list[str]:
    if arg == "both":
        return ["cos", "dist"]
    return [arg]


def _cmd_validate(args) -> int:
    aset = ActivationSet.open(args.manifest)
    for sample_id in aset.ids():
        aset.read_pair(sample_id)
    print(
        f"ok: {len(aset)} sample(s), dim={aset.dim}, layers=1..{aset.layer_count} (+0)"
    )
    return 0


def _cmd_coarse(args) -> int:
    aset = ActivationSet.open(args.manifest)
    profiles = []
    for metric in _metrics(args.metric):
        if args.per_sample:
            profiles.extend(per_sample_profiles(aset, metric))
        agg = aggregate_profiles(aset, metric)
        profiles.append((AGGREGATE_LABEL, agg))
        print(f"{metric}: layer-averaged scalar = {layer_averaged_scalar(agg)!r}")
    rows = report_mod.profile_rows(profiles)
    Path(args.out).write_text(
        "\n".join([report_mod.PROFILE_HEADER] + rows) + "\n", encoding="utf-8"
    )
    print(f"wrote {args.out}")
    return 0


def _cmd_paths(args) -> int:
    aset = ActivationSet.open(args.manifest)
    corpus = corpus_alignment_stats(aset)
    rows = report_mod.alignment_rows(corpus)
    Path(args.out).write_text(
        "\n".join([report_mod.ALIGNMENT_HEADER] + rows) + "\n", encoding="utf-8"
    )
    agg = corpus.aggregate
    print(
        f"aggregate: rho_cos={agg.rho_cos!r} rho_dist={agg.rho_dist!r} "
        f"consistency={agg.consistency!r} (excluded: cos {corpus.excluded_rho_cos}, "
        f"dist {corpus.excluded_rho_dist})"
    )
    print(f"wrote {args.out}")
    if args.dump_paths:
        dump = ["sample_id,layer,metric,j,i,value"]
        for sample_id in aset.ids():
            speech, text = aset.read_pair(sample_id)
            for metric in ("cos", "dist"):
                for path in layer_paths(speech, text, metric):
                    for j, (i, v) in enumerate(zip(path.indices, path.values)):
                        dump.append(f"{sample_id},{path.layer},{metric},{j},{i},{v!r}")
        Path(args.dump_paths).write_text("\n".join(dump) + "\n", encoding="utf-8")
        print(f"wrote {args.dump_paths}")
    return 0


def _cmd_aps(args) -> int:
    aset = ActivationSet.open(args.manifest)
    corpus = corpus_alignment_stats(aset)
    for metric in _metrics(args.metric):
        value = corpus.aggregate.aps_cos if metric == "cos" else corpus.aggregate.aps_dist
        print(f"aps_{metric} = {value!r}")
    if args.fixture_accuracy:
        fixture_spec_from_manifest(aset)  # fails fast when not a fixture
        for metric in _metrics(args.metric):
            print(f"path_accuracy_{metric} = {planted_path_accuracy(aset, metric)!r}")
    return 0


def _cmd_regress(args) -> int:
    scores = load_scores(args.scores)
    predictors = load_predictors(args.predictors)
    fits = correlate_groups(predictors, scores)
    for f in fits:
        r = f.result
        print(
            f"{f.predictor_name} [{f.group}]: slope={r.slope!r} "
            f"intercept={r.intercept!r} r_squared={r.r_squared!r} n={r.n}"
        )
    if args.out:
        write_fits_csv(fits, args.out)
        print(f"wrote {args.out}")
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps(fits_to_json(fits), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        print(f"wrote {args.json_out}")
    return 0


def _cmd_intervene(args) -> int:
    aset = ActivationSet.open(args.manifest)
    plans = build_plans(aset, args.strategy, args.operator)
    if args.sample:
        plans = [p for p in plans if p.sample_id in set(args.sample)]
    manifest_path = apply_plans(aset, plans, args.out_dir)
    if args.plans:
        save_plans(plans, args.plans)
        print(f"wrote {args.plans}")
    total_pairs = sum(len(p.pairs) for p in plans)
    print(f"patched {total_pairs} row(s) across {len(plans)} sample(s)")
    print(f"wrote {manifest_path}")
    return 0


def _cmd_fixture(args) -> int:
    planted = None
    if args.planted_map:
        planted = tuple(int(t) for t in args.planted_map.split(","))
    spec = FixtureSpec(
        n_samples=args.samples,
        layer_count=args.layers,
        dim=args.dim,
        text_len=args.text_len,
        speech_len=args.speech_len,
        noise_sigma=args.noise_sigma,
        seed=args.seed,
        planted_map=planted,
    )
    manifest_path = generate_fixture(spec, args.out_dir)
    print(f"wrote {manifest_path}")
    return 0


def _cmd_report(args) -> int:
    bundle = ReportBundle(metadata=dict(AGGREGATION_NOTES))
    aset = ActivationSet.open(args.manifest)
    for metric in ("cos", "dist"):
        if args.per_sample:
            bundle.profiles.extend(per_sample_profiles(aset, metric))
        bundle.profiles.append((AGGREGATE_LABEL, aggregate_profiles(aset, metric)))
    bundle.alignment = corpus_alignment_stats(aset)
    bundle.metadata["samples"] = len(aset)
    bundle.metadata["excluded_rho"] = {
        "cos": bundle.alignment.excluded_rho_cos,
        "dist": bundle.alignment.excluded_rho_dist,
    }

    if args.scores and args.predictors:
        scores = load_scores(args.scores)
        predictors = load_predictors(args.predictors)
        by_id = {rec.checkpoint_id: rec for rec in scores}
        for fit in correlate_groups(predictors, scores):
            members = (
                by_id
                if fit.group == "all"
                else {k: v for k, v in by_id.items() if v.group == fit.group}
            )
            table = predictors[fit.predictor_name]
            shared = sorted(set(table) & set(members))
            points = tuple((float(table[cid]), by_id[cid].gap) for cid in shared)
            bundle.regressions.append(RegressionPlot(fit=fit, points=points))

    formats = tuple(args.formats.split(","))
    for path in render_report(bundle, args.out_dir, formats=formats):
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alignscope",
        description="Speech-text alignment analysis over stored activations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a manifest and decode every payload")
    p.add_argument("--manifest", required=True)
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("coarse", help="layer similarity profiles")
    p.add_argument("--manifest", required=True)
    p.add_argument("--metric", choices=["cos", "dist", "both"], default="both")
    p.add_argument("--out", required=True)
    p.add_argument("--per-sample", action="store_true")
    p.set_defaults(fn=_cmd_coarse)

    p = sub.add_parser("paths", help="alignment path statistics")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-paths", default=None, help="also dump every path cell")
    p.set_defaults(fn=_cmd_paths)

    p = sub.add_parser("aps", help="alignment path score")
    p.add_argument("--manifest", required=True)
    p.add_argument("--metric", choices=["cos", "dist", "both"], default="both")
    p.add_argument(
        "--fixture-accuracy",
        action="store_true",
        help="also report planted-path recovery (fixture manifests only)",
    )
    p.set_defaults(fn=_cmd_aps)

    p = sub.add_parser("regress", help="similarity-vs-gap linear fits")
    p.add_argument("--scores", required=True)
    p.add_argument("--predictors", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--json-out", default=None)
    p.set_defaults(fn=_cmd_regress)

    p = sub.add_parser("intervene", help="patch layer-0 speech rows along the path")
    p.add_argument("--manifest", required=True)
    p.add_argument("--strategy", choices=list(STRATEGIES), required=True)
    p.add_argument("--operator", choices=list(OPERATORS), required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--plans", default=None, help="also write the plan JSON here")
    p.add_argument("--sample", action="append", default=None, help="limit to sample id")
    p.set_defaults(fn=_cmd_intervene)

    p = sub.add_parser("fixture", help="generate a planted-alignment activation set")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--samples", type=int, default=4)
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--text-len", type=int, default=6)
    p.add_argument("--speech-len", type=int, default=10)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--planted-map", default=None, help="comma-separated frame indices")
    p.set_defaults(fn=_cmd_fixture)

    p = sub.add_parser("report", help="full report: tables and figures")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--scores", default=None)
    p.add_argument("--predictors", default=None)
    p.add_argument("--formats", default="csv,json,svg")
    p.add_argument("--per-sample", action="store_true")
    p.set_defaults(fn=_cmd_report)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except AnalysisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
