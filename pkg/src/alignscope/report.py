"""Report emission: CSV/JSON tables plus deterministic SVG figures.

A bundle is assembled by the CLI from whatever analyses ran; rendering
writes only the sections that are present and fails on an entirely empty
bundle rather than producing an empty report directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .alignment import CorpusAlignment
from .coarse import SimilarityProfile
from .errors import EmptySet, IoFailure
from .regression import GroupedFit, write_fits_csv
from .svgplot import Series, line_chart, scatter_fit

PROFILE_HEADER = "sample_id,metric,layer,value"
ALIGNMENT_HEADER = "sample_id,layer,metric,statistic,value"
AGGREGATE_LABEL = "AGGREGATE"
ALL_LAYERS = "all"


@dataclass(frozen=True)
class RegressionPlot:
    fit: GroupedFit
    points: tuple[tuple[float, float], ...]


@dataclass
class ReportBundle:
    # (label, profile); labels include AGGREGATE and/or sample ids
    profiles: list[tuple[str, SimilarityProfile]] = field(default_factory=list)
    alignment: CorpusAlignment | None = None
    regressions: list[RegressionPlot] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def is_empty(self) -> bool:
        return not self.profiles and self.alignment is None and not self.regressions


def profile_rows(profiles: list[tuple[str, SimilarityProfile]]) -> list[str]:
    rows = []
    for label, prof in profiles:
        for l, value in enumerate(prof.values, start=1):
            rows.append(f"{label},{prof.metric},{l},{value!r}")
    return rows


def alignment_rows(corpus: CorpusAlignment) -> list[str]:
    def fmt(v: float | None) -> str:
        return "" if v is None else repr(v)

    rows = []
    for sample_id, stats in corpus.per_sample + ((AGGREGATE_LABEL, corpus.aggregate),):
        rows.append(f"{sample_id},{ALL_LAYERS},cos,rho,{fmt(stats.rho_cos)}")
        rows.append(f"{sample_id},{ALL_LAYERS},dist,rho,{fmt(stats.rho_dist)}")
        rows.append(f"{sample_id},{ALL_LAYERS},both,consistency,{stats.consistency!r}")
        rows.append(f"{sample_id},{ALL_LAYERS},cos,aps,{stats.aps_cos!r}")
        rows.append(f"{sample_id},{ALL_LAYERS},dist,aps,{stats.aps_dist!r}")
    return rows


def _stats_json(corpus: CorpusAlignment) -> dict:
    def one(stats) -> dict:
        return {
            "rho_cos": stats.rho_cos,
            "rho_dist": stats.rho_dist,
            "consistency": stats.consistency,
            "aps_cos": stats.aps_cos,
            "aps_dist": stats.aps_dist,
        }

    return {
        "aggregate": one(corpus.aggregate),
        "per_sample": {sid: one(st) for sid, st in corpus.per_sample},
        "excluded_rho_cos": corpus.excluded_rho_cos,
        "excluded_rho_dist": corpus.excluded_rho_dist,
    }


def profile_chart(profiles: list[tuple[str, SimilarityProfile]], metric: str) -> str:
    label_for_metric = "cosine similarity" if metric == "cos" else "euclidean distance"
    series = [
        Series(
            label=label,
            xs=tuple(float(l) for l in range(1, prof.layer_count + 1)),
            ys=tuple(prof.values),
        )
        for label, prof in profiles
        if prof.metric == metric
    ]
    return line_chart(series, f"layer profile ({label_for_metric})", "layer", label_for_metric)


def regression_chart(plot: RegressionPlot) -> str:
    fit = plot.fit
    r = fit.result
    return scatter_fit(
        list(plot.points),
        r.slope,
        r.intercept,
        f"gap vs {fit.predictor_name} [{fit.group}]",
        fit.predictor_name,
        "gap",
        f"fit (r2={r.r_squared:.4f})",
    )


def render_report(bundle: ReportBundle, out_dir, formats=("csv", "json", "svg")) -> list[Path]:
    """Write the bundle; returns the created file paths (sorted)."""
    if bundle.is_empty():
        raise EmptySet("nothing to report")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out_dir}: {exc}") from exc

    written: list[Path] = []

    def emit_text(name: str, text: str) -> None:
        path = out_dir / name
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc
        written.append(path)

    if "csv" in formats:
        if bundle.profiles:
            emit_text(
                "coarse_profiles.csv",
                "\n".join([PROFILE_HEADER] + profile_rows(bundle.profiles)) + "\n",
            )
        if bundle.alignment is not None:
            emit_text(
                "alignment_stats.csv",
                "\n".join([ALIGNMENT_HEADER] + alignment_rows(bundle.alignment)) + "\n",
            )
        if bundle.regressions:
            path = out_dir / "regression_fits.csv"
            write_fits_csv([p.fit for p in bundle.regressions], path)
            written.append(path)

    if "json" in formats:
        doc: dict = {"metadata": bundle.metadata}
        if bundle.profiles:
            doc["profiles"] = [
                {
                    "label": label,
                    "metric": prof.metric,
                    "values": list(prof.values),
                    "sample_count": prof.sample_count,
                }
                for label, prof in bundle.profiles
            ]
        if bundle.alignment is not None:
            doc["alignment"] = _stats_json(bundle.alignment)
        if bundle.regressions:
            doc["regressions"] = [
                {
                    "predictor": p.fit.predictor_name,
                    "group": p.fit.group,
                    "slope": p.fit.result.slope,
                    "intercept": p.fit.result.intercept,
                    "r_squared": p.fit.result.r_squared,
                    "n": p.fit.result.n,
                    "points": [list(pt) for pt in p.points],
                }
                for p in bundle.regressions
            ]
        emit_text("report.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")

    if "svg" in formats:
        for metric in ("cos", "dist"):
            if any(p.metric == metric for _, p in bundle.profiles):
                emit_text(f"profile_{metric}.svg", profile_chart(bundle.profiles, metric))
        for plot in bundle.regressions:
            name = f"regression_{plot.fit.predictor_name}_{plot.fit.group}.svg"
            emit_text(name.replace("/", "-"), regression_chart(plot))

    return sorted(written)
