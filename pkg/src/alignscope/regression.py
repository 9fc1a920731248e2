"""Benchmark-gap bookkeeping and similarity-vs-gap least squares.

The gap for a checkpoint is text score minus speech score. Regressions put
the gap on y and a similarity predictor on x; for a simple regression R
squared is symmetric in that choice anyway. Fits are computed from centered
sums so that exactly collinear dyadic inputs produce slope/intercept/R
squared without rounding residue.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import (
    DegenerateX,
    DegenerateY,
    InsufficientOverlap,
    MissingFile,
    SchemaViolation,
)

GAP_CONSISTENCY_TOL = 1e-9


def compute_gap(text_score: float, speech_score: float) -> float:
    """Modality gap: text benchmark score minus speech benchmark score."""
    return float(text_score) - float(speech_score)


@dataclass(frozen=True)
class ScoreRecord:
    checkpoint_id: str
    text_score: float
    speech_score: float
    group: str = ""
    gap: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        computed = compute_gap(self.text_score, self.speech_score)
        if self.gap is None:
            object.__setattr__(self, "gap", computed)
        elif abs(self.gap - computed) > GAP_CONSISTENCY_TOL:
            raise SchemaViolation(
                f"checkpoint {self.checkpoint_id!r}: stored gap {self.gap} "
                f"does not match {self.text_score} - {self.speech_score} = {computed}"
            )


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r_squared: float
    n: int
    predictor_name: str


def ols_fit(points: Sequence[tuple[float, float]], predictor_name: str = "x") -> RegressionResult:
    """Least-squares line with intercept; R squared = 1 - SS_res/SS_tot."""
    if len(points) < 2:
        raise DegenerateX(f"need >= 2 points, got {len(points)}")
    xs = [float(x) for x, _ in points]
    ys = [float(y) for _, y in points]
    n = len(xs)
    x_mean = sum(xs) / n
    y_mean = sum(ys) / n
    sxx = sum((x - x_mean) ** 2 for x in xs)
    if sxx == 0.0:
        raise DegenerateX("all predictor values identical")
    sxy = sum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    ss_tot = sum((y - y_mean) ** 2 for y in ys)
    if ss_tot == 0.0:
        raise DegenerateY("response has zero variance; r_squared undefined")
    ss_res = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    return RegressionResult(
        slope=slope,
        intercept=intercept,
        r_squared=1.0 - ss_res / ss_tot,
        n=n,
        predictor_name=predictor_name,
    )


def _check_unique(scores: Sequence[ScoreRecord]) -> None:
    seen: set[str] = set()
    for rec in scores:
        if rec.checkpoint_id in seen:
            raise SchemaViolation(f"duplicate checkpoint id {rec.checkpoint_id!r}")
        seen.add(rec.checkpoint_id)


def correlate(
    predictors: Mapping[str, float],
    scores: Sequence[ScoreRecord],
    predictor_name: str,
) -> RegressionResult:
    """Inner-join on checkpoint id (sorted) and regress gap on the predictor."""
    _check_unique(scores)
    by_id = {rec.checkpoint_id: rec for rec in scores}
    shared = sorted(set(predictors) & set(by_id))
    if len(shared) < 2:
        raise InsufficientOverlap(
            f"only {len(shared)} checkpoint(s) shared between predictors and scores"
        )
    points = [(float(predictors[cid]), by_id[cid].gap) for cid in shared]
    return ols_fit(points, predictor_name=predictor_name)


@dataclass(frozen=True)
class GroupedFit:
    predictor_name: str
    group: str
    result: RegressionResult


def correlate_groups(
    predictors_by_name: Mapping[str, Mapping[str, float]],
    scores: Sequence[ScoreRecord],
) -> list[GroupedFit]:
    """One fit per predictor over all checkpoints, plus one per score group.

    Groups with fewer than two joined points are skipped with a warning; the
    overall fit failing is a hard error.
    """
    _check_unique(scores)
    fits: list[GroupedFit] = []
    groups = sorted({rec.group for rec in scores if rec.group})
    for name in sorted(predictors_by_name):
        predictor = predictors_by_name[name]
        fits.append(GroupedFit(name, "all", correlate(predictor, scores, name)))
        for group in groups:
            members = [rec for rec in scores if rec.group == group]
            try:
                fits.append(GroupedFit(name, group, correlate(predictor, members, name)))
            except InsufficientOverlap:
                warnings.warn(
                    f"predictor {name!r}, group {group!r}: fewer than 2 joined "
                    "points, group skipped"
                )
    return fits


# --- CSV interfaces ---------------------------------------------------------

SCORE_FIELDS = ("checkpoint_id", "group", "text_score", "speech_score")
PREDICTOR_FIELDS = ("checkpoint_id", "predictor", "value")
FIT_FIELDS = ("predictor", "group", "slope", "intercept", "r_squared", "n")


def _float_field(row: dict, key: str, path) -> float:
    try:
        return float(row[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation(f"{path}: bad {key!r} in row {row!r}") from exc


def load_scores(path) -> list[ScoreRecord]:
    """Read `checkpoint_id,group,text_score,speech_score[,gap]` rows.

    A gap column, when present, must match the score difference to 1e-9.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"score table not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [k for k in SCORE_FIELDS if k not in header]
        if missing:
            raise SchemaViolation(f"{path}: missing column(s) {missing}")
        records = []
        for row in reader:
            if not row.get("checkpoint_id"):
                raise SchemaViolation(f"{path}: empty checkpoint_id in row {row!r}")
            gap = _float_field(row, "gap", path) if row.get("gap") not in (None, "") else None
            records.append(
                ScoreRecord(
                    checkpoint_id=row["checkpoint_id"],
                    group=row.get("group") or "",
                    text_score=_float_field(row, "text_score", path),
                    speech_score=_float_field(row, "speech_score", path),
                    gap=gap,
                )
            )
    _check_unique(records)
    return records


def load_predictors(path) -> dict[str, dict[str, float]]:
    """Read `checkpoint_id,predictor,value` rows into name -> id -> value."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"predictor table not found: {path}")
    out: dict[str, dict[str, float]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [k for k in PREDICTOR_FIELDS if k not in header]
        if missing:
            raise SchemaViolation(f"{path}: missing column(s) {missing}")
        for row in reader:
            name = row.get("predictor") or ""
            cid = row.get("checkpoint_id") or ""
            if not name or not cid:
                raise SchemaViolation(f"{path}: incomplete row {row!r}")
            table = out.setdefault(name, {})
            if cid in table:
                raise SchemaViolation(f"{path}: duplicate ({cid}, {name}) entry")
            table[cid] = _float_field(row, "value", path)
    return out


def write_fits_csv(fits: Sequence[GroupedFit], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(FIT_FIELDS)
        for f in fits:
            writer.writerow(
                [
                    f.predictor_name,
                    f.group,
                    repr(f.result.slope),
                    repr(f.result.intercept),
                    repr(f.result.r_squared),
                    f.result.n,
                ]
            )


def fits_to_json(fits: Sequence[GroupedFit]) -> list[dict]:
    return [
        {
            "predictor": f.predictor_name,
            "group": f.group,
            "slope": f.result.slope,
            "intercept": f.result.intercept,
            "r_squared": f.result.r_squared,
            "n": f.result.n,
        }
        for f in fits
    ]
