"""Token-level alignment: similarity matrices, extreme-value paths, and scores.

For layer l the token matrix holds metric(speech_row_i, text_row_j). The
alignment path picks, per text token j, the speech frame with maximal cosine
(or minimal distance); exact ties break to the smallest frame index, matching
reading order. Path monotonicity is the tie-corrected Spearman rank
correlation between j and the chosen frame indices; repeated frame indices
are common whenever T_s != T_t, so ranks are averaged before the Pearson
step rather than using the no-ties shortcut formula. The alignment path
score is the flat mean of path values over all layers 1..L and all text
tokens.

Per-sample monotonicity is the per-layer statistic averaged over layers; if
any layer's path is constant the rank test is undefined there, the sample's
statistic cannot be averaged over all layers, and the sample is excluded
from the corpus aggregate (counted, never imputed as zero).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInput,
    DimensionMismatch,
    EmptySet,
    LengthMismatch,
    ZeroVector,
)
from .store import ActivationSet, LayerStack
from .workers import ordered_map


@dataclass(frozen=True)
class TokenMatrix:
    metric: str  # "cos" | "dist"
    layer: int
    values: np.ndarray  # T_s x T_t

    @property
    def speech_frames(self) -> int:
        return self.values.shape[0]

    @property
    def text_tokens(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class AlignmentPath:
    metric: str
    layer: int
    indices: tuple[int, ...]  # i*_j per text token, in [0, T_s)
    values: tuple[float, ...]  # matrix entry at (i*_j, j)


@dataclass(frozen=True)
class AlignmentStats:
    rho_cos: float | None
    rho_dist: float | None
    consistency: float
    aps_cos: float
    aps_dist: float


@dataclass(frozen=True)
class CorpusAlignment:
    aggregate: AlignmentStats
    per_sample: tuple[tuple[str, AlignmentStats], ...]
    excluded_rho_cos: int
    excluded_rho_dist: int


def token_matrix(speech_layer, text_layer, metric: str, layer: int = 0) -> TokenMatrix:
    """Pairwise T_s x T_t similarity matrix for one layer."""
    s = np.asarray(speech_layer, dtype=np.float64)
    t = np.asarray(text_layer, dtype=np.float64)
    if s.ndim != 2 or t.ndim != 2:
        raise DimensionMismatch("token_matrix expects 2-d row matrices")
    if s.shape[1] != t.shape[1]:
        raise DimensionMismatch(f"d mismatch: speech {s.shape[1]} vs text {t.shape[1]}")

    if metric == "cos":
        sn = np.linalg.norm(s, axis=1)
        tn = np.linalg.norm(t, axis=1)
        for i in np.flatnonzero(sn == 0.0):
            raise ZeroVector(f"layer {layer}: speech row {i} has zero norm")
        for j in np.flatnonzero(tn == 0.0):
            raise ZeroVector(f"layer {layer}: text row {j} has zero norm")
        values = np.clip((s / sn[:, None]) @ (t / tn[:, None]).T, -1.0, 1.0)
    elif metric == "dist":
        diff = s[:, None, :] - t[None, :, :]
        values = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return TokenMatrix(metric=metric, layer=layer, values=values)


def alignment_path(m: TokenMatrix) -> AlignmentPath:
    """Column extremes: argmax per text token for cos, argmin for dist.

    np.argmax/argmin return the first extreme, which is exactly the
    smallest-index tie rule.
    """
    if m.values.size == 0:
        raise EmptySet("alignment path over an empty matrix")
    if m.metric == "cos":
        idx = np.argmax(m.values, axis=0)
    else:
        idx = np.argmin(m.values, axis=0)
    vals = m.values[idx, np.arange(m.values.shape[1])]
    return AlignmentPath(
        metric=m.metric,
        layer=m.layer,
        indices=tuple(int(i) for i in idx),
        values=tuple(float(v) for v in vals),
    )


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties replaced by the mean rank of their block."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(path: AlignmentPath) -> float:
    """Monotonicity of a path: Spearman rho of (0..T_t-1) vs frame indices."""
    return spearman_indices(path.indices)


def spearman_indices(indices) -> float:
    y = np.asarray(indices, dtype=np.float64)
    if y.size < 2:
        raise DegenerateInput(f"rank correlation needs >= 2 tokens, got {y.size}")
    if np.all(y == y[0]):
        raise DegenerateInput("constant frame indices: rank correlation undefined")
    rx = np.arange(1, y.size + 1, dtype=np.float64)  # text order has no ties
    ry = _average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    return float(np.clip((rx @ ry) / np.sqrt((rx @ rx) * (ry @ ry)), -1.0, 1.0))


def path_consistency(p_cos: AlignmentPath, p_dist: AlignmentPath) -> float:
    """Fraction of text tokens whose cos- and dist-derived frames coincide."""
    if p_cos.layer != p_dist.layer:
        raise ValueError(f"paths from different layers: {p_cos.layer} vs {p_dist.layer}")
    if len(p_cos.indices) != len(p_dist.indices):
        raise LengthMismatch(
            f"path lengths differ: {len(p_cos.indices)} vs {len(p_dist.indices)}"
        )
    matches = sum(a == b for a, b in zip(p_cos.indices, p_dist.indices))
    return matches / len(p_cos.indices)


def layer_paths(
    speech: LayerStack, text: LayerStack, metric: str
) -> list[AlignmentPath]:
    """Alignment paths for layers 1..L of one sample."""
    return [
        alignment_path(token_matrix(speech.layer(l), text.layer(l), metric, layer=l))
        for l in range(1, speech.layer_count + 1)
    ]


def aps(speech: LayerStack, text: LayerStack, metric: str) -> float:
    """Alignment path score: mean path value over layers 1..L and all tokens."""
    paths = layer_paths(speech, text, metric)
    values = [v for p in paths for v in p.values]
    return float(np.mean(values))


def sample_alignment_stats(speech: LayerStack, text: LayerStack) -> AlignmentStats:
    """Per-sample statistics: layer-mean rho per metric, consistency, APS."""
    cos_paths = layer_paths(speech, text, "cos")
    dist_paths = layer_paths(speech, text, "dist")

    def layer_mean_rho(paths: list[AlignmentPath]) -> float | None:
        rhos = []
        for p in paths:
            try:
                rhos.append(spearman(p))
            except DegenerateInput:
                return None
        return float(np.mean(rhos))

    consistency = float(
        np.mean([path_consistency(c, d) for c, d in zip(cos_paths, dist_paths)])
    )
    return AlignmentStats(
        rho_cos=layer_mean_rho(cos_paths),
        rho_dist=layer_mean_rho(dist_paths),
        consistency=consistency,
        aps_cos=float(np.mean([v for p in cos_paths for v in p.values])),
        aps_dist=float(np.mean([v for p in dist_paths for v in p.values])),
    )


def corpus_alignment_stats(aset: ActivationSet) -> CorpusAlignment:
    """Corpus aggregate: mean over samples in sorted-id order.

    Samples whose rank statistic is undefined are dropped from that rho
    aggregate and counted; they still contribute consistency and APS.
    """
    if len(aset) == 0:
        raise EmptySet("activation set has no samples")

    def one(sample_id: str) -> tuple[str, AlignmentStats]:
        speech, text = aset.read_pair(sample_id)
        return sample_id, sample_alignment_stats(speech, text)

    per_sample = ordered_map(one, aset.ids())

    def mean_defined(values: list[float | None]) -> tuple[float | None, int]:
        defined = [v for v in values if v is not None]
        if not defined:
            return None, len(values)
        return float(np.mean(defined)), len(values) - len(defined)

    rho_cos, excl_cos = mean_defined([s.rho_cos for _, s in per_sample])
    rho_dist, excl_dist = mean_defined([s.rho_dist for _, s in per_sample])
    aggregate = AlignmentStats(
        rho_cos=rho_cos,
        rho_dist=rho_dist,
        consistency=float(np.mean([s.consistency for _, s in per_sample])),
        aps_cos=float(np.mean([s.aps_cos for _, s in per_sample])),
        aps_dist=float(np.mean([s.aps_dist for _, s in per_sample])),
    )
    return CorpusAlignment(
        aggregate=aggregate,
        per_sample=tuple(per_sample),
        excluded_rho_cos=excl_cos,
        excluded_rho_dist=excl_dist,
    )
