"""Sequence-level alignment profiles.

For one sample, the layer profile is metric(mean_pool(speech_l), mean_pool(text_l))
for l = 1..L; layer 0 is kept in storage for interventions but never enters a
profile. A corpus profile is the plain per-layer mean over samples, folded in
lexicographic id order so repeated runs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AnalysisError, DimensionMismatch, EmptySet
from .kernels import mean_pool, metric_fn
from .store import ActivationSet, LayerStack
from .workers import ordered_map


@dataclass(frozen=True)
class SimilarityProfile:
    metric: str  # "cos" | "dist"
    values: tuple[float, ...]  # indexed by layer 1..L
    sample_count: int

    @property
    def layer_count(self) -> int:
        return len(self.values)


def layer_profile(speech: LayerStack, text: LayerStack, metric: str) -> SimilarityProfile:
    """Per-layer similarity between mean-pooled speech and text stacks."""
    fn = metric_fn(metric)
    if speech.dim != text.dim:
        raise DimensionMismatch(f"stacks disagree on d: {speech.dim} vs {text.dim}")
    if speech.layer_count != text.layer_count:
        raise DimensionMismatch(
            f"stacks disagree on L: {speech.layer_count} vs {text.layer_count}"
        )
    values = []
    for l in range(1, speech.layer_count + 1):
        try:
            values.append(fn(mean_pool(speech.layer(l)), mean_pool(text.layer(l))))
        except AnalysisError as exc:
            raise type(exc)(f"layer {l}: {exc}") from exc
    return SimilarityProfile(metric=metric, values=tuple(values), sample_count=1)


def per_sample_profiles(
    aset: ActivationSet, metric: str
) -> list[tuple[str, SimilarityProfile]]:
    """Profiles for every sample, in sorted-id order."""
    ids = aset.ids()

    def one(sample_id: str) -> tuple[str, SimilarityProfile]:
        speech, text = aset.read_pair(sample_id)
        return sample_id, layer_profile(speech, text, metric)

    return ordered_map(one, ids)


def aggregate_profiles(aset: ActivationSet, metric: str) -> SimilarityProfile:
    """Per-layer arithmetic mean of per-sample profiles over sorted ids."""
    if len(aset) == 0:
        raise EmptySet("activation set has no samples")
    profiles = per_sample_profiles(aset, metric)
    stacked = np.array([p.values for _, p in profiles], dtype=np.float64)
    return SimilarityProfile(
        metric=metric,
        values=tuple(float(v) for v in stacked.mean(axis=0)),
        sample_count=len(profiles),
    )


def layer_averaged_scalar(profile: SimilarityProfile) -> float:
    """Mean of the profile over layers: one scalar per checkpoint."""
    if profile.layer_count == 0:
        raise EmptySet("profile has no layers")
    return float(np.mean(profile.values))
