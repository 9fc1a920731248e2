"""Token-level embedding interventions along the alignment path.

Selection walks the cosine alignment paths of layers 1..L: each text token
gets the mean of its path values as a score and the most frequent aligned
frame across layers (smallest frame on ties) as its target. A frame picked
by several tokens is kept once, paired with its best-scoring token, so no
frame is written twice in one plan. `bottom3` then keeps the three
worst-scoring pairs, `all` keeps everything.

Both operators edit speech rows of layer 0 only; deeper layers are copied
as-is and flagged stale in the output manifest because they no longer
correspond to the patched input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    IndexOutOfRange,
    IoFailure,
    SchemaViolation,
    ZeroVector,
)
from .alignment import layer_paths
from .store import (
    ActivationSet,
    LayerStack,
    SampleEntry,
    write_manifest,
    write_sample,
)

STRATEGIES = ("bottom3", "all")
OPERATORS = ("angle", "length")

# how select_tokens reduces per-layer paths into one pair per token
SELECTION_METADATA = {
    "metric": "cos",
    "frame": "modal index over layers, smallest on ties",
    "score": "mean path value over layers",
}


@dataclass(frozen=True)
class InterventionPlan:
    sample_id: str
    pairs: tuple[tuple[int, int, float], ...]  # (text_index, speech_index, score)
    strategy: str
    operator: str


def angle_project(v_s, v_t) -> np.ndarray:
    """Keep the speech norm, adopt the text direction."""
    v_s = np.asarray(v_s, dtype=np.float64)
    v_t = np.asarray(v_t, dtype=np.float64)
    ns = float(np.linalg.norm(v_s))
    nt = float(np.linalg.norm(v_t))
    if ns == 0.0 or nt == 0.0:
        raise ZeroVector("angle projection undefined for zero-norm vector")
    return ns * (v_t / nt)


def length_normalize(v_s, v_t) -> np.ndarray:
    """Keep the speech direction, adopt the text norm."""
    v_s = np.asarray(v_s, dtype=np.float64)
    v_t = np.asarray(v_t, dtype=np.float64)
    ns = float(np.linalg.norm(v_s))
    nt = float(np.linalg.norm(v_t))
    if ns == 0.0 or nt == 0.0:
        raise ZeroVector("length normalization undefined for zero-norm vector")
    return (nt / ns) * v_s


def operator_fn(operator: str):
    if operator == "angle":
        return angle_project
    if operator == "length":
        return length_normalize
    raise ValueError(f"unknown operator {operator!r}; expected one of {OPERATORS}")


def select_tokens(
    speech: LayerStack,
    text: LayerStack,
    strategy: str,
    operator: str = "angle",
    sample_id: str = "",
) -> InterventionPlan:
    """Pick (text token, speech frame) pairs along the cosine paths."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    operator_fn(operator)  # validate early

    paths = layer_paths(speech, text, "cos")
    t_t = len(paths[0].indices)
    candidates = []  # (text_index, frame, score)
    for j in range(t_t):
        frames = [p.indices[j] for p in paths]
        counts: dict[int, int] = {}
        for f in frames:
            counts[f] = counts.get(f, 0) + 1
        best = max(counts.items(), key=lambda kv: (kv[1], -kv[0]))[0]
        score = float(np.mean([p.values[j] for p in paths]))
        candidates.append((j, best, score))

    # one pair per frame: keep the best-scoring text partner (smaller j on ties)
    by_frame: dict[int, tuple[int, int, float]] = {}
    for j, frame, score in candidates:
        held = by_frame.get(frame)
        if held is None or score > held[2]:
            by_frame[frame] = (j, frame, score)
    deduped = list(by_frame.values())

    if strategy == "bottom3":
        deduped.sort(key=lambda p: (p[2], p[0]))
        selected = deduped[: min(3, len(deduped))]
    else:
        selected = sorted(deduped, key=lambda p: p[0])

    return InterventionPlan(
        sample_id=sample_id,
        pairs=tuple(selected),
        strategy=strategy,
        operator=operator,
    )


def build_plans(aset: ActivationSet, strategy: str, operator: str) -> list[InterventionPlan]:
    """One plan per sample, in sorted-id order."""
    plans = []
    for sample_id in aset.ids():
        speech, text = aset.read_pair(sample_id)
        plans.append(select_tokens(speech, text, strategy, operator, sample_id=sample_id))
    return plans


def _patched_speech_layers(
    speech: LayerStack, text: LayerStack, plan: InterventionPlan
) -> np.ndarray:
    op = operator_fn(plan.operator)
    layers = speech.layers.copy()
    t_s = speech.frames
    t_t = text.frames
    for j, i, _score in plan.pairs:
        if not (0 <= i < t_s):
            raise IndexOutOfRange(f"speech index {i} outside [0, {t_s})")
        if not (0 <= j < t_t):
            raise IndexOutOfRange(f"text index {j} outside [0, {t_t})")
        try:
            layers[0, i] = op(speech.layer(0)[i], text.layer(0)[j])
        except ZeroVector as exc:
            raise ZeroVector(f"pair (text {j}, speech {i}): {exc}") from exc
    return layers


def apply_plans(aset: ActivationSet, plans, out_dir) -> Path:
    """Emit a copy of the whole set with planned layer-0 speech rows replaced.

    Unplanned samples and all text payloads are copied byte-for-byte; a
    patched sample's layers 1..L are carried over unchanged and the entry is
    flagged stale so consumers know they predate the edit.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out_dir}: {exc}") from exc

    by_sample: dict[str, InterventionPlan] = {}
    for plan in plans:
        if plan.sample_id in by_sample:
            raise SchemaViolation(f"multiple plans for sample {plan.sample_id!r}")
        by_sample[plan.sample_id] = plan

    manifest = aset.manifest
    for plan in by_sample.values():
        manifest.entry(plan.sample_id)  # raises UnknownSample for stray plans

    entries = []
    for entry in manifest.samples:
        plan = by_sample.get(entry.id)
        src_speech = manifest.base_dir / entry.speech_payload
        src_text = manifest.base_dir / entry.text_payload
        dst_speech = out_dir / entry.speech_payload
        dst_text = out_dir / entry.text_payload
        try:
            dst_text.write_bytes(src_text.read_bytes())
            if plan is None or not plan.pairs:
                dst_speech.write_bytes(src_speech.read_bytes())
            else:
                speech, text = aset.read_pair(entry.id)
                write_sample(_patched_speech_layers(speech, text, plan), dst_speech)
        except OSError as exc:
            raise IoFailure(f"cannot copy payloads for {entry.id!r}: {exc}") from exc
        stale = plan is not None and len(plan.pairs) > 0
        entries.append(
            SampleEntry(
                id=entry.id,
                speech_frames=entry.speech_frames,
                text_tokens=entry.text_tokens,
                speech_payload=entry.speech_payload,
                text_payload=entry.text_payload,
                text_token_strings=entry.text_token_strings,
                stale=stale,
            )
        )

    metadata = dict(manifest.metadata)
    applied = [p for p in by_sample.values() if p.pairs]
    if applied:
        metadata["intervention"] = {
            "strategy": applied[0].strategy,
            "operator": applied[0].operator,
            "samples": sorted(p.sample_id for p in applied),
            "selection": SELECTION_METADATA,
        }
    return write_manifest(
        out_dir / "manifest.json",
        dim=manifest.dim,
        layer_count=manifest.layer_count,
        entries=entries,
        metadata=metadata,
    )


def apply_plan(aset: ActivationSet, plan: InterventionPlan, out_dir) -> Path:
    return apply_plans(aset, [plan], out_dir)


# --- plan (de)serialization ----------------------------------------------

def plans_to_json(plans) -> list[dict]:
    return [
        {
            "sample_id": p.sample_id,
            "strategy": p.strategy,
            "operator": p.operator,
            "pairs": [
                {"text_index": j, "speech_index": i, "score": score}
                for j, i, score in p.pairs
            ],
            "selection": SELECTION_METADATA,
        }
        for p in plans
    ]


def save_plans(plans, path) -> None:
    Path(path).write_text(json.dumps(plans_to_json(plans), indent=2) + "\n", encoding="utf-8")


def load_plans(path) -> list[InterventionPlan]:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaViolation(f"plan file {path}: {exc}") from exc
    if not isinstance(raw, list):
        raise SchemaViolation(f"plan file {path}: expected a list")
    plans = []
    for rec in raw:
        try:
            pairs = tuple(
                (int(p["text_index"]), int(p["speech_index"]), float(p["score"]))
                for p in rec["pairs"]
            )
            plans.append(
                InterventionPlan(
                    sample_id=rec["sample_id"],
                    pairs=pairs,
                    strategy=rec["strategy"],
                    operator=rec["operator"],
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"plan file {path}: bad record {rec!r}") from exc
    return plans
