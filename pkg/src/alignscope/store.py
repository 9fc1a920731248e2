"""Paired-activation container: manifest JSON plus raw float32 payloads.

Layout contract
---------------
A payload holds the full layer stack for one sample and one modality:
layers 0..L concatenated (layer 0 = post-embedding/post-adapter input,
1..L = block outputs), each layer a T x d matrix, row-major, 32-bit IEEE-754
little-endian, no header or padding. Byte length is therefore exactly
(L+1) * T * d * 4. Values are decoded to float64 before any computation;
rank statistics and R squared are sensitive to accumulation error.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    IoFailure,
    MissingFile,
    NonFiniteValue,
    SchemaViolation,
    ShapeMismatch,
    SizeMismatch,
    UnknownSample,
)

MANIFEST_VERSION = 1
BYTES_PER_VALUE = 4  # float32

MODALITIES = ("speech", "text")


@dataclass(frozen=True)
class SampleEntry:
    id: str
    speech_frames: int
    text_tokens: int
    speech_payload: str
    text_payload: str
    text_token_strings: tuple[str, ...] | None = None
    stale: bool = False  # layers >= 1 no longer match layer 0 (post-intervention)

    def frames(self, modality: str) -> int:
        if modality == "speech":
            return self.speech_frames
        if modality == "text":
            return self.text_tokens
        raise ValueError(f"unknown modality {modality!r}")

    def payload(self, modality: str) -> str:
        return self.speech_payload if modality == "speech" else self.text_payload


@dataclass(frozen=True)
class Manifest:
    version: int
    dim: int
    layer_count: int
    samples: tuple[SampleEntry, ...]
    base_dir: Path
    metadata: dict = field(default_factory=dict)

    def entry(self, sample_id: str) -> SampleEntry:
        for s in self.samples:
            if s.id == sample_id:
                return s
        raise UnknownSample(f"sample {sample_id!r} not in manifest")

    def ids(self) -> list[str]:
        return sorted(s.id for s in self.samples)

    def expected_bytes(self, frames: int) -> int:
        return (self.layer_count + 1) * frames * self.dim * BYTES_PER_VALUE


@dataclass(frozen=True)
class LayerStack:
    """All layers of one sample/modality as an (L+1, T, d) float64 array."""

    modality: str
    layers: np.ndarray

    @property
    def layer_count(self) -> int:
        return self.layers.shape[0] - 1

    @property
    def frames(self) -> int:
        return self.layers.shape[1]

    @property
    def dim(self) -> int:
        return self.layers.shape[2]

    def layer(self, l: int) -> np.ndarray:
        return self.layers[l]


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise SchemaViolation(msg)


def _parse_entry(raw: object, index: int) -> SampleEntry:
    _require(isinstance(raw, dict), f"samples[{index}] is not an object")
    assert isinstance(raw, dict)
    for key, typ in (
        ("id", str),
        ("speech_frames", int),
        ("text_tokens", int),
        ("speech_payload", str),
        ("text_payload", str),
    ):
        _require(key in raw, f"samples[{index}] missing field {key!r}")
        _require(
            isinstance(raw[key], typ) and not isinstance(raw[key], bool),
            f"samples[{index}].{key} has wrong type",
        )
    _require(raw["id"] != "", f"samples[{index}].id is empty")
    _require(raw["speech_frames"] >= 1, f"samples[{index}].speech_frames < 1")
    _require(raw["text_tokens"] >= 1, f"samples[{index}].text_tokens < 1")

    token_strings = raw.get("text_token_strings")
    if token_strings is not None:
        _require(
            isinstance(token_strings, list)
            and all(isinstance(t, str) for t in token_strings),
            f"samples[{index}].text_token_strings must be a list of strings",
        )
        _require(
            len(token_strings) == raw["text_tokens"],
            f"samples[{index}].text_token_strings length != text_tokens",
        )
        token_strings = tuple(token_strings)

    stale = raw.get("stale", False)
    _require(isinstance(stale, bool), f"samples[{index}].stale must be a boolean")

    return SampleEntry(
        id=raw["id"],
        speech_frames=raw["speech_frames"],
        text_tokens=raw["text_tokens"],
        speech_payload=raw["speech_payload"],
        text_payload=raw["text_payload"],
        text_token_strings=token_strings,
        stale=stale,
    )


def load_manifest(path) -> Manifest:
    """Parse and validate a manifest; stat-check every payload's exact size."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaViolation(f"manifest {path}: {exc}") from exc

    _require(isinstance(raw, dict), "manifest root is not an object")
    for key in ("version", "dim", "layer_count", "samples"):
        _require(key in raw, f"manifest missing field {key!r}")
    _require(raw["version"] == MANIFEST_VERSION, f"unsupported version {raw['version']!r}")
    _require(
        isinstance(raw["dim"], int) and not isinstance(raw["dim"], bool) and raw["dim"] > 0,
        "dim must be a positive integer",
    )
    _require(
        isinstance(raw["layer_count"], int)
        and not isinstance(raw["layer_count"], bool)
        and raw["layer_count"] >= 1,
        "layer_count must be an integer >= 1",
    )
    _require(isinstance(raw["samples"], list), "samples must be a list")

    metadata = raw.get("metadata", {})
    _require(isinstance(metadata, dict), "metadata must be an object")

    entries = [_parse_entry(s, i) for i, s in enumerate(raw["samples"])]
    seen: set[str] = set()
    for e in entries:
        _require(e.id not in seen, f"duplicate sample id {e.id!r}")
        seen.add(e.id)

    manifest = Manifest(
        version=raw["version"],
        dim=raw["dim"],
        layer_count=raw["layer_count"],
        samples=tuple(entries),
        base_dir=path.parent,
        metadata=metadata,
    )

    for e in entries:
        for modality in MODALITIES:
            payload = manifest.base_dir / e.payload(modality)
            if not payload.is_file():
                raise MissingFile(f"sample {e.id!r}: payload not found: {payload}")
            expected = manifest.expected_bytes(e.frames(modality))
            actual = os.stat(payload).st_size
            if actual != expected:
                raise SizeMismatch(
                    f"sample {e.id!r} {modality} payload {payload.name}: "
                    f"{actual} bytes, expected {expected}"
                )
    return manifest


def read_sample(manifest: Manifest, sample_id: str, modality: str) -> LayerStack:
    """Decode one payload into an (L+1, T, d) float64 stack.

    Rejects non-finite values with the offending (layer, row, col) location.
    """
    if modality not in MODALITIES:
        raise ValueError(f"unknown modality {modality!r}")
    entry = manifest.entry(sample_id)
    payload = manifest.base_dir / entry.payload(modality)
    if not payload.is_file():
        raise UnknownSample(f"sample {sample_id!r}: {modality} payload absent: {payload}")

    frames = entry.frames(modality)
    expected = manifest.expected_bytes(frames)
    data = payload.read_bytes()
    if len(data) != expected:
        raise SizeMismatch(
            f"sample {sample_id!r} {modality}: {len(data)} bytes, expected {expected}"
        )
    flat = np.frombuffer(data, dtype="<f4")
    stack = flat.reshape(manifest.layer_count + 1, frames, manifest.dim).astype(np.float64)

    if not np.isfinite(stack).all():
        layer, row, col = np.argwhere(~np.isfinite(stack))[0]
        raise NonFiniteValue(
            f"sample {sample_id!r} {modality}: non-finite value at "
            f"layer {layer}, row {row}, col {col}"
        )
    return LayerStack(modality=modality, layers=stack)


def write_sample(matrices: Sequence[np.ndarray], path) -> None:
    """Write a layer stack (layer 0 first) as raw little-endian float32.

    read_sample(write_sample(S)) == S exactly for float32-representable input.
    """
    if len(matrices) == 0:
        raise ShapeMismatch("no layers to write")
    arrays = [np.asarray(m) for m in matrices]
    shape = arrays[0].shape
    if len(shape) != 2:
        raise ShapeMismatch(f"layer 0 is not a matrix: shape {shape}")
    for l, a in enumerate(arrays):
        if a.shape != shape:
            raise ShapeMismatch(f"layer {l} shape {a.shape} != layer 0 shape {shape}")
        if not np.isfinite(a).all():
            raise ShapeMismatch(f"layer {l} contains non-finite values")
    blob = b"".join(np.ascontiguousarray(a, dtype="<f4").tobytes() for a in arrays)
    try:
        Path(path).write_bytes(blob)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def write_manifest(
    path,
    dim: int,
    layer_count: int,
    entries: Iterable[SampleEntry],
    metadata: dict | None = None,
) -> Path:
    """Emit manifest JSON next to already-written payload files."""
    path = Path(path)
    samples = []
    for e in entries:
        rec: dict = {
            "id": e.id,
            "speech_frames": e.speech_frames,
            "text_tokens": e.text_tokens,
            "speech_payload": e.speech_payload,
            "text_payload": e.text_payload,
        }
        if e.text_token_strings is not None:
            rec["text_token_strings"] = list(e.text_token_strings)
        if e.stale:
            rec["stale"] = True
        samples.append(rec)
    doc: dict = {
        "version": MANIFEST_VERSION,
        "dim": dim,
        "layer_count": layer_count,
        "samples": samples,
    }
    if metadata:
        doc["metadata"] = metadata
    try:
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


class ActivationSet:
    """A validated manifest plus on-demand payload decoding.

    Immutable after construction; safe to share across worker threads.
    """

    def __init__(self, manifest: Manifest):
        self.manifest = manifest

    @classmethod
    def open(cls, manifest_path) -> "ActivationSet":
        return cls(load_manifest(manifest_path))

    @property
    def dim(self) -> int:
        return self.manifest.dim

    @property
    def layer_count(self) -> int:
        return self.manifest.layer_count

    def ids(self) -> list[str]:
        return self.manifest.ids()

    def __len__(self) -> int:
        return len(self.manifest.samples)

    def read(self, sample_id: str, modality: str) -> LayerStack:
        return read_sample(self.manifest, sample_id, modality)

    def read_pair(self, sample_id: str) -> tuple[LayerStack, LayerStack]:
        return self.read(sample_id, "speech"), self.read(sample_id, "text")
