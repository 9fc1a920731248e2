"""Synthetic activation sets with a planted token-to-frame alignment.

Text rows are random unit vectors. At every layer, speech row planted_map[j]
is text row j plus isotropic gaussian noise; all other speech rows are fresh
unit vectors scaled by 0.5, so at zero noise the planted row wins both the
cosine maximum and the distance minimum in its column. Generation is fully
determined by the seed: same spec, same bytes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .alignment import layer_paths
from .errors import InvalidSpec
from .store import ActivationSet, SampleEntry, write_manifest, write_sample


def _default_map(text_len: int, speech_len: int) -> tuple[int, ...]:
    # evenly spread; strictly increasing because speech_len >= text_len
    return tuple(j * speech_len // text_len for j in range(text_len))


@dataclass(frozen=True)
class FixtureSpec:
    n_samples: int
    layer_count: int
    dim: int
    text_len: int
    speech_len: int
    noise_sigma: float = 0.0
    seed: int = 0
    planted_map: tuple[int, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.planted_map is None:
            object.__setattr__(self, "planted_map", _default_map(self.text_len, self.speech_len))
        else:
            object.__setattr__(self, "planted_map", tuple(int(i) for i in self.planted_map))
        if self.n_samples < 1:
            raise InvalidSpec("n_samples must be >= 1")
        if self.layer_count < 1:
            raise InvalidSpec("layer_count must be >= 1")
        if self.dim < 1:
            raise InvalidSpec("dim must be >= 1")
        if self.text_len < 1:
            raise InvalidSpec("text_len must be >= 1")
        if self.speech_len < self.text_len:
            raise InvalidSpec("speech_len must be >= text_len")
        if self.noise_sigma < 0:
            raise InvalidSpec("noise_sigma must be >= 0")
        if len(self.planted_map) != self.text_len:
            raise InvalidSpec("planted_map length must equal text_len")
        if any(not 0 <= i < self.speech_len for i in self.planted_map):
            raise InvalidSpec("planted_map indices must lie in [0, speech_len)")
        if any(b <= a for a, b in zip(self.planted_map, self.planted_map[1:])):
            raise InvalidSpec("planted_map must be strictly increasing")


def _unit_rows(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    rows = rng.standard_normal((n, d))
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    while np.any(norms == 0.0):  # pragma: no cover - probability zero
        rows = rng.standard_normal((n, d))
        norms = np.linalg.norm(rows, axis=1, keepdims=True)
    return rows / norms


def generate_fixture(spec: FixtureSpec, out_dir) -> Path:
    """Write a planted-alignment activation set; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    planted = np.array(spec.planted_map, dtype=np.int64)

    entries = []
    for s in range(spec.n_samples):
        sample_id = f"sample-{s:04d}"
        text_layers = []
        speech_layers = []
        for _l in range(spec.layer_count + 1):
            text = _unit_rows(rng, spec.text_len, spec.dim)
            speech = 0.5 * _unit_rows(rng, spec.speech_len, spec.dim)
            if spec.noise_sigma > 0:
                noise = rng.normal(0.0, spec.noise_sigma, (spec.text_len, spec.dim))
                speech[planted] = text + noise
            else:
                speech[planted] = text
            text_layers.append(text)
            speech_layers.append(speech)
        speech_name = f"{sample_id}.speech.bin"
        text_name = f"{sample_id}.text.bin"
        write_sample(speech_layers, out_dir / speech_name)
        write_sample(text_layers, out_dir / text_name)
        entries.append(
            SampleEntry(
                id=sample_id,
                speech_frames=spec.speech_len,
                text_tokens=spec.text_len,
                speech_payload=speech_name,
                text_payload=text_name,
                text_token_strings=tuple(f"tok{j}" for j in range(spec.text_len)),
            )
        )

    metadata = {"fixture": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(spec).items()}}
    return write_manifest(
        out_dir / "manifest.json",
        dim=spec.dim,
        layer_count=spec.layer_count,
        entries=entries,
        metadata=metadata,
    )


def fixture_spec_from_manifest(aset: ActivationSet) -> FixtureSpec:
    meta = aset.manifest.metadata.get("fixture")
    if meta is None:
        raise InvalidSpec("manifest has no fixture metadata")
    return FixtureSpec(
        n_samples=meta["n_samples"],
        layer_count=meta["layer_count"],
        dim=meta["dim"],
        text_len=meta["text_len"],
        speech_len=meta["speech_len"],
        noise_sigma=meta["noise_sigma"],
        seed=meta["seed"],
        planted_map=tuple(meta["planted_map"]),
    )


def planted_path_accuracy(aset: ActivationSet, metric: str = "cos") -> float:
    """Fraction of (sample, layer, token) cells whose path hits the planted row."""
    spec = fixture_spec_from_manifest(aset)
    planted = spec.planted_map
    total = 0
    hits = 0
    for sample_id in aset.ids():
        speech, text = aset.read_pair(sample_id)
        for path in layer_paths(speech, text, metric):
            for j, idx in enumerate(path.indices):
                total += 1
                hits += idx == planted[j]
    return hits / total


def spec_to_json(spec: FixtureSpec) -> str:
    doc = asdict(spec)
    doc["planted_map"] = list(spec.planted_map)
    return json.dumps(doc, indent=2, sort_keys=True)
