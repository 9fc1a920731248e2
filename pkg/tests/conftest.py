import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from alignscope.store import ActivationSet, SampleEntry, write_manifest, write_sample

DATA_DIR = Path(__file__).parent.parent / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_set(tmp_path, stacks, dim, layer_count, token_strings=None):
    """Write {sample_id: (speech_layers, text_layers)} as an activation set."""
    entries = []
    for sample_id, (speech, text) in stacks.items():
        sp = f"{sample_id}.speech.bin"
        tp = f"{sample_id}.text.bin"
        write_sample(speech, tmp_path / sp)
        write_sample(text, tmp_path / tp)
        entries.append(
            SampleEntry(
                id=sample_id,
                speech_frames=np.asarray(speech[0]).shape[0],
                text_tokens=np.asarray(text[0]).shape[0],
                speech_payload=sp,
                text_payload=tp,
                text_token_strings=token_strings,
            )
        )
    path = write_manifest(tmp_path / "manifest.json", dim, layer_count, entries)
    return ActivationSet.open(path)


def random_stack_pair(rng, layer_count, t_s, t_t, dim, f32=True):
    """Random (speech, text) layer stacks, float32-valued to survive storage."""
    speech = rng.standard_normal((layer_count + 1, t_s, dim))
    text = rng.standard_normal((layer_count + 1, t_t, dim))
    if f32:
        speech = speech.astype(np.float32).astype(np.float64)
        text = text.astype(np.float32).astype(np.float64)
    return speech, text
