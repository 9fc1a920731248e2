import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alignscope.alignment import (
    AlignmentPath,
    TokenMatrix,
    alignment_path,
    aps,
    corpus_alignment_stats,
    layer_paths,
    path_consistency,
    sample_alignment_stats,
    spearman,
    spearman_indices,
    token_matrix,
)
from alignscope.errors import DegenerateInput, DimensionMismatch, LengthMismatch, ZeroVector
from alignscope.store import LayerStack

from conftest import make_set, random_stack_pair
from oracles import brute_spearman, naive_aps, naive_column_extremes


def path_of(metric, indices, values, layer=1):
    return AlignmentPath(metric=metric, layer=layer, indices=tuple(indices), values=tuple(values))


# --- token_matrix ---------------------------------------------------------

def test_token_matrix_hand_cells():
    m = token_matrix([[1, 0], [0, 1]], [[1, 0]], "cos")
    np.testing.assert_allclose(m.values, [[1.0], [0.0]], atol=1e-15)


def test_token_matrix_unit_diagonal(rng):
    rows = rng.standard_normal((2, 6))
    m = token_matrix(rows, rows, "cos")
    np.testing.assert_allclose(np.diag(m.values), [1.0, 1.0], atol=1e-12)


def test_token_matrix_shape_law(rng):
    m = token_matrix(rng.standard_normal((3, 4)), rng.standard_normal((2, 4)), "dist")
    assert m.values.shape == (3, 2)
    assert m.speech_frames == 3 and m.text_tokens == 2


def test_token_matrix_zero_row():
    with pytest.raises(ZeroVector, match="speech row 1"):
        token_matrix([[1, 0], [0, 0]], [[1, 0]], "cos", layer=3)


def test_token_matrix_dim_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        token_matrix(rng.standard_normal((2, 3)), rng.standard_normal((2, 4)), "cos")


def test_token_matrix_matches_kernel_cells(rng):
    from alignscope.kernels import cosine, euclidean

    s = rng.standard_normal((4, 7))
    t = rng.standard_normal((3, 7))
    for metric, kernel in (("cos", cosine), ("dist", euclidean)):
        m = token_matrix(s, t, metric)
        for i in range(4):
            for j in range(3):
                assert m.values[i, j] == pytest.approx(kernel(s[i], t[j]), abs=1e-12)


# --- alignment_path --------------------------------------------------------

def test_path_hand_matrix():
    m = TokenMatrix("cos", 1, np.array([[0.9, 0.1], [0.2, 0.8]]))
    p = alignment_path(m)
    assert p.indices == (0, 1)
    assert p.values == (0.9, 0.8)


def test_path_zero_diagonal_dist():
    m = TokenMatrix("dist", 1, np.array([[0.0, 5.0], [5.0, 0.0]]))
    p = alignment_path(m)
    assert p.indices == (0, 1)
    assert p.values == (0.0, 0.0)


def test_path_tie_breaks_to_smallest_index():
    col = np.array([[0.1], [0.7], [0.3], [0.7]])
    p = alignment_path(TokenMatrix("cos", 1, col))
    assert p.indices == (1,)


def test_path_extremality_random(rng):
    for _ in range(50):
        values = rng.standard_normal((5, 4))
        for metric in ("cos", "dist"):
            vals = np.abs(values) if metric == "dist" else np.clip(values, -1, 1)
            p = alignment_path(TokenMatrix(metric, 1, vals))
            for j in range(4):
                col = vals[:, j]
                if metric == "cos":
                    assert p.values[j] >= col.max() - 0  # exact
                    assert p.values[j] == col.max()
                else:
                    assert p.values[j] == col.min()


# --- spearman -------------------------------------------------------------

def test_spearman_increasing():
    assert spearman(path_of("cos", [0, 1, 2, 3], [0] * 4)) == 1.0


def test_spearman_decreasing():
    assert spearman(path_of("cos", [3, 2, 1, 0], [0] * 4)) == -1.0


def test_spearman_hand_case():
    # d^2 = 0+1+1 -> 1 - 6*2/(3*8) = 0.5; no ties so shortcut agrees
    assert spearman(path_of("cos", [0, 2, 1], [0] * 3)) == pytest.approx(0.5, abs=1e-15)


def test_spearman_degenerate_constant():
    with pytest.raises(DegenerateInput):
        spearman(path_of("cos", [2, 2, 2], [0] * 3))


def test_spearman_degenerate_short():
    with pytest.raises(DegenerateInput):
        spearman(path_of("cos", [1], [0.5]))


def test_spearman_all_permutations_of_5():
    for perm in itertools.permutations(range(5)):
        got = spearman_indices(perm)
        assert got == pytest.approx(brute_spearman(perm), abs=1e-13)


def test_spearman_tied_sequences_match_oracle(rng):
    for _ in range(200):
        n = int(rng.integers(2, 12))
        seq = rng.integers(0, max(2, n // 2), size=n)
        if np.all(seq == seq[0]):
            continue
        assert spearman_indices(seq) == pytest.approx(brute_spearman(list(seq)), abs=1e-13)


@settings(max_examples=200)
@given(st.lists(st.integers(0, 6), min_size=2, max_size=10))
def test_spearman_monotone_map_law(indices):
    ordered = sorted(indices)
    if ordered[0] == ordered[-1]:
        return
    rho = spearman_indices(ordered)
    assert rho > 0
    if len(set(ordered)) == len(ordered):
        assert rho == 1.0


# --- consistency ------------------------------------------------------------

def test_consistency_identical():
    a = path_of("cos", [0, 1, 2], [0] * 3)
    b = path_of("dist", [0, 1, 2], [0] * 3)
    assert path_consistency(a, b) == 1.0


def test_consistency_disjoint():
    a = path_of("cos", [0, 1], [0] * 2)
    b = path_of("dist", [1, 0], [0] * 2)
    assert path_consistency(a, b) == 0.0


def test_consistency_partial():
    a = path_of("cos", [0, 1, 2, 9], [0] * 4)
    b = path_of("dist", [0, 1, 2, 3], [0] * 4)
    assert path_consistency(a, b) == 0.75


def test_consistency_length_mismatch():
    with pytest.raises(LengthMismatch):
        path_consistency(path_of("cos", [0], [0]), path_of("dist", [0, 1], [0, 0]))


# --- aps ---------------------------------------------------------------------

def stack_pair_from(speech_layers, text_layers):
    return (
        LayerStack("speech", np.asarray(speech_layers, dtype=np.float64)),
        LayerStack("text", np.asarray(text_layers, dtype=np.float64)),
    )


def test_aps_identical_stacks(rng):
    layers = rng.standard_normal((3, 4, 6))
    speech, text = stack_pair_from(layers, layers)
    assert aps(speech, text, "cos") == pytest.approx(1.0, abs=1e-12)
    assert aps(speech, text, "dist") == 0.0


def test_aps_hand_mean():
    # one layer beyond layer 0: token 0 aligns to row 0 at cos 0.9,
    # token 1 to row 1 at cos 0.8, so the score is their mean
    s1 = [0.9, np.sqrt(1 - 0.81), 0]
    s2 = [0, np.sqrt(1 - 0.64), 0.8]
    speech = [[[1, 0, 0], [0, 1, 0]], [s1, s2]]
    text = [[[1, 0, 0], [0, 1, 0]], [[1, 0, 0], [0, 0, 1]]]
    speech_stack, text_stack = stack_pair_from(speech, text)
    assert aps(speech_stack, text_stack, "cos") == pytest.approx(0.85, abs=1e-12)


def test_aps_flat_average_over_layers(rng):
    speech, text = random_stack_pair(rng, 3, 5, 4, 8)
    speech_stack, text_stack = stack_pair_from(speech, text)
    per_layer_means = [
        np.mean(p.values) for p in layer_paths(speech_stack, text_stack, "cos")
    ]
    assert aps(speech_stack, text_stack, "cos") == pytest.approx(
        np.mean(per_layer_means), abs=1e-12
    )


def test_aps_matches_naive_oracle(rng):
    for _ in range(20):
        L = int(rng.integers(1, 4))
        speech, text = random_stack_pair(
            rng, L, int(rng.integers(1, 7)), int(rng.integers(1, 7)), int(rng.integers(1, 9))
        )
        speech_stack, text_stack = stack_pair_from(speech, text)
        for metric in ("cos", "dist"):
            assert aps(speech_stack, text_stack, metric) == pytest.approx(
                naive_aps(speech, text, metric), rel=1e-10
            )


def test_cos_quantities_invariant_to_global_speech_scaling(rng):
    speech, text = random_stack_pair(rng, 2, 5, 4, 8)
    s1, t1 = stack_pair_from(speech, text)
    s2, _ = stack_pair_from(speech * 4.0, text)  # power of two: exact
    for l in range(1, 3):
        m1 = token_matrix(s1.layer(l), t1.layer(l), "cos", layer=l)
        m2 = token_matrix(s2.layer(l), t1.layer(l), "cos", layer=l)
        np.testing.assert_array_equal(m1.values, m2.values)
    assert aps(s1, t1, "cos") == aps(s2, t1, "cos")


# --- corpus stats ------------------------------------------------------------

def test_corpus_single_sample_aggregate_identity(tmp_path, rng):
    speech, text = random_stack_pair(rng, 2, 6, 4, 8)
    aset = make_set(tmp_path, {"a": (speech, text)}, dim=8, layer_count=2)
    corpus = corpus_alignment_stats(aset)
    (sid, per), = corpus.per_sample
    assert sid == "a"
    assert corpus.aggregate == per


def test_corpus_stats_match_direct_computation(tmp_path, rng):
    stacks = {
        f"s{i}": random_stack_pair(rng, 2, 6, 4, 8) for i in range(3)
    }
    aset = make_set(tmp_path, stacks, dim=8, layer_count=2)
    corpus = corpus_alignment_stats(aset)
    agg_aps = np.mean(
        [sample_alignment_stats(*stack_pair_from(*stacks[sid])).aps_cos for sid in sorted(stacks)]
    )
    assert corpus.aggregate.aps_cos == pytest.approx(agg_aps, abs=1e-12)


def test_corpus_excludes_degenerate_samples(tmp_path, rng):
    # sample "deg" has a single speech frame: every path index is 0 -> no rank test
    good_s, good_t = random_stack_pair(rng, 1, 5, 3, 4)
    deg_s, deg_t = random_stack_pair(rng, 1, 1, 3, 4)
    aset = make_set(
        tmp_path, {"deg": (deg_s, deg_t), "good": (good_s, good_t)}, dim=4, layer_count=1
    )
    corpus = corpus_alignment_stats(aset)
    stats = dict(corpus.per_sample)
    assert stats["deg"].rho_cos is None
    assert corpus.excluded_rho_cos == 1
    assert corpus.excluded_rho_dist == 1
    # aggregate rho comes from the good sample alone
    assert corpus.aggregate.rho_cos == stats["good"].rho_cos
    # but consistency and APS still include the degenerate sample
    assert corpus.aggregate.consistency == pytest.approx(
        np.mean([stats["deg"].consistency, stats["good"].consistency]), abs=1e-15
    )
