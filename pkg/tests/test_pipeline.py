import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ompsrc.dataset import SynthConfig, generate_synthetic, synthetic_label
from ompsrc.errors import DimensionError, InvalidInputError
from ompsrc.linalg import normalize_l2
from ompsrc.omp import ExactSparsity, omp_solve
from ompsrc.pipeline import (Dictionary, GridSpec, build_dictionary, classify_image,
                             default_rule, downsample, evaluate, partition_grid)


@pytest.fixture(scope="module")
def small_synth():
    return generate_synthetic(SynthConfig(n_classes=4, n_test_per_class=3, seed=3))


def test_grid_geometry():
    g = GridSpec()
    assert (g.width, g.height, g.x_n, g.y_n) == (55, 66, 11, 11)
    assert (g.grid_w, g.grid_h, g.patch_dim, g.n_patches) == (5, 6, 30, 121)
    assert GridSpec(56, 67, 11, 11).patch_dim == 30
    with pytest.raises(InvalidInputError):
        GridSpec(10, 10, 11, 1)
    with pytest.raises(InvalidInputError):
        GridSpec(10, 10, 0, 1)


def test_downsample_identity():
    img = np.random.default_rng(0).random((7, 5))
    np.testing.assert_array_equal(downsample(img, 5, 7), img)


@pytest.mark.parametrize("size", [(1, 1), (3, 5), (9, 4)])
def test_downsample_constant(size):
    out = downsample(np.full((2, 2), 0.3), *size)
    assert out.shape == (size[1], size[0])
    np.testing.assert_allclose(out, 0.3, rtol=0, atol=1e-15)


def test_downsample_ramp_by_hand():
    # 4 -> 2 with half-pixel centres samples source coordinate 0.5 and 2.5
    # on each axis: each output is the mean of a 2x2 block.
    ramp = np.arange(16, dtype=float).reshape(4, 4)
    expected = [[(0 + 1 + 4 + 5) / 4, (2 + 3 + 6 + 7) / 4],
                [(8 + 9 + 12 + 13) / 4, (10 + 11 + 14 + 15) / 4]]
    np.testing.assert_allclose(downsample(ramp, 2, 2), expected)


def test_downsample_upscale_edges_clamp():
    out = downsample(np.array([[0.0, 1.0]]), 4, 1)
    # source coordinates -0.25, 0.25, 0.75, 1.25 clamp to [0, 1]
    np.testing.assert_allclose(out, [[0.0, 0.25, 0.75, 1.0]])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 30), st.integers(1, 30),
       st.integers(1, 30), st.integers(1, 30))
def test_downsample_stays_in_range(seed, h, w, H, W):
    img = np.random.default_rng(seed).random((h, w))
    out = downsample(img, W, H)
    assert out.shape == (H, W)
    assert img.min() - 1e-12 <= out.min() and out.max() <= img.max() + 1e-12


def test_downsample_errors():
    with pytest.raises(InvalidInputError):
        downsample(np.zeros((0, 3)), 2, 2)
    with pytest.raises(InvalidInputError):
        downsample(np.zeros((3, 3)), 0, 2)


def test_partition_paper_geometry():
    patches = partition_grid(np.zeros((66, 55)), GridSpec())
    assert len(patches) == 121
    assert all(p.shape == (30,) for p in patches)


def test_partition_single_patch():
    img = np.arange(12.0).reshape(3, 4)
    (patch,) = partition_grid(img, GridSpec(4, 3, 1, 1))
    np.testing.assert_array_equal(patch, img.ravel())


def test_partition_order_and_flattening():
    img = np.arange(16.0).reshape(4, 4)
    patches = partition_grid(img, GridSpec(4, 4, 2, 2))
    # index i * y_n + j: i walks along the width, j down the height
    np.testing.assert_array_equal(patches[0], [0, 1, 4, 5])
    np.testing.assert_array_equal(patches[1], [8, 9, 12, 13])
    np.testing.assert_array_equal(patches[2], [2, 3, 6, 7])
    np.testing.assert_array_equal(np.sort(np.concatenate(patches)), np.arange(16))


def test_partition_drops_trailing_pixels():
    img = np.arange(35.0).reshape(5, 7)
    patches = partition_grid(img, GridSpec(7, 5, 2, 2))
    assert sum(p.size for p in patches) == 6 * 4
    assert 6.0 not in np.concatenate(patches)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 5), st.integers(1, 5))
def test_partition_complete_for_exact_multiples(x_n, y_n, gw, gh):
    W, H = x_n * gw, y_n * gh
    img = np.arange(W * H, dtype=float).reshape(H, W)
    flat = np.concatenate(partition_grid(img, GridSpec(W, H, x_n, y_n)))
    np.testing.assert_array_equal(np.sort(flat), np.arange(W * H))


def test_partition_dimension_error():
    with pytest.raises(DimensionError):
        partition_grid(np.zeros((66, 56)), GridSpec())


def test_build_dictionary_paper_shape():
    train, _ = generate_synthetic(SynthConfig(n_classes=100, n_test_per_class=0))
    d = build_dictionary(train, GridSpec())
    assert len(d.per_patch) == 121
    assert all(A.shape == (30, 1400) for A in d.per_patch)
    assert len(d.masks) == 100
    assert all(m.indicator.sum() == 14 for m in d.masks)


def test_build_dictionary_single_image():
    d = build_dictionary([(np.random.default_rng(1).random((4, 3)), "x")], GridSpec(3, 4, 1, 1))
    (A,) = d.per_patch
    assert A.shape == (12, 1)
    assert np.linalg.norm(A[:, 0]) == pytest.approx(1.0)


def test_build_dictionary_small_synthetic():
    train, _ = generate_synthetic(SynthConfig(n_classes=3, n_train_per_class=2, n_test_per_class=0,
                                              width=12, height=10))
    grid = GridSpec(12, 10, 3, 2)
    d = build_dictionary(train, grid)
    assert [m.indicator.sum() for m in d.masks] == [2, 2, 2]
    for A in d.per_patch:
        np.testing.assert_allclose(np.linalg.norm(A, axis=0), 1.0)
    # column j of every patch matrix is patch k of training image j
    for j, sample in enumerate(train):
        for k, patch in enumerate(partition_grid(sample.image[:10, :12], grid)):
            np.testing.assert_allclose(d.per_patch[k][:, j], normalize_l2(patch))


def test_build_dictionary_empty():
    with pytest.raises(InvalidInputError):
        build_dictionary([], GridSpec())


def toy_dictionary(x_n, labels):
    grid = GridSpec(2 * x_n, 1, x_n, 1)
    return Dictionary(grid, [np.eye(2) for _ in range(x_n)], labels)


def test_majority_vote():
    d = toy_dictionary(3, ["A", "B"])
    pred = classify_image(d, np.array([[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]]))
    assert pred.votes == {"A": 2, "B": 1}
    assert pred.predicted == "A"
    assert pred.per_patch == [(0, "A"), (1, "A"), (2, "B")]
    assert pred.vote_margin == 1


def test_vote_tie_uses_summed_residuals():
    # column 0 is labelled B, column 1 is A; one patch votes each way
    d = toy_dictionary(2, ["B", "A"])
    pred = classify_image(d, np.array([[1.0, 0.0, 0.6, 0.8]]))
    assert pred.votes == {"A": 1, "B": 1}
    assert pred.residual_totals["B"] == pytest.approx(0.8)
    assert pred.residual_totals["A"] == pytest.approx(1.6)
    assert pred.predicted == "B"


def test_vote_tie_then_label():
    d = toy_dictionary(2, ["B", "A"])
    pred = classify_image(d, np.array([[1.0, 0.0, 0.0, 1.0]]))
    assert pred.predicted == "A"


def test_zero_patch_votes_for_smallest_label():
    d = toy_dictionary(1, ["B", "A"])
    pred = classify_image(d, np.zeros((1, 2)))
    assert pred.predicted == "A"


def test_self_classification(small_synth):
    train, _ = small_synth
    d = build_dictionary(train, GridSpec())
    pred = classify_image(d, train[5].image)
    assert pred.predicted == train[5].label
    assert pred.votes == {train[5].label: 121}


def test_occluded_class_seven_of_ten():
    train, test = generate_synthetic(SynthConfig(n_classes=10, n_test_per_class=1, seed=42))
    d = build_dictionary(train, GridSpec())
    label = synthetic_label(6, 10)
    sample = next(s for s in test if s.label == label)
    pred = classify_image(d, sample.image, true_label=label)
    assert pred.predicted == label and pred.correct
    assert sum(pred.votes.values()) == 121
    # recount the per-patch decisions from scratch
    patches = [normalize_l2(p) for p in partition_grid(sample.image, d.grid)]
    redo = {}
    for k, y in enumerate(patches):
        A = d.per_patch[k]
        code = omp_solve(A, y, ExactSparsity(30))
        res = {m.label: np.linalg.norm(y - A @ (code.coeffs * m.indicator)) for m in d.masks}
        winner = min(res, key=lambda lab: (res[lab], lab))
        assert pred.per_patch[k] == (k, winner)
        redo[winner] = redo.get(winner, 0) + 1
    assert redo == pred.votes


def test_evaluate_on_training_set(small_synth):
    train, _ = small_synth
    d = build_dictionary(train, GridSpec())
    report = evaluate(d, train)
    assert report.global_accuracy == 1.0
    assert report.n_images == len(train)
    assert set(report.per_class_accuracy.values()) == {1.0}


def test_evaluate_bookkeeping_and_threads(small_synth):
    train, test = small_synth
    d = build_dictionary(train, GridSpec(55, 66, 5, 5))
    one = evaluate(d, test)
    many = evaluate(d, test, workers=3)
    assert [p.__dict__ for p in one.predictions] == [p.__dict__ for p in many.predictions]
    assert one.global_accuracy == sum(p.correct for p in one.predictions) / len(test)
    for label, acc in one.per_class_accuracy.items():
        mine = [p for p in one.predictions if p.true_label == label]
        assert acc == sum(p.correct for p in mine) / len(mine)
    assert all(sum(p.votes.values()) == 25 for p in one.predictions)
    assert [p.name for p in one.predictions] == [s.name for s in test]


def test_evaluate_empty():
    with pytest.raises(InvalidInputError):
        evaluate(toy_dictionary(1, ["A", "B"]), [])


def test_default_rule_is_full_patch_dimension():
    assert default_rule(GridSpec()) == ExactSparsity(30)
