"""Projection draws, compression, and the moment pushforward."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from detfuse.generators import CASE2_PRESET, CaseTwoGenerator, Hypothesis
from detfuse.moments import MomentModel, case1_moments, case2_moments
from detfuse.generators import CASE1_PRESET
from detfuse.projection import (
    CompressedMoments,
    FactorizationError,
    ProjectionSet,
    compress,
    draw_projection,
    push_moments,
)
from detfuse.detectors import llr_compressed_gaussian


def test_draw_is_deterministic():
    a = draw_projection(4, 9, 2, seed=5)
    b = draw_projection(4, 9, 2, seed=5)
    for x, y in zip(a.blocks, b.blocks):
        assert np.array_equal(x, y)
    assert not np.array_equal(a.blocks[0], a.blocks[1])


def test_entry_statistics():
    proj = draw_projection(200, 1000, 1, seed=8)
    entries = proj.blocks[0]
    assert abs(entries.mean()) < 0.01
    assert abs((entries**2).mean() - 1.0) < 0.02


def test_rejects_bad_shapes():
    with pytest.raises(ValueError):
        draw_projection(10, 5, 2, seed=1)
    with pytest.raises(ValueError):
        draw_projection(0, 5, 2, seed=1)


def test_compress_hand_example():
    proj = ProjectionSet((np.array([[1.0, 2.0, 3.0], [0.0, 1.0, 0.0]]),))
    y = compress(proj, np.array([[1.0, 1.0, 1.0]]))
    assert_allclose(y, [6.0, 1.0])


def test_compress_identity_and_zero():
    proj = ProjectionSet.identity(4, 2)
    x = np.arange(8.0).reshape(2, 4)
    assert_allclose(compress(proj, x), x.reshape(-1))
    assert_allclose(compress(proj, np.zeros((2, 4))), np.zeros(8))


def test_compress_batches():
    proj = draw_projection(3, 5, 2, seed=2)
    batch = np.random.default_rng(0).normal(size=(7, 2, 5))
    out = compress(proj, batch)
    assert out.shape == (7, 6)
    assert_allclose(out[4], compress(proj, batch[4]))


def test_compress_dimension_mismatch():
    proj = draw_projection(3, 5, 2, seed=2)
    with pytest.raises(ValueError):
        compress(proj, np.zeros((2, 4)))


def test_push_moments_identity_recovers_model():
    model = case2_moments(CASE2_PRESET, 4)
    cm = push_moments(model, ProjectionSet.identity(4, 2))
    assert_allclose(cm.mu1, model.mean_vector(Hypothesis.H1))
    assert_allclose(cm.c1, model.dense_cov(Hypothesis.H1), atol=1e-14)
    assert_allclose(cm.c0, model.dense_cov(Hypothesis.H0), atol=1e-14)


def test_push_moments_single_row_quadratic_form():
    # one sensor, one row a: C = sum_n a_n^2 d_n
    d = np.array([2.0, 3.0, 4.0])
    a = np.array([[1.0, -2.0, 0.5]])
    model = MomentModel(
        mean0=np.zeros((1, 3)),
        mean1=np.ones((1, 3)),
        cov0=d.reshape(1, 1, 3),
        cov1=2.0 * d.reshape(1, 1, 3),
    )
    cm = push_moments(model, ProjectionSet((a,)))
    assert_allclose(cm.c0[0, 0], float(np.sum(a[0] ** 2 * d)))
    assert_allclose(cm.mu1[0], a.sum())


def test_push_moments_preserves_zero_cross_blocks():
    model = case1_moments(CASE1_PRESET, 6)  # cross blocks are zero
    proj = draw_projection(3, 6, 2, seed=3)
    cm = push_moments(model, proj)
    assert_allclose(cm.c1[:3, 3:], 0.0, atol=1e-12)
    assert_allclose(cm.c0[3:, :3], 0.0, atol=1e-12)


def test_push_moments_dimension_mismatch():
    model = case1_moments(CASE1_PRESET, 6)
    with pytest.raises(ValueError):
        push_moments(model, draw_projection(3, 5, 2, seed=3))


def test_factorization_error_names_hypothesis():
    mu = np.zeros(2)
    c_good = np.eye(2)
    c_bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # indefinite
    with pytest.raises(FactorizationError) as exc:
        CompressedMoments(mu0=mu, mu1=mu, c0=c_good, c1=c_bad)
    assert exc.value.hypothesis == 1
    with pytest.raises(FactorizationError) as exc:
        CompressedMoments(mu0=mu, mu1=mu, c0=c_bad, c1=c_good)
    assert exc.value.hypothesis == 0


def test_factorization_succeeds_on_100_seeds_at_presets():
    model = case2_moments(CASE2_PRESET, 1000)
    for seed in range(100):
        proj = draw_projection(200, 1000, 2, seed=seed)
        cm = push_moments(model, proj)
        assert np.isfinite(cm.logdet0) and np.isfinite(cm.logdet1)


def test_detector_scale_invariance():
    # same nonzero factor on A in both compress and push leaves scores alone
    model = case2_moments(CASE2_PRESET, 50)
    proj = draw_projection(10, 50, 2, seed=21)
    x = CaseTwoGenerator().sample(Hypothesis.H1, 50, seed=22)
    baseline = llr_compressed_gaussian(compress(proj, x), push_moments(model, proj))
    for factor in (3.7, 0.01, -2.0):
        scaled = proj.scaled(factor)
        score = llr_compressed_gaussian(compress(scaled, x), push_moments(model, scaled))
        assert abs(score - baseline) <= 1e-8 * abs(baseline)


def test_compressed_coordinate_is_gaussian_by_ks():
    # CLT sanity for the compressed-domain Gaussian approximation
    gen = CaseTwoGenerator()
    proj = draw_projection(200, 1000, 2, seed=77)
    cm = push_moments(case2_moments(CASE2_PRESET, 1000), proj)
    draws = gen.sample_many(Hypothesis.H1, 10_000, 1000, seed=123)
    first = draws[:, 0, :] @ proj.blocks[0][0]
    z = (first - cm.mu1[0]) / np.sqrt(cm.c1[0, 0])
    ks = stats.kstest(z, stats.norm.cdf)
    assert ks.statistic < 1.6276 / np.sqrt(z.size)


def test_reproducible_from_seed_tuple():
    proj = draw_projection(7, 20, 3, seed=5151)
    again = draw_projection(proj.m, proj.n, proj.num_sensors, seed=proj.seed)
    for a, b in zip(proj.blocks, again.blocks):
        assert np.array_equal(a, b)
