import math

import numpy as np
import pytest
from scipy import integrate, stats

from lab.procurement.distributions import (
    ErrorModel,
    RandomStream,
    difference_model,
    normal_pdf,
    sample,
)
from lab.procurement.errors import InvalidArgumentError, UnsupportedPathError


def test_normal_pdf_values():
    assert normal_pdf(0, 1) == pytest.approx(0.3989422804, abs=1e-10)
    assert normal_pdf(0, math.sqrt(5)) == pytest.approx(0.1784124116, abs=1e-10)
    assert normal_pdf(1.3, 2.0) == normal_pdf(-1.3, 2.0)


@pytest.mark.parametrize("sigma", [0.0, -1.0, math.nan])
def test_normal_pdf_rejects_bad_sigma(sigma):
    with pytest.raises(InvalidArgumentError):
        normal_pdf(0.0, sigma)


@pytest.mark.parametrize("sigma", [0.1, 1.0, math.sqrt(3), 25.0])
def test_normal_pdf_integrates_to_one(sigma):
    mass, _ = integrate.quad(normal_pdf, -10 * sigma, 10 * sigma, args=(sigma,), epsabs=1e-13)
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_error_model_validation():
    with pytest.raises(InvalidArgumentError):
        ErrorModel.normal(0.0)
    with pytest.raises(InvalidArgumentError):
        ErrorModel.normal(math.inf)
    with pytest.raises(InvalidArgumentError):
        ErrorModel.empirical([1.0])
    with pytest.raises(InvalidArgumentError):
        ErrorModel.empirical([1.0, math.nan])


def test_empirical_models_are_sampling_only():
    model = ErrorModel.empirical([-1.0, 0.0, 2.0])
    assert not model.has_density
    with pytest.raises(UnsupportedPathError):
        model.pdf(0.0)
    with pytest.raises(UnsupportedPathError):
        difference_model(model, ErrorModel.normal(1.0)).pdf(0.0)


def test_difference_of_normals():
    diff = difference_model(ErrorModel.normal(math.sqrt(3)), ErrorModel.normal(math.sqrt(2)))
    assert diff.is_normal
    assert diff.mean == 0.0
    assert diff.variance == pytest.approx(5.0, rel=1e-15)
    assert diff.pdf(0.0) == pytest.approx(normal_pdf(0.0, math.sqrt(5)), rel=1e-14)


def test_difference_with_point_mass_is_law_of_g():
    pg = ErrorModel.normal(math.sqrt(3))
    diff = difference_model(pg, ErrorModel.empirical([0.0, 0.0]))
    stream = RandomStream(11)
    np.testing.assert_array_equal(diff.sample(stream, 1000), sample(pg, stream, 1000, component=0))


def test_difference_sampling_matches_normal_law():
    diff = difference_model(ErrorModel.normal(math.sqrt(3)), ErrorModel.normal(math.sqrt(2)))
    draws = diff.sample(RandomStream(2024), 10**6)
    statistic = stats.kstest(draws, "norm", args=(0.0, math.sqrt(5))).statistic
    assert statistic < 0.002


# ============================================================================
# Sampling
# ============================================================================

def test_sampling_is_reproducible():
    model = ErrorModel.normal(math.sqrt(3))
    first = (sample(model, RandomStream(7)), sample(model, RandomStream(7, block=1)))
    second = (sample(model, RandomStream(7)), sample(model, RandomStream(7, block=1)))
    assert first == second
    assert first[0] != first[1]


def test_streams_are_independent_of_evaluation_order():
    root = RandomStream(5, stream_id=3)
    forward = [root.split(i).uniforms(4) for i in range(6)]
    backward = [root.split(i).uniforms(4) for i in reversed(range(6))][::-1]
    for a, b in zip(forward, backward):
        np.testing.assert_array_equal(a, b)
    assert not np.array_equal(root.uniforms(4, component=0), root.uniforms(4, component=1))


def test_negative_stream_keys_rejected():
    with pytest.raises(InvalidArgumentError):
        RandomStream(-1)


def test_normal_sample_moments():
    n = 10**6
    draws = sample(ErrorModel.normal(math.sqrt(3)), RandomStream(0), n)
    assert abs(draws.mean()) <= 4 * math.sqrt(3 / n)
    assert abs(draws.var(ddof=1) - 3) <= 4 * 3 * math.sqrt(2 / (n - 1))


def test_empirical_sampling_draws_from_pool():
    pool = [-2.0, 0.5, 4.0]
    draws = sample(ErrorModel.empirical(pool), RandomStream(1), 30_000)
    assert set(np.unique(draws)) == set(pool)
    counts = np.array([np.sum(draws == v) for v in pool])
    assert np.all(np.abs(counts / 30_000 - 1 / 3) < 0.02)


def test_scalar_sample_is_float():
    value = sample(ErrorModel.normal(1.0), RandomStream(3))
    assert isinstance(value, float)
