import numpy as np
import pytest

from yardsale import BetaDistribution


def test_uniform_density_values():
    eta = BetaDistribution.uniform(0.2)
    assert eta.density(0.0) == pytest.approx(2.5)
    assert eta.density(0.19) == pytest.approx(2.5)
    assert eta.density(0.21) == 0.0
    assert eta.density(-0.1) == eta.density(0.1)  # even in beta


def test_twopoint_density_values():
    eta = BetaDistribution.twopoint(0.3)
    assert eta.density(0.3) == 0.5
    assert eta.density(-0.3) == 0.5
    assert eta.density(0.0) == 0.0


def test_second_moment():
    assert BetaDistribution.uniform(0.3).second_moment == pytest.approx(0.03)
    assert BetaDistribution.twopoint(0.3).second_moment == pytest.approx(0.09)


def test_quadrature_moments():
    for eta in (BetaDistribution.uniform(0.25), BetaDistribution.twopoint(0.25)):
        b, v = eta.quadrature(12)
        assert v.sum() == pytest.approx(1.0, rel=1e-13)          # total probability
        assert np.dot(v, b) == pytest.approx(0.0, abs=1e-15)     # mean
        assert np.dot(v, b**2) == pytest.approx(eta.second_moment, rel=1e-13)
        assert np.dot(v, b**3) == pytest.approx(0.0, abs=1e-15)


def test_quadrature_degree_exactness():
    # 12-point Gauss rule integrates beta^8 exactly against the uniform density
    eta = BetaDistribution.uniform(0.5)
    b, v = eta.quadrature(12)
    exact = 0.5**8 / 9.0
    assert np.dot(v, b**8) == pytest.approx(exact, rel=1e-13)


def test_quadrature_point_count_floor():
    with pytest.raises(ValueError):
        BetaDistribution.uniform(0.2).quadrature(1)


def test_sampling_bounds_and_symmetry():
    rng = np.random.default_rng(12)
    u = BetaDistribution.uniform(0.4).sample(rng, 20_000)
    assert np.all(np.abs(u) <= 0.4)
    assert abs(np.mean(u)) < 3.0 * 0.4 / np.sqrt(3 * 20_000)
    t = BetaDistribution.twopoint(0.4).sample(rng, 20_000)
    assert set(np.unique(t)) == {-0.4, 0.4}
    assert abs(np.mean(t)) < 3.0 * 0.4 / np.sqrt(20_000)


def test_invalid_configs_rejected():
    with pytest.raises(ValueError):
        BetaDistribution("gaussian", 0.1)
    with pytest.raises(ValueError):
        BetaDistribution.uniform(1.0)
    with pytest.raises(ValueError):
        BetaDistribution.uniform(0.0)
    with pytest.raises(ValueError):
        BetaDistribution.twopoint(-0.5)
