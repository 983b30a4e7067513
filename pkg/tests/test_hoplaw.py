import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import make_topology

from sdncc.errors import DegenerateFit, InsufficientSamples, InvalidN
from sdncc.hoplaw import HopLawFit, default_sample_points, fit_power_law, fit_topology, measure_avg_distance


def test_ring_single_server(ring8):
    # distances from one server on an 8-ring: 0,1,1,2,2,3,3,4 -> 16/8
    assert measure_avg_distance(ring8, 1) == 2.0


@pytest.mark.parametrize("n, expected", [(2, 1.2142857142857142), (4, 0.5714285714285714)])
def test_ring_enumerated_values(ring8, n, expected):
    assert measure_avg_distance(ring8, n) == pytest.approx(expected, rel=1e-12)


def test_every_node_a_server(ring8):
    assert measure_avg_distance(ring8, 8) == 0.0


def test_complete_graph():
    n = 7
    topo = make_topology(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
    assert measure_avg_distance(topo, 1) == pytest.approx((n - 1) / n, rel=1e-15)


@pytest.mark.parametrize("n", [0, 9])
def test_out_of_range(ring8, n):
    with pytest.raises(InvalidN):
        measure_avg_distance(ring8, n)


def test_sampled_path_is_reproducible():
    topo = make_topology(40, [(i, (i + 1) % 40) for i in range(40)])
    a = measure_avg_distance(topo, 10, num_samples=30, seed=4)
    assert a == measure_avg_distance(topo, 10, num_samples=30, seed=4)
    assert a != measure_avg_distance(topo, 10, num_samples=30, seed=5)


def test_synthetic_recovery():
    a, alpha, n_nodes = 0.8, 0.6, 100
    samples = [(n, a * (n_nodes / n) ** alpha) for n in (1, 2, 5, 10, 25, 50)]
    fit = fit_power_law(samples, n_nodes)
    assert abs(fit.a - a) < 1e-9
    assert abs(fit.alpha - alpha) < 1e-9
    assert fit.residual < 1e-12


def test_two_points_fit_exactly():
    fit = fit_power_law([(1, 3.0), (4, 1.5)], 16)
    assert fit.residual == pytest.approx(0.0, abs=1e-14)
    assert fit.predict(1) == pytest.approx(3.0, rel=1e-12)
    assert fit.predict(4) == pytest.approx(1.5, rel=1e-12)


def test_zero_distance_points_dropped():
    fit = fit_power_law([(1, 2.0), (2, 1.0), (8, 0.0)], 8)
    assert fit.alpha == pytest.approx(1.0, rel=1e-12)


def test_too_few_points():
    with pytest.raises(InsufficientSamples):
        fit_power_law([(1, 2.0), (8, 0.0)], 8)


def test_non_positive_exponent():
    with pytest.raises(DegenerateFit):
        fit_power_law([(1, 1.0), (4, 2.0)], 8)


def test_fit_object_validates():
    with pytest.raises(DegenerateFit):
        HopLawFit(a=0.0, alpha=1.0, n_nodes=4)


@given(st.permutations([(1, 2.7), (2, 1.9), (4, 1.1), (8, 0.6)]))
def test_sample_order_irrelevant(samples):
    ref = fit_power_law([(1, 2.7), (2, 1.9), (4, 1.1), (8, 0.6)], 32)
    fit = fit_power_law(samples, 32)
    assert (fit.a, fit.alpha) == (ref.a, ref.alpha)


def test_ring_fit_tracks_measurements():
    ring = make_topology(16, [(i, (i + 1) % 16) for i in range(16)])
    fit = fit_topology(ring, [1, 2, 4, 8])
    for n, d in fit.samples:
        assert fit.predict(n) == pytest.approx(d, rel=0.25)


@settings(deadline=None, max_examples=20)
@given(st.integers(5, 12), st.integers(0, 10**6))
def test_distance_non_increasing_in_n(size, seed):
    rng = np.random.default_rng(seed)
    edges = {(v, int(rng.integers(0, v))) for v in range(1, size)}
    topo = make_topology(size, sorted(edges))
    values = [measure_avg_distance(topo, n) for n in range(1, size + 1)]
    assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] == 0.0


def test_default_points():
    assert default_sample_points(64) == [1, 2, 4, 8, 16, 32]
    assert default_sample_points(10) == [1, 2, 4, 5]
    assert all(p <= 3 for p in default_sample_points(3))


def test_predict_vectorised():
    fit = HopLawFit(a=1.0, alpha=0.5, n_nodes=16)
    np.testing.assert_allclose(fit.predict(np.array([1, 4, 16])), [4.0, 2.0, 1.0])
    assert math.isclose(fit.predict(16), 1.0)
