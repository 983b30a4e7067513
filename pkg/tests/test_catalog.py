import numpy as np
import pytest
from hypothesis import given, strategies as st

from sdncc.catalog import ComputationItem, ContentItem, ServiceCatalog, spread_demand, zipf_catalog
from sdncc.errors import InvalidSpec, NoUsers


def test_uniform_popularity():
    cat = zipf_catalog(4, 0, 400, 0.0, {"content_bits": 1e6}, seed=0)
    assert [c.popularity for c in cat.contents] == [100.0] * 4


def test_zipf_one_two_items():
    cat = zipf_catalog(2, 0, 300, 1.0, {"content_bits": 1e6}, seed=0)
    assert [c.popularity for c in cat.contents] == pytest.approx([200.0, 100.0], rel=1e-15)


def test_same_seed_same_catalog():
    spec = {"content_bits": {"low": 1e6, "high": 1e7}, "data_bits": {"low": 1e5, "high": 1e6}, "workload_units": {"low": 1, "high": 9}}
    assert zipf_catalog(5, 3, 1000, 0.8, spec, 11) == zipf_catalog(5, 3, 1000, 0.8, spec, 11)
    assert zipf_catalog(5, 3, 1000, 0.8, spec, 11) != zipf_catalog(5, 3, 1000, 0.8, spec, 12)


def test_fixed_demand_sizes():
    cat = zipf_catalog(3, 2, 900, 0.7, {"demand_bps": 1e9, "period_s": 3600.0}, 0)
    np.testing.assert_allclose(cat.volumes, 3.6e12, rtol=1e-12)


@given(st.integers(1, 40), st.floats(0, 3), st.floats(1, 1e6))
def test_zipf_non_increasing(count, exponent, total):
    cat = zipf_catalog(count, 0, total, exponent, {"content_bits": 1.0}, 0)
    lam = [c.popularity for c in cat.contents]
    assert all(a >= b for a, b in zip(lam, lam[1:]))
    assert sum(lam) == pytest.approx(total, rel=1e-12)


@pytest.mark.parametrize("args", [(-1, 0, 10, 1.0), (1, 0, 10, -0.5), (1, 0, 0, 1.0)])
def test_bad_generator_args(args):
    with pytest.raises(InvalidSpec):
        zipf_catalog(*args, {"content_bits": 1.0}, 0)


def test_duplicate_ids_rejected():
    with pytest.raises(InvalidSpec):
        ServiceCatalog((ContentItem("x", 1, 1),), (ComputationItem("x", 1, 1, 1),))


def test_single_user_holds_all():
    cat = ServiceCatalog((ContentItem("a", 10, 1e8),))
    dem = spread_demand(cat, [2], n_nodes=4)
    assert dem.volume[0, 2] == 1e9 and dem.volume.sum() == 1e9


def test_uniform_split():
    cat = ServiceCatalog((ContentItem("a", 4, 1e9),))
    dem = spread_demand(cat, [0, 1, 2, 3])
    np.testing.assert_array_equal(dem.volume[0], [1e9] * 4)


def test_weighted_split():
    cat = ServiceCatalog((ContentItem("a", 10, 1e9),))
    dem = spread_demand(cat, [0, 1, 2], [0.5, 0.3, 0.2])
    np.testing.assert_allclose(dem.volume[0], [5e9, 3e9, 2e9], rtol=1e-15)


def test_no_users():
    with pytest.raises(NoUsers):
        spread_demand(ServiceCatalog((ContentItem("a", 1, 1),)), [])


def test_computation_demand_uses_data_volume():
    cat = ServiceCatalog((), (ComputationItem("v", 10, 2e6, 5e9),))
    dem = spread_demand(cat, [0])
    assert dem.volume[0, 0] == 2e7


@given(st.lists(st.floats(0.01, 1), min_size=1, max_size=8), st.integers(0, 100))
def test_demand_consistency(raw, seed):
    w = np.array(raw) / sum(raw)
    cat = zipf_catalog(3, 2, 1000, 0.9, {"content_bits": {"low": 1, "high": 1e6}, "data_bits": 3e5}, seed)
    dem = spread_demand(cat, list(range(len(w))), w)
    np.testing.assert_allclose(dem.volume.sum(axis=1), cat.volumes, rtol=1e-9)
    assert dem.total == pytest.approx(cat.volumes.sum(), rel=1e-12)


@pytest.mark.parametrize("users, n_nodes", [([1, 1], 3), ([0, 3], 3), ([-1], None)])
def test_bad_users(users, n_nodes):
    with pytest.raises(InvalidSpec):
        spread_demand(ServiceCatalog((ContentItem("a", 1, 1),)), users, n_nodes=n_nodes)
