import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from convarb.errors import DomainError
from convarb.simkernel import (IncrementPath, JumpMarkedPath, brownian_bridge_increments, brownian_increments,
                               doleans_exponential, first_passage, make_grid, normal_matrix, ou_path, path_rng,
                               sample_default_time)


def test_uniform_grid():
    g = make_grid(1.0, 4)
    np.testing.assert_array_equal(g.points, [0, 0.25, 0.5, 0.75, 1.0])
    assert g.n_steps == 4


def test_grid_merges_event():
    g = make_grid(1.0, 4, [0.3])
    np.testing.assert_array_equal(g.points, [0, 0.25, 0.3, 0.5, 0.75, 1.0])
    assert g.index_of(0.3) == 2


def test_grid_collapses_duplicate():
    np.testing.assert_array_equal(make_grid(1.0, 1, [1.0]).points, [0.0, 1.0])


def test_grid_points_read_only():
    g = make_grid(1.0, 4)
    with pytest.raises(ValueError):
        g.points[0] = 1.0


@pytest.mark.parametrize("bad", [dict(horizon=0.0, n_steps=4), dict(horizon=1.0, n_steps=0),
                                 dict(horizon=1.0, n_steps=4, event_times=[1.5])])
def test_grid_rejects_bad_input(bad):
    with pytest.raises(DomainError):
        make_grid(**bad)


@given(st.floats(0.1, 10.0), st.integers(1, 50), st.lists(st.floats(1e-6, 1.0), max_size=5))
def test_grid_sorted_and_contains_events(horizon, n, frac):
    events = [f * horizon for f in frac]
    g = make_grid(horizon, n, events)
    assert np.all(np.diff(g.points) > 0)
    assert g.points[0] == 0.0 and g.points[-1] == horizon
    for e in events:
        assert np.min(np.abs(g.points - e)) <= 8 * np.finfo(float).eps * horizon


def test_increment_variance_matches_step():
    g = make_grid(2.0, 5, [0.3])
    z = np.stack([brownian_increments(g, 1, k).values for k in range(20000)])
    se = z.var(axis=0) * np.sqrt(2 / len(z))
    assert np.all(np.abs(z.var(axis=0) - g.dt) < 4 * se)


def test_terminal_sum_mean_zero():
    g = make_grid(1.0, 8)
    w = normal_matrix(1, 8, 3, 100000)[0].sum(axis=1) * np.sqrt(g.dt[0])
    assert abs(w.mean()) < 4 * np.sqrt(1.0 / len(w))


def test_distinct_seeds_distinct_paths():
    g = make_grid(1.0, 10)
    assert not np.array_equal(brownian_increments(g, 1).values, brownian_increments(g, 2).values)


def test_batch_row_equals_single_path():
    batch = normal_matrix(2, 7, 11, 4, start=5)
    for j in range(4):
        np.testing.assert_array_equal(batch[:, j], path_rng(11, 5 + j).standard_normal((2, 7)))


@given(st.floats(-3, 3), st.integers(1, 40), st.integers(0, 1000))
def test_bridge_pins_terminal_value(b, n, seed):
    g = make_grid(1.0, n)
    inc = brownian_bridge_increments(g, b, seed)
    assert inc.cumulative()[-1] == b


def test_bridge_single_step_zero():
    inc = brownian_bridge_increments(make_grid(1.0, 1), 0.0, 4)
    assert inc.values[0] == 0.0


def test_bridge_covariance():
    g = make_grid(1.0, 4)
    B = np.stack([brownian_bridge_increments(g, 0.0, 9, k).cumulative() for k in range(40000)])
    s, t = 1, 3
    prod = B[:, s] * B[:, t]
    expected = g.points[s] * (1 - g.points[t])
    assert abs(prod.mean() - expected) < 4 * prod.std() / np.sqrt(len(prod))


def test_ou_zero_drift_is_cumulative():
    g = make_grid(1.0, 10)
    d = brownian_increments(g, 0)
    np.testing.assert_allclose(ou_path(g, 0.0, d), d.cumulative(), atol=1e-15)


def test_ou_one_step():
    g = make_grid(0.5, 1)
    assert ou_path(g, 1.0, IncrementPath(g, [0.0]), 1.0)[-1] == 1.5


def test_ou_first_order_convergence():
    # dW = W dt, W0 = 1 has solution exp(t)
    errs = []
    for n in (50, 100, 200, 400):
        g = make_grid(1.0, n)
        errs.append(abs(ou_path(g, 1.0, IncrementPath(g, np.zeros(n)), 1.0)[-1] - np.e))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(rates - 1.0) < 0.1)


def test_ou_grid_mismatch():
    with pytest.raises(DomainError):
        ou_path(make_grid(1.0, 4), 1.0, IncrementPath(make_grid(1.0, 5), np.zeros(5)))


def test_doleans_identity():
    g = make_grid(1.0, 5)
    z = JumpMarkedPath(g, IncrementPath(g, np.zeros(5)))
    np.testing.assert_array_equal(doleans_exponential(z, IncrementPath(g, np.zeros(5))), np.ones(6))


def test_doleans_absorbing_jump():
    g = make_grid(1.0, 4)
    z = JumpMarkedPath(g, IncrementPath(g, np.zeros(4)), [(1, -1.0)])
    np.testing.assert_array_equal(doleans_exponential(z, IncrementPath(g, np.zeros(4))), [1, 1, 0, 0, 0])


def test_doleans_continuous_value():
    g = make_grid(1.0, 4)
    z = JumpMarkedPath(g, IncrementPath(g, [0.5, -0.25, 0.25, -0.5]))
    out = doleans_exponential(z, IncrementPath(g, np.full(4, 0.25)))
    assert out[-1] == pytest.approx(0.6065306597126334, rel=1e-14)


def test_doleans_rejects_negative_qv():
    g = make_grid(1.0, 2)
    with pytest.raises(DomainError):
        doleans_exponential(JumpMarkedPath(g, IncrementPath(g, [0, 0])), IncrementPath(g, [0.1, -0.1]))


def test_jump_marks_validated():
    g = make_grid(1.0, 3)
    with pytest.raises(DomainError):
        JumpMarkedPath(g, IncrementPath(g, np.zeros(3)), [(1, 0.1), (1, 0.2)])
    with pytest.raises(DomainError):
        JumpMarkedPath(g, IncrementPath(g, np.zeros(3)), [(3, 0.1)])


def test_default_time_zero_intensity():
    assert sample_default_time(0.0, 1.0, 0) is None
    assert sample_default_time(lambda t: 0.0, 1.0, 0) is None


def test_default_time_exponential_law():
    lam, t = 0.7, 1.0
    taus = [sample_default_time(lam, 5.0, 2, k) for k in range(100000)]
    alive = np.array([tau is None or tau > t for tau in taus], dtype=float)
    assert abs(alive.mean() - np.exp(-lam * t)) < 4 * alive.std() / np.sqrt(len(alive))


def test_default_time_callable_matches_constant():
    for k in range(20):
        a = sample_default_time(2.0, 1.0, 5, k)
        b = sample_default_time(lambda s: 2.0, 1.0, 5, k)
        assert (a is None and b is None) or a == pytest.approx(b, abs=1e-12)


def test_default_time_huge_intensity():
    taus = [sample_default_time(1e6, 1.0, 0, k) for k in range(200)]
    assert max(taus) < 1e-4


def test_default_time_negative_intensity():
    with pytest.raises(DomainError):
        sample_default_time(-1.0, 1.0, 0)
    with pytest.raises(DomainError):
        sample_default_time(lambda t: -1.0, 1.0, 0)


def test_first_passage_reflection_law():
    # P(max of BM on [0, 1] >= 1) = 2 * P(B_1 >= 1)
    hits = []
    v = np.linspace(0.0, 1.0, 5)
    for k in range(20000):
        rng = path_rng(8, k)
        w = np.concatenate(([0.0], np.cumsum(rng.standard_normal(4) * 0.5)))
        hits.append(first_passage(w, v, 1.0, rng) is not None)
    hits = np.array(hits, dtype=float)
    assert abs(hits.mean() - 0.31731050786291415) < 4 * hits.std() / np.sqrt(len(hits))


def test_first_passage_inside_cell():
    rng = path_rng(0, 0)
    cell, s = first_passage(np.array([0.0, 2.0]), np.array([0.0, 1.0]), 1.0, rng)
    assert cell == 0 and 0.0 < s <= 1.0
