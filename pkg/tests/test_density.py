import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from convarb.density import (build_density, density_batch, density_report, mc_verdict, simulate_density,
                             supermartingale_summary, verify_C3, verify_supermartingale_under_Pstar)
from convarb.errors import PreconditionError
from convarb.models import CATALOG, build
from convarb.structure import check_C1_C2, split_A


def test_zero_densities_give_unit_density():
    batch = build("risk_attitudes", {"rho": 0.8}, n_paths=20)
    z = np.zeros_like(batch.dA)
    d = density_batch(batch, z, z)
    np.testing.assert_array_equal(d.values, 1.0)
    v = mc_verdict(d.values[:, -1])
    assert (v.estimate, v.stderr, v.verdict) == (1.0, 0.0, "pass")


def test_negative_rho_density_is_first_factor_only():
    for k in range(10):
        p = build("risk_attitudes", {"rho": -0.5}, path_index=k)
        d = build_density(p)
        np.testing.assert_array_equal(d.factor2, 1.0)
        np.testing.assert_array_equal(d.values, d.factor1)


def test_single_factor_construction_commutes():
    p = build("risk_attitudes", {"rho": 0.8}, path_index=4)
    sa = split_A(p)
    _, a2, _ = check_C1_C2(p, sa.A2)
    zero = np.zeros_like(a2)
    both = density_batch(p, sa.a1_tilde, zero)
    only = density_batch(p, zero, a2)
    np.testing.assert_array_equal(both.values, both.factor1)
    np.testing.assert_array_equal(only.values, only.factor2)


def test_predictable_default_is_refused():
    with pytest.raises(PreconditionError, match="C1 fails"):
        build_density(build("predictable_default_variant", path_index=0))


@pytest.mark.parametrize("name", [e.name for e in CATALOG])
def test_density_starts_at_one_and_stays_nonnegative(name):
    for k in range(10):
        p = build(name, path_index=k)
        sa = split_A(p)
        _, a2, _ = check_C1_C2(p, sa.A2)
        d = density_batch(p, sa.a1_tilde, a2)
        assert d.values[0] == 1.0
        if d.positive:
            assert np.all(d.values >= 0)


def test_negative_rho_C3_passes():
    v = verify_C3({"model": "risk_attitudes", "params": {"rho": -0.5}}, 20_000, seed=7)
    assert v.verdict == "pass" and v.extra["refused_paths"] == 0
    assert abs(v.estimate - 1.0) <= 3 * v.stderr


def test_insider_candidate_drifts_below_one():
    est = []
    for n in (50, 400):
        v = verify_C3({"model": "insider_defaultable", "params": {"n_steps": n}}, 4000, seed=1)
        assert v.verdict in ("fail", "inconclusive")
        est.append(v.estimate)
    assert est[1] < est[0] < 1.0


def test_supermartingale_checkpoints_risk_attitudes():
    out = verify_supermartingale_under_Pstar({"model": "risk_attitudes", "params": {"rho": 0.8}}, 20_000, seed=2)
    assert out["checkpoints"] == [0.0, 0.5, 1.0, 1.5, 2.0]
    assert out["verdict"] == "pass"
    assert out["D_means"][0] == 1.0


def test_survival_density_weighted_prices_nonincreasing():
    out = verify_supermartingale_under_Pstar({"model": "survival_claim"}, 20_000, seed=3)
    assert out["verdict"] == "pass" and out["refused_paths"] == 0


def test_unit_density_on_martingale_is_flat():
    batch = build("risk_attitudes", {"rho": 0.8}, n_paths=10_000, seed=4)
    zero = np.zeros_like(batch.dA)
    D = density_batch(batch, zero, zero).values
    idx = np.array([0, 100, 200, 300, 400])
    out = supermartingale_summary(batch.grid.points[idx], D[:, idx], (D * batch.X)[:, idx], (D * batch.Y)[:, idx],
                                  np.ones(10_000, dtype=bool))
    assert all(v.verdict == "pass" for v in out["X"])
    np.testing.assert_array_equal(out["D_means"], 1.0)
    for k in range(1, len(idx)):
        diff = batch.X[:, idx[k]] - batch.X[:, 0]
        assert abs(diff.mean()) <= 4 * diff.std(ddof=1) / np.sqrt(len(diff))


def test_density_report_is_thread_independent():
    cfg = {"model": "risk_attitudes", "params": {"rho": 0.8, "n_steps": 50}}
    a = simulate_density(cfg, 900, [0.0, 1.0, 2.0], seed=5, threads=1, chunk=200)
    b = simulate_density(cfg, 900, [0.0, 1.0, 2.0], seed=5, threads=3, chunk=200)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
    rep = density_report(cfg, 900, seed=5)
    assert rep["C3"].verdict in ("pass", "fail", "inconclusive") and rep["refused_paths"] == 0


def test_mc_verdict_rules():
    assert mc_verdict([1.0, 1.0]).verdict == "pass"
    assert mc_verdict([2.0, 2.0]).verdict == "fail"
    assert mc_verdict([-1.0, 1.0, 3.0, -3.0, 0.5]).verdict == "inconclusive"
    assert mc_verdict([0.9, 1.1] * 50).verdict == "pass"
    assert mc_verdict([1.9, 2.1] * 50).verdict == "fail"
    assert mc_verdict([0.5, 0.6] * 50, one_sided=True).verdict == "pass"


@given(st.lists(st.floats(0.5, 1.5), min_size=2, max_size=50))
def test_mc_verdict_pass_means_within_band(x):
    v = mc_verdict(x)
    if v.verdict == "pass" and v.stderr > 0:
        assert abs(v.estimate - 1.0) <= 3 * v.stderr
