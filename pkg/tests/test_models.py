import numpy as np
import pytest

from convarb.errors import DomainError
from convarb.measurecalc import monotone_classify
from convarb.models import (CATALOG, build, check_invariants, get_entry, model_deterministic_h, model_filtering,
                            model_insider_defaultable, model_predictable_default_variant, model_random_barrier,
                            model_risk_attitudes, model_survival_claim, model_two_defaults, riccati_gain)
from convarb.models.deterministic_h import h_loading, negative_h_end
from convarb.models.predictable_default import harvest_value
from convarb.models.random_barrier import barrier_hazard, barrier_hazard_quadrature
from convarb.models.risk_attitudes import a2_closed_form, h_profile
from convarb.models.two_defaults import upward_jump_size

NAMES = [e.name for e in CATALOG]
CONVERGING = ("two_defaults", "survival_claim", "insider_defaultable", "filtering", "predictable_default_variant")


def _paths(name, n, seed=0, **params):
    if get_entry(name).batched:
        return list(build(name, params, seed=seed, n_paths=n).paths())
    return [build(name, params, seed=seed, path_index=k) for k in range(n)]


@pytest.mark.parametrize("name", NAMES)
def test_invariants_hold_on_100_seeds(name):
    for seed in range(100):
        path = build(name, seed=seed)
        assert check_invariants(path) == [], (name, seed)


@pytest.mark.parametrize("name", CONVERGING)
def test_terminal_prices_coincide(name):
    for path in _paths(name, 50):
        assert path.horizon_is_convergence
        assert path.X[-1] == path.Y[-1]


@pytest.mark.parametrize("name", NAMES)
def test_martingale_part_has_zero_mean(name):
    if name == "insider_defaultable":
        # in the insider filtration X has no martingale part at all
        assert np.all(build(name).dMX == 0)
        return
    totals = np.array([p.dMX.sum() for p in _paths(name, 10_000, seed=3)])
    se = totals.std(ddof=1) / np.sqrt(len(totals))
    assert abs(totals.mean()) <= 4 * se


@pytest.mark.parametrize("name", NAMES)
def test_batch_rows_match_single_paths(name):
    if not get_entry(name).batched:
        with pytest.raises(DomainError):
            build(name, n_paths=2)
        return
    batch = build(name, seed=5, n_paths=3, path_index=2)
    for j in range(3):
        single = build(name, seed=5, path_index=2 + j)
        np.testing.assert_array_equal(batch.path(j).Y, single.Y)


def test_unknown_model_names_catalog():
    with pytest.raises(DomainError, match="survival_claim"):
        get_entry("black_scholes")


def test_unknown_parameter_rejected():
    with pytest.raises(DomainError):
        build("survival_claim", {"sigma": 1.0})


@pytest.mark.parametrize("call", [
    lambda: model_survival_claim(lambdaX=0.0),
    lambda: model_two_defaults(C2_rate=-1.0),
    lambda: model_two_defaults(mode="milstein"),
    lambda: model_risk_attitudes(rho=1.5),
    lambda: model_deterministic_h(r=0.0),
    lambda: model_insider_defaultable(lam=0.0),
    lambda: model_filtering(horizon=0.0),
    lambda: model_predictable_default_variant(lambdaY=0.0),
    lambda: model_random_barrier(X0=-1.0),
])
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()


# two defaults

def test_two_defaults_jump_ratio():
    assert upward_jump_size(1.0, 0.5, 1.0) == pytest.approx(np.exp(-0.5), abs=1e-15)
    assert upward_jump_size(1.0, 0.5, 1.0) == pytest.approx(0.60653, abs=1e-5)


def test_two_defaults_no_default_means_no_jumps():
    # once the second clock stops, X's drift is singular and lands in dJX, so both must survive
    seen = 0
    for p in _paths("two_defaults", 200):
        if p.metadata["theta1"] is None and p.metadata["theta2"] is None:
            assert np.all(p.dJX == 0)
            assert np.max(p.dA) < 0.1
            seen += 1
    assert seen > 0


def test_two_defaults_jump_recorded_in_dA():
    for p in _paths("two_defaults", 200):
        k = p.events["theta2"]
        if k is None or p.metadata["theta2"] >= 1.0:
            continue
        assert p.dA[k - 1] == pytest.approx(upward_jump_size(1.0, p.metadata["theta2"], 1.0), abs=1e-10)


def test_two_defaults_terminal_payoff_values():
    values = {float(p.X[-1]) for p in _paths("two_defaults", 300)}
    assert values <= {0.0, 1.0, 2.0}
    assert len(values) >= 2


# random barrier

def test_random_barrier_hazard_matches_quadrature():
    for t in (0.1, 0.5, 1.0):
        assert barrier_hazard(t) == pytest.approx(barrier_hazard_quadrature(t), rel=1e-7)


def test_random_barrier_growth_below_max_and_default():
    for p in _paths("random_barrier", 100):
        S = p.metadata["running_max"]
        k = p.events["default"]
        stop = len(p.X) - 1 if k is None else k - 1
        for i in range(stop):
            if S[i + 1] == S[i]:
                assert p.X[i + 1] > p.X[i]
        if k is not None:
            assert p.X[k] == 0 and np.all(p.X[k:] == 0)


def test_random_barrier_compensator_lives_on_max_increases():
    for p in _paths("random_barrier", 50):
        S = p.metadata["running_max"]
        dLam = p.metadata["compensator_increments"]
        assert np.all(dLam[np.diff(S) == 0] == 0)


# survival claim

def test_survival_initial_price():
    assert model_survival_claim(lambdaX=0.1, horizon=1.0).X[0] == pytest.approx(np.exp(-0.1), abs=1e-15)
    assert model_survival_claim().X[0] == pytest.approx(0.90484, abs=1e-5)


def test_survival_equal_intensities_coincide():
    for k in range(20):
        p = model_survival_claim(0.4, 0.4, path_index=k)
        np.testing.assert_array_equal(p.X, p.Y)


def test_survival_covariation_nonnegative():
    for p in _paths("survival_claim", 300):
        assert np.all(np.diff(p.X) * np.diff(p.Y) >= 0)


# predictable default variant

def test_predictable_default_structure():
    for p in _paths("predictable_default_variant", 50):
        assert np.all(p.dM1 == 0) and np.all(p.dM2 == 0) and np.all(p.dQV_M2 == 0)
        assert np.all(p.dQV_M1 * p.dQV_M2 == 0)
        k = p.events["tau"]
        if k is None or k > 1:
            assert np.any(p.dA > 0)


def test_predictable_default_harvest_closed_form():
    tau, dt = 0.6, 0.005
    v = harvest_value(0.5, tau - dt, 1.0)
    assert v == pytest.approx(np.exp(-0.5 * (1 - tau + dt)) - np.exp(-0.5))
    assert v > 0


# insider

def test_insider_fv_changes_sign_after_growth():
    found = False
    for k in range(400):
        p = model_insider_defaultable(lam=1.0, path_index=k)
        if p.metadata["tau"] < 1.0 and p.events["tau"] > 1:
            assert monotone_classify(p.measure("dJX")).classification == "neither"
            found = True
    assert found


def test_insider_terminal_payoff():
    for k in range(50):
        p = model_insider_defaultable(path_index=k)
        expected = np.exp(p.metadata["B_T"] - 0.5) if p.metadata["tau"] > 1.0 else 0.0
        assert p.Y[-1] == pytest.approx(expected, rel=1e-14)


# risk attitudes

def test_risk_attitudes_closed_forms():
    assert h_profile(0.8, 0.2) == pytest.approx(-0.44)
    assert float(a2_closed_form(0.8, 0.2, -1.0)) == pytest.approx(0.44 / (0.36 * 1.8**2), rel=1e-14)
    assert float(a2_closed_form(0.8, 0.2, -1.0)) == pytest.approx(0.3772, abs=1e-4)


def test_risk_attitudes_negative_rho_no_orthogonal_drift():
    batch = model_risk_attitudes(rho=-0.5, n_paths=50)
    assert np.all(batch.h > 0)


def test_risk_attitudes_nonpositive_loading_window():
    p = model_risk_attitudes(rho=0.8)
    t = p.grid.points[:-1]
    np.testing.assert_array_equal(p.h <= 0, t <= 0.75 + 1e-12)


def test_risk_attitudes_qv_of_second_martingale():
    p = model_risk_attitudes(rho=0.8, X0=1e6)
    t = p.grid.points[:-1]
    np.testing.assert_allclose(p.dQV_M2, 0.36 * (2 - t) ** 2 * p.grid.dt, rtol=1e-14)


# filtering

def test_riccati_gain_is_tanh():
    t = np.linspace(0, 1, 1001)
    np.testing.assert_allclose(riccati_gain(t), np.tanh(t), atol=1e-12)
    assert riccati_gain(t)[-1] == pytest.approx(0.76159, abs=1e-5)


def test_filtering_structure():
    batch = model_filtering(n_paths=200)
    assert np.all(batch.dM1 == 0)
    assert batch.events["reveal"][0] == batch.grid.n_steps
    jumps = batch.metadata["terminal_jump"]
    assert np.any(jumps > 0) and np.any(jumps < 0)


# deterministic h

def test_deterministic_h_sign_change():
    S = negative_h_end(1.0, 1.5)
    assert S == pytest.approx(np.log(np.exp(1.5) - 1.0))
    assert h_loading(1.0, S, 1.5) == pytest.approx(0.0, abs=1e-14)
    assert h_loading(1.0, 1.5, 1.5) == 1.0
    assert negative_h_end(0.5, 1.0) is None


def test_deterministic_h_drift_sign():
    p = model_deterministic_h(seed=2)
    M = p.metadata["M"][:-1]
    # f < 0 everywhere, so the drift is positive exactly where M < 0
    live = p.dQV_MX > 0
    assert np.all(p.dA[live & (M < 0)] > 0)
    assert np.all(p.dA[M >= 0] == 0)
