import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liebounds.bounds import (BoundReport, EcdSearchConfig, channel_trace_bound, ecd_bound,
                              ecd_pure_state_sup, exact_diamond_unitary, exact_state_distance,
                              laplacian_budget, pure_trace_distance, soundness_sweep, state_bound)
from liebounds.errors import InvalidEnergyBudget, LocalRegimeViolation
from liebounds.groups import random_algebra_element
from liebounds.nelson import nelson_closed_form
from liebounds.representations import (flo, fock_state, metaplectic, random_state, spin,
                                       su11_sector)


def test_diamond_of_reflection_is_two():
    assert exact_diamond_unitary(np.eye(2), np.diag([1, -1])) == pytest.approx(2.0)


@pytest.mark.parametrize("theta", [0.1, 0.7, 1.5, 2.9])
def test_diamond_of_phase_gate(theta):
    V = np.diag([1, np.exp(1j * theta)])
    assert exact_diamond_unitary(np.eye(2), V) == pytest.approx(2 * np.sin(theta / 2), abs=1e-12)


def test_diamond_ignores_global_phase():
    U = np.exp(0.4j) * np.eye(3)
    assert exact_diamond_unitary(np.eye(3), U) == pytest.approx(0.0, abs=1e-7)


def test_diamond_rejects_non_unitary():
    with pytest.raises(ValueError):
        exact_diamond_unitary(np.eye(2), 2 * np.eye(2))


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_pure_trace_distance_matches_eigenvalues(seed):
    rng = np.random.default_rng(seed)
    a, b = (rng.standard_normal(4) + 1j * rng.standard_normal(4) for _ in range(2))
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    D = np.outer(a, a.conj()) - np.outer(b, b.conj())
    direct = np.abs(np.linalg.eigvalsh(D)).sum()
    assert pure_trace_distance(a, b) == pytest.approx(direct, abs=1e-10)


def test_spin_half_state_bound():
    rep = spin("1/2")
    X = rep.group.basis[2] * 0.3
    psi = fock_state(rep, 0)
    r = state_bound(rep, [X], [np.zeros_like(X)], psi)
    assert r.sound and r.regime == "global"
    assert r.energy_term == pytest.approx(np.sqrt(0.75))


def test_state_bound_refuses_projective_outside_local_regime():
    rep = flo(2)
    X = rep.group.basis[0] * 2.5
    psi = random_state(rep, 0)
    with pytest.raises(LocalRegimeViolation):
        state_bound(rep, [X], [np.zeros_like(X)], psi)
    # the channel bound is still available
    assert channel_trace_bound(rep, [X], [np.zeros_like(X)], psi).sound
    near = state_bound(rep, [0.2 * X], [np.zeros_like(X)], psi)
    assert near.regime == "local_only" and near.sound


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_flo_bounds_hold(seed):
    rep = flo(2)
    rng = np.random.default_rng(seed)
    X = random_algebra_element(rep.group, 1.0, rng)
    Y = random_algebra_element(rep.group, 0.3, rng)
    psi = random_state(rep, rng)
    for fn in (state_bound, channel_trace_bound):
        try:
            r = fn(rep, [X], [X + Y], psi)
        except LocalRegimeViolation:
            continue
        assert r.oracle_value <= r.bound_value + 1e-9


def test_bound_grows_with_distance():
    rep = spin(1)
    psi = random_state(rep, 0)
    X = rep.group.basis[0]
    values = [state_bound(rep, [t * X], [np.zeros((2, 2))], psi).bound_value
              for t in (0.1, 0.2, 0.4, 0.8)]
    assert np.all(np.diff(values) > 0)


def test_report_consistency_check():
    rep = spin(1)
    X = rep.group.basis[0] * 0.2
    r = state_bound(rep, [X], [np.zeros_like(X)], fock_state(rep, 0))
    with pytest.raises(ValueError):
        BoundReport("state", r.bound_value * 2, r.metric, r.energy_term)
    with pytest.raises(ValueError):
        BoundReport("other", r.bound_value, r.metric, r.energy_term)
    rec = r.to_record()
    assert rec["kind"] == "state" and len(r.csv_row().split(",")) == len(BoundReport.CSV_COLUMNS)


def test_laplacian_budget_references():
    assert laplacian_budget(metaplectic(1, 16), 2.0, "quadratic") == pytest.approx(2 + 3 / 8)
    assert laplacian_budget(su11_sector(1, 16), 2.0, "quadratic") == pytest.approx(4.0)
    with pytest.raises(ValueError):
        laplacian_budget(spin(1), 1.0, "quadratic")


def test_ecd_bound_rejects_low_budget():
    rep = metaplectic(1, 32)
    X = -0.1 * rep.group.omega
    with pytest.raises(InvalidEnergyBudget):
        ecd_bound(rep, [X], [np.zeros_like(X)], 0.1)


def test_pure_state_search_reaches_exact_diamond_without_constraint():
    rep = spin(1)
    X = rep.group.basis[2] * 1.3
    g, h = [X], [np.zeros_like(X)]
    exact = exact_diamond_unitary(rep.unitary(g), rep.unitary(h))
    found = ecd_pure_state_sup(rep, g, h, config=EcdSearchConfig(restarts=10))
    assert found.value == pytest.approx(exact, abs=1e-6)
    assert found.value <= ecd_bound(rep, g, h, 2.0).bound_value


def test_pure_state_search_respects_energy():
    rep = metaplectic(1, 32)
    X = -0.3 * rep.group.omega
    K = nelson_closed_form(rep)
    res = ecd_pure_state_sup(rep, [X], [np.zeros_like(X)], K, E=1.0,
                             config=EcdSearchConfig(restarts=4))
    assert K.expectation(res.state) <= 1.0 + 1e-9
    assert res.value <= ecd_bound(rep, [X], [np.zeros_like(X)], 1.0).bound_value


def test_exact_state_distance_zero_for_equal_words():
    rep = flo(1)
    X = rep.group.basis[0]
    assert exact_state_distance(rep, [X], [X], random_state(rep, 1)) == 0.0


@pytest.mark.parametrize("make", [lambda: spin(1), lambda: flo(2), lambda: su11_sector(1, 40)])
def test_short_sweep_has_no_violations(make):
    res = soundness_sweep(make(), cases=20, seed=3)
    assert res.violations == 0
    assert res.max_state_ratio <= 1 + 1e-7


def test_pure_state_search_at_spectral_floor():
    rep = metaplectic(1, 32)
    X = -0.3 * rep.group.omega
    K = nelson_closed_form(rep)
    floor = K.min_eigenvalue()
    res = ecd_pure_state_sup(rep, [X], [np.zeros_like(X)], K, E=floor,
                             config=EcdSearchConfig(restarts=2))
    # only the vacuum is feasible, and it is an eigenvector of the rotation
    assert res.value == pytest.approx(0.0, abs=1e-6)
    with pytest.raises(InvalidEnergyBudget):
        ecd_pure_state_sup(rep, [X], [np.zeros_like(X)], K, E=floor - 0.1)
