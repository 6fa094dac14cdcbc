"""Acceptance checks, one test per criterion.

Each test records a one-line ``detail`` that the terminal summary prints
next to its PASS/FAIL status.
"""
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.stats import unitary_group

from liebounds import linalg
from liebounds.bounds import (exact_diamond_unitary, exact_state_distance, pure_trace_distance,
                              soundness_sweep, state_bound)
from liebounds.experiments import (SWEEP_REPRESENTATIONS as REPS, ExperimentConfig, build_representation,
                                   fit_loglog_slope, run_experiment)
from liebounds.groups import make_group, random_algebra_element
from liebounds.lorentz import (Wavepacket, boost, lorentz_exact_distance,
                               lorentz_nelson_expectation, lorentz_nelson_monte_carlo, rotation)
from liebounds.metric import distance_closed_form, distance_log_bound, distance_refined
from liebounds.nelson import improved_k, nelson_basis_sum, nelson_closed_form, valid_block
from liebounds.representations import (boson_ops, coherent_state, displacement, flo, fock_state,
                                       metaplectic, random_state, spin, su11_sector)

pytestmark = pytest.mark.slow

OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _detail(record_property, text):
    record_property("detail", text)


def test_01_nelson_laplacian_closed_forms(record_property):
    t0 = time.perf_counter()
    worst = {}
    for j in [Fraction(k, 2) for k in range(1, 11)]:
        rep = spin(str(j))
        dev = np.abs(nelson_basis_sum(rep).dense() - float(j * (j + 1)) * np.eye(rep.hilbert_dim)).max()
        worst["spin"] = max(worst.get("spin", 0), dev)
    for m in (1, 2, 3):
        rep = flo(m)
        dev = np.abs(nelson_basis_sum(rep).dense() - m * (2 * m - 1) / 8 * np.eye(2**m)).max()
        worst["flo"] = max(worst.get("flo", 0), dev)
    for m in (1, 2):
        rep = metaplectic(m, 64)
        idx = valid_block(rep)
        H = boson_ops(m, 64)["H"].diagonal()[idx]
        expected = np.diag(H**2 + 3 * m / 8)
        dev = np.abs(nelson_basis_sum(rep).block(idx) - expected).max()
        worst["metaplectic"] = max(worst.get("metaplectic", 0), dev)
    elapsed = time.perf_counter() - t0
    _detail(record_property, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", {elapsed:.1f} s")
    assert worst["spin"] <= 1e-10
    assert worst["flo"] <= 1e-12
    assert worst["metaplectic"] <= 1e-8
    assert elapsed < 30


def test_02_soundness_sweep_has_no_violations(record_property):
    t0 = time.perf_counter()
    total, parts = 0, []
    for k, (name, kw) in enumerate(REPS):
        rep = build_representation(name, **kw)
        res = soundness_sweep(rep, cases=1000, seed=k, tol=1e-7)
        total += res.state_violations + res.channel_violations
        parts.append(f"{rep.label}:{res.violations}")
    elapsed = time.perf_counter() - t0
    _detail(record_property, f"{len(REPS)} reps x 1000 cases, {total} violations, {elapsed:.0f} s")
    assert total == 0, parts
    assert elapsed < 300


def test_03_spin_rotation_bound_is_tight_to_first_order(record_property):
    worst_ratio, worst_gap = np.inf, -np.inf
    alphas = np.linspace(np.pi / 200, np.pi, 200)
    for j in ("1/2", "1", "2"):
        rep = spin(j)
        K = improved_k(rep)
        Z = rep.group.basis[2]
        top = fock_state(rep, 0)
        jv = float(Fraction(j))
        assert np.allclose(rep.generator(Z) @ top, jv * top)
        r = state_bound(rep, [1e-3 * Z], [np.zeros_like(Z)], top, energy_op=K)
        worst_ratio = min(worst_ratio, r.oracle_value / r.bound_value)
        states = [top] + [random_state(rep, s) for s in range(5)]
        for a in alphas:
            for psi in states:
                r = state_bound(rep, [a * Z], [np.zeros_like(Z)], psi, energy_op=K)
                worst_gap = max(worst_gap, r.oracle_value - r.bound_value)
    _detail(record_property, f"min exact/bound at 1e-3 = {worst_ratio:.6f}, max exact-bound = {worst_gap:.2e}")
    assert worst_ratio >= 0.999
    assert worst_gap <= 1e-12


def test_04_fermionic_comparison_ordering_and_determinism(record_property):
    cfg = ExperimentConfig("so_compare", m=2)
    first, second = run_experiment(cfg), run_experiment(cfg)
    a = first.column("a")
    below = first.column("ours") < first.column("oszmaniec")
    same = first.to_csv().encode() == second.to_csv().encode()
    _detail(record_property, f"{below.sum()}/{len(a)} grid points below, a in [{a[0]}, {a[-1]}], "
                             f"byte identical: {same}")
    assert a[0] > 0 and a[-1] == pytest.approx(2.0)
    assert below.all()
    assert same


def test_05_trotter_bound_slopes(record_property):
    t0 = time.perf_counter()
    cfg = ExperimentConfig("trotter_compare", m=1, t=1.0, energy=2.0)
    table = run_experiment(cfg)
    elapsed = time.perf_counter() - t0
    ours = fit_loglog_slope(table, "L", "ours")
    becker = fit_loglog_slope(table, "L", "becker")
    _detail(record_property, f"slope ours {ours:.4f}, becker {becker:.4f}, {elapsed:.1f} s")
    assert list(table.column("L")) == [2**k for k in range(11)]
    assert -1.1 <= ours <= -0.9
    assert -0.6 <= becker <= -0.4
    assert elapsed < 60


def _brute_force_diamond(U, V, rng, restarts=500, steps=300):
    """max over unit psi of 2 sqrt(1 - |<psi, U* V psi>|^2), by vectorized descent plus a polish."""
    W = U.conj().T @ V
    n = W.shape[0]
    X = rng.standard_normal((restarts, n)) + 1j * rng.standard_normal((restarts, n))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    for _ in range(steps):
        WX, WhX = X @ W.T, X @ W.conj()
        z = np.einsum("ri,ri->r", X.conj(), WX)
        X = X - 0.25 * (np.conj(z)[:, None] * WX + z[:, None] * WhX)
        X /= np.linalg.norm(X, axis=1, keepdims=True)
    f = np.abs(np.einsum("ri,ri->r", X.conj(), X @ W.T)) ** 2

    def objective(p):
        c = p[:n] + 1j * p[n:]
        c = c / np.linalg.norm(c)
        return abs(np.vdot(c, W @ c)) ** 2

    best = f.min()
    for k in np.argsort(f)[:5]:
        p0 = np.concatenate([X[k].real, X[k].imag])
        best = min(best, minimize(objective, p0, method="BFGS", options={"gtol": 1e-12}).fun)
    return 2 * np.sqrt(max(0.0, 1.0 - best))


def test_06_diamond_formula_matches_brute_force(record_property):
    rng = np.random.default_rng(2024)
    pairs = [(unitary_group.rvs(d, random_state=rng), unitary_group.rvs(d, random_state=rng))
             for d in [2] * 25 + [3] * 25]
    pairs += [(np.eye(2), np.diag([1, -1])), (np.eye(2), np.diag([1, np.exp(0.3j)])),
              (np.eye(3), np.diag([1, np.exp(1.0j), np.exp(-1.0j)]))]
    worst = max(abs(exact_diamond_unitary(U, V) - _brute_force_diamond(U, V, rng)) for U, V in pairs)
    _detail(record_property, f"{len(pairs)} pairs, max deviation {worst:.1e}")
    assert worst <= 1e-4


def test_07_displacement_bound_with_central_term(record_property):
    rng = np.random.default_rng(7)
    H = {c: boson_ops(1, c)["H"] for c in (64, 128)}
    worst_gap, worst_ratio, worst_cut = -np.inf, 0.0, 0.0

    def unit_ball():
        v = rng.standard_normal(2)
        return v * rng.uniform() / np.linalg.norm(v)

    for _ in range(200):
        xi, eta = unit_ball(), unit_ball()
        rhs_factor = 2 * (np.sum((xi - eta) ** 2) + 0.25 * (xi @ OMEGA @ eta) ** 2)
        alpha = rng.uniform(0, 1.5) * np.exp(2j * np.pi * rng.uniform())
        low = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        low /= np.linalg.norm(low)
        makers = [lambda c, k=k: np.eye(c)[k].astype(complex) for k in range(9)]
        makers += [lambda c: coherent_state(c, alpha),
                   lambda c: np.concatenate([low, np.zeros(c - 9)])]
        for make in makers:
            lhs = {}
            for c in (64, 128):
                psi = make(c)
                lhs[c] = np.linalg.norm((displacement(1, c, xi) - displacement(1, c, eta)) @ psi) ** 2
                if c == 64:
                    rhs = rhs_factor * np.vdot(psi, H[c] @ psi).real
                    worst_gap = max(worst_gap, lhs[c] - rhs)
                    worst_ratio = max(worst_ratio, lhs[c] / rhs)
            worst_cut = max(worst_cut, abs(lhs[64] - lhs[128]))
    _detail(record_property, f"max lhs-rhs {worst_gap:.2e}, max lhs/rhs {worst_ratio:.4f}, "
                             f"cutoff 64 vs 128 {worst_cut:.1e}")
    assert worst_gap <= 1e-6
    assert worst_cut <= 1e-6


def test_08_su11_sector_channel_bound(record_property):
    rng = np.random.default_rng(8)
    worst_ratio, worst_gap, pairs = 0.0, -np.inf, 0
    for n in (0, 1, 2):
        rep = su11_sector(n, 48)
        spec = rep.group
        K0 = rep.generator(spec.raw_basis[0])
        K0sq = K0 @ K0
        done = 0
        while done < 100:
            X = random_algebra_element(spec, 0.3, rng)
            Y = random_algebra_element(spec, 0.2, rng)
            g, h = spec.exp(X), spec.exp(X) @ spec.exp(Y)
            d = distance_refined(spec, g, h, segments=4, iters=1, maxfev=40)
            if not d.local_regime:
                continue
            psi = random_state(rep, rng)
            E = np.vdot(psi, K0sq @ psi).real
            exact = pure_trace_distance(rep.unitary([X]) @ psi, rep.unitary([X, Y]) @ psi)
            bound = np.sqrt(8 * E - n * n + 1) * d.value
            worst_gap = max(worst_gap, exact - bound)
            worst_ratio = max(worst_ratio, exact / bound)
            done += 1
        pairs += done
    _detail(record_property, f"{pairs} local pairs, max exact/bound {worst_ratio:.4f}")
    assert worst_gap <= 1e-9


def test_09_lorentz_energy_and_distance_bound(record_property):
    t0 = time.perf_counter()
    packets = [Wavepacket(1.0, (0, 0, 0), 1.0), Wavepacket(1.0, (0.5, 0, 0), 1.0),
               Wavepacket(2.0, (1.0, -1.0, 0.5), 0.5), Wavepacket(0.5, (0, 0, 2.0), 2.0),
               Wavepacket(1.0, (0, 0, 3.0), 0.3)]
    rel = max(abs(lorentz_nelson_expectation(wp) / lorentz_nelson_monte_carlo(wp, 10**6, seed=k) - 1)
              for k, wp in enumerate(packets))
    worst_gap, worst_ratio = -np.inf, 0.0
    for wp in packets[:3]:
        energy = np.sqrt(lorentz_nelson_expectation(wp))
        for make in (boost, rotation):
            for axis in (1, 2, 3):
                for s in (0.05, 0.1, 0.15, 0.3 / np.sqrt(2)):  # ||log||_F = s sqrt 2
                    lam = make(axis, s)
                    norm = np.linalg.norm(linalg.logm_principal(lam).real)
                    assert norm <= 0.3 + 1e-12
                    exact = lorentz_exact_distance(wp, lam, np.eye(4))
                    bound = energy * norm / np.sqrt(2)
                    worst_gap = max(worst_gap, exact - bound)
                    worst_ratio = max(worst_ratio, exact / bound)
    elapsed = time.perf_counter() - t0
    _detail(record_property, f"quadrature vs Monte Carlo {rel:.2%}, max exact/bound {worst_ratio:.3f}, "
                             f"{elapsed:.0f} s")
    assert rel <= 0.01
    assert worst_gap <= 1e-4
    assert elapsed < 120


def test_10_metric_invariance_and_refinement(record_property):
    rng = np.random.default_rng(10)
    inv = refine_gap = closed_gap = resid = 0.0
    closed_groups = [make_group("su2"), make_group("so2m", 2), make_group("so2m", 3),
                     make_group("heisenberg", 1)]
    for spec in closed_groups:
        for _ in range(20):
            g, h, k = (spec.exp(random_algebra_element(spec, s, rng)) for s in (1.0, 1.0, 2.0))
            d = distance_closed_form(spec, g, h)
            inv = max(inv, abs(distance_closed_form(spec, spec.multiply(k, g), spec.multiply(k, h)).value
                               - d.value), abs(distance_closed_form(spec, h, g).value - d.value))
            resid = max(resid, d.witness_residual(spec, g, h))
    for spec in [make_group("su2"), make_group("so2m", 2), make_group("sp2m", 1), make_group("su11"),
                 make_group("lorentz"), make_group("heisenberg", 1)]:
        for _ in range(6):
            g = spec.exp(random_algebra_element(spec, 1.0, rng))
            h = spec.exp(random_algebra_element(spec, 1.0, rng))
            log = distance_log_bound(spec, g, h)
            ref = distance_refined(spec, g, h, segments=4, iters=1, seed=0)
            refine_gap = max(refine_gap, ref.value - log.value)
            resid = max(resid, log.witness_residual(spec, g, h), ref.witness_residual(spec, g, h))
            if spec.ad_invariant:
                closed_gap = max(closed_gap, distance_closed_form(spec, g, h).value - ref.value)
    _detail(record_property, f"invariance {inv:.1e}, refined-log {refine_gap:.1e}, "
                             f"closed-refined {closed_gap:.1e}, residual {resid:.1e}")
    assert inv <= 1e-9
    assert refine_gap <= 1e-8
    assert closed_gap <= 1e-6
    assert resid <= 1e-8


def test_11_appendix_operator_identities(record_property):
    cut = 40
    ops = boson_ops(1, cut)
    Q, P = ops["Q"][0].toarray(), ops["P"][0].toarray()
    I = np.eye(cut)
    k = cut - 6  # products of at most four ladder operators are exact below this
    S = P @ Q + Q @ P
    res = [
        S @ S - (4 * Q @ Q @ P @ P - 8j * Q @ P - I),
        P @ P @ Q @ Q - (Q @ Q @ P @ P - 4j * Q @ P - 2 * I),
    ]
    ops2 = boson_ops(2, 14)
    Qs = [q.toarray() for q in ops2["Q"]]
    Ps = [p.toarray() for p in ops2["P"]]
    Hsum = sum(q @ q + p @ p for q, p in zip(Qs, Ps))
    Q2, P2 = sum(q @ q for q in Qs), sum(p @ p for p in Ps)
    cross = sum(Qs[a] @ Qs[a] @ Ps[b] @ Ps[b] for a in range(2) for b in range(2) if a != b)
    diag = sum(Qs[a] @ Qs[a] @ Ps[a] @ Ps[a] for a in range(2))
    rhs = Q2 @ Q2 + P2 @ P2 + 2 * (diag + cross) - 4j * sum(q @ p for q, p in zip(Qs, Ps)) - 4 * np.eye(196)
    low = np.array([i for i in range(196) if i // 14 <= 8 and i % 14 <= 8])
    dev_a = max(np.abs(r[:k, :k]).max() for r in res)
    dev_a = max(dev_a, np.abs((Hsum @ Hsum - rhs)[np.ix_(low, low)]).max())
    dev_b = 0.0
    for m in (1, 2, 3):
        for A in flo(m).basis_generators:
            dev_b = max(dev_b, np.abs(A @ A - np.eye(2**m) / 8).max())
    _detail(record_property, f"bosonic identities {dev_a:.1e}, fermionic squares {dev_b:.1e}")
    assert dev_a <= 1e-8
    assert dev_b <= 1e-12
