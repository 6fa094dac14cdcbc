"""State, channel and energy-constrained diamond bounds with their exact oracles.

Group elements enter as words [Y_1, ..., Y_n] of algebra elements,
g = e^{Y_1} ... e^{Y_n}.  The group element feeds the metric and the word
feeds the representation, which fixes the lift for projective
representations.  Every bound is energy_term * d_best(g, h), where d_best
is the best available upper bound on the metric.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from .errors import InvalidEnergyBudget, LocalRegimeViolation, NotMaterializable
from .groups import random_algebra_element
from .metric import MetricResult, distance_best, distance_log_bound
from .nelson import EnergyOperator, nelson_basis_sum, valid_block
from .representations import Representation, low_fock_indices, random_state

__all__ = [
    "BoundReport",
    "state_bound",
    "exact_state_distance",
    "pure_trace_distance",
    "channel_trace_bound",
    "ecd_bound",
    "exact_diamond_unitary",
    "EcdSearchConfig",
    "EcdSupResult",
    "ecd_pure_state_sup",
    "laplacian_budget",
    "lorentz_state_bound",
    "SweepResult",
    "soundness_sweep",
]

SLACK_TOL = 1e-8
REGIMES = ("global", "local_only")


@dataclass(frozen=True, eq=False)
class BoundReport:
    """bound_value = energy_term * metric.value, with an optional oracle value."""

    kind: str
    bound_value: float
    metric: MetricResult = field(repr=False)
    energy_term: float
    oracle_value: float | None = None
    regime: str = "global"
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("state", "channel", "ecd"):
            raise ValueError(f"unknown bound kind {self.kind!r}")
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if not (self.energy_term >= 0 and self.bound_value >= 0):
            raise ValueError("bound and energy term must be non-negative")
        if abs(self.bound_value - self.energy_term * self.metric.value) > 1e-12 * max(1.0, self.bound_value):
            raise ValueError("bound_value must equal energy_term * metric value")

    @property
    def slack(self) -> float | None:
        return None if self.oracle_value is None else self.bound_value - self.oracle_value

    @property
    def sound(self) -> bool:
        """False only when an oracle is present and exceeds the bound."""
        return self.oracle_value is None or self.slack >= -SLACK_TOL

    def to_record(self) -> dict:
        return {
            "kind": self.kind,
            "label": self.label,
            "bound": self.bound_value,
            "energy_term": self.energy_term,
            "metric": self.metric.value,
            "metric_kind": self.metric.kind,
            "oracle": self.oracle_value,
            "slack": self.slack,
            "regime": self.regime,
        }

    CSV_COLUMNS = ("kind", "label", "bound", "energy_term", "metric", "metric_kind",
                   "oracle", "slack", "regime")

    def csv_row(self) -> str:
        rec = self.to_record()
        out = []
        for key in self.CSV_COLUMNS:
            v = rec[key]
            out.append("" if v is None else (f"{v:.17g}" if isinstance(v, float) else str(v)))
        return ",".join(out)


def _metric(rep: Representation, g_word, h_word, metric, metric_kwargs) -> MetricResult:
    if metric is not None:
        return metric
    spec = rep.group
    g, h = spec.product_of_exps(g_word), spec.product_of_exps(h_word)
    return distance_best(spec, g, h, **(metric_kwargs or {}))


def _check_state(psi, dim) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (dim,):
        raise ValueError(f"state must have shape ({dim},)")
    if abs(np.linalg.norm(psi) - 1) > 1e-8:
        raise ValueError("state must be normalized")
    return psi


def _energy(rep, energy_op):
    return nelson_basis_sum(rep) if energy_op is None else energy_op


def _apply_word(rep: Representation, word, psi) -> np.ndarray:
    return rep.unitary(word) @ psi


def exact_state_distance(rep: Representation, g_word, h_word, psi) -> float:
    """||(U_g - U_h) psi|| from materialized unitaries."""
    psi = _check_state(psi, rep.hilbert_dim)
    return float(np.linalg.norm(_apply_word(rep, g_word, psi) - _apply_word(rep, h_word, psi)))


def pure_trace_distance(phi, chi) -> float:
    """|| |phi><phi| - |chi><chi| ||_1 = 2 sqrt(1 - |<phi, chi>|^2) for unit vectors."""
    ov = abs(np.vdot(phi, chi)) ** 2
    return float(2 * np.sqrt(max(0.0, 1.0 - ov)))


def state_bound(rep: Representation, g_word, h_word, psi, energy_op: EnergyOperator | None = None,
                metric: MetricResult | None = None, with_oracle: bool = True,
                metric_kwargs: dict | None = None) -> BoundReport:
    """sqrt(<psi, K psi>) d(g, h), which dominates ||(U_g - U_h) psi||.

    For projective representations the words must be nearby lifts and the
    metric must be in the local regime; otherwise LocalRegimeViolation is
    raised and the channel bound should be used.
    """
    psi = _check_state(psi, rep.hilbert_dim)
    K = _energy(rep, energy_op)
    d = _metric(rep, g_word, h_word, metric, metric_kwargs)
    regime = "global"
    if rep.projective:
        if not d.local_regime:
            raise LocalRegimeViolation(
                f"{rep.label} is projective and d = {d.value:.3g} is outside the local regime")
        regime = "local_only"
    e = np.sqrt(max(0.0, K.expectation(psi)))
    oracle = exact_state_distance(rep, g_word, h_word, psi) if with_oracle else None
    return BoundReport("state", e * d.value, d, e, oracle, regime, rep.label)


def channel_trace_bound(rep: Representation, g_word, h_word, psi,
                        energy_op: EnergyOperator | None = None,
                        metric: MetricResult | None = None, with_oracle: bool = True,
                        metric_kwargs: dict | None = None) -> BoundReport:
    """2 sqrt(<psi, K psi>) d(g, h), which dominates the trace distance of the output states."""
    psi = _check_state(psi, rep.hilbert_dim)
    K = _energy(rep, energy_op)
    d = _metric(rep, g_word, h_word, metric, metric_kwargs)
    e = 2 * np.sqrt(max(0.0, K.expectation(psi)))
    oracle = None
    if with_oracle:
        oracle = pure_trace_distance(_apply_word(rep, g_word, psi), _apply_word(rep, h_word, psi))
    return BoundReport("channel", e * d.value, d, e, oracle, "global", rep.label)


def laplacian_budget(rep: Representation, E: float, budget_on: str = "laplacian") -> float:
    """Translate an energy budget into a budget for <Delta>.

    ``laplacian``: E itself.  ``quadratic``: the budget is on H^2
    (metaplectic, Delta = H^2 + 3m/8) or on K0^2 (SU(1,1) sector,
    Delta = 2 K0^2 + (1 - n^2)/4).
    """
    if budget_on == "laplacian":
        return float(E)
    if budget_on != "quadratic":
        raise ValueError(f"unknown budget reference {budget_on!r}")
    if rep.rep_id == "metaplectic":
        return float(E) + 3 * rep.modes / 8
    if rep.rep_id == "su11_sector":
        n = rep.params["n"]
        return 2 * float(E) + (1 - n * n) / 4
    raise ValueError(f"no quadratic energy reference for {rep.rep_id}")


def ecd_bound(rep: Representation, g_word, h_word, E: float,
              energy_op: EnergyOperator | None = None, budget_on: str = "laplacian",
              metric: MetricResult | None = None, metric_kwargs: dict | None = None) -> BoundReport:
    """2 sqrt(E_Delta) d(g, h) for the energy-constrained diamond distance.

    E_Delta is the budget on <Delta> (see :func:`laplacian_budget`); it must
    exceed the bottom of the spectrum of the energy operator.
    """
    K = _energy(rep, energy_op)
    budget = laplacian_budget(rep, E, budget_on)
    floor = K.min_eigenvalue()
    if not budget > floor - 1e-12:
        raise InvalidEnergyBudget(f"budget {budget:.6g} is below the spectral floor {floor:.6g}")
    d = _metric(rep, g_word, h_word, metric, metric_kwargs)
    e = 2 * np.sqrt(budget)
    return BoundReport("ecd", e * d.value, d, e, None, "global", rep.label)


def exact_diamond_unitary(U, V, tol: float = 1e-8) -> float:
    """Diamond distance of the channels rho -> U rho U* and rho -> V rho V*.

    Equals 2 sqrt(1 - delta^2), delta the distance from 0 to the convex hull
    of the eigenvalues of U* V.  The hull misses 0 exactly when the
    eigenvalue angles fit in an arc shorter than pi.
    """
    U, V = np.asarray(U, dtype=complex), np.asarray(V, dtype=complex)
    n = U.shape[0]
    for M in (U, V):
        if M.shape != (n, n) or np.linalg.norm(M.conj().T @ M - np.eye(n)) > tol * max(1, n):
            raise ValueError("inputs must be unitary matrices of equal size")
    ang = np.sort(np.angle(np.linalg.eigvals(U.conj().T @ V)))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    span = 2 * np.pi - gaps.max()
    delta = np.cos(span / 2) if span < np.pi else 0.0
    return float(2 * np.sqrt(max(0.0, 1.0 - delta * delta)))


@dataclass(frozen=True)
class EcdSearchConfig:
    """Pure-state search settings: projected gradient ascent from seeded random starts.

    ``nmax`` limits the search to Fock states with occupation at most nmax per
    mode for truncated reps (default: the valid block).
    """

    restarts: int = 20
    maxiter: int = 2000
    rtol: float = 1e-12
    seed: int = 0
    nmax: int | None = None

    def __post_init__(self):
        if self.restarts < 1 or self.maxiter < 1:
            raise ValueError("restarts and maxiter must be positive")


@dataclass(frozen=True, eq=False)
class EcdSupResult:
    value: float
    state: np.ndarray = field(repr=False)
    warning: bool = False


def _search_indices(rep: Representation, nmax):
    if not rep.truncated:
        return np.arange(rep.hilbert_dim)
    if nmax is None:
        return valid_block(rep)
    if rep.rep_id == "su11_sector":
        return np.arange(min(nmax + 1, rep.hilbert_dim))
    return low_fock_indices(rep.modes, rep.cutoff, nmax)


def _block(M, idx):
    if sp.issparse(M):
        return M.tocsr()[idx][:, idx].toarray()
    return np.asarray(M)[np.ix_(idx, idx)]


class _EnergyBall:
    """Projection onto {|c| = 1, sum k_i |c_i|^2 <= budget} in the eigenbasis of K.

    The nearest feasible point to v is v / (1 + nu k) normalized, with k
    shifted to be non-negative and the smallest feasible nu >= 0 found by
    root finding (the energy decreases in nu).
    """

    def __init__(self, k, budget):
        self.k = k - k.min()
        self.budget = budget - k.min()

    def energy(self, c):
        return float(np.sum(self.k * np.abs(c) ** 2))

    def project(self, v):
        """Nearest feasible unit vector, or None when v has no feasible direction."""
        nv = np.linalg.norm(v)
        if nv == 0:
            return None
        c = v / nv
        if self.energy(c) <= self.budget:
            return c
        if self.budget <= 1e-12 * max(1.0, self.k.max()):
            # budget at the spectral floor: the feasible set is the ground eigenspace
            w = np.where(self.k <= 1e-12 * max(1.0, self.k.max()), v, 0)
            nw = np.linalg.norm(w)
            return w / nw if nw > 0 else None

        def at(nu):
            w = v / (1 + nu * self.k)
            return w / np.linalg.norm(w)

        hi = 1.0
        while self.energy(at(hi)) > self.budget and hi < 1e300:
            hi *= 4
        nu = brentq(lambda x: self.energy(at(x)) - self.budget, 0.0, hi, xtol=1e-300, rtol=1e-14)
        c = at(nu)
        while self.energy(c) > self.budget:  # step to the feasible side of the root
            nu = nu * (1 + 1e-12) + 1e-300
            c = at(nu)
        return c


def ecd_pure_state_sup(rep: Representation, g_word, h_word, constraint=None, E: float | None = None,
                       config: EcdSearchConfig = EcdSearchConfig(), W=None) -> EcdSupResult:
    """Largest 2 sqrt(1 - |<U_g psi, U_h psi>|^2) found over unit psi with <psi, K psi> <= E.

    Any feasible psi gives a lower bound on the energy-constrained diamond
    distance, so the result is a certified lower bound.  ``constraint`` is an
    EnergyOperator or matrix K (None means no constraint).  ``W = U_g* U_h``
    may be passed precomputed.  The search minimizes |<psi, W psi>| by
    projected gradient steps with backtracking.
    """
    idx = _search_indices(rep, config.nmax)
    if W is None:
        W = rep.unitary(g_word).conj().T @ rep.unitary(h_word)
    Ws = _block(W, idx)
    n = len(idx)
    if constraint is not None:
        if E is None:
            raise ValueError("an energy budget is needed with a constraint")
        Kmat = constraint.mat if isinstance(constraint, EnergyOperator) else constraint
        Ks = _block(Kmat, idx)
        kw, kv = np.linalg.eigh((Ks + Ks.conj().T) / 2)
        if not E > kw[0] - 1e-12:
            raise InvalidEnergyBudget(f"E = {E:.6g} is below the spectral floor {kw[0]:.6g}")
        ball = _EnergyBall(kw, max(E, kw[0]))
    else:
        kv = np.eye(n)
        ball = _EnergyBall(np.zeros(n), 1.0)
    Wk = kv.conj().T @ Ws @ kv  # work in the eigenbasis of K

    def modulus(c):
        return abs(np.vdot(c, Wk @ c))

    rng = np.random.default_rng(config.seed)
    best, best_c, converged = np.inf, None, False
    for _ in range(config.restarts):
        c = None
        while c is None:
            c = ball.project(rng.standard_normal(n) + 1j * rng.standard_normal(n))
        f = modulus(c)
        step = 1.0
        for _ in range(config.maxiter):
            Wc = Wk @ c
            z = np.vdot(c, Wc)
            if abs(z) < 1e-15:
                converged = True
                break
            # gradient of |z| with respect to conj(c)
            grad = (np.conj(z) * Wc + z * (Wk.conj().T @ c)) / (2 * abs(z))
            while True:
                trial = ball.project(c - step * grad)
                ft = np.inf if trial is None else modulus(trial)
                if ft < f or step < 1e-14:
                    break
                step *= 0.5
            if not ft < f:
                converged = True
                break
            gain = f - ft
            c, f = trial, ft
            step *= 2.0
            if gain * f <= config.rtol * max(1.0 - f * f, 1e-300):
                converged = True
                break
        if f < best:
            best, best_c = f, c
    best_F = best * best
    full = np.zeros(rep.hilbert_dim, dtype=complex)
    full[idx] = kv @ best_c
    value = float(2 * np.sqrt(max(0.0, 1.0 - best_F)))
    if not converged:
        warnings.warn("pure-state search did not converge; returning the best feasible value",
                      stacklevel=2)
    return EcdSupResult(value, full, not converged)


def lorentz_state_bound(wp, lam, lam_tilde, quad=None, with_oracle: bool = True) -> BoundReport:
    """sqrt(<Delta>) ||log(lam_tilde^{-1} lam)|| for the scalar Lorentz representation."""
    from .groups import make_group
    from .lorentz import QuadratureConfig, lorentz_exact_distance, lorentz_nelson_expectation

    quad = QuadratureConfig() if quad is None else quad
    spec = make_group("lorentz")
    d = distance_log_bound(spec, lam_tilde, lam)
    e = np.sqrt(lorentz_nelson_expectation(wp, quad))
    oracle = lorentz_exact_distance(wp, lam, lam_tilde, quad) if with_oracle else None
    return BoundReport("state", e * d.value, d, e, oracle, "global", f"lorentz_scalar(mass={wp.mass})")


@dataclass(frozen=True)
class SweepResult:
    label: str
    cases: int
    state_violations: int
    channel_violations: int
    diamond_violations: int
    max_state_ratio: float
    max_channel_ratio: float
    max_diamond_ratio: float

    @property
    def violations(self) -> int:
        return self.state_violations + self.channel_violations + self.diamond_violations


def soundness_sweep(rep: Representation, cases: int = 1000, seed=0, g_scale: float = 1.0,
                    h_scale: float = 0.5, tol: float = 1e-7,
                    metric_kwargs: dict | None = None) -> SweepResult:
    """Compare state, channel and (for constant Delta) diamond bounds with their oracles.

    g is a random word of up to three factors.  h is g times a small factor,
    so words are nearby lifts and projective reps stay comparable; linear
    reps additionally get an independent h every other case.  Truncated reps
    use small scales so the states stay far below the cutoff.
    """
    if not rep.finite:
        raise NotMaterializable("soundness sweeps need a finite representation")
    rng = np.random.default_rng(seed)
    spec = rep.group
    K = nelson_basis_sum(rep)
    const = not rep.truncated and np.allclose(K.dense(), K.dense()[0, 0] * np.eye(rep.hilbert_dim))
    if rep.truncated:
        g_scale, h_scale = min(g_scale, 0.3), min(h_scale, 0.2)
    kw = {"segments": 4, "iters": 1, "maxfev": 40} if metric_kwargs is None else metric_kwargs
    counts = [0, 0, 0]
    ratios = [0.0, 0.0, 0.0]
    for case in range(cases):
        g_word = [random_algebra_element(spec, g_scale, rng) for _ in range(int(rng.integers(1, 4)))]
        if not rep.projective and case % 2 == 1:
            h_word = [random_algebra_element(spec, g_scale, rng) for _ in range(int(rng.integers(1, 4)))]
        else:
            h_word = g_word + [random_algebra_element(spec, h_scale, rng)]
        psi = random_state(rep, rng)
        g, h = spec.product_of_exps(g_word), spec.product_of_exps(h_word)
        d = distance_best(spec, g, h, **(kw if not (spec.ad_invariant or spec.id == "heisenberg") else {}))
        Ug, Uh = rep.unitary(g_word), rep.unitary(h_word)
        a, b = Ug @ psi, Uh @ psi
        e = np.sqrt(max(0.0, K.expectation(psi)))
        checks = []
        if not rep.projective or d.local_regime:
            checks.append((0, float(np.linalg.norm(a - b)), e * d.value))
        checks.append((1, pure_trace_distance(a, b), 2 * e * d.value))
        if const:
            checks.append((2, exact_diamond_unitary(Ug, Uh), 2 * e * d.value))
        for k, oracle, bound in checks:
            if oracle > bound + tol:
                counts[k] += 1
            if bound > 0:
                ratios[k] = max(ratios[k], oracle / bound)
    return SweepResult(rep.label, cases, counts[0], counts[1], counts[2], *(float(r) for r in ratios))
