"""Left-invariant metric d(g, h) = inf sum_j ||Y_j|| over g^{-1} h = e^{Y_1} ... e^{Y_n}.

Three evaluators are provided: the closed form (exact for Ad-invariant inner
products near the identity), the principal-log upper bound, and a path
optimizer that tightens the upper bound by moving intermediate points.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import linalg
from .errors import BranchFailure, InvalidLog, NoDecomposition, NotApplicable
from .groups import GroupSpec, is_member

__all__ = [
    "MetricResult",
    "distance_closed_form",
    "distance_log_bound",
    "distance_refined",
    "distance_best",
    "LOCAL_RADIUS",
    "EXACT_LOG_RADIUS",
]

EXACT_LOG_RADIUS = np.pi
LOCAL_RADIUS = np.pi / 2
DEFAULT_SEGMENTS = 8
KINDS = ("exact_closed_form", "log_upper_bound", "refined_upper_bound")


@dataclass(frozen=True, eq=False)
class MetricResult:
    value: float
    kind: str
    decomposition: tuple = field(default=(), repr=False)
    certified_exact: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.certified_exact and self.kind != "exact_closed_form":
            raise ValueError("only closed-form results can be certified exact")
        if not self.value >= 0:
            raise ValueError("metric value must be non-negative")

    @property
    def local_regime(self) -> bool:
        """True when the value is small enough to compare covering-group lifts directly."""
        return self.value < LOCAL_RADIUS

    def witness_residual(self, spec: GroupSpec, g, h) -> float:
        """Frobenius residual of prod exp(Y_j) against g^{-1} h."""
        target = spec.left_quotient(g, h)
        return float(np.linalg.norm(spec.product_of_exps(self.decomposition) - target))

    def decomposition_length(self, spec: GroupSpec) -> float:
        return float(sum(spec.norm(Y) for Y in self.decomposition))


def _algebra_log(spec: GroupSpec, M) -> np.ndarray:
    """Principal log of M projected back into the algebra; raises on failure."""
    L = spec.log(M)
    ok, res = is_member(spec, L, "algebra", tol=1e-8 * max(1.0, np.linalg.norm(L)))
    if not ok:
        raise InvalidLog(f"log lies outside the algebra (residual {res:.3e})")
    # strip the tiny non-algebra part so decompositions satisfy predicates exactly
    L = spec.from_coords(spec.coords(L))
    return L


def distance_closed_form(spec: GroupSpec, g, h) -> MetricResult:
    """Closed-form distance for Ad-invariant groups and the Heisenberg group.

    For su2 and so2m the value ``||log(g^{-1}h)||`` is certified exact when
    ``||log||_op < pi``.  For the Heisenberg group the value is the norm of
    the group coordinates of g^{-1}h, which reduces to
    sqrt(|xi - eta|^2 + (xi.Omega eta)^2 / 4) for vanishing central parts.
    It is reported as an upper bound because a commutator path can beat it
    when the central part is large.
    """
    if spec.id == "heisenberg":
        q = spec.left_quotient(np.asarray(g, float), np.asarray(h, float))
        return MetricResult(float(np.linalg.norm(q)), "log_upper_bound", (q,), False)
    if not spec.ad_invariant:
        raise NotApplicable(f"{spec.label} has no Ad-invariant inner product")
    M = spec.left_quotient(g, h)
    try:
        L = _algebra_log(spec, M)
    except (BranchFailure, InvalidLog) as exc:
        raise NotApplicable(str(exc)) from exc
    value = spec.norm(L)
    if linalg.norm(L, "operator") < EXACT_LOG_RADIUS:
        return MetricResult(value, "exact_closed_form", (L,), True)
    return MetricResult(value, "log_upper_bound", (L,), False)


def distance_log_bound(spec: GroupSpec, g, h) -> MetricResult:
    """Upper bound ``||log(g^{-1}h)||``; may raise BranchFailure or InvalidLog."""
    M = spec.left_quotient(g, h)
    L = _algebra_log(spec, M)
    return MetricResult(spec.norm(L), "log_upper_bound", (L,), False)


def _fast_exp(spec: GroupSpec, X):
    if spec.is_matrix_group and spec.matrix_dim == 2:
        return linalg.expm_2x2(X)
    return spec.exp(X)


class _Path:
    """Intermediate points 1 = p_0, p_1, ..., p_K = target with cached segment logs."""

    def __init__(self, spec: GroupSpec, points):
        self.spec = spec
        self.points = list(points)
        self.logs = [None] * (len(points) - 1)
        self.lengths = np.zeros(len(points) - 1)
        for j in range(len(self.logs)):
            self._update(j)

    def _segment(self, a, b):
        L = _algebra_log(self.spec, self.spec.left_quotient(a, b))
        return L, self.spec.norm(L)

    def _update(self, j):
        self.logs[j], self.lengths[j] = self._segment(self.points[j], self.points[j + 1])

    @property
    def total(self) -> float:
        return float(self.lengths.sum())

    def _trial_length(self, a, b) -> float:
        # cheap version of _segment for optimizer trials: no projection or membership check
        return self.spec.norm(self.spec.log(self.spec.left_quotient(a, b)))

    def local_cost(self, j, point) -> float:
        try:
            return (self._trial_length(self.points[j - 1], point)
                    + self._trial_length(point, self.points[j + 1]))
        except (BranchFailure, np.linalg.LinAlgError, ValueError):
            return np.inf

    def move(self, j, point):
        self.points[j] = point
        self._update(j - 1)
        self._update(j)

    def doubled(self) -> "_Path":
        """Insert geodesic midpoints; the total length is unchanged."""
        pts = [self.points[0]]
        for j, L in enumerate(self.logs):
            mid = self.spec.multiply(self.points[j], self.spec.exp(0.5 * L))
            pts += [mid, self.points[j + 1]]
        return _Path(self.spec, pts)


def _initial_word(spec: GroupSpec, target, rng, retries: int = 40):
    """A decomposition of target: its log, else exp(Z) times a log, for random Z."""
    try:
        return [_algebra_log(spec, target)]
    except (BranchFailure, InvalidLog):
        pass
    for attempt in range(retries):
        scale = np.pi * (0.25 + attempt / retries)
        coeffs = rng.standard_normal(spec.dim)
        Z = spec.from_coords(scale * coeffs / np.linalg.norm(coeffs))
        rest = spec.left_quotient(spec.exp(Z), target)
        try:
            return [Z, _algebra_log(spec, rest)]
        except (BranchFailure, InvalidLog):
            continue
    raise NoDecomposition("no exponential factorization found for the target")


def _path_from_word(spec: GroupSpec, word, segments: int, target) -> _Path:
    counts = [segments // len(word)] * len(word)
    for i in range(segments - sum(counts)):
        counts[i] += 1
    points = [spec.identity()]
    current = spec.identity()
    for Y, c in zip(word, counts):
        step = spec.exp(Y / c)
        for _ in range(c):
            current = spec.multiply(current, step)
            points.append(current)
    points[-1] = np.array(target, copy=True)
    return _Path(spec, points)


def _optimize(path: _Path, rng, sweeps: int, maxfev: int, step: float):
    spec = path.spec
    K = len(path.points) - 1
    for _ in range(sweeps):
        improved = False
        for j in range(1, K):
            base = path.points[j]
            current = path.lengths[j - 1] + path.lengths[j]

            def cost(c, base=base, j=j):
                return path.local_cost(j, spec.multiply(base, _fast_exp(spec, spec.from_coords(c))))

            scale = step * max(current, 1e-3)
            simplex = np.vstack([np.zeros(spec.dim), scale * np.eye(spec.dim)])
            res = minimize(cost, np.zeros(spec.dim), method="Nelder-Mead",
                           options={"maxfev": maxfev, "initial_simplex": simplex,
                                    "xatol": 1e-10, "fatol": 1e-12})
            if np.isfinite(res.fun) and res.fun < current - 1e-14:
                candidate = spec.multiply(base, spec.exp(spec.from_coords(res.x)))
                before = path.total
                old = path.points[j]
                try:
                    path.move(j, candidate)
                    accepted = path.total <= before
                except (BranchFailure, InvalidLog):
                    accepted = False
                if not accepted:  # exact recomputation disagrees; undo
                    path.move(j, old)
                else:
                    improved = True
        if not improved:
            break
    return path


def distance_refined(spec: GroupSpec, g, h, segments: int = DEFAULT_SEGMENTS,
                     iters: int = 3, seed=0, maxfev: int | None = None) -> MetricResult:
    """Tighten the upper bound on d(g, h) by optimizing a K-segment path.

    The segment count K is reached from its odd part by repeated doubling,
    each doubling inserting geodesic midpoints (which keeps the length) and
    then optimizing.  Moves are only accepted when they shorten the path, so
    the value never exceeds the log bound and is non-increasing when K doubles.

    Parameters
    ----------
    segments : int
        Number of exponential factors K >= 1.
    iters : int
        Round-robin sweeps over the intermediate points per level.
    maxfev : int, optional
        Nelder-Mead evaluation budget per point (default ``30 * dim``).
    """
    if segments < 1 or int(segments) != segments:
        raise ValueError("segments must be a positive integer")
    rng = np.random.default_rng(seed)
    target = spec.left_quotient(g, h)
    word = _initial_word(spec, target, rng)
    if maxfev is None:
        maxfev = 30 * spec.dim
    base = int(segments)
    doublings = 0
    while base % 2 == 0 and base > len(word):
        base //= 2
        doublings += 1
    base = max(base, len(word))
    path = _path_from_word(spec, word, base, target)
    if base > 1:
        _optimize(path, rng, iters, maxfev, 0.3)
    for _ in range(doublings):
        path = path.doubled()
        _optimize(path, rng, iters, maxfev, 0.3)
    decomposition = tuple(path.logs)
    return MetricResult(path.total, "refined_upper_bound", decomposition, False)


def distance_best(spec: GroupSpec, g, h, segments: int = DEFAULT_SEGMENTS, **kwargs) -> MetricResult:
    """Closed form where available, otherwise the refined upper bound."""
    if spec.ad_invariant or spec.id == "heisenberg":
        try:
            return distance_closed_form(spec, g, h)
        except NotApplicable:
            pass
    return distance_refined(spec, g, h, segments=segments, **kwargs)
