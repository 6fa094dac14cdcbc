"""Registry of the concrete Lie groups: bases, inner products and membership tests.

Matrix groups store elements as plain numpy arrays.  The Heisenberg group
stores an element as a vector ``(xi_1, ..., xi_2m, t)`` and its Lie algebra
uses the same coordinates, since the exponential map is the identity there.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import linalg

__all__ = [
    "GroupSpec",
    "make_group",
    "symplectic_form",
    "minkowski_metric",
    "is_member",
    "inner",
    "ad_invariance_test",
    "random_algebra_element",
    "random_group_element",
    "GROUP_IDS",
    "named_element",
]

GROUP_IDS = ("su2", "so2m", "sp2m", "su11", "lorentz", "heisenberg")

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

GROUP_TOL = 1e-8
ALGEBRA_TOL = 1e-10


def symplectic_form(m: int) -> np.ndarray:
    """Omega = [[0, 1_m], [-1_m, 0]]."""
    eye = np.eye(m)
    zero = np.zeros((m, m))
    return np.block([[zero, eye], [-eye, zero]])


def minkowski_metric() -> np.ndarray:
    return np.diag([-1.0, 1.0, 1.0, 1.0])


def _unit(n, j, k):
    E = np.zeros((n, n))
    E[j, k] = 1.0
    return E


@dataclass(frozen=True, eq=False)
class GroupSpec:
    """A registered group together with an orthonormal basis of its algebra.

    ``raw_basis`` is the basis as conventionally written down, ``gram`` its
    Gram matrix under the inner product, and ``basis`` the orthonormalized
    version used everywhere downstream.
    """

    id: str
    m: int
    matrix_dim: int
    raw_basis: tuple
    gram: np.ndarray
    basis: tuple
    ad_invariant: bool
    convention: str = "default"
    omega: np.ndarray | None = None
    eta: np.ndarray | None = None
    _inner: Callable = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_basis_stack", np.stack(self.basis))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def is_matrix_group(self) -> bool:
        return self.id != "heisenberg"

    @property
    def label(self) -> str:
        if self.id in ("so2m", "sp2m", "heisenberg"):
            return f"{self.id}(m={self.m})"
        return self.id

    # algebra side
    def inner(self, X, Y) -> float:
        return float(self._inner(np.asarray(X), np.asarray(Y)))

    def norm(self, X) -> float:
        return float(np.sqrt(max(self.inner(X, X), 0.0)))

    def coords(self, X) -> np.ndarray:
        """Coefficients of ``X`` in the orthonormal basis."""
        return np.array([self.inner(B, X) for B in self.basis])

    def raw_coords(self, X) -> np.ndarray:
        """Coefficients of ``X`` in ``raw_basis`` (solves against the Gram matrix)."""
        rhs = np.array([self.inner(B, X) for B in self.raw_basis])
        return np.linalg.solve(self.gram, rhs)

    def from_coords(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        if c.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} coordinates, got shape {c.shape}")
        return np.tensordot(c, self._basis_stack, axes=1)

    def bracket(self, X, Y):
        if self.is_matrix_group:
            return X @ Y - Y @ X
        m = self.m
        xi, eta_ = X[: 2 * m], Y[: 2 * m]
        out = np.zeros(2 * m + 1)
        out[-1] = -xi @ self.omega @ eta_
        return out

    def zero(self) -> np.ndarray:
        return np.zeros_like(self.basis[0])

    # group side
    def identity(self) -> np.ndarray:
        if self.is_matrix_group:
            dtype = self.basis[0].dtype
            return np.eye(self.matrix_dim, dtype=dtype)
        return np.zeros(2 * self.m + 1)

    def multiply(self, a, b) -> np.ndarray:
        if self.is_matrix_group:
            return a @ b
        m = self.m
        out = a + b
        out[-1] -= 0.5 * a[: 2 * m] @ self.omega @ b[: 2 * m]
        return out

    def inverse(self, a) -> np.ndarray:
        if self.is_matrix_group:
            return np.linalg.inv(a)
        return -np.asarray(a, dtype=float)

    def exp(self, X) -> np.ndarray:
        if self.is_matrix_group:
            return linalg.expm(X)
        return np.array(X, dtype=float)

    def log(self, g) -> np.ndarray:
        """Principal logarithm; may raise :class:`BranchFailure`."""
        if self.is_matrix_group:
            return linalg.logm_principal(g)
        return np.array(g, dtype=float)

    def left_quotient(self, g, h) -> np.ndarray:
        """g^{-1} h."""
        if self.is_matrix_group:
            if self.matrix_dim == 2:
                det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
                adj = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]])
                return (adj @ h) / det
            return np.linalg.solve(g, h)
        return self.multiply(self.inverse(g), h)

    def product_of_exps(self, word) -> np.ndarray:
        out = self.identity()
        for Y in word:
            out = self.multiply(out, self.exp(Y))
        return out

    def ad(self, g, X) -> np.ndarray:
        if self.is_matrix_group:
            return g @ X @ np.linalg.inv(g)
        m = self.m
        out = np.array(X, dtype=float)
        out[-1] += g[: 2 * m] @ self.omega @ X[: 2 * m]
        return out


def _orthonormalize(raw, inner_fn):
    n = len(raw)
    gram = np.array([[inner_fn(raw[i], raw[j]) for j in range(n)] for i in range(n)])
    if not np.allclose(gram, gram.T, atol=1e-12):
        raise ValueError("Gram matrix not symmetric")
    w, V = np.linalg.eigh(gram)
    if w.min() <= 0:
        raise ValueError("Gram matrix not positive definite")
    # symmetric (Lowdin) orthonormalization keeps an already orthonormal basis unchanged
    C = V @ np.diag(w ** -0.5) @ V.T
    basis = tuple(sum(C[i, j] * raw[i] for i in range(n)) for j in range(n))
    return gram, basis


def _frob(X, Y):
    return np.real(np.vdot(X, Y))


def make_group(id: str, m: int = 1, convention: str = "default") -> GroupSpec:
    """Construct one of the registered groups.

    Parameters
    ----------
    id : {"su2", "so2m", "sp2m", "su11", "lorentz", "heisenberg"}
    m : int
        Size parameter for ``so2m``, ``sp2m`` and ``heisenberg`` (ignored otherwise).
    convention : str
        Only used by ``su2``: ``"default"`` takes ``<X,Y> = 2 tr[X*Y]`` so
        that ``-(i/2) sigma_k`` is orthonormal; ``"frobenius"`` takes
        ``tr[X*Y]``, whose orthonormal basis is ``-(i/sqrt 2) sigma_k``.
    """
    if id not in GROUP_IDS:
        raise ValueError(f"unknown group id {id!r}")
    if id in ("so2m", "sp2m", "heisenberg"):
        if int(m) != m or m < 1:
            raise ValueError("m must be a positive integer")
        m = int(m)
    else:
        m = 1

    omega = eta = None
    if id == "su2":
        if convention not in ("default", "frobenius"):
            raise ValueError(f"unknown su2 convention {convention!r}")
        scale = 2.0 if convention == "default" else 1.0
        inner_fn = lambda X, Y: scale * _frob(X, Y)  # noqa: E731
        raw = [-0.5j * PAULI[k] for k in "xyz"]
        ad_inv, dim = True, 2
    elif id == "so2m":
        n = 2 * m
        inner_fn = _frob
        raw = [(_unit(n, j, k) - _unit(n, k, j)) / np.sqrt(2)
               for j in range(n) for k in range(j)]
        ad_inv, dim = True, n
    elif id == "sp2m":
        n = 2 * m
        omega = symplectic_form(m)
        inner_fn = _frob
        sym = [(_unit(n, k, l) + _unit(n, l, k)) / np.sqrt(2)
               for l in range(n) for k in range(l)]
        sym += [_unit(n, k, k) for k in range(n)]
        raw = [-omega @ S for S in sym]
        ad_inv, dim = False, n
    elif id == "su11":
        inner_fn = lambda X, Y: 2.0 * _frob(X, Y)  # noqa: E731
        raw = [0.5j * np.array([[1, 0], [0, -1]], dtype=complex),
               0.5j * np.array([[0, -1], [1, 0]], dtype=complex),
               0.5 * np.array([[0, 1], [1, 0]], dtype=complex)]
        ad_inv, dim = False, 2
    elif id == "lorentz":
        eta = minkowski_metric()
        inner_fn = lambda X, Y: 0.5 * _frob(X, Y)  # noqa: E731
        J = [np.zeros((4, 4)) for _ in range(3)]
        J[0][3, 2], J[0][2, 3] = 1, -1
        J[1][1, 3], J[1][3, 1] = 1, -1
        J[2][2, 1], J[2][1, 2] = 1, -1
        K = []
        for i in range(1, 4):
            B = np.zeros((4, 4))
            B[0, i] = B[i, 0] = 1
            K.append(B)
        raw = J + K
        ad_inv, dim = False, 4
    else:  # heisenberg
        omega = symplectic_form(m)
        inner_fn = lambda X, Y: float(np.dot(X, Y))  # noqa: E731
        raw = list(np.eye(2 * m + 1))
        ad_inv, dim = False, 0

    gram, basis = _orthonormalize(raw, inner_fn)
    return GroupSpec(id=id, m=m, matrix_dim=dim, raw_basis=tuple(raw), gram=gram,
                     basis=basis, ad_invariant=ad_inv, convention=convention,
                     omega=omega, eta=eta, _inner=inner_fn)


def _group_residual(spec: GroupSpec, g) -> float:
    g = np.asarray(g)
    if not np.all(np.isfinite(g)):
        return float("inf")
    if spec.id == "heisenberg":
        return 0.0 if g.shape == (2 * spec.m + 1,) else float("inf")
    n = spec.matrix_dim
    if g.shape != (n, n):
        return float("inf")
    eye = np.eye(n)
    imag = float(np.linalg.norm(np.imag(g))) if np.iscomplexobj(g) else 0.0
    det_defect = abs(np.linalg.det(g) - 1.0)
    if spec.id == "su2":
        return float(np.linalg.norm(g.conj().T @ g - eye)) + det_defect
    if spec.id == "so2m":
        gr = np.real(g)
        return float(np.linalg.norm(gr.T @ gr - eye)) + det_defect + imag
    if spec.id == "sp2m":
        gr = np.real(g)
        return float(np.linalg.norm(gr.T @ spec.omega @ gr - spec.omega)) + imag
    if spec.id == "su11":
        sz = PAULI["z"]
        return float(np.linalg.norm(g @ sz @ g.conj().T - sz)) + det_defect
    gr = np.real(g)
    return (float(np.linalg.norm(gr.T @ spec.eta @ gr - spec.eta)) + det_defect + imag
            + max(0.0, 1.0 - gr[0, 0]))


def _algebra_residual(spec: GroupSpec, X) -> float:
    X = np.asarray(X)
    if not np.all(np.isfinite(X)):
        return float("inf")
    if spec.id == "heisenberg":
        ok = X.shape == (2 * spec.m + 1,) and not np.iscomplexobj(X)
        return 0.0 if ok else float("inf")
    n = spec.matrix_dim
    if X.shape != (n, n):
        return float("inf")
    imag = float(np.linalg.norm(np.imag(X))) if np.iscomplexobj(X) else 0.0
    if spec.id == "su2":
        return float(np.linalg.norm(X + X.conj().T)) + abs(np.trace(X))
    if spec.id == "so2m":
        return float(np.linalg.norm(X + X.T)) + imag
    if spec.id == "sp2m":
        Xr = np.real(X)
        return float(np.linalg.norm(spec.omega @ Xr + Xr.T @ spec.omega)) + imag
    if spec.id == "su11":
        sz = PAULI["z"]
        return float(np.linalg.norm(X @ sz + sz @ X.conj().T)) + abs(np.trace(X))
    Xr = np.real(X)
    return float(np.linalg.norm(Xr.T @ spec.eta + spec.eta @ Xr)) + abs(np.trace(Xr)) + imag


def is_member(spec: GroupSpec, e, kind: str = "group", tol: float | None = None):
    """Check the defining predicate of the group (``kind="group"``) or its algebra.

    Returns ``(ok, residual)`` where the residual is the Frobenius norm of the
    defect plus any determinant or orientation defect.
    """
    if kind == "group":
        res = _group_residual(spec, e)
        return res <= (GROUP_TOL if tol is None else tol), res
    if kind == "algebra":
        res = _algebra_residual(spec, e)
        return res <= (ALGEBRA_TOL if tol is None else tol), res
    raise ValueError(f"unknown kind {kind!r}")


def inner(spec: GroupSpec, X, Y) -> float:
    return spec.inner(X, Y)


def random_algebra_element(spec: GroupSpec, scale: float = 1.0, seed=None) -> np.ndarray:
    """Random algebra element with norm at most ``scale``.

    Built from basis coefficients, so the algebra predicate holds exactly up
    to floating point.  The direction is uniform and the radius is
    ``scale * U**(1/dim)`` (uniform in the ball).
    """
    if scale < 0:
        raise ValueError("scale must be non-negative")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(spec.dim)
    v /= np.linalg.norm(v)
    r = scale * rng.uniform() ** (1.0 / spec.dim)
    return spec.from_coords(r * v)


def random_group_element(spec: GroupSpec, scale: float = 1.0, factors: int = 3, seed=None):
    """Product of ``factors`` (at most 3) exponentials of random algebra elements.

    Returns ``(g, word)`` where ``word`` lists the algebra elements used.
    """
    if not 1 <= factors <= 3:
        raise ValueError("factors must be between 1 and 3")
    rng = np.random.default_rng(seed)
    word = [random_algebra_element(spec, scale, rng) for _ in range(factors)]
    return spec.product_of_exps(word), word


def ad_invariance_test(spec: GroupSpec, samples: int = 20, seed=0,
                       scale: float = 1.0, tol: float = 1e-8) -> bool:
    """Sample Ad_g X, Ad_g Y and compare inner products; False on first violation."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        g, _ = random_group_element(spec, scale, factors=1, seed=rng)
        X = random_algebra_element(spec, 1.0, rng)
        Y = random_algebra_element(spec, 1.0, rng)
        lhs = spec.inner(spec.ad(g, X), spec.ad(g, Y))
        if abs(lhs - spec.inner(X, Y)) > tol:
            return False
    return True


def named_element(spec: GroupSpec, name: str) -> np.ndarray:
    """Look up a named algebra element for configs, e.g. ``Omega``, ``Omega*sigma_x``, ``B21``."""
    key = name.replace(" ", "")
    if spec.id == "sp2m":
        if key == "Omega":
            return spec.omega.copy()
        if key == "-Omega":
            return -spec.omega
        if spec.m == 1 and key.startswith("Omega*sigma_"):
            s = key.split("_", 1)[1]
            return spec.omega @ np.real(PAULI[s])
    if spec.id == "so2m" and key.startswith("B") and len(key) == 3:
        j, k = int(key[1]) - 1, int(key[2]) - 1
        n = 2 * spec.m
        if not (0 <= k < j < n):
            raise ValueError(f"{name} needs indices k < j <= {n}")
        return (_unit(n, j, k) - _unit(n, k, j)) / np.sqrt(2)
    raise ValueError(f"unknown named element {name!r} for {spec.label}")
