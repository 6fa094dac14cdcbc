"""Nelson Laplacians, improved energy operators and inner-product rescaling."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import NotAvailable, NotMaterializable
from .groups import random_algebra_element
from .representations import Representation, boson_ops, low_fock_indices, su11_sector_ops

__all__ = [
    "EnergyOperator",
    "nelson_basis_sum",
    "nelson_closed_form",
    "improved_k",
    "certify_energy_operator",
    "rescaled_laplacian_bounds",
    "RescaledBounds",
    "valid_block",
]

PSD_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class EnergyOperator:
    """A positive operator K used as the energy term sqrt(<psi, K psi>).

    ``mat`` is dense for small spaces and sparse for truncated bosonic ones.
    ``certified`` records whether the sampled domination check
    ||A(X) psi||^2 <= ||X||^2 <psi, K psi> passed (always True for the
    Nelson Laplacian itself).
    """

    rep: Representation
    mat: object = field(repr=False)
    kind: str
    inner_product_tag: str
    certified: bool = True
    margin: float = 0.0

    def __post_init__(self):
        if self.kind not in ("nelson", "improved_k", "closed_form"):
            raise ValueError(f"unknown energy operator kind {self.kind!r}")

    def dense(self) -> np.ndarray:
        return self.mat.toarray() if sp.issparse(self.mat) else np.asarray(self.mat)

    def expectation(self, psi) -> float:
        psi = np.asarray(psi)
        return float(np.real(np.vdot(psi, self.mat @ psi)))

    def block(self, idx) -> np.ndarray:
        M = self.mat.tocsr()[idx][:, idx] if sp.issparse(self.mat) else np.asarray(self.mat)[np.ix_(idx, idx)]
        return M.toarray() if sp.issparse(M) else M

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue on the block where truncation is faithful."""
        B = self.block(valid_block(self.rep))
        return float(np.linalg.eigvalsh((B + B.conj().T) / 2)[0])


def _tag(rep: Representation) -> str:
    return f"{rep.group.label}:{rep.group.convention}"


def valid_block(rep: Representation, fraction: float = 0.25) -> np.ndarray:
    """Indices on which truncated operators agree with the untruncated ones.

    Finite reps use the whole space; truncated reps keep Fock states with
    occupation at most ``fraction * cutoff`` per mode.
    """
    if not rep.truncated:
        return np.arange(rep.hilbert_dim)
    nmax = int(fraction * rep.cutoff)
    if rep.rep_id == "su11_sector":
        return np.arange(nmax + 1)
    return low_fock_indices(rep.modes, rep.cutoff, nmax)


def nelson_basis_sum(rep: Representation) -> EnergyOperator:
    """Delta = sum_j A(X_j)^2 over the orthonormal basis of the group."""
    if not rep.finite:
        raise NotMaterializable("use the expectation functional for the Lorentz representation")
    D = None
    for G in rep.basis_generators:
        term = G @ G
        D = term if D is None else D + term
    if sp.issparse(D):
        D = D.tocsr()
    return EnergyOperator(rep, D, "nelson", _tag(rep))


def _identity(rep, sparse):
    if sparse:
        return sp.identity(rep.hilbert_dim, dtype=complex, format="csr")
    return np.eye(rep.hilbert_dim, dtype=complex)


def _bosonic_h(rep: Representation):
    return boson_ops(rep.modes, rep.cutoff)["H"]


def nelson_closed_form(rep: Representation) -> EnergyOperator:
    """Analytic Nelson Laplacian for each shipped representation.

    spin j(j+1) 1; flo m(2m-1)/8 1; displacement 1 + sum(Q^2 + P^2) = 1 + 2H;
    metaplectic H^2 + (3m/8) 1; su11 sector 2 K0^2 + (1 - n^2)/4 1.
    The bosonic closed forms are diagonal in the Fock basis and hence exact
    on every retained level.
    """
    rid = rep.rep_id
    if rid == "spin":
        j = float(Fraction(rep.params["j"]))
        scale = 2.0 if rep.group.convention == "frobenius" else 1.0
        mat = scale * j * (j + 1) * _identity(rep, False)
    elif rid == "flo":
        m = rep.params["m"]
        mat = m * (2 * m - 1) / 8 * _identity(rep, False)
    elif rid == "boson_displacement":
        mat = (_identity(rep, True) + 2 * _bosonic_h(rep)).tocsr()
    elif rid == "metaplectic":
        H = _bosonic_h(rep)
        mat = (H @ H + 3 * rep.modes / 8 * _identity(rep, True)).tocsr()
    elif rid == "su11_sector":
        mat = su11_sector_ops(rep.params["n"], rep.cutoff)["Delta"]
    elif rid == "lorentz_scalar":
        raise NotMaterializable("use lorentz_nelson_expectation for the Lorentz representation")
    else:
        raise ValueError(f"no closed form for {rid}")
    return EnergyOperator(rep, mat, "closed_form", _tag(rep))


def certify_energy_operator(rep: Representation, K, samples: int = 200, seed=0) -> float:
    """Largest eigenvalue of A(X)^2 - ||X||^2 K over sampled unit X (on the valid block).

    A value <= 1e-9 means the domination ||A(X) psi|| <= ||X|| sqrt(<psi,K psi>)
    held for every sample.
    """
    idx = valid_block(rep)
    Kb = K.block(idx) if isinstance(K, EnergyOperator) else np.asarray(K)[np.ix_(idx, idx)]
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(samples):
        X = random_algebra_element(rep.group, 1.0, rng)
        X = X / rep.group.norm(X)
        A = rep.generator(X, sparse=rep.truncated)
        A2 = A @ A
        A2 = A2.tocsr()[idx][:, idx].toarray() if sp.issparse(A2) else A2[np.ix_(idx, idx)]
        M = A2 - Kb
        worst = max(worst, float(np.linalg.eigvalsh((M + M.conj().T) / 2)[-1]))
    return worst


def improved_k(rep: Representation, samples: int = 200, seed=0) -> EnergyOperator:
    """Smaller energy operator K with A(X)^2 <= ||X||^2 K.

    spin: j^2 1, from ||A(X)|| = j ||X||.  displacement: 2H.  Both are checked
    by sampling; a failed check is recorded in ``certified`` and warned about.
    """
    if rep.rep_id == "spin":
        j = float(Fraction(rep.params["j"]))
        scale = 2.0 if rep.group.convention == "frobenius" else 1.0
        mat = scale * j * j * _identity(rep, False)
    elif rep.rep_id == "boson_displacement":
        mat = (2 * _bosonic_h(rep)).tocsr()
    else:
        raise NotAvailable(f"no improved K known for {rep.rep_id}")
    K = EnergyOperator(rep, mat, "improved_k", _tag(rep))
    margin = certify_energy_operator(rep, K, samples, seed)
    ok = margin <= 1e-9
    if not ok:
        warnings.warn(f"improved K for {rep.label} fails the domination check "
                      f"(max eigenvalue {margin:.3g})", stacklevel=2)
    return EnergyOperator(rep, mat, "improved_k", _tag(rep), certified=ok, margin=margin)


@dataclass(frozen=True, eq=False)
class RescaledBounds:
    """Result of comparing Delta with Delta' for <X,Y>' = sum_j w_j x_j y_j.

    ``lower_ok`` is c Delta' <= Delta and ``upper_ok`` is Delta <= C Delta'
    with c = min w, C = max w.  ``reversed_ok`` reports whether the opposite
    orientation C Delta' <= Delta <= c Delta' also holds (only when c = C).
    """

    delta_prime: EnergyOperator
    c: float
    C: float
    lower_ok: bool
    upper_ok: bool
    reversed_ok: bool
    lower_margin: float
    upper_margin: float

    @property
    def holds(self) -> bool:
        return self.lower_ok and self.upper_ok


def rescaled_laplacian_bounds(rep: Representation, weights, tol: float = 1e-8) -> RescaledBounds:
    """Laplacian of the rescaled inner product and the sandwich constants.

    The rescaled orthonormal basis is X_j / sqrt(w_j), so
    Delta' = sum_j A(X_j)^2 / w_j.  All checks are eigenvalue checks on the
    valid block.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (rep.group.dim,):
        raise ValueError(f"need {rep.group.dim} weights")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    D = None
    for wj, G in zip(w, rep.basis_generators):
        term = (G @ G) / wj
        D = term if D is None else D + term
    Dp = EnergyOperator(rep, D.tocsr() if sp.issparse(D) else D, "nelson", f"{_tag(rep)}:rescaled")
    base = nelson_basis_sum(rep)
    idx = valid_block(rep)
    Db, Dpb = base.block(idx), Dp.block(idx)
    c, C = float(w.min()), float(w.max())

    def min_eig(M):
        return float(np.linalg.eigvalsh((M + M.conj().T) / 2)[0])

    lower = min_eig(Db - c * Dpb)
    upper = min_eig(C * Dpb - Db)
    rev = min(min_eig(Db - C * Dpb), min_eig(c * Dpb - Db))
    return RescaledBounds(Dp, c, C, lower >= -tol, upper >= -tol, rev >= -tol, lower, upper)
