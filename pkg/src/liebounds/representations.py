"""Concrete representations X -> A(X) and the unitaries U(e^X) = exp(-i A(X)).

Bosonic representations live on a Fock space truncated at ``cutoff`` levels
per mode.  Quadratic generators are assembled on a slightly larger space and
then cropped, so the stored matrices are the exact compressions of the
untruncated operators onto the retained Fock states.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np
import scipy.sparse as sp

from . import linalg
from .errors import NotMaterializable
from .groups import GroupSpec, make_group

__all__ = [
    "Representation",
    "spin",
    "flo",
    "boson_displacement",
    "metaplectic",
    "su11_sector",
    "lorentz_scalar",
    "generator",
    "unitary",
    "spin_matrices",
    "majorana_operators",
    "boson_ops",
    "displacement",
    "su11_sector_ops",
    "fock_index",
    "fock_state",
    "coherent_state",
    "random_state",
    "low_fock_indices",
    "load_state",
    "save_state",
]

DENSE_LIMIT = 1024


@dataclass(frozen=True, eq=False)
class Representation:
    """A representation of ``group`` with generators for its orthonormal basis.

    ``basis_generators[i]`` is A(X_i) for the i-th orthonormal basis element,
    so A(X) = sum_i <X, X_i> A(X_i).  For truncated reps these are sparse.
    """

    rep_id: str
    group: GroupSpec
    hilbert_dim: int | None
    params: dict
    truncated: bool
    projective: bool
    basis_generators: tuple = field(default=(), repr=False)
    cutoff: int | None = None
    modes: int = 0

    @property
    def finite(self) -> bool:
        return self.hilbert_dim is not None

    @property
    def label(self) -> str:
        args = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.rep_id}({args})"

    def generator(self, X, sparse: bool = False):
        if not self.finite:
            raise NotMaterializable(f"{self.rep_id} has no matrix generators")
        c = self.group.coords(X)
        out = None
        for ci, G in zip(c, self.basis_generators):
            if ci != 0:
                out = ci * G if out is None else out + ci * G
        if out is None:
            out = sp.csr_matrix((self.hilbert_dim, self.hilbert_dim), dtype=complex)
        if sp.issparse(out):
            return out.tocsr() if sparse else out.toarray()
        return sp.csr_matrix(out) if sparse else np.asarray(out)

    def unitary(self, word):
        """prod_j exp(-i A(Y_j)) in word order."""
        if not self.finite:
            raise NotMaterializable(f"{self.rep_id} has no matrix unitaries")
        if len(word) == 0:
            raise ValueError("word must be nonempty")
        if self.hilbert_dim > 4 * DENSE_LIMIT:
            raise NotMaterializable("Hilbert space too large for dense unitaries")
        U = np.eye(self.hilbert_dim, dtype=complex)
        for Y in word:
            U = U @ linalg.unitary_exp(self.generator(Y))
        return U


def generator(rep: Representation, X, sparse: bool = False):
    return rep.generator(X, sparse=sparse)


def unitary(rep: Representation, word):
    return rep.unitary(word)


# spin


def _spin_value(j) -> Fraction:
    exact = Fraction(j)
    jf = exact.limit_denominator(2)
    if jf <= 0 or jf.denominator not in (1, 2) or abs(float(jf) - float(exact)) > 1e-12:
        raise ValueError(f"spin must be a positive multiple of 1/2, got {j}")
    return jf


def spin_matrices(j):
    """(S_x, S_y, S_z) in the basis |j>, |j-1>, ..., |-j> via ladder operators."""
    jf = float(_spin_value(j))
    ms = np.arange(jf, -jf - 1, -1)
    dim = len(ms)
    Sp = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        m = ms[k]
        Sp[k - 1, k] = np.sqrt(jf * (jf + 1) - m * (m + 1))
    Sm = Sp.conj().T
    return (Sp + Sm) / 2, (Sp - Sm) / 2j, np.diag(ms).astype(complex)


def spin(j, convention: str = "default") -> Representation:
    """Spin-j representation of SU(2) on C^(2j+1)."""
    jf = _spin_value(j)
    group = make_group("su2", convention=convention)
    S = spin_matrices(jf)
    gens = tuple(sum(c * Sk for c, Sk in zip(group.raw_coords(B), S)) for B in group.basis)
    return Representation("spin", group, int(2 * jf + 1), {"j": str(jf)}, False, False, gens)


# fermionic linear optics


def majorana_operators(m: int):
    """Jordan-Wigner Majoranas c_1 ... c_2m on (C^2)^(x m)."""
    I2 = np.eye(2, dtype=complex)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    Z = np.diag([1.0, -1.0]).astype(complex)
    out = []
    for j in range(m):
        for P in (X, Y):
            out.append(linalg.kron(*([Z] * j + [P] + [I2] * (m - j - 1))))
    return out


def flo(m: int) -> Representation:
    """Free-fermion representation A(X) = (i/4) c . X c of so(2m) on 2^m dimensions."""
    group = make_group("so2m", m)
    c = majorana_operators(m)
    n = 2 * m

    def gen(B):
        A = np.zeros((2**m, 2**m), dtype=complex)
        for a in range(n):
            for b in range(n):
                if B[a, b] != 0:
                    A += B[a, b] * (c[a] @ c[b])
        return 0.25j * A

    gens = tuple(gen(B) for B in group.basis)
    return Representation("flo", group, 2**m, {"m": m}, False, True, gens)


# bosons


def boson_ops(m: int, cutoff: int, pad: int = 0):
    """Sparse mode operators on the Fock space with ``cutoff + pad`` levels per mode.

    Returns a dict with lists ``a``, ``adag``, ``Q``, ``P`` and the operators
    ``N`` (total number) and ``H = (1/2) sum (Q_k^2 + P_k^2)``.
    ``H`` is built as N + m/2 so it is exactly diagonal.
    """
    if cutoff < 4:
        raise ValueError("cutoff must be at least 4")
    d = cutoff + pad
    a1 = sp.diags(np.sqrt(np.arange(1, d)), 1, shape=(d, d), dtype=complex, format="csr")
    eye = sp.identity(d, dtype=complex, format="csr")

    def embed(op, k):
        mats = [eye] * m
        mats[k] = op
        out = mats[0]
        for M in mats[1:]:
            out = sp.kron(out, M, format="csr")
        return out

    a = [embed(a1, k) for k in range(m)]
    adag = [ak.conj().T.tocsr() for ak in a]
    Q = [((ak + ad) / np.sqrt(2)).tocsr() for ak, ad in zip(a, adag)]
    P = [((ak - ad) * (-1j / np.sqrt(2))).tocsr() for ak, ad in zip(a, adag)]
    N = sum(ad @ ak for ak, ad in zip(a, adag)).tocsr()
    H = (N + 0.5 * m * sp.identity(d**m, dtype=complex)).tocsr()
    return {"a": a, "adag": adag, "Q": Q, "P": P, "N": N, "H": H}


def fock_index(occupation, cutoff: int) -> int:
    idx = 0
    for n in occupation:
        if not 0 <= n < cutoff:
            raise ValueError(f"occupation {n} outside the cutoff {cutoff}")
        idx = idx * cutoff + int(n)
    return idx


def _crop_indices(m: int, cutoff: int, pad: int) -> np.ndarray:
    d = cutoff + pad
    return np.array([fock_index(occ, d) for occ in product(range(cutoff), repeat=m)])


def low_fock_indices(m: int, cutoff: int, nmax: int) -> np.ndarray:
    """Indices of Fock states with every occupation at most ``nmax``."""
    return np.array([fock_index(occ, cutoff) for occ in product(range(min(nmax, cutoff - 1) + 1), repeat=m)])


def _crop(op, keep):
    return op.tocsr()[keep][:, keep].tocsr()


def boson_displacement(m: int, cutoff: int = 64) -> Representation:
    """Displacement operators as a representation of the Heisenberg group.

    A((xi, x)) = xi . Omega R - x, so U((xi, t)) = D(xi) e^{it} with
    D(xi) = exp(-i xi . Omega R).
    """
    group = make_group("heisenberg", m)
    ops = boson_ops(m, cutoff)
    R = ops["Q"] + ops["P"]
    OR = [sum(group.omega[k, l] * R[l] for l in range(2 * m) if group.omega[k, l] != 0)
          for k in range(2 * m)]
    dim = cutoff**m
    gens = tuple(OR[k].tocsr() for k in range(2 * m)) + (-sp.identity(dim, dtype=complex, format="csr"),)
    return Representation("boson_displacement", group, dim, {"m": m, "cutoff": cutoff},
                          True, True, gens, cutoff=cutoff, modes=m)


def _metaplectic_generator(S, Rbar, keep):
    n = len(Rbar)
    A = None
    for a in range(n):
        for b in range(n):
            if S[a, b] != 0:
                term = S[a, b] * (Rbar[a] @ Rbar[b])
                A = term if A is None else A + term
    return _crop(0.5 * A, keep)


def metaplectic(m: int, cutoff: int = 64) -> Representation:
    """Metaplectic representation of sp(2m, R) on the truncated m-mode Fock space.

    A(X) = (1/2) Rbar . (Omega X) Rbar with Rbar = (Q_1..Q_m, -P_1..-P_m).
    Using -P (equivalently, complex conjugation in the Fock basis) makes A a
    Lie algebra homomorphism for U(e^X) = exp(-i A(X)) while keeping
    A(-Omega) = (1/2)(Q^2 + P^2).
    """
    group = make_group("sp2m", m)
    pad = 2
    ops = boson_ops(m, cutoff, pad=pad)
    Rbar = ops["Q"] + [-P for P in ops["P"]]
    keep = _crop_indices(m, cutoff, pad)
    gens = tuple(_metaplectic_generator(group.omega @ B, Rbar, keep) for B in group.basis)
    return Representation("metaplectic", group, cutoff**m, {"m": m, "cutoff": cutoff},
                          True, True, gens, cutoff=cutoff, modes=m)


def su11_sector_ops(n: int, cutoff: int):
    """K0, K1, K2 and the sector Laplacian on D_n = span{|k + n, k>} (n >= 0) or {|k, k + |n|>}.

    The k-th basis vector has min(n1, n2) = k, k = 0 .. cutoff - 1.
    """
    if cutoff < 4:
        raise ValueError("cutoff must be at least 4")
    n = int(n)
    k = np.arange(cutoff)
    K0 = np.diag((2 * k + abs(n) + 1) / 2.0).astype(complex)
    # a1^dag a2^dag |k + |n|, k> = sqrt((k + |n| + 1)(k + 1)) |k + 1 + |n|, k + 1>
    up = np.sqrt((k[:-1] + abs(n) + 1) * (k[:-1] + 1.0))
    raise_op = np.diag(up, -1).astype(complex)
    lower_op = raise_op.conj().T
    K1 = 0.5 * (raise_op + lower_op)
    K2 = -0.5j * (raise_op - lower_op)
    Delta = 2 * K0 @ K0 + (1 - n * n) / 4.0 * np.eye(cutoff)
    return {"K0": K0, "K1": K1, "K2": K2, "Delta": Delta}


def su11_sector(n: int, cutoff: int = 48) -> Representation:
    """Restriction of the two-mode SU(1,1) representation to the sector N1 - N2 = n."""
    group = make_group("su11")
    ops = su11_sector_ops(n, cutoff)
    K = (ops["K0"], ops["K1"], ops["K2"])
    gens = tuple(sum(c * Ki for c, Ki in zip(group.raw_coords(B), K)) for B in group.basis)
    return Representation("su11_sector", group, cutoff, {"n": int(n), "cutoff": cutoff},
                          True, False, gens, cutoff=cutoff, modes=1)


def lorentz_scalar(mass: float = 1.0) -> Representation:
    """Scalar representation of SO+(1,3) on L^2 of the mass hyperboloid (functional only)."""
    if not mass > 0:
        raise ValueError("mass must be positive")
    return Representation("lorentz_scalar", make_group("lorentz"), None, {"mass": float(mass)},
                          False, False)


def displacement(m: int, cutoff: int, xi) -> np.ndarray:
    """Truncated D(xi) = exp(-i xi . Omega R)."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (2 * m,):
        raise ValueError(f"xi must have length {2 * m}")
    if np.linalg.norm(xi) > np.sqrt(cutoff) / 4:
        warnings.warn("displacement large relative to the cutoff; truncation error may be visible",
                      stacklevel=2)
    rep = boson_displacement(m, cutoff)
    return rep.unitary([np.append(xi, 0.0)])


# states


def fock_state(rep: Representation, occupation) -> np.ndarray:
    if isinstance(occupation, (int, np.integer)):
        occupation = (int(occupation),)
    psi = np.zeros(rep.hilbert_dim, dtype=complex)
    if rep.rep_id == "su11_sector":
        psi[occupation[0]] = 1.0
    elif rep.cutoff is not None:
        psi[fock_index(occupation, rep.cutoff)] = 1.0
    else:
        psi[occupation[0]] = 1.0
    return psi


def coherent_state(cutoff: int, alpha: complex) -> np.ndarray:
    """Single-mode coherent state truncated to ``cutoff`` levels and renormalized.

    With Q = (a + a^dag)/sqrt 2 the mean position is sqrt(2) Re(alpha).
    """
    n = np.arange(cutoff)
    logfact = np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, cutoff)))])
    amps = np.exp(-0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha) + 1e-300) - 0.5 * logfact)
    amps = amps * np.exp(1j * n * np.angle(alpha))
    if alpha == 0:
        amps = np.zeros(cutoff, dtype=complex)
        amps[0] = 1.0
    return amps / np.linalg.norm(amps)


def random_state(rep: Representation, rng=None, max_occupation: int | None = None) -> np.ndarray:
    """Random unit vector; for truncated reps supported on low Fock states."""
    rng = np.random.default_rng(rng)
    dim = rep.hilbert_dim
    if rep.truncated:
        nmax = 8 if max_occupation is None else max_occupation
        if rep.rep_id == "su11_sector":
            idx = np.arange(min(nmax + 1, dim))
        else:
            idx = low_fock_indices(rep.modes, rep.cutoff, nmax)
    else:
        idx = np.arange(dim)
    psi = np.zeros(dim, dtype=complex)
    psi[idx] = rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx))
    return psi / np.linalg.norm(psi)


def load_state(path) -> np.ndarray:
    """Read amplitudes written one per line as ``re im``."""
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 2:
        raise ValueError("state file must have two columns: re im")
    return data[:, 0] + 1j * data[:, 1]


def save_state(path, psi) -> None:
    psi = np.asarray(psi, dtype=complex)
    np.savetxt(path, np.column_stack([psi.real, psi.imag]), fmt="%.17g")
