"""Dense matrix primitives used by every other module.

All functions are pure: inputs are never modified and a fresh array is
returned.  Tolerances are passed explicitly through :class:`Tolerance`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg

from .errors import BranchFailure

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "expm",
    "unitary_exp",
    "logm_principal",
    "norm",
    "eig_hermitian",
    "kron",
    "unitarity_defect",
    "commutator",
    "expm_2x2",
]


@dataclass(frozen=True)
class Tolerance:
    rel: float = 1e-12
    abs: float = 1e-14

    def __post_init__(self):
        if not self.rel > 0:
            raise ValueError("Tolerance.rel must be positive")
        if not self.abs >= 0:
            raise ValueError("Tolerance.abs must be non-negative")

    def scaled(self, factor: float) -> "Tolerance":
        return Tolerance(self.rel * factor, self.abs * factor)


DEFAULT_TOL = Tolerance()


def _check_square(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


# Pade coefficients and backward-error thresholds (Higham 2005).
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0,
          13: 5.371920351148152e0}
_MAX_SQUARINGS = 1000


def _pade_uv(A: np.ndarray, order: int):
    b = _PADE[order]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    if order < 13:
        powers = [ident, A2]
        for _ in range(order // 2 - 1):
            powers.append(powers[-1] @ A2)
        U = A @ sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
        V = sum(b[2 * k] * powers[k] for k in range(len(powers)))
        return U, V
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    return U, V


def expm(A) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a diagonal Pade approximant.

    Raises ``ValueError`` for non-square or non-finite input and
    ``OverflowError`` when the norm is too large to scale back.
    """
    A = _check_square(A)
    if not np.iscomplexobj(A):
        A = A.astype(float)
    n = A.shape[0]
    if n == 0:
        return A.copy()
    norm1 = np.linalg.norm(A, 1)
    for order in (3, 5, 7, 9):
        if norm1 <= _THETA[order]:
            U, V = _pade_uv(A, order)
            return np.linalg.solve(V - U, V + U)
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA[13]))))
    if s > _MAX_SQUARINGS:
        raise OverflowError("matrix norm beyond scaling capacity")
    U, V = _pade_uv(A / 2.0**s, 13)
    E = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        E = E @ E
    if not np.all(np.isfinite(E)):
        raise OverflowError("matrix exponential overflowed")
    return E


def unitary_exp(H, t: float = 1.0) -> np.ndarray:
    """exp(-i t H) for Hermitian ``H`` via its eigendecomposition (exactly unitary)."""
    w, V = eig_hermitian(H, tol=Tolerance(1e-9, 1e-12))
    return (V * np.exp(-1j * t * w)) @ V.conj().T


def expm_2x2(A) -> np.ndarray:
    """Closed-form exponential of a 2x2 matrix, for small arguments in hot loops.

    Uses exp(A) = e^mu (cosh(d) 1 + sinh(d)/d (A - mu 1)) with mu = tr(A)/2 and
    d^2 = -det(A - mu 1).  Falls back to :func:`expm` when |d| > 2 to avoid
    cancellation.
    """
    A = np.asarray(A)
    mu = 0.5 * (A[0, 0] + A[1, 1])
    b00, b11 = A[0, 0] - mu, A[1, 1] - mu
    d2 = -(b00 * b11 - A[0, 1] * A[1, 0])
    d = np.sqrt(d2 + 0j)
    if abs(d) > 2.0:
        return expm(A)
    if abs(d) < 1e-4:
        ch = 1 + d2 / 2 + d2 * d2 / 24
        sh = 1 + d2 / 6 + d2 * d2 / 120
    else:
        ch = np.cosh(d)
        sh = np.sinh(d) / d
    e = np.exp(mu)
    out = np.array([[ch + sh * b00, sh * A[0, 1]], [sh * A[1, 0], ch + sh * b11]]) * e
    if not np.iscomplexobj(A):
        out = out.real
    return out


def _log2x2(A: np.ndarray, branch_tol: float) -> np.ndarray:
    tr = A[0, 0] + A[1, 1]
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    disc = np.sqrt(complex(tr * tr / 4 - det))
    lam1, lam2 = tr / 2 + disc, tr / 2 - disc
    for lam in (lam1, lam2):
        _branch_check(lam, branch_tol)
    log1, log2 = np.log(lam1), np.log(lam2)
    diff = lam1 - lam2
    scale = max(abs(lam1), abs(lam2))
    if abs(diff) > 1e-4 * scale:
        dd = (log1 - log2) / diff
    else:
        z = diff / (lam1 + lam2)
        dd = 2 * np.arctanh(z) / diff if z != 0 else 1 / lam2
    L = log2 * np.eye(2, dtype=complex) + dd * (A - lam2 * np.eye(2))
    return L


def _branch_check(lam: complex, branch_tol: float):
    if abs(lam) == 0:
        raise BranchFailure("singular matrix has no logarithm")
    if lam.real < 0 and abs(lam.imag) <= branch_tol * abs(lam):
        raise BranchFailure(f"eigenvalue {lam} on the negative real axis")


def logm_principal(A, tol: Tolerance = DEFAULT_TOL, branch_tol: float = 1e-8) -> np.ndarray:
    """Principal matrix logarithm.

    Eigenvalues of the result have imaginary parts in (-pi, pi).  Raises
    :class:`BranchFailure` when an eigenvalue of ``A`` is zero or lies on the
    closed negative real axis (within ``branch_tol`` relative angle), instead
    of silently choosing a branch.  Real input with a real logarithm gives a
    real result.
    """
    A = _check_square(A)
    real_input = not np.iscomplexobj(A)
    n = A.shape[0]
    L = None
    if n == 2:
        L = _log2x2(A.astype(complex), branch_tol)
        if not np.all(np.isfinite(L)):
            L = None
    if L is None:
        for lam in np.linalg.eigvals(A):
            _branch_check(complex(lam), branch_tol)
        L = scipy.linalg.logm(A.astype(complex))
    L = np.asarray(L)
    if real_input and np.iscomplexobj(L):
        if np.linalg.norm(L.imag) <= 1e-10 * max(1.0, np.linalg.norm(L.real)) + tol.abs:
            L = L.real.copy()
    return L


def norm(A, kind: str = "frobenius", c: float = 1.0) -> float:
    """Matrix norm: ``frobenius``, ``operator`` (largest singular value) or ``scaled`` (c * frobenius)."""
    A = np.asarray(A)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if kind == "frobenius":
        return float(np.linalg.norm(A))
    if kind == "operator":
        if A.ndim == 1:
            return float(np.linalg.norm(A))
        return float(np.linalg.norm(A, 2))
    if kind == "scaled":
        if c < 0:
            raise ValueError("scale must be non-negative")
        return float(c * np.linalg.norm(A))
    raise ValueError(f"unknown norm kind {kind!r}")


def eig_hermitian(A, tol: Tolerance = DEFAULT_TOL):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix."""
    A = _check_square(A)
    defect = np.linalg.norm(A - A.conj().T)
    if defect > tol.abs + tol.rel * np.linalg.norm(A) * 1e3:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
    w, V = np.linalg.eigh((A + A.conj().T) / 2)
    return w, V


def kron(*ops) -> np.ndarray:
    return reduce(np.kron, ops)


def unitarity_defect(U) -> float:
    U = np.asarray(U)
    return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])))


def commutator(A, B):
    return A @ B - B @ A
