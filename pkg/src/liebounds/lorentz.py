"""Scalar Lorentz representation on L^2(mass hyperboloid, d^3p / 2p_0), evaluated by quadrature.

Wavepackets are Gaussian in the spatial momentum,
psi(p) ~ exp(-|p - pbar|^2 / (4 sigma^2)), so |psi|^2 is proportional to a
normal density N(pbar, sigma^2 I).  Every integral over the hyperboloid is
then a ratio E[f(p) / 2p_0] / E[1 / 2p_0] under that normal law, which is
computed by quadrature (see :class:`QuadratureConfig`) or by Monte Carlo.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError
from .groups import is_member, make_group, minkowski_metric

__all__ = [
    "Wavepacket",
    "QuadratureConfig",
    "lorentz_nelson_expectation",
    "lorentz_nelson_basis_sum",
    "lorentz_nelson_monte_carlo",
    "lorentz_exact_distance",
    "nelson_tensor",
    "boost",
    "rotation",
]


@dataclass(frozen=True)
class Wavepacket:
    mass: float = 1.0
    mean_momentum: tuple = (0.0, 0.0, 0.0)
    sigma: float = 1.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if len(self.mean_momentum) != 3:
            raise ValueError("mean_momentum must be a 3-vector")

    @property
    def pbar(self) -> np.ndarray:
        return np.asarray(self.mean_momentum, dtype=float)

    def energy(self, p) -> np.ndarray:
        return np.sqrt(np.sum(p * p, axis=-1) + self.mass**2)

    def log_amplitude(self, p) -> np.ndarray:
        """log of the unnormalized amplitude at spatial momenta ``p`` (shape (..., 3))."""
        d = p - self.pbar
        return -np.sum(d * d, axis=-1) / (4 * self.sigma**2)

    def gradient_factor(self, p) -> np.ndarray:
        """grad psi / psi with respect to the spatial momentum."""
        return -(p - self.pbar) / (2 * self.sigma**2)


@dataclass(frozen=True)
class QuadratureConfig:
    """Quadrature settings.

    ``hermite`` is a tensor Gauss-Hermite rule centred on the packet;
    ``spherical`` is a Gauss-Legendre rule in (r, cos theta) times a
    trapezoid rule in phi, centred on the origin, which stays accurate when
    1/p_0 varies on the scale of the packet (small mass, wide packets).

    The node count per axis starts at ``nodes`` and grows by ``refine_factor``
    until two successive levels agree to ``rtol`` or ``max_nodes`` is passed.
    """

    scheme: str = "spherical"
    nodes: int = 24
    refine_factor: float = 1.5
    rtol: float = 1e-4
    max_nodes: int = 96

    def __post_init__(self):
        if self.scheme not in ("spherical", "hermite"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.nodes < 2:
            raise ValueError("need at least 2 nodes per axis")
        if self.refine_factor <= 1:
            raise ValueError("refine_factor must exceed 1")


def _gh_grid(wp: Wavepacket, n: int):
    """Nodes and weights for E[f] under N(pbar, sigma^2 I)."""
    u, w = np.polynomial.hermite.hermgauss(n)
    U = np.stack(np.meshgrid(u, u, u, indexing="ij"), axis=-1).reshape(-1, 3)
    W = (w[:, None, None] * w[None, :, None] * w[None, None, :]).reshape(-1)
    p = wp.pbar + np.sqrt(2.0) * wp.sigma * U
    return p, W / np.pi**1.5


def _spherical_grid(wp: Wavepacket, n: int):
    """Nodes and weights for E[f] under N(pbar, sigma^2 I), up to a common factor."""
    rmax = np.linalg.norm(wp.pbar) + 9.0 * wp.sigma
    x, wx = np.polynomial.legendre.leggauss(n)
    r, wr = 0.5 * rmax * (x + 1), 0.5 * rmax * wx
    ct, wct = np.polynomial.legendre.leggauss(n)
    phi = 2 * np.pi * np.arange(n) / n
    R, CT, PHI = np.meshgrid(r, ct, phi, indexing="ij")
    ST = np.sqrt(1 - CT**2)
    p = np.stack([R * ST * np.cos(PHI), R * ST * np.sin(PHI), R * CT], axis=-1).reshape(-1, 3)
    W = (wr[:, None, None] * r[:, None, None] ** 2 * wct[None, :, None]
         * np.full(n, 2 * np.pi / n)[None, None, :]).reshape(-1)
    return p, W * np.exp(2 * wp.log_amplitude(p))


def _grid(wp: Wavepacket, quad: "QuadratureConfig", n: int):
    return _spherical_grid(wp, n) if quad.scheme == "spherical" else _gh_grid(wp, n)


def _ratio(wp: Wavepacket, p, weights, integrand):
    inv = 1.0 / (2 * wp.energy(p))
    return np.sum(weights * integrand(p) * inv) / np.sum(weights * inv)


def _refined(wp: Wavepacket, quad: QuadratureConfig, integrand, what: str):
    n = quad.nodes
    previous = _ratio(wp, *_grid(wp, quad, n), integrand)
    while True:
        n = int(np.ceil(n * quad.refine_factor))
        if n > quad.max_nodes:
            raise QuadratureError(f"{what}: no convergence up to {quad.max_nodes} nodes per axis")
        value = _ratio(wp, *_grid(wp, quad, n), integrand)
        if abs(value - previous) <= quad.rtol * max(abs(value), 1e-12):
            return value
        previous = value


def _formula_integrand(wp: Wavepacket):
    """|p|^2 |grad psi|^2 - eta(p, grad psi)^2 per unit |psi|^2, with d psi / d p_0 = 0."""

    def f(p):
        g = wp.gradient_factor(p)
        p0sq = np.sum(p * p, axis=-1) + wp.mass**2
        norm4 = p0sq + np.sum(p * p, axis=-1)
        return norm4 * np.sum(g * g, axis=-1) - np.sum(p * g, axis=-1) ** 2

    return f


def lorentz_nelson_expectation(wp: Wavepacket, quad: QuadratureConfig = QuadratureConfig()) -> float:
    """<psi, Delta psi> = || |p| grad psi ||^2 - || eta(p, grad psi) ||^2.

    |p| is the Euclidean norm of the 4-vector (p_0, p) and psi is extended off
    the hyperboloid independently of p_0.  The value is non-negative.
    """
    return float(_refined(wp, quad, _formula_integrand(wp), "Nelson expectation"))


def _basis_sum_integrand(wp: Wavepacket):
    basis = make_group("lorentz").basis

    def f(p):
        g = wp.gradient_factor(p)
        p4 = np.concatenate([wp.energy(p)[..., None], p], axis=-1)
        total = 0.0
        for X in basis:
            v = p4 @ X.T  # X p for every node
            total = total + np.sum(v[..., 1:] * g, axis=-1) ** 2
        return total

    return f


def lorentz_nelson_basis_sum(wp: Wavepacket, quad: QuadratureConfig = QuadratureConfig()) -> float:
    """sum_n ||A(X_n) psi||^2 with A(X) psi = -i (X p) . grad psi, computed directly."""
    return float(_refined(wp, quad, _basis_sum_integrand(wp), "Nelson basis sum"))


def lorentz_nelson_monte_carlo(wp: Wavepacket, samples: int = 10**6, seed=0) -> float:
    rng = np.random.default_rng(seed)
    p = wp.pbar + wp.sigma * rng.standard_normal((samples, 3))
    weights = np.ones(samples) / samples
    return float(_ratio(wp, p, weights, _formula_integrand(wp)))


def nelson_tensor() -> np.ndarray:
    """T_ijkl = sum_n (X_n)_ij (X_n)_kl over the orthonormal basis of so(1,3)."""
    basis = make_group("lorentz").basis
    return sum(np.einsum("ij,kl->ijkl", X, X) for X in basis)


def _spatial_image(M, wp: Wavepacket, q):
    q4 = np.concatenate([wp.energy(q)[..., None], q], axis=-1)
    return (q4 @ M.T)[..., 1:]


def lorentz_exact_distance(wp: Wavepacket, lam, lam_tilde,
                           quad: QuadratureConfig = QuadratureConfig()) -> float:
    """|| U_lam psi - U_lam_tilde psi || for U_lam psi(p) = psi(lam^{-1} p).

    Uses <U_lam psi, U_lamt psi> = int psi(q) psi(lamt^{-1} lam q) dmu(q), by
    invariance of the measure.
    """
    spec = make_group("lorentz")
    for L in (lam, lam_tilde):
        ok, res = is_member(spec, L)
        if not ok:
            raise ValueError(f"not a proper orthochronous Lorentz matrix (residual {res:.2e})")
    M = np.linalg.solve(lam_tilde, lam)

    def ratio(q):
        return np.exp(wp.log_amplitude(_spatial_image(M, wp, q)) - wp.log_amplitude(q))

    overlap = _refined(wp, quad, ratio, "overlap")
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * overlap)))


def boost(axis: int, rapidity: float) -> np.ndarray:
    """exp(rapidity K_axis), axis in {1, 2, 3}."""
    L = np.eye(4)
    ch, sh = np.cosh(rapidity), np.sinh(rapidity)
    L[0, 0] = L[axis, axis] = ch
    L[0, axis] = L[axis, 0] = sh
    return L


def rotation(axis: int, angle: float) -> np.ndarray:
    """exp(angle J_axis), axis in {1, 2, 3}."""
    i, j = {1: (2, 3), 2: (3, 1), 3: (1, 2)}[axis]
    L = np.eye(4)
    c, s = np.cos(angle), np.sin(angle)
    L[i, i] = L[j, j] = c
    L[i, j], L[j, i] = -s, s
    return L


ETA = minkowski_metric()
