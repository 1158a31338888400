"""Saddle-point machinery of the round-trip integral.

Around the saddle manifold k_1 = ... = k_2r, phi_1 = ... = phi_2r the
exponent of the round-trip integrand is a quadratic form whose matrix is
proportional to the cyclic matrix ``M_r`` built here. Its nonzero
eigenvalues give the Gaussian prefactor of the PFA.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SaddleMatrix",
    "build_m_r",
    "eigenvalues",
    "numeric_eigenvalues",
    "sine_product",
    "sine_product_direct",
    "hessian_nonzero_product",
    "hessian_nonzero_product_numeric",
]


def _check(r, mu):
    if int(r) != r or r < 1:
        raise ValueError("r must be an integer >= 1")
    if not 0 <= mu <= 0.5:
        raise ValueError("mu must lie in [0, 1/2]")


@dataclass(frozen=True)
class SaddleMatrix:
    r: int
    mu: float
    entries: np.ndarray


def build_m_r(r: int, mu: float) -> SaddleMatrix:
    """Cyclic 2r x 2r matrix with unit diagonal and couplings -(1-mu), -mu.

    Coupling i <-> i+1 is -(1-mu) for even i and -mu for odd i (indices mod
    2r). For r = 1 both couplings connect the same pair and add to -1.
    """
    _check(r, mu)
    n = 2 * r
    m = np.eye(n)
    for i in range(n):
        j = (i + 1) % n
        w = -(1 - mu) if i % 2 == 0 else -mu
        m[i, j] += w
        m[j, i] += w
    return SaddleMatrix(int(r), float(mu), m)


def eigenvalues(r: int, mu: float) -> np.ndarray:
    """Closed-form eigenvalues ``1 +- sqrt(1 - 4 mu (1-mu) sin^2(pi j/r))``, sorted."""
    _check(r, mu)
    s2 = np.sin(np.pi * np.arange(r) / r) ** 2
    root = np.sqrt(np.maximum(1 - 4 * mu * (1 - mu) * s2, 0.0))
    # 1 - sqrt(1 - z) without cancellation for small z
    lam_minus = 4 * mu * (1 - mu) * s2 / (1 + root)
    return np.sort(np.concatenate([lam_minus, 1 + root]))


def numeric_eigenvalues(r: int, mu: float) -> np.ndarray:
    """Eigenvalues of :func:`build_m_r` by dense diagonalization (oracle)."""
    return np.linalg.eigvalsh(build_m_r(r, mu).entries)


def sine_product(r: int) -> float:
    """prod_{j=1}^{r-1} sin(pi j/r) = r / 2^(r-1)."""
    if int(r) != r or r < 1:
        raise ValueError("r must be an integer >= 1")
    closed = r / 2.0 ** (r - 1)
    direct = sine_product_direct(r)
    assert abs(direct - closed) <= 1e-13 * closed, (direct, closed)
    return closed


def sine_product_direct(r: int) -> float:
    return float(np.prod(np.sin(np.pi * np.arange(1, r) / r)))


def _r_eff(R1, R2):
    if math.isinf(R2):
        return R1
    if math.isinf(R1):
        return R2
    return R1 * R2 / (R1 + R2)


def hessian_nonzero_product(r, mu, R1, R2, k_star, kappa_star) -> float:
    """``(prod_{lambda != 0} lambda)^(-1/2)`` of the round-trip Hessian.

    Closed form ``(R_eff/4r^2)(k/kappa)(4 kappa^2/(k^2 R1 R2))^r``; ``mu`` is
    only checked for consistency with ``R1/(R1+R2)``.
    """
    _check(r, mu)
    if not k_star > 0:
        raise ValueError("k_star must be positive")
    if not kappa_star >= k_star:
        raise ValueError("kappa_star must be >= k_star")
    if not (0 < R1 < math.inf and 0 < R2 < math.inf):
        raise ValueError("radii must be finite and positive")
    if not abs(mu - R1 / (R1 + R2)) <= 1e-12:
        raise ValueError("mu must equal R1/(R1+R2)")
    reff = _r_eff(R1, R2)
    return reff / (4 * r * r) * (k_star / kappa_star) * (4 * kappa_star**2 / (k_star**2 * R1 * R2)) ** r


def hessian_nonzero_product_numeric(r, mu, R1, R2, k_star, kappa_star, rel_zero=1e-10) -> float:
    """Brute force: diagonalize (R1+R2) M_r/(2 kappa) and (R1+R2) k^2 M_r/(2 kappa)
    and drop the zero mode of each block."""
    m = build_m_r(r, mu).entries
    total = R1 + R2
    blocks = [total * m / (2 * kappa_star), total * k_star**2 * m / (2 * kappa_star)]
    log_prod = 0.0
    for h in blocks:
        lam = np.linalg.eigvalsh(h)
        keep = np.abs(lam) > rel_zero * np.max(np.abs(lam))
        if np.count_nonzero(~keep) != 1:
            raise ArithmeticError("expected exactly one zero eigenvalue per block")
        log_prod += np.sum(np.log(lam[keep]))
    return math.exp(-0.5 * log_prod)
