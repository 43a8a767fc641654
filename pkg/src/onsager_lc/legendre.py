"""Legendre polynomials, associated Legendre functions and Gauss-Legendre rules.

All routines accept scalars or numpy arrays for the abscissa ``u`` and return
objects of the same shape.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "QuadratureRule",
    "legendre_eval",
    "legendre_eval_all",
    "legendre_matrix",
    "assoc_legendre_eval",
    "gauss_legendre",
    "legendre_triple_integral",
    "TripleIntegral",
]


def _check_closed_interval(u):
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) > 1.0) or np.any(np.isnan(u)):
        raise DomainError("Legendre polynomials are evaluated on [-1, 1]")
    return u


def _unwrap(x):
    return float(x) if np.ndim(x) == 0 else x


def legendre_eval(ell: int, u):
    """Evaluate P_ell(u) with the three-term Bonnet recursion."""
    if ell < 0:
        raise DomainError(f"degree must be non-negative, got {ell}")
    u = _check_closed_interval(u)
    p_prev = np.ones_like(u)
    if ell == 0:
        return _unwrap(p_prev)
    p = u.copy()
    for n in range(ell - 1):
        # (n+2) P_{n+2} = (2n+3) u P_{n+1} - (n+1) P_n
        p_prev, p = p, ((2 * n + 3) * u * p - (n + 1) * p_prev) / (n + 2)
    return _unwrap(p)


def legendre_eval_all(ell_max: int, u) -> np.ndarray:
    """Return ``[P_0(u), ..., P_ell_max(u)]`` stacked along the first axis.

    The recursion is the one used by :func:`legendre_eval`, so entry ``ell``
    is bitwise identical to ``legendre_eval(ell, u)``.
    """
    if ell_max < 0:
        raise DomainError(f"degree must be non-negative, got {ell_max}")
    u = _check_closed_interval(u)
    return _eval_all_unchecked(ell_max, u)


def _eval_all_unchecked(ell_max: int, u: np.ndarray) -> np.ndarray:
    out = np.empty((ell_max + 1,) + u.shape)
    out[0] = 1.0
    if ell_max >= 1:
        out[1] = u
    for n in range(ell_max - 1):
        out[n + 2] = ((2 * n + 3) * u * out[n + 1] - (n + 1) * out[n]) / (n + 2)
    return out


def assoc_legendre_eval(ell: int, m: int, u):
    """Associated Legendre function P_ell^m(u), Condon-Shortley phase included.

    Negative orders use ``P_l^{-m} = (-1)^m (l-m)!/(l+m)! P_l^m``.
    """
    if ell < 0 or abs(m) > ell:
        raise DomainError(f"need 0 <= |m| <= ell, got ell={ell}, m={m}")
    u = np.asarray(u, dtype=float)
    if m == 0:
        return legendre_eval(ell, u)
    if np.any(np.abs(u) >= 1.0) or np.any(np.isnan(u)):
        raise DomainError("P_ell^m with m != 0 requires |u| < 1")
    if m < 0:
        mp = -m
        scale = (-1) ** mp * math.exp(math.lgamma(ell - mp + 1) - math.lgamma(ell + mp + 1))
        return _unwrap(scale * np.asarray(assoc_legendre_eval(ell, mp, u)))

    # P_m^m = (-1)^m (2m-1)!! (1-u^2)^{m/2}, then upward in ell at fixed m
    s = np.sqrt((1.0 - u) * (1.0 + u))
    pmm = np.ones_like(u)
    for k in range(1, m + 1):
        pmm = -pmm * (2 * k - 1) * s
    if ell == m:
        return _unwrap(pmm)
    p_prev, p = pmm, (2 * m + 1) * u * pmm
    for k in range(m + 2, ell + 1):
        p_prev, p = p, ((2 * k - 1) * u * p - (k + m - 1) * p_prev) / (k - m)
    return _unwrap(p)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss-Legendre rule on [-1, 1]; arrays are read-only."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return len(self.nodes)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def __repr__(self) -> str:
        return f"QuadratureRule(order={self.order})"


@functools.lru_cache(maxsize=64)
def gauss_legendre(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule.

    Nodes are found by Newton iteration on P_n(cos theta) started from
    Tricomi's asymptotic approximation. Only the non-negative half is
    computed, then mirrored so the rule is exactly symmetric.
    """
    if n < 1:
        raise DomainError(f"quadrature order must be positive, got {n}")
    half = (n + 1) // 2
    k = np.arange(1, half + 1)
    theta = np.pi * (4 * k - 1) / (4 * n + 2)
    theta = theta + (1 / (8 * n**2) - 1 / (8 * n**3)) / np.tan(theta)
    # Newton on theta keeps sin(theta) exact near the endpoints
    for _ in range(100):
        x = np.cos(theta)
        p, p_prev = _legendre_pair(n, x)
        dp_dtheta = -n * (p_prev - x * p) / np.sin(theta)
        step = p / dp_dtheta
        theta = theta - step
        if np.max(np.abs(step)) < 1e-15:
            break
    x = np.cos(theta)
    p, p_prev = _legendre_pair(n, x)
    # P_{n-1} - x P_n is stationary at a root of P_n, so node rounding
    # does not leak into the weights
    w = 2.0 * np.sin(theta) ** 2 / (n * (p_prev - x * p)) ** 2
    if n % 2 == 1:
        x[-1] = 0.0
    # x is decreasing from the largest root; mirror into ascending order
    pos_x, pos_w = x[::-1], w[::-1]
    if n % 2 == 1:
        nodes = np.concatenate([-pos_x[:0:-1], pos_x])
        weights = np.concatenate([pos_w[:0:-1], pos_w])
    else:
        nodes = np.concatenate([-pos_x[::-1], pos_x])
        weights = np.concatenate([pos_w[::-1], pos_w])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights)


def _legendre_pair(n, x):
    """Return (P_n(x), P_{n-1}(x))."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p, p_prev


@functools.lru_cache(maxsize=128)
def legendre_matrix(rule: QuadratureRule, ell_max: int) -> np.ndarray:
    """Read-only array ``P[ell, i] = P_ell(u_i)`` on the nodes of ``rule``."""
    mat = _eval_all_unchecked(ell_max, np.asarray(rule.nodes))
    mat.setflags(write=False)
    return mat


@dataclass(frozen=True)
class TripleIntegral:
    value: float
    vanishes_by_parity: bool

    def __float__(self) -> float:
        return self.value


def legendre_triple_integral(ell: int) -> TripleIntegral:
    """Integral of P_ell(u)**3 over [-1, 1].

    Even degrees use the closed form
    ``2 (2s)!^3 (3s)!^2 / ((6s+1)! s!^6)`` with ``s = ell/2``, evaluated with
    log-gamma to stay finite for large ``ell``. Odd degrees give exactly zero
    and set ``vanishes_by_parity``.
    """
    if ell < 0:
        raise DomainError(f"degree must be non-negative, got {ell}")
    if ell % 2 == 1:
        return TripleIntegral(0.0, True)
    s = ell // 2
    lg = math.lgamma
    log_val = (
        math.log(2.0)
        + 3 * lg(2 * s + 1)
        + 2 * lg(3 * s + 1)
        - lg(6 * s + 2)
        - 6 * lg(s + 1)
    )
    return TripleIntegral(math.exp(log_val), False)
