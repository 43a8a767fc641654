"""Independent reference computations shared by the test modules.

Nothing here goes through the package's spectral machinery: integrals use
scipy quadrature, and extrema come from brute-force search.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar
from scipy.special import eval_legendre, roots_legendre

from onsager_lc.functional import OrientationProfile


def p2(u):
    return 0.5 * (3.0 * u * u - 1.0)


def boltzmann_moments(a: float) -> tuple[float, float]:
    """``log Z`` and ``S = <P2>`` for ``f = exp(a P2(u)) / Z`` on the sphere."""
    shift = a if a > 0 else -0.5 * a  # max of a*P2 on [-1, 1]
    z, _ = quad(lambda u: math.exp(a * p2(u) - shift), -1.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
    m, _ = quad(lambda u: p2(u) * math.exp(a * p2(u) - shift), -1.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
    return math.log(2.0 * math.pi * z) + shift, m / z


def boltzmann_free_energy(a: float, rho: float, beta: float) -> tuple[float, float]:
    """Maier-Saupe free energy on the family ``exp(a P2)/Z``; returns ``(F, S)``.

    For ``g = 1 - u^2`` only the ``l = 0, 2`` modes interact, so the energy
    is ``(rho^2/2) (2/3) (1 - S^2)`` and the entropy ``(rho/beta)(a S - log Z)``.
    """
    log_z, s = boltzmann_moments(a)
    return (rho / beta) * (a * s - log_z) + 0.5 * rho**2 * (2.0 / 3.0) * (1.0 - s * s), s


def boltzmann_minimum(rho: float, beta: float = 1.0, a_range=(-30.0, 60.0)) -> tuple[float, float, float]:
    """Global minimum over the Boltzmann family by grid search plus bounded refinement.

    Returns ``(F_min, S, a)``.
    """
    grid = np.linspace(*a_range, 901)
    values = [boltzmann_free_energy(a, rho, beta)[0] for a in grid]
    k = int(np.argmin(values))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(
        lambda a: boltzmann_free_energy(a, rho, beta)[0],
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    f, s = boltzmann_free_energy(res.x, rho, beta)
    return f, s, float(res.x)


def boltzmann_rho_c(beta: float = 1.0, bracket=(5.0, 7.4)) -> float:
    """Density where the best nematic member of the family ties with the uniform state."""

    def gap(rho):
        f_uniform = boltzmann_free_energy(0.0, rho, beta)[0]
        # search only the prolate side, away from a = 0
        return boltzmann_minimum(rho, beta, a_range=(0.5, 60.0))[0] - f_uniform

    return brentq(gap, *bracket, xtol=1e-10)


def dense_spectrum(g, ell_max: int, n: int = 600) -> np.ndarray:
    """``lam_l`` by a dense Gauss-Legendre rule in ``theta`` from scipy."""
    x, w = roots_legendre(n)
    theta = 0.5 * math.pi * (x + 1.0)
    u = np.cos(theta)
    wt = 0.5 * math.pi * w * np.sin(theta)
    return np.array([np.sum(wt * eval_legendre(ell, u) * g(u)) for ell in range(ell_max + 1)])


def random_band_limited(rng: np.random.Generator, rule, ell_max: int = 20) -> OrientationProfile:
    """Positive profile with Legendre content up to ``ell_max``.

    Random coefficients are halved until the expansion stays above
    ``0.1 / (4 pi)`` on a dense grid.
    """
    ell = np.arange(ell_max + 1)
    coeffs = rng.normal(size=ell_max + 1) / (1.0 + ell)
    coeffs[0] = 1.0
    dense = np.linspace(-1.0, 1.0, 2001)
    pd = np.array([eval_legendre(l, dense) for l in ell])
    while True:
        f = ((2 * ell + 1) / (4 * math.pi) * coeffs) @ pd
        if f.min() > 0.1 / (4 * math.pi):
            break
        coeffs[1:] *= 0.5
    return OrientationProfile.from_coefficients(rule, coeffs)
