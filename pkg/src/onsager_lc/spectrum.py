"""Legendre spectrum of an angular potential and the phase-transition certificate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConfigurationError, DomainError
from .legendre import gauss_legendre, legendre_eval_all, legendre_triple_integral
from .potentials import AngularPotential, SpatialKernel, default_xi_grid, phi_hat, sup_abs

__all__ = [
    "LegendreSpectrum",
    "StabilityCertificate",
    "ModeSearch",
    "spectrum_quadrature",
    "spectrum_onsager_closed_form",
    "spectrum_sinpow_exact",
    "spectrum_for",
    "find_ell_star",
    "certify",
    "rho_star_from",
    "DEFAULT_ELL_MAX",
    "DEFAULT_NODES",
]

DEFAULT_ELL_MAX = 40
DEFAULT_NODES = 128

VERDICTS = ("first-order", "inconclusive-cubic-zero", "no-negative-mode", "outside-hypotheses")


@dataclass(frozen=True, eq=False)
class LegendreSpectrum:
    """Coefficients ``lam[ell]`` of ``g`` in the Legendre basis, ell = 0..ell_max."""

    lam: np.ndarray
    n_nodes: int = 0
    tail_bound: float = 0.0
    method: str = "quadrature"
    parity: str = "none"

    def __post_init__(self):
        lam = np.array(self.lam, dtype=float)
        if lam.ndim != 1 or len(lam) < 2:
            raise ConfigurationError("a spectrum needs at least lambda_0 and lambda_1")
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)

    @property
    def ell_max(self) -> int:
        return len(self.lam) - 1

    def __getitem__(self, ell: int) -> float:
        return float(self.lam[ell])

    def scaled(self, factor: float) -> "LegendreSpectrum":
        return LegendreSpectrum(
            factor * self.lam, self.n_nodes, abs(factor) * self.tail_bound, self.method, self.parity
        )


def _clamp_parity(lam: np.ndarray, parity: str) -> np.ndarray:
    if parity == "even":
        lam[1::2] = 0.0
    elif parity == "odd":
        lam[0::2] = 0.0
    return lam


def _tail_bound(lam: np.ndarray) -> float:
    return float(max(abs(lam[-1]), abs(lam[-2]) if len(lam) > 2 else 0.0))


def spectrum_quadrature(
    g: AngularPotential, ell_max: int = DEFAULT_ELL_MAX, n_nodes: int = DEFAULT_NODES
) -> LegendreSpectrum:
    """Legendre coefficients of ``g`` by Gauss-Legendre quadrature in the polar angle.

    Integrating over ``theta`` with ``u = cos(theta)`` turns square-root
    endpoint behaviour such as Onsager's ``sqrt(1-u^2)`` into a smooth
    periodic integrand, so convergence stays spectral.
    """
    if ell_max < 1:
        raise ConfigurationError(f"ell_max must be positive, got {ell_max}")
    if n_nodes < ell_max:
        raise ConfigurationError(f"n_nodes={n_nodes} cannot resolve ell_max={ell_max}")
    rule = gauss_legendre(n_nodes)
    theta = 0.5 * np.pi * (np.asarray(rule.nodes) + 1.0)
    u = np.cos(theta)
    w = 0.5 * np.pi * np.asarray(rule.weights) * np.sin(theta)
    p = legendre_eval_all(ell_max, u)
    wg = w * g(u)
    lam = p @ wg
    # coefficients below the rounding-error bound of their sum are zero
    noise = n_nodes * np.finfo(float).eps * (np.abs(p) @ np.abs(wg))
    lam[np.abs(lam) <= noise] = 0.0
    lam = _clamp_parity(lam, g.parity)
    return LegendreSpectrum(lam, n_nodes, _tail_bound(lam), "quadrature", g.parity)


def spectrum_onsager_closed_form(ell: int) -> float:
    """Legendre coefficient of ``sqrt(1-u^2)`` from its closed form.

    With ``ell = 2j``: ``-pi C(2j, j)^2 / (2 (j+1) (2j-1) 16^j)``; odd degrees
    vanish.
    """
    if ell < 0:
        raise DomainError(f"degree must be non-negative, got {ell}")
    if ell % 2 == 1:
        return 0.0
    j = ell // 2
    ratio = math.comb(2 * j, j) ** 2 / 2 ** (4 * j)
    return -math.pi * ratio / (2 * (j + 1) * (2 * j - 1))


def onsager_closed_form_spectrum(ell_max: int = DEFAULT_ELL_MAX) -> LegendreSpectrum:
    lam = np.array([spectrum_onsager_closed_form(ell) for ell in range(ell_max + 1)])
    tail = abs(spectrum_onsager_closed_form(ell_max + 2 - ell_max % 2))
    return LegendreSpectrum(lam, 0, tail, "closed-form", "even")


def sinpow_exact_fractions(k: int, ell_max: int) -> list[Fraction]:
    """Exact coefficients of ``(1-u^2)^k`` as rationals.

    Starting from ``2 * delta_{ell,0}`` for k = 0, each power applies
    ``(1-u^2) P_l = (a+b) P_l - a P_{l+2} - b P_{l-2}`` with
    ``a = (l+1)(l+2)/((2l+1)(2l+3))`` and ``b = l(l-1)/((2l+1)(2l-1))``.
    """
    if k < 0 or ell_max < 0:
        raise DomainError("need k >= 0 and ell_max >= 0")
    size = ell_max + 2 * k + 1
    lam = [Fraction(0)] * size
    lam[0] = Fraction(2)
    for step in range(k):
        top = size - 2 * (step + 1)
        nxt = [Fraction(0)] * size
        for ell in range(top):
            a = Fraction((ell + 1) * (ell + 2), (2 * ell + 1) * (2 * ell + 3))
            b = Fraction(ell * (ell - 1), (2 * ell + 1) * (2 * ell - 1))
            val = (a + b) * lam[ell] - a * lam[ell + 2]
            if ell >= 2:
                val -= b * lam[ell - 2]
            nxt[ell] = val
        lam = nxt
    return lam[: ell_max + 1]


def spectrum_sinpow_exact(k: int, ell_max: int = DEFAULT_ELL_MAX) -> LegendreSpectrum:
    if k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    if ell_max < 1:
        raise DomainError(f"ell_max must be positive, got {ell_max}")
    lam = np.array([float(x) for x in sinpow_exact_fractions(k, ell_max)])
    # (1-u^2)^k is a polynomial of degree 2k: nothing is truncated past ell = 2k
    tail = 0.0 if ell_max >= 2 * k else _tail_bound(lam)
    return LegendreSpectrum(lam, 0, tail, "exact", "even")


def spectrum_for(
    g: AngularPotential, ell_max: int = DEFAULT_ELL_MAX, n_nodes: int = DEFAULT_NODES
) -> LegendreSpectrum:
    """Quadrature spectrum; the choice used by the solver and the CLI."""
    return spectrum_quadrature(g, ell_max, n_nodes)


class ModeSearch(NamedTuple):
    ell_star: int
    phi_hat_min: float
    xi_argmin: float
    degenerate: bool


def _mode_candidates(spectrum: LegendreSpectrum) -> np.ndarray:
    ells = np.arange(1, spectrum.ell_max + 1)
    if spectrum.parity == "odd":
        # even coefficients vanish identically; the live sector is odd ell
        ells = ells[ells % 2 == 1]
    return ells


def find_ell_star(
    spectrum: LegendreSpectrum,
    kernel: SpatialKernel,
    xi_grid=None,
    rtol: float = 1e-12,
) -> ModeSearch:
    """Minimize ``phi_hat(xi) * lam[ell]`` over ``ell >= 1`` and the wavenumber grid.

    Ties go to the smallest ``ell``, then the smallest ``xi``; ``degenerate``
    reports whether another ``ell`` reaches the same minimum within ``rtol``.
    """
    xi = default_xi_grid(kernel) if xi_grid is None else np.asarray(xi_grid, dtype=float)
    if xi.size == 0:
        raise ConfigurationError("empty wavenumber grid")
    if not np.any(xi == 0.0):
        raise ConfigurationError("wavenumber grid must include 0")
    order = np.argsort(xi, kind="stable")
    xi = xi[order]
    ells = _mode_candidates(spectrum)
    table = np.outer(spectrum.lam[ells], phi_hat(kernel, xi))
    best = float(table.min())
    tol = rtol * max(1.0, abs(best))
    hits = np.argwhere(table <= best + tol)
    i, j = hits[0]  # row-major: smallest ell first, then smallest xi
    degenerate = len(np.unique(hits[:, 0])) > 1
    return ModeSearch(int(ells[i]), float(table[i, j]), float(xi[j]), bool(degenerate))


def rho_star_from(phi_hat_min: float, beta: float) -> float:
    """Instability threshold ``4 pi / (beta |phi_hat_min|)``; infinite without a negative mode."""
    if not phi_hat_min < 0:
        return math.inf
    return 4.0 * math.pi / (beta * abs(phi_hat_min))


@dataclass(frozen=True)
class StabilityCertificate:
    ell_star: int
    phi_hat_min: float
    xi_argmin: float
    rho_star: float
    cubic_coefficient: float
    rho_c_lower: float
    verdict: str
    beta: float
    degenerate: bool = False
    sup_abs_g: float = float("nan")
    triple_integral: float = float("nan")
    parity: str = "none"
    xi_grid: dict = field(default_factory=dict)

    @property
    def negative_mode(self) -> bool:
        return self.phi_hat_min < 0

    def as_dict(self) -> dict:
        return {
            "ell_star": self.ell_star,
            "phi_hat_min": self.phi_hat_min,
            "xi_argmin": self.xi_argmin,
            "rho_star": self.rho_star,
            "cubic_coefficient": self.cubic_coefficient,
            "triple_integral": self.triple_integral,
            "rho_c_lower": self.rho_c_lower,
            "sup_abs_g": self.sup_abs_g,
            "verdict": self.verdict,
            "negative_mode": self.negative_mode,
            "degenerate": self.degenerate,
            "parity": self.parity,
            "beta": self.beta,
            "xi_grid": self.xi_grid,
        }


def certify(
    g: AngularPotential,
    kernel: SpatialKernel,
    beta: float,
    ell_max: int = DEFAULT_ELL_MAX,
    n_nodes: int = DEFAULT_NODES,
    xi_grid=None,
    spectrum: Optional[LegendreSpectrum] = None,
) -> StabilityCertificate:
    """Check the first-order transition criterion for ``g`` with spatial factor ``kernel``.

    The verdict is ``first-order`` when the most negative mode sits at zero
    wavenumber on an even potential with a negative cubic coefficient.
    Odd potentials have a vanishing cubic term in every live mode and get
    ``inconclusive-cubic-zero``. A minimum at nonzero wavenumber, or a
    potential without even parity, is ``outside-hypotheses``.
    """
    if not beta > 0:
        raise DomainError(f"inverse temperature must be positive, got {beta}")
    if spectrum is None:
        spectrum = spectrum_quadrature(g, ell_max, n_nodes)
    xi = default_xi_grid(kernel) if xi_grid is None else np.asarray(xi_grid, dtype=float)
    search = find_ell_star(spectrum, kernel, xi)

    rho_star = rho_star_from(search.phi_hat_min, beta)
    gaunt = legendre_triple_integral(search.ell_star)
    if g.parity == "odd":
        cubic = 0.0
    elif math.isfinite(rho_star):
        cubic = -(16.0 * math.pi**3 * rho_star / beta) * gaunt.value
    else:
        cubic = math.nan
    k0 = sup_abs(g)
    rho_c_lower = 1.0 / (2.0 * beta * k0) if k0 > 0 else math.inf

    if g.parity == "odd" or (search.phi_hat_min < 0 and cubic == 0.0):
        verdict = "inconclusive-cubic-zero"
    elif not search.phi_hat_min < 0:
        verdict = "no-negative-mode"
    elif search.xi_argmin != 0.0 or g.parity != "even":
        verdict = "outside-hypotheses"
    elif cubic < 0:
        verdict = "first-order"
    else:
        verdict = "inconclusive-cubic-zero"

    return StabilityCertificate(
        ell_star=search.ell_star,
        phi_hat_min=search.phi_hat_min,
        xi_argmin=search.xi_argmin,
        rho_star=rho_star,
        cubic_coefficient=cubic,
        rho_c_lower=rho_c_lower,
        verdict=verdict,
        beta=beta,
        degenerate=search.degenerate,
        sup_abs_g=k0,
        triple_integral=gaunt.value,
        parity=g.parity,
        xi_grid={"n": int(xi.size), "min": float(xi.min()), "max": float(xi.max()), "kernel": kernel.tag},
    )
