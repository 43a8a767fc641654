"""Axially symmetric orientation profiles and the homogeneous free-energy functional.

A profile ``f`` is a density on the unit sphere that depends only on
``u = cos(theta)``. It is stored by its values at the nodes of a
Gauss-Legendre rule, and the normalization is ``2 pi sum_i w_i f(u_i) = 1``.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.special import xlogy

from .errors import DomainError, StateError
from .legendre import QuadratureRule, gauss_legendre, legendre_eval_all, legendre_matrix
from .potentials import AngularPotential
from .spectrum import LegendreSpectrum

__all__ = [
    "OrientationProfile",
    "FreeEnergyBreakdown",
    "uniform_profile",
    "entropy",
    "energy_direct",
    "energy_spectral",
    "order_parameter",
    "free_energy",
    "sphere_kernel_matrix",
    "UNIFORM_DENSITY",
]

UNIFORM_DENSITY = 1.0 / (4.0 * math.pi)


@dataclass(frozen=True, eq=False)
class OrientationProfile:
    """Normalized, non-negative orientation density sampled on ``rule``.

    The constructor rescales ``values`` onto unit mass, so any positive
    multiple of a density is accepted.
    """

    rule: QuadratureRule
    values: np.ndarray
    _coeff_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.rule.order,):
            raise DomainError(f"expected {self.rule.order} node values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("profile values must be finite")
        if np.any(vals < 0):
            raise DomainError("profile values must be non-negative")
        mass = 2.0 * math.pi * float(np.dot(self.rule.weights, vals))
        if not mass > 0:
            raise DomainError("profile has zero mass")
        vals = vals / mass
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_coefficients(cls, rule: QuadratureRule, coeffs) -> "OrientationProfile":
        """Build ``f(u) = sum_l (2l+1)/(4 pi) c_l P_l(u)``; ``c_0`` is forced to 1."""
        coeffs = np.array(coeffs, dtype=float)
        coeffs[0] = 1.0
        p = legendre_matrix(rule, len(coeffs) - 1)
        ell = np.arange(len(coeffs))
        return cls(rule, ((2 * ell + 1) / (4 * math.pi) * coeffs) @ p)

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes

    def mass(self) -> float:
        return 2.0 * math.pi * float(np.dot(self.rule.weights, self.values))

    def coefficients(self, ell_max: int) -> np.ndarray:
        """``c_l = 2 pi sum_i w_i f(u_i) P_l(u_i)`` for ``l = 0..ell_max``."""
        if ell_max < 0:
            raise DomainError("ell_max must be non-negative")
        cached = self._coeff_cache.get(ell_max)
        if cached is None:
            p = legendre_matrix(self.rule, ell_max)
            cached = 2.0 * math.pi * (p @ (self.rule.weights * self.values))
            cached.setflags(write=False)
            self._coeff_cache[ell_max] = cached
        return cached

    def reconstruct(self, ell_max: int, u=None) -> np.ndarray:
        """Evaluate the degree-``ell_max`` Legendre expansion at ``u`` (default: the nodes)."""
        coeffs = self.coefficients(ell_max)
        ell = np.arange(ell_max + 1)
        if u is None:
            p = legendre_matrix(self.rule, ell_max)
        else:
            p = legendre_eval_all(ell_max, u)
        return np.tensordot((2 * ell + 1) / (4 * math.pi) * coeffs, p, axes=1)

    def to_csv(self, fh, header: Optional[dict] = None) -> None:
        """Write ``u, weight, f`` rows; the header names the quadrature order."""
        if header is not None:
            fh.write("# config: " + json.dumps(header, sort_keys=True) + "\n")
        fh.write(f"# quadrature_order: {self.rule.order}\n")
        fh.write("u,weight,f\n")
        for u, w, f in zip(self.rule.nodes, self.rule.weights, self.values):
            fh.write(f"{u:.17g},{w:.17g},{f:.17g}\n")


def uniform_profile(rule: Union[QuadratureRule, int]) -> OrientationProfile:
    """The isotropic density ``1/(4 pi)``."""
    if isinstance(rule, int):
        rule = gauss_legendre(rule)
    return OrientationProfile(rule, np.full(rule.order, UNIFORM_DENSITY))


def _check_state(rho: float, beta: Optional[float] = None) -> None:
    if not rho >= 0:
        raise DomainError(f"density must be non-negative, got {rho}")
    if beta is not None and not beta > 0:
        raise DomainError(f"inverse temperature must be positive, got {beta}")


def entropy(f: OrientationProfile, rho: float, beta: float) -> float:
    """``(rho/beta) * integral of f log f`` over the sphere, with ``0 log 0 = 0``."""
    _check_state(rho, beta)
    return (rho / beta) * 2.0 * math.pi * float(np.dot(f.rule.weights, xlogy(f.values, f.values)))


def order_parameter(f: OrientationProfile) -> float:
    """Nematic order parameter, the ``P_2`` moment of ``f``."""
    return float(f.coefficients(2)[2])


@functools.lru_cache(maxsize=32)
def sphere_kernel_matrix(
    rule: QuadratureRule,
    g: AngularPotential,
    n_polar: Optional[int] = None,
    n_azimuth: Optional[int] = None,
) -> np.ndarray:
    """Matrix ``M`` with ``(Mf)_i ~ integral of g(Omega_i . Omega') f(Omega') dOmega'``.

    The integral is taken in a frame whose pole is ``Omega_i``, using
    Gauss-Legendre in the polar angle ``gamma`` and the periodic trapezoid
    rule in the azimuth ``psi``. The kernel enters only as ``g(cos gamma)``,
    which stays smooth in ``gamma`` even where ``g`` has square-root
    endpoints. ``f`` is read between nodes through its polynomial
    interpolant, so the matrix is exact on polynomials of degree below
    ``rule.order`` up to the angular quadrature error.
    """
    n = rule.order
    n_azimuth = n_azimuth or max(64, n + 1)
    n_polar = n_polar or 2 * n + 64
    x = np.asarray(rule.nodes)
    s = np.sqrt((1.0 - x) * (1.0 + x))

    polar = gauss_legendre(n_polar)
    gamma = 0.5 * math.pi * (np.asarray(polar.nodes) + 1.0)
    cg, sg = np.cos(gamma), np.sin(gamma)
    wg = 0.5 * math.pi * np.asarray(polar.weights) * sg * g(cg)
    cos_psi = np.cos(2.0 * math.pi * np.arange(n_azimuth) / n_azimuth)

    # R[i, l] = 2 pi * sum_a wg_a * mean_b P_l(u'_{iab})
    r = np.empty((n, n))
    for i in range(n):
        u_rot = np.clip(x[i] * cg[:, None] + s[i] * sg[:, None] * cos_psi[None, :], -1.0, 1.0)
        p = legendre_eval_all(n - 1, u_rot)
        r[i] = 2.0 * math.pi * (p.mean(axis=2) @ wg)

    # Lagrange basis at the nodes: L_j(u) = w_j sum_l (2l+1)/2 P_l(u_j) P_l(u)
    ell = np.arange(n)
    basis = ((2 * ell + 1) / 2.0)[:, None] * legendre_matrix(rule, n - 1) * np.asarray(rule.weights)
    mat = r @ basis
    mat.setflags(write=False)
    return mat


def energy_direct(
    f: OrientationProfile,
    g: AngularPotential,
    rho: float,
    n_polar: Optional[int] = None,
    n_azimuth: Optional[int] = None,
) -> float:
    """Interaction energy ``(rho^2/2) int int f f g(Omega . Omega')`` by direct quadrature."""
    _check_state(rho)
    mat = sphere_kernel_matrix(f.rule, g, n_polar, n_azimuth)
    wf = np.asarray(f.rule.weights) * f.values
    return 0.5 * rho**2 * 2.0 * math.pi * float(wf @ (mat @ f.values))


def energy_spectral(f: OrientationProfile, spectrum: LegendreSpectrum, rho: float) -> float:
    """Interaction energy in diagonal form ``(rho^2/2) sum_l (2l+1)/2 lam_l c_l^2``."""
    _check_state(rho)
    if spectrum.ell_max >= f.rule.order:
        raise StateError(
            f"profile on {f.rule.order} nodes has no coefficients up to ell={spectrum.ell_max}"
        )
    c = f.coefficients(spectrum.ell_max)
    ell = np.arange(spectrum.ell_max + 1)
    return 0.5 * rho**2 * float(np.sum((2 * ell + 1) / 2.0 * spectrum.lam * c * c))


@dataclass(frozen=True)
class FreeEnergyBreakdown:
    entropy_term: float
    energy_term: float
    total: float
    rho: float
    beta: float

    def as_dict(self) -> dict:
        return {
            "entropy_term": self.entropy_term,
            "energy_term": self.energy_term,
            "total": self.total,
            "rho": self.rho,
            "beta": self.beta,
        }


def free_energy(
    f: OrientationProfile,
    interaction: Union[AngularPotential, LegendreSpectrum],
    rho: float,
    beta: float,
    mode: Optional[str] = None,
) -> FreeEnergyBreakdown:
    """Entropy plus interaction energy of ``f``.

    ``mode`` is ``"spectral"`` (needs a :class:`LegendreSpectrum`) or
    ``"direct"`` (needs an :class:`AngularPotential`); by default it follows
    the type of ``interaction``.
    """
    if mode is None:
        mode = "spectral" if isinstance(interaction, LegendreSpectrum) else "direct"
    if mode == "spectral":
        if not isinstance(interaction, LegendreSpectrum):
            raise StateError("spectral mode needs a LegendreSpectrum")
        energy = energy_spectral(f, interaction, rho)
    elif mode == "direct":
        if not isinstance(interaction, AngularPotential):
            raise StateError("direct mode needs an AngularPotential")
        energy = energy_direct(f, interaction, rho)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    ent = entropy(f, rho, beta)
    return FreeEnergyBreakdown(ent, energy, ent + energy, rho, beta)
