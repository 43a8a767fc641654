"""Separable interaction potentials ``phi(x, u) = phi(x) * g(u)``.

Angular factors ``g`` live on ``u = cos(angle) in [-1, 1]``; spatial factors
are normalized to unit integral and described by their radial Fourier
transform.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gamma, jv

from .errors import ConfigurationError, FormatError, ValidationError

__all__ = [
    "AngularPotential",
    "SpatialKernel",
    "make_angular",
    "make_kernel",
    "load_tabulated",
    "load_table_file",
    "read_table",
    "default_xi_grid",
    "sup_abs",
    "phi_hat",
    "big_phi_hat",
    "PARITY_TOL",
]

PARITIES = ("even", "odd", "none")
PARITY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class AngularPotential:
    """Angular factor g(u) of the pair interaction.

    Instances compare by identity, which lets them key caches of
    precomputed kernel matrices.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    parity: str
    family: str
    params: dict = field(default_factory=dict)
    lipschitz_hint: Optional[float] = None

    def __post_init__(self):
        if self.parity not in PARITIES:
            raise ConfigurationError(f"parity must be one of {PARITIES}, got {self.parity!r}")

    def __call__(self, u):
        u_arr = np.asarray(u, dtype=float)
        out = np.asarray(self.evaluator(u_arr), dtype=float)
        return float(out) if out.ndim == 0 else out

    @property
    def tag(self) -> str:
        if self.family == "sinpow":
            return f"sinpow:{self.params['k']}"
        if self.family == "tabulated" and "path" in self.params:
            return f"table:{self.params['path']}"
        return self.family

    def scaled(self, factor: float) -> "AngularPotential":
        """The potential ``factor * g``, keeping parity and family metadata."""
        base = self.evaluator
        hint = None if self.lipschitz_hint is None else abs(factor) * self.lipschitz_hint
        return AngularPotential(
            evaluator=lambda u: factor * base(u),
            parity=self.parity,
            family=self.family,
            params={**self.params, "scale": factor * self.params.get("scale", 1.0)},
            lipschitz_hint=hint,
        )


def _onsager(u):
    return np.sqrt(np.clip((1.0 - u) * (1.0 + u), 0.0, None))


def _maier_saupe(u):
    return 1.0 - u * u


_SINPOW = re.compile(r"^sinpow[:(]?\s*(\d+)\s*\)?$")


def make_angular(family: str, k: Optional[int] = None) -> AngularPotential:
    """Build a built-in angular factor.

    ``family`` is ``"onsager"`` (``sqrt(1-u^2)``), ``"maier-saupe"``
    (``1-u^2``) or ``"sinpow"`` (``(1-u^2)^k``). The exponent may also be
    given inline, as in ``"sinpow:3"``.
    """
    tag = family.strip().lower()
    if tag == "onsager":
        return AngularPotential(_onsager, "even", "onsager")
    if tag in ("maier-saupe", "maier_saupe", "maiersaupe"):
        return AngularPotential(_maier_saupe, "even", "maier-saupe", lipschitz_hint=2.0)
    match = _SINPOW.match(tag)
    if match or tag == "sinpow":
        if match:
            k = int(match.group(1))
        if k is None or int(k) != k or k < 1:
            raise ConfigurationError(f"sinpow needs an integer exponent k >= 1, got {k!r}")
        k = int(k)
        return AngularPotential(
            lambda u: ((1.0 - u) * (1.0 + u)) ** k,
            "even",
            "sinpow",
            params={"k": k},
            lipschitz_hint=float(2 * k),
        )
    raise ConfigurationError(f"unknown angular potential {family!r}")


def load_tabulated(samples, parity: str = "auto") -> AngularPotential:
    """Cubic-spline potential through ``(u, value)`` samples.

    The samples must cover ``[-1, 1]`` with both endpoints and strictly
    increasing abscissae. A declared ``even`` or ``odd`` parity is checked
    against the data to within ``PARITY_TOL`` and then imposed exactly by
    symmetrizing the interpolant. ``parity="auto"`` picks the first parity
    that passes the check, falling back to ``"none"``.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FormatError("samples must be (u, value) pairs")
    if len(arr) < 8:
        raise FormatError(f"need at least 8 samples, got {len(arr)}")
    u, v = arr[:, 0], arr[:, 1]
    if not np.all(np.isfinite(arr)):
        raise FormatError("samples contain non-finite values")
    if np.any(np.diff(u) <= 0):
        raise FormatError("u values must be strictly increasing")
    if abs(u[0] + 1.0) > 1e-12 or abs(u[-1] - 1.0) > 1e-12:
        raise FormatError("u values must span [-1, 1] including both endpoints")
    u = u.copy()
    u[0], u[-1] = -1.0, 1.0

    spline = CubicSpline(u, v)
    mirrored = spline(-u)
    defects = {"even": np.max(np.abs(v - mirrored)), "odd": np.max(np.abs(v + mirrored))}

    if parity == "auto":
        parity = next((p for p in ("even", "odd") if defects[p] <= PARITY_TOL), "none")
    elif parity not in PARITIES:
        raise ConfigurationError(f"parity must be one of {PARITIES} or 'auto', got {parity!r}")
    elif parity != "none" and defects[parity] > PARITY_TOL:
        raise ValidationError(
            f"samples are not {parity}: symmetry defect {defects[parity]:.3e} exceeds {PARITY_TOL:g}"
        )

    if parity == "even":
        evaluator = lambda x: 0.5 * (spline(x) + spline(-x))  # noqa: E731
    elif parity == "odd":
        evaluator = lambda x: 0.5 * (spline(x) - spline(-x))  # noqa: E731
    else:
        evaluator = spline
    slope = float(np.max(np.abs(np.diff(v) / np.diff(u))))
    return AngularPotential(
        evaluator, parity, "tabulated", params={"n_samples": len(u)}, lipschitz_hint=slope
    )


def read_table(path) -> np.ndarray:
    """Read a two-column ``u value`` text file; ``#`` starts a comment."""
    path = Path(path)
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return np.array(rows)


def load_table_file(path, parity: str = "auto") -> AngularPotential:
    pot = load_tabulated(read_table(path), parity=parity)
    return AngularPotential(
        pot.evaluator,
        pot.parity,
        pot.family,
        params={**pot.params, "path": str(path)},
        lipschitz_hint=pot.lipschitz_hint,
    )


@dataclass(frozen=True)
class SpatialKernel:
    """Radial spatial factor with unit integral.

    ``family`` is ``delta`` (pure mean field), ``gaussian`` with standard
    deviation ``scale``, or ``ball`` (normalized indicator of radius
    ``scale``).
    """

    family: str
    dimension: int = 3
    scale: float = 1.0

    def __post_init__(self):
        if self.family not in ("delta", "gaussian", "ball"):
            raise ConfigurationError(f"unknown spatial kernel {self.family!r}")
        if self.dimension < 1:
            raise ConfigurationError("dimension must be positive")
        if self.family != "delta" and not self.scale > 0:
            raise ConfigurationError(f"{self.family} kernel needs a positive scale")

    @property
    def positive_definite(self) -> bool:
        return self.family in ("delta", "gaussian")

    @property
    def tag(self) -> str:
        return self.family if self.family == "delta" else f"{self.family}:{self.scale:g}"

    def fourier(self, xi):
        return phi_hat(self, xi)


def make_kernel(spec: str, dimension: int = 3) -> SpatialKernel:
    """Parse ``delta``, ``gaussian:SIGMA`` or ``ball:R``."""
    name, _, arg = spec.strip().lower().partition(":")
    if name == "delta":
        if arg:
            raise ConfigurationError("delta kernel takes no parameter")
        return SpatialKernel("delta", dimension)
    if name in ("gaussian", "ball"):
        try:
            scale = float(arg)
        except ValueError:
            raise ConfigurationError(f"{name} kernel needs a numeric parameter, got {arg!r}") from None
        return SpatialKernel(name, dimension, scale)
    raise ConfigurationError(f"unknown spatial kernel {spec!r}")


def _ball_transform(x, d):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    nu = d / 2
    # power series of Gamma(nu+1) (2/x)^nu J_nu(x); the closed form cancels badly for small x
    small = x < 0.5
    q = -((x[small] / 2.0) ** 2)
    term = np.ones_like(q)
    total = term.copy()
    for k in range(1, 16):
        term = term * q / (k * (k + nu))
        total += term
    out[small] = total
    xl = x[~small]
    if d == 3:
        out[~small] = 3.0 * (np.sin(xl) - xl * np.cos(xl)) / xl**3
    else:
        out[~small] = gamma(nu + 1) * (2.0 / xl) ** nu * jv(nu, xl)
    return out


def phi_hat(kernel: SpatialKernel, xi):
    """Fourier transform of the spatial factor at radial wavenumber ``xi``."""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr < 0):
        raise ConfigurationError("radial wavenumber must be non-negative")
    if kernel.family == "delta":
        out = np.ones_like(xi_arr)
    elif kernel.family == "gaussian":
        out = np.exp(-0.5 * (kernel.scale * xi_arr) ** 2)
    else:
        out = _ball_transform(kernel.scale * xi_arr, kernel.dimension)
    return float(out) if out.ndim == 0 else out


def big_phi_hat(kernel: SpatialKernel, spectrum, ell: int, xi):
    """Joint spatial Fourier / Legendre transform ``phi_hat(xi) * lambda_ell``."""
    if ell < 0 or ell > spectrum.ell_max:
        raise IndexError(f"ell={ell} outside spectrum range 0..{spectrum.ell_max}")
    return phi_hat(kernel, xi) * spectrum.lam[ell]


def default_xi_grid(kernel: SpatialKernel, n: int = 256) -> np.ndarray:
    """Zero plus a geometric grid up to ``20 / scale``."""
    scale = 1.0 if kernel.family == "delta" else kernel.scale
    return np.concatenate([[0.0], np.geomspace(1e-3 / scale, 20.0 / scale, n - 1)])


def sup_abs(g: AngularPotential, n_samples: int = 10_001) -> float:
    """Estimate ``sup |g|`` on [-1, 1] by uniform sampling; the odd default hits 0 and both endpoints."""
    u = np.linspace(-1.0, 1.0, n_samples)
    return float(np.max(np.abs(g(u))))

