"""Self-consistent critical points of the free energy and density scans.

Critical points solve the fixed-point equation
``f = exp(-beta rho K f) / Z``, where ``K`` is the convolution on the sphere
with the angular potential. By Funk-Hecke, ``K`` multiplies the Legendre
coefficient ``c_l`` of ``f`` by ``2 pi lam_l``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, NumericalError, StateError
from .functional import (
    UNIFORM_DENSITY,
    FreeEnergyBreakdown,
    OrientationProfile,
    free_energy,
    order_parameter,
    uniform_profile,
)
from .legendre import QuadratureRule, gauss_legendre, legendre_matrix
from .potentials import SpatialKernel
from .spectrum import LegendreSpectrum, find_ell_star, rho_star_from

__all__ = [
    "SolverConfig",
    "CriticalPoint",
    "ScanRow",
    "BifurcationScan",
    "el_map",
    "solve",
    "mode_seed",
    "critical_points",
    "best_critical_point",
    "scan",
    "second_variation_mode",
    "hessian_along_mode",
    "UNIFORM_ATOL",
]

SEED_TAGS = ("uniform", "+mode", "-mode")
# sup-norm distance from 1/(4 pi) below which a profile counts as uniform
UNIFORM_ATOL = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.5
    tol: float = 1e-10
    max_iter: int = 10_000
    eps0: float = 0.3
    seeds: tuple = SEED_TAGS
    n_nodes: int = 128
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ConfigurationError(f"damping must lie in (0, 1], got {self.alpha}")
        if not self.tol > 0:
            raise ConfigurationError(f"tolerance must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be at least 1")
        if self.n_nodes < 2:
            raise ConfigurationError("n_nodes must be at least 2")
        if self.threads < 1:
            raise ConfigurationError("threads must be at least 1")
        unknown = set(self.seeds) - set(SEED_TAGS)
        if unknown:
            raise ConfigurationError(f"unknown seeds {sorted(unknown)}; choose from {SEED_TAGS}")

    @property
    def rule(self) -> QuadratureRule:
        return gauss_legendre(self.n_nodes)


@dataclass(frozen=True)
class CriticalPoint:
    profile: OrientationProfile
    residual: float
    free_energy: FreeEnergyBreakdown
    order_param: float
    iterations: int
    seed: str
    converged: bool

    @property
    def deviation(self) -> float:
        """Sup-norm distance from the uniform profile."""
        return float(np.max(np.abs(self.profile.values - UNIFORM_DENSITY)))

    @property
    def is_uniform(self) -> bool:
        return self.deviation < UNIFORM_ATOL

    @property
    def branch(self) -> str:
        if self.is_uniform:
            return "uniform"
        return "prolate" if self.order_param > 0 else "oblate"


class _ELOperator:
    """Fixed-point map on raw node values for one (rule, spectrum, rho, beta)."""

    def __init__(self, rule: QuadratureRule, spectrum: LegendreSpectrum, rho: float, beta: float):
        if not rho >= 0:
            raise DomainError(f"density must be non-negative, got {rho}")
        if not beta > 0:
            raise DomainError(f"inverse temperature must be positive, got {beta}")
        if spectrum.ell_max >= rule.order:
            raise StateError(
                f"{rule.order} nodes cannot carry coefficients up to ell={spectrum.ell_max}"
            )
        ell = np.arange(spectrum.ell_max + 1)
        p = legendre_matrix(rule, spectrum.ell_max)
        w = np.asarray(rule.weights)
        # field(u_i) = sum_l (2l+1)/2 lam_l c_l P_l(u_i),  c_l = 2 pi sum_j w_j f_j P_l(u_j)
        diag = (2 * ell + 1) / 2.0 * spectrum.lam
        # the l = 0 field is a constant that the normalization removes exactly;
        # dropping it keeps its rounding noise out of the exponent
        diag[0] = 0.0
        self._analysis = 2.0 * math.pi * p * w
        self._noise = 4.0 * rule.order * np.finfo(float).eps * np.abs(self._analysis)
        self._synthesis = p.T * diag
        self._scale = -beta * rho
        self._w2pi = 2.0 * math.pi * w

    def __call__(self, values: np.ndarray) -> np.ndarray:
        coeffs = self._analysis @ values
        # coefficients at rounding level (e.g. the l >= 1 moments of f0) are
        # set to zero, so f0 stays an exact fixed point however large beta rho is
        coeffs[np.abs(coeffs) <= self._noise @ np.abs(values)] = 0.0
        expo = self._scale * (self._synthesis @ coeffs)
        expo -= expo.max()
        out = np.exp(expo)
        return out / np.dot(self._w2pi, out)

    def normalize(self, values: np.ndarray) -> np.ndarray:
        return values / np.dot(self._w2pi, values)


def el_map(
    f: OrientationProfile, spectrum: LegendreSpectrum, rho: float, beta: float
) -> OrientationProfile:
    """One application of the self-consistency map ``f -> exp(-beta rho K f) / Z``."""
    if not np.all(np.isfinite(f.values)):
        raise DomainError("profile contains NaN")
    out = _ELOperator(f.rule, spectrum, rho, beta)(f.values)
    if not np.all(np.isfinite(out)):
        raise NumericalError("self-consistency map produced non-finite values")
    return OrientationProfile(f.rule, out)


def mode_seed(rule: QuadratureRule, ell: int, amplitude: float) -> OrientationProfile:
    """``f0 (1 + amplitude P_ell)``, clipped at zero and renormalized."""
    p = legendre_matrix(rule, ell)[ell]
    return OrientationProfile(rule, np.clip(UNIFORM_DENSITY * (1.0 + amplitude * p), 0.0, None))


def _ell_star(spectrum: LegendreSpectrum) -> int:
    return find_ell_star(spectrum, SpatialKernel("delta"), [0.0]).ell_star


def solve(
    seed: OrientationProfile,
    spectrum: LegendreSpectrum,
    rho: float,
    beta: float,
    config: SolverConfig = SolverConfig(),
    tag: str = "custom",
) -> CriticalPoint:
    """Damped fixed-point iteration ``f <- (1 - alpha) f + alpha T(f)``.

    Stops once ``max |T(f) - f| < config.tol`` on the nodes. Running out of
    iterations is not an error: the last iterate comes back with
    ``converged=False``.
    """
    op = _ELOperator(seed.rule, spectrum, rho, beta)
    f = np.array(seed.values)
    alpha = config.alpha
    residual = math.inf
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iter + 1):
        t = op(f)
        if not np.all(np.isfinite(t)):
            raise NumericalError(f"non-finite iterate at rho={rho}, seed {tag}")
        residual = float(np.max(np.abs(t - f)))
        if residual < config.tol:
            converged = True
            break
        f = op.normalize((1.0 - alpha) * f + alpha * t)
    profile = OrientationProfile(seed.rule, f)
    return CriticalPoint(
        profile=profile,
        residual=residual,
        free_energy=free_energy(profile, spectrum, rho, beta),
        order_param=order_parameter(profile),
        iterations=iterations,
        seed=tag,
        converged=converged,
    )


def _seed_profiles(spectrum, config, extra_seeds):
    rule = config.rule
    ell = _ell_star(spectrum)
    seeds = []
    for tag in config.seeds:
        if tag == "uniform":
            seeds.append((tag, uniform_profile(rule)))
        else:
            sign = 1.0 if tag == "+mode" else -1.0
            seeds.append((tag, mode_seed(rule, ell, sign * config.eps0)))
    for i, prof in enumerate(extra_seeds or ()):
        if prof is not None:
            seeds.append((f"warm{i}" if i else "warm", prof))
    return seeds


def critical_points(
    spectrum: LegendreSpectrum,
    rho: float,
    beta: float,
    config: SolverConfig = SolverConfig(),
    extra_seeds: Sequence[Optional[OrientationProfile]] = (),
) -> list[CriticalPoint]:
    """Solve from every configured seed plus ``extra_seeds`` (warm starts), in order."""
    seeds = _seed_profiles(spectrum, config, extra_seeds)

    def run(item):
        tag, prof = item
        return solve(prof, spectrum, rho, beta, config, tag)

    if config.threads > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(run, seeds))
    return [run(item) for item in seeds]


def select_best(points: Sequence[CriticalPoint], ftol: float = 1e-12) -> CriticalPoint:
    """Lowest free energy among converged points; near-ties go to the most uniform one."""
    pool = [p for p in points if p.converged] or list(points)
    f_min = min(p.free_energy.total for p in pool)
    near = [p for p in pool if p.free_energy.total <= f_min + ftol]
    return min(near, key=lambda p: (p.deviation, p.free_energy.total))


def best_critical_point(
    spectrum: LegendreSpectrum,
    rho: float,
    beta: float,
    config: SolverConfig = SolverConfig(),
    extra_seeds: Sequence[Optional[OrientationProfile]] = (),
) -> CriticalPoint:
    """Lowest-free-energy critical point found from the configured seeds."""
    return select_best(critical_points(spectrum, rho, beta, config, extra_seeds))


def second_variation_mode(spectrum: LegendreSpectrum, rho: float, beta: float, ell: int) -> float:
    """Stability coefficient of a pure ``P_ell`` perturbation of the uniform profile.

    ``(4 pi^2 rho / beta) (2 + (beta rho / 2 pi) lam_ell)``. For a negative
    ``lam_ell`` it vanishes at ``4 pi / (beta |lam_ell|)``, the certificate
    threshold ``rho_star``. The exact Hessian of :func:`free_energy` along
    the same direction is :func:`hessian_along_mode`.
    """
    if ell < 1:
        raise DomainError("only mass-conserving perturbations (ell >= 1) are allowed")
    lam = spectrum[ell]
    return (4.0 * math.pi**2 * rho / beta) * (2.0 + (beta * rho / (2.0 * math.pi)) * lam)


def hessian_along_mode(spectrum: LegendreSpectrum, rho: float, beta: float, ell: int) -> float:
    """Coefficient of ``eps^2 <h^2>`` in ``F(f0 + eps h) - F(f0)`` for ``h = P_ell``.

    Equal to ``(4 pi^2 rho / beta) (2 + beta rho lam_ell)``, so the uniform
    profile of the functional evaluated by :func:`free_energy` loses
    stability at ``2 / (beta |lam_ell|)``.
    """
    if ell < 1:
        raise DomainError("only mass-conserving perturbations (ell >= 1) are allowed")
    lam = spectrum[ell]
    return (4.0 * math.pi**2 * rho / beta) * (2.0 + beta * rho * lam)


@dataclass(frozen=True)
class ScanRow:
    rho: float
    f_uniform: float
    f_best: float
    order_param: float
    branch: str
    converged: bool
    source: str = "grid"

    @property
    def delta_f(self) -> float:
        return self.f_best - self.f_uniform


CSV_COLUMNS = ("rho", "F_uniform", "F_best", "order_param", "branch", "converged")


@dataclass
class BifurcationScan:
    rows: list
    rho_star: float
    beta: float
    rho_c_bracket: Optional[tuple] = None
    jump: Optional[float] = None
    transitions: list = field(default_factory=list)
    collapsed_seeds: list = field(default_factory=list)
    unconverged: list = field(default_factory=list)

    def sorted_rows(self) -> list:
        return sorted(self.rows, key=lambda r: r.rho)

    def summary(self) -> dict:
        return {
            "rho_c_bracket": list(self.rho_c_bracket) if self.rho_c_bracket else None,
            "rho_star": self.rho_star,
            "jump": self.jump,
            "beta": self.beta,
            "transitions": [list(t) for t in self.transitions],
            "collapsed_seeds": self.collapsed_seeds,
            "unconverged": self.unconverged,
            "n_rows": len(self.rows),
        }

    def to_csv(self, fh, header: Optional[dict] = None) -> None:
        import json

        if header is not None:
            fh.write("# config: " + json.dumps(header, sort_keys=True) + "\n")
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in self.sorted_rows():
            fh.write(
                f"{r.rho:.17g},{r.f_uniform:.17g},{r.f_best:.17g},{r.order_param:.17g},"
                f"{r.branch},{str(r.converged).lower()}\n"
            )


def _nematic(points: Sequence[CriticalPoint]) -> Optional[CriticalPoint]:
    cands = [p for p in points if p.converged and not p.is_uniform]
    if not cands:
        return None
    return min(cands, key=lambda p: p.free_energy.total)


def _row(rho, f_uniform, best: CriticalPoint, source="grid") -> ScanRow:
    return ScanRow(
        rho=float(rho),
        f_uniform=f_uniform,
        f_best=min(best.free_energy.total, f_uniform) if best.is_uniform else best.free_energy.total,
        order_param=best.order_param,
        branch=best.branch,
        converged=best.converged,
        source=source,
    )


def scan(
    spectrum: LegendreSpectrum,
    beta: float,
    rho_grid: Sequence[float],
    config: SolverConfig = SolverConfig(),
    warm_start: bool = True,
    ftol: float = 1e-9,
    rel_width: float = 1e-6,
) -> BifurcationScan:
    """Sweep the density, locate where a non-uniform profile beats ``f0``, refine by bisection.

    With ``warm_start`` the grid is swept upward (each density also seeded
    with the previous non-uniform solution) and then downward from the
    highest non-uniform point, following the metastable branch until it
    folds back onto ``f0``. Every upward crossing of ``F_best - F_uniform``
    through ``-ftol`` is listed in ``transitions``; the first one is refined
    to relative width ``rel_width`` and reported as ``rho_c_bracket``.
    """
    grid = np.asarray(rho_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ConfigurationError("density grid needs at least two points")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ConfigurationError("density grid must be positive and strictly ascending")
    if not beta > 0:
        raise DomainError(f"inverse temperature must be positive, got {beta}")

    rule = config.rule
    f0 = uniform_profile(rule)
    rho_star = rho_star_from(float(spectrum.lam[_ell_star(spectrum)]), beta)

    def f_uniform(rho):
        return free_energy(f0, spectrum, rho, beta).total

    best: list[CriticalPoint] = []
    branch: list[Optional[CriticalPoint]] = []
    warm = None
    for rho in grid:
        pts = critical_points(spectrum, rho, beta, config, [warm] if warm_start else [])
        best.append(select_best(pts))
        nem = _nematic(pts)
        branch.append(nem)
        if warm_start:
            warm = nem.profile if nem is not None else None

    if warm_start:
        top = max((k for k, b in enumerate(branch) if b is not None), default=None)
        if top is not None:
            warm = branch[top].profile
            for k in range(top - 1, -1, -1):
                pt = solve(warm, spectrum, grid[k], beta, config, "descend")
                if not pt.converged or pt.is_uniform:
                    break
                warm = pt.profile
                if branch[k] is None or pt.free_energy.total < branch[k].free_energy.total:
                    branch[k] = pt
                best[k] = select_best([best[k], pt])

    fu = [f_uniform(rho) for rho in grid]
    rows = [_row(rho, fu[k], best[k]) for k, rho in enumerate(grid)]
    result = BifurcationScan(rows=rows, rho_star=rho_star, beta=beta)
    result.unconverged = [r.rho for r in rows if not r.converged]

    below = [r.delta_f >= -ftol for r in rows]
    crossings = [k for k in range(1, len(rows)) if below[k - 1] and not below[k]]
    result.transitions = [(float(grid[k - 1]), float(grid[k])) for k in crossings]
    if not crossings:
        return result

    k = crossings[0]
    lo, hi = float(grid[k - 1]), float(grid[k])
    lo_pt, hi_pt = best[k - 1], best[k]
    while hi - lo > rel_width * hi:
        mid = 0.5 * (lo + hi)
        pts = critical_points(spectrum, mid, beta, config, [hi_pt.profile])
        pt = select_best(pts)
        fu_mid = f_uniform(mid)
        result.rows.append(_row(mid, fu_mid, pt, "bisection"))
        if not pt.converged:
            result.unconverged.append(mid)
        if pt.free_energy.total < fu_mid - ftol:
            hi, hi_pt = mid, pt
        else:
            lo, lo_pt = mid, pt
    result.rho_c_bracket = (lo, hi)
    result.jump = hi_pt.order_param - lo_pt.order_param

    # mode seeds that fell back to f0 although a lower non-uniform state exists
    for r_k, rho in enumerate(grid):
        if rho > hi and rows[r_k].branch != "uniform":
            pts = critical_points(spectrum, rho, beta, SolverConfig(**{**config.__dict__, "seeds": ("+mode", "-mode")}))
            if all(p.is_uniform for p in pts):
                result.collapsed_seeds.append(float(rho))
    return result
