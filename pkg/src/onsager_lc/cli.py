"""Command-line frontend: ``onsager-lc {spectrum,certify,solve,scan}``.

Every artifact embeds the fully resolved configuration, either as a
``# config: {...}`` comment line (CSV) or under a ``"config"`` key (JSON).
Exit status 0 means the computation ran, whatever its scientific outcome;
2 flags bad configuration or input and 3 a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import NumericalError, OnsagerError
from .potentials import AngularPotential, load_table_file, make_angular, make_kernel
from .solver import SolverConfig, best_critical_point, scan
from .spectrum import (
    DEFAULT_ELL_MAX,
    DEFAULT_NODES,
    certify,
    onsager_closed_form_spectrum,
    sinpow_exact_fractions,
    spectrum_for,
)

__all__ = ["RunConfig", "main", "build_parser", "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERICAL"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

COMMANDS = ("spectrum", "certify", "solve", "scan")


class ConfigError(Exception):
    """Invalid run configuration (exit status 2)."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    potential: str = "maier-saupe"
    parity: str = "auto"
    kernel: str = "delta"
    beta: float = 1.0
    rho: Optional[float] = None
    rho_min: Optional[float] = None
    rho_max: Optional[float] = None
    rho_steps: int = 120
    lmax: int = DEFAULT_ELL_MAX
    nodes: int = DEFAULT_NODES
    alpha: float = 0.5
    tol: float = 1e-10
    max_iter: int = 10_000
    eps0: float = 0.3
    output: Optional[str] = None
    format: str = "csv"
    threads: int = 1

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if self.lmax < 0 or self.nodes < 1:
            raise ConfigError("lmax must be non-negative and nodes positive")
        if self.lmax > self.nodes:
            raise ConfigError(f"lmax={self.lmax} exceeds nodes={self.nodes}")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.command == "solve":
            if self.rho is None:
                raise ConfigError("solve needs --rho")
            if not self.rho > 0:
                raise ConfigError(f"rho must be positive, got {self.rho}")
        if self.command == "scan":
            if self.rho_min is None or self.rho_max is None:
                raise ConfigError("scan needs --rho-min and --rho-max")
            if not self.rho_min > 0:
                raise ConfigError(f"rho-min must be positive, got {self.rho_min}")
            if not self.rho_max > self.rho_min:
                raise ConfigError(f"rho-max ({self.rho_max}) must exceed rho-min ({self.rho_min})")
            if self.rho_steps < 2:
                raise ConfigError("rho-steps must be at least 2")
        return self

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            alpha=self.alpha,
            tol=self.tol,
            max_iter=self.max_iter,
            eps0=self.eps0,
            n_nodes=self.nodes,
            threads=self.threads,
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onsager-lc",
        description="Spectra, transition certificates and density scans for Onsager-type functionals.",
    )
    # defaults are None so that only flags given explicitly override a --config file
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with run settings; flags take precedence")
    common.add_argument("--potential", help="onsager | maier-saupe | sinpow:K | table:PATH")
    common.add_argument("--parity", choices=("auto", "even", "odd", "none"), help="parity of a tabulated potential")
    common.add_argument("--kernel", help="delta | gaussian:SIGMA | ball:R")
    common.add_argument("--beta", type=float)
    common.add_argument("--rho", type=float)
    common.add_argument("--rho-min", dest="rho_min", type=float)
    common.add_argument("--rho-max", dest="rho_max", type=float)
    common.add_argument("--rho-steps", dest="rho_steps", type=int)
    common.add_argument("--lmax", type=int)
    common.add_argument("--nodes", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--eps0", type=float)
    common.add_argument("--output", help="output path (default: standard output)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--threads", type=int)

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="Legendre spectrum of the angular potential")
    sub.add_parser("certify", parents=[common], help="first-order transition certificate")
    sub.add_parser("solve", parents=[common], help="lowest free-energy critical point at one density")
    sub.add_parser("scan", parents=[common], help="density scan bracketing the transition")
    return parser


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - set(_FIELDS) - {"config"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update({k: v for k, v in loaded.items() if k not in ("config", "command")})
    for name in _FIELDS:
        flag = getattr(args, name, None)
        if flag is not None and name != "command":
            values[name] = flag
    try:
        cfg = RunConfig(command=args.command, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg.validate()


def _potential(cfg: RunConfig) -> AngularPotential:
    spec = cfg.potential.strip()
    if spec.lower().startswith("table:"):
        path = spec[len("table:"):]
        if not Path(path).is_file():
            raise ConfigError(f"table file not found: {path}")
        return load_table_file(path, parity=cfg.parity)
    return make_angular(spec)


def _finite_or_none(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_or_none(v) for v in obj]
    if isinstance(obj, np.floating):
        return _finite_or_none(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_finite_or_none(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _config_line(cfg: RunConfig) -> str:
    return "# config: " + json.dumps(cfg.as_dict(), sort_keys=True) + "\n"


def _emit(cfg: RunConfig, text: str, stdout) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        stdout.write(text)


def _cross_check(g: AngularPotential, ell_max: int) -> Optional[tuple]:
    """Independent values of the spectrum when a closed form exists."""
    if g.family == "onsager":
        return "closed-form", [float(v) for v in onsager_closed_form_spectrum(ell_max).lam]
    if g.family == "maier-saupe":
        return "exact", [float(v) for v in sinpow_exact_fractions(1, ell_max)]
    if g.family == "sinpow":
        return "exact", [float(v) for v in sinpow_exact_fractions(g.params["k"], ell_max)]
    return None


def run_spectrum(cfg: RunConfig, stdout) -> int:
    g = _potential(cfg)
    spec = spectrum_for(g, cfg.lmax, cfg.nodes)
    check = _cross_check(g, cfg.lmax)
    rows = []
    for ell in range(cfg.lmax + 1):
        rows.append(
            {
                "ell": ell,
                "lambda": float(spec.lam[ell]),
                "method": spec.method,
                "cross_check": check[1][ell] if check else None,
                "cross_check_method": check[0] if check else None,
            }
        )
    if cfg.format == "json":
        text = _dump_json({"config": cfg.as_dict(), "tail_bound": spec.tail_bound, "rows": rows})
    else:
        buf = io.StringIO()
        buf.write(_config_line(cfg))
        buf.write("ell,lambda,method,cross_check\n")
        for r in rows:
            cc = "" if r["cross_check"] is None else f"{r['cross_check']:.17g}"
            buf.write(f"{r['ell']},{r['lambda']:.17g},{r['method']},{cc}\n")
        text = buf.getvalue()
    _emit(cfg, text, stdout)
    return EXIT_OK


def run_certify(cfg: RunConfig, stdout) -> int:
    g = _potential(cfg)
    cert = certify(g, make_kernel(cfg.kernel), cfg.beta, cfg.lmax, cfg.nodes)
    record = cert.as_dict()
    if cfg.format == "json":
        text = _dump_json({"config": cfg.as_dict(), "certificate": record})
    else:
        buf = io.StringIO()
        buf.write(_config_line(cfg))
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["field", "value"])
        for key, val in sorted(_finite_or_none(record).items()):
            if isinstance(val, dict):
                val = json.dumps(val, sort_keys=True)
            elif isinstance(val, float):
                val = f"{val:.17g}"
            elif isinstance(val, bool):
                val = str(val).lower()
            elif val is None:
                val = ""
            writer.writerow([key, val])
        text = buf.getvalue()
    _emit(cfg, text, stdout)
    return EXIT_OK


def run_solve(cfg: RunConfig, stdout) -> int:
    g = _potential(cfg)
    spec = spectrum_for(g, cfg.lmax, cfg.nodes)
    pt = best_critical_point(spec, cfg.rho, cfg.beta, cfg.solver_config())
    info = {
        "rho": cfg.rho,
        "beta": cfg.beta,
        "seed": pt.seed,
        "branch": pt.branch,
        "converged": pt.converged,
        "iterations": pt.iterations,
        "residual": pt.residual,
        "order_param": pt.order_param,
        "free_energy": pt.free_energy.as_dict(),
    }
    if cfg.format == "json":
        text = _dump_json(
            {
                "config": cfg.as_dict(),
                "critical_point": info,
                "profile": {
                    "u": pt.profile.nodes.tolist(),
                    "weight": pt.profile.rule.weights.tolist(),
                    "f": pt.profile.values.tolist(),
                },
            }
        )
    else:
        buf = io.StringIO()
        buf.write(_config_line(cfg))
        buf.write("# critical_point: " + json.dumps(_finite_or_none(info), sort_keys=True) + "\n")
        pt.profile.to_csv(buf)
        text = buf.getvalue()
    _emit(cfg, text, stdout)
    return EXIT_OK


def run_scan(cfg: RunConfig, stdout) -> int:
    g = _potential(cfg)
    spec = spectrum_for(g, cfg.lmax, cfg.nodes)
    grid = np.linspace(cfg.rho_min, cfg.rho_max, cfg.rho_steps)
    result = scan(spec, cfg.beta, grid, cfg.solver_config())
    summary = {"config": cfg.as_dict(), **result.summary()}

    if cfg.format == "json":
        rows = [dataclasses.asdict(r) for r in result.sorted_rows()]
        text = _dump_json({**summary, "rows": rows})
    else:
        buf = io.StringIO()
        result.to_csv(buf, header=cfg.as_dict())
        text = buf.getvalue()
    _emit(cfg, text, stdout)
    if cfg.output and cfg.format == "csv":
        Path(cfg.output + ".summary.json").write_text(_dump_json(summary))

    prefix = "" if cfg.output else "# "
    bracket = result.rho_c_bracket
    stdout.write(
        f"{prefix}rho_c_bracket: "
        + (f"[{bracket[0]:.17g}, {bracket[1]:.17g}]" if bracket else "none")
        + "\n"
    )
    stdout.write(f"{prefix}rho_star: {result.rho_star:.17g}\n")
    if result.jump is not None:
        stdout.write(f"{prefix}jump: {result.jump:.17g}\n")
    return EXIT_OK


_RUNNERS = {"spectrum": run_spectrum, "certify": run_certify, "solve": run_solve, "scan": run_scan}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = resolve_config(args)
        return _RUNNERS[cfg.command](cfg, stdout)
    except NumericalError as exc:
        stderr.write(f"error: numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except (ConfigError, OnsagerError, OSError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except FloatingPointError as exc:
        stderr.write(f"error: numerical failure: {exc}\n")
        return EXIT_NUMERICAL


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
