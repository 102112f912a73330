"""Command-line front end writing plot-ready CSV or JSON tables.

Every subcommand builds a :class:`RunConfig`; ``roughcasimir run CONFIG.json``
replays a saved one. Output is a pure function of the config (no timestamps,
fixed quadrature nodes), so reruns are byte-identical.

Exit status: 0 success, 2 configuration error, 3 input-file error,
4 numerical non-convergence.
"""
from __future__ import annotations

import dataclasses
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from . import __version__
from .limits import alpha_high_k
from .optics import CavityConfig, casimir_energy_curvature, casimir_energy_pp
from .quadrature import QuadratureError, QuadratureSpec
from .response import response_curve, response_G, response_G0
from .spectra import (GaussianSpectrum, SpectrumFileError, TabulatedSpectrum,
                      effective_correlation_length, energy_correction,
                      parse_spectrum_csv, spectrum_variance)

EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4

COMMANDS = ("energy", "response", "alpha", "rho-vs-lambdap", "correction",
            "spectrum-validate")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class InputFileError(ValueError):
    """A referenced input file is missing or malformed."""


# --- grids -------------------------------------------------------------------

def parse_grid(text: str) -> list[float]:
    """Parse ``v1,v2,...``, ``start:stop:n`` or ``start:stop:n:log`` (inclusive).

    The result must be strictly increasing.
    """
    text = str(text).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
                raise ConfigError(f"bad sweep '{text}', expected start:stop:n[:log]")
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1:
                raise ConfigError("sweep needs n >= 1")
            if n == 1:
                values = [a]
            elif len(parts) == 4:
                if a <= 0 or b <= 0:
                    raise ConfigError("log sweep needs positive endpoints")
                values = list(np.geomspace(a, b, n))
            else:
                values = list(np.linspace(a, b, n))
        else:
            values = [_parse_float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot parse grid '{text}': {exc}") from None
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("empty grid")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(f"grid '{text}' is not strictly increasing")
    return values


def _parse_float(v: str) -> float:
    v = v.strip().lower()
    if v == "perfect":
        return 0.0
    return float(v)


def parse_gaussian(text: str) -> dict:
    """``a=1,ellc=50`` -> ``{"a": 1.0, "ell_C": 50.0}``."""
    out = {}
    for item in text.split(","):
        if "=" not in item:
            raise ConfigError(f"bad gaussian spec '{text}', expected a=..,ellc=..")
        key, val = (s.strip().lower() for s in item.split("=", 1))
        key = {"a": "a", "ellc": "ell_C", "ell_c": "ell_C", "l": "ell_C"}.get(key)
        if key is None:
            raise ConfigError(f"unknown gaussian parameter in '{text}'")
        try:
            out[key] = float(val)
        except ValueError:
            raise ConfigError(f"non-numeric gaussian parameter in '{text}'") from None
    if set(out) != {"a", "ell_C"}:
        raise ConfigError("gaussian spec needs both a and ellc")
    return out


# --- config -------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one CLI run.

    Grids are stored as their text spec so the JSON form stays readable.
    ``lambda_p`` accepts ``perfect`` (or 0) for perfect mirrors.
    """

    command: str
    L: str | None = None
    lambda_p: str | None = None
    k: str | None = None
    gaussian: dict | None = None
    spectrum: str | None = None
    rel_tol: float = 1e-6
    n_phi: int = 64
    n_gl: int = 8
    format: str = "csv"
    output: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command '{self.command}'")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got '{self.format}'")
        if self.gaussian is not None and self.spectrum is not None:
            raise ConfigError("give either a gaussian spectrum or a spectrum file, not both")

    def quad(self) -> QuadratureSpec:
        try:
            return QuadratureSpec(rel_tol=self.rel_tol, n_phi=self.n_phi, n_gl=self.n_gl)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def meta(self) -> dict:
        q = self.quad()
        return {
            "library": "roughcasimir",
            "version": __version__,
            "config": dataclasses.asdict(self),
            "quadrature": {"scheme": q.scheme, "rel_tol": q.rel_tol, "gamma_max": q.gamma_max,
                           "n_phi": q.n_phi, "n_gl": q.n_gl, "max_doublings": q.max_doublings},
            "units": "lengths in nm; energies per hbar c A",
        }


def _single(text: str | None, name: str) -> float:
    if text is None:
        raise ConfigError(f"--{name} is required")
    values = parse_grid(text)
    if len(values) != 1:
        raise ConfigError(f"--{name} must be a single value for this command")
    return values[0]


def _required_grid(text: str | None, name: str) -> list[float]:
    if text is None:
        raise ConfigError(f"--{name} is required")
    return parse_grid(text)


def _cavity(L: float, lambda_p: float) -> CavityConfig:
    try:
        return CavityConfig(L, lambda_p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _spectrum(cfg: RunConfig):
    if cfg.gaussian is not None:
        try:
            return GaussianSpectrum(cfg.gaussian["a"], cfg.gaussian["ell_C"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad gaussian spectrum: {exc}") from None
    if cfg.spectrum is not None:
        path = Path(cfg.spectrum)
        if not path.is_file():
            raise InputFileError(f"spectrum file not found: {path}")
        try:
            return TabulatedSpectrum.from_csv(path)
        except SpectrumFileError as exc:
            raise InputFileError(str(exc)) from None
    raise ConfigError("correction needs --gaussian or --spectrum")


# --- commands ------------------------------------------------------------------

def _run_energy(cfg: RunConfig):
    lp = _single(cfg.lambda_p, "lambda-p")
    cols = ["L_nm", "lambda_p_nm", "E_nm_inv3", "E_curvature_nm_inv5", "E_over_E_perfect"]
    rows = []
    for L in _required_grid(cfg.L, "L"):
        cav = _cavity(L, lp)
        E = casimir_energy_pp(cav)
        rows.append([L, lp, E, casimir_energy_curvature(cav), E / (-math.pi ** 2 / (720 * L ** 3))])
    return cols, rows


def _run_response(cfg: RunConfig):
    cav = _cavity(_single(cfg.L, "L"), _single(cfg.lambda_p, "lambda-p"))
    ks = _required_grid(cfg.k, "k")
    E = casimir_energy_pp(cav)
    cols = ["k_nm_inv", "G_nm_inv5", "G_over_Epp_nm_inv2", "rho", "err_est"]
    rows = [[s.k, s.G_reduced, s.G_reduced / E, s.rho, s.err_est]
            for s in response_curve(ks, cav, cfg.quad())]
    return cols, rows


def _run_alpha(cfg: RunConfig):
    lp = _single(cfg.lambda_p, "lambda-p")
    cols = ["L_nm", "lambda_p_nm", "alpha_nm", "alpha_over_L", "alpha_over_lambda_p"]
    rows = []
    for L in _required_grid(cfg.L, "L"):
        try:
            a = alpha_high_k(_cavity(L, lp))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        rows.append([L, lp, a, a / L, a / lp])
    return cols, rows


def _run_rho_vs_lambdap(cfg: RunConfig):
    L = _single(cfg.L, "L")
    k = _single(cfg.k, "k")
    cols = ["lambda_p_nm", "k_nm_inv", "rho", "err_est"]
    rows = []
    for lp in _required_grid(cfg.lambda_p, "lambda-p"):
        cav = _cavity(L, lp)
        s = response_G(k, cav, cfg.quad())
        rows.append([lp, k, s.G_reduced / response_G0(cav), s.err_est])
    return cols, rows


def _run_correction(cfg: RunConfig):
    lp = _single(cfg.lambda_p, "lambda-p")
    spec = _spectrum(cfg)
    var = spectrum_variance(spec)
    cols = ["L_nm", "lambda_p_nm", "variance_nm2", "delta_E_nm_inv3", "delta_relative",
            "pfa_delta_relative", "ratio_to_pfa", "delta_over_a2_nm_inv2", "err_est"]
    rows = []
    for L in _required_grid(cfg.L, "L"):
        r = energy_correction(spec, _cavity(L, lp), cfg.quad())
        rows.append([L, lp, r.variance, r.delta_E_reduced, r.delta_relative,
                     r.pfa_delta_relative, r.ratio_to_pfa, r.delta_relative / var, r.err_est])
    return cols, rows


def _run_spectrum_validate(cfg: RunConfig):
    if cfg.spectrum is None:
        raise ConfigError("spectrum-validate needs a spectrum file")
    path = Path(cfg.spectrum)
    if not path.is_file():
        raise InputFileError(f"spectrum file not found: {path}")
    ks, ss, problems = parse_spectrum_csv(path.read_text())
    if problems:
        raise InputFileError(str(SpectrumFileError(path, problems)))
    spec = TabulatedSpectrum(tuple(ks), tuple(ss))
    try:
        var = spectrum_variance(spec)
    except ValueError as exc:
        raise InputFileError(f"{path}: {exc}") from None
    cols = ["rows", "k_min_nm_inv", "k_max_nm_inv", "variance_nm2", "rms_nm", "ell_eff_nm"]
    return cols, [[len(ks), ks[0], ks[-1], var, math.sqrt(var),
                   effective_correlation_length(spec)]]


_DISPATCH = {
    "energy": _run_energy,
    "response": _run_response,
    "alpha": _run_alpha,
    "rho-vs-lambdap": _run_rho_vs_lambdap,
    "correction": _run_correction,
    "spectrum-validate": _run_spectrum_validate,
}


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if v is None:
        return "nan"
    return format(float(v), ".17g")


def _json_value(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return int(v)
    if v is None or not math.isfinite(float(v)):
        return None
    return float(v)


def render(cfg: RunConfig, cols, rows) -> str:
    """Render a result table as CSV (meta in ``#`` comments) or JSON."""
    meta = cfg.meta()
    if cfg.format == "json":
        data = {"meta": meta, "columns": cols, "rows": [[_json_value(v) for v in r] for r in rows]}
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# roughcasimir {__version__}\n")
    buf.write("# meta: " + json.dumps(meta, sort_keys=True) + "\n")
    buf.write(",".join(cols) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    return buf.getvalue()


def run(cfg: RunConfig) -> str:
    """Execute a config and return the rendered output text."""
    cfg.quad()
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        cols, rows = _DISPATCH[cfg.command](cfg)
    return render(cfg, cols, rows)


def execute(cfg: RunConfig, save_config: str | None = None) -> int:
    """Run ``cfg``, write the output, and map failures to exit codes."""
    try:
        if save_config:
            Path(save_config).write_text(cfg.to_json() + "\n")
        text = run(cfg)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        return EXIT_CONFIG
    except InputFileError as exc:
        click.echo(f"input file error: {exc}", err=True)
        return EXIT_INPUT
    except QuadratureError as exc:
        click.echo(f"numerical error: {exc}", err=True)
        return EXIT_NUMERIC
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        click.echo(text, nl=False)
    return 0


# --- click wiring ------------------------------------------------------------------

def _common(f):
    opts = [
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
                     show_default=True),
        click.option("--output", "-o", type=click.Path(dir_okay=False), default=None,
                     help="Write to this file instead of stdout."),
        click.option("--save-config", type=click.Path(dir_okay=False), default=None,
                     help="Also write the run configuration as JSON."),
        click.option("--rel-tol", type=float, default=1e-6, show_default=True),
        click.option("--n-phi", type=int, default=64, show_default=True),
        click.option("--n-gl", type=int, default=8, show_default=True),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _finish(command, save_config, fmt, output, rel_tol, n_phi, n_gl, **kw):
    try:
        cfg = RunConfig(command=command, format=fmt, output=output, rel_tol=rel_tol,
                        n_phi=n_phi, n_gl=n_gl, **kw)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    sys.exit(execute(cfg, save_config))


_L_HELP = "Separation in nm: value, list a,b,c or sweep start:stop:n[:log]."
_LP_HELP = "Plasma wavelength in nm ('perfect' or 0 for perfect mirrors)."


@click.group()
@click.version_option(__version__, prog_name="roughcasimir")
def main():
    """Roughness correction to the Casimir energy between plasma-model mirrors."""


@main.command()
@click.option("--L", "L", required=True, help=_L_HELP)
@click.option("--lambda-p", required=True, help=_LP_HELP)
@_common
def energy(L, lambda_p, **kw):
    """Ideal plane-plane energy and its curvature versus L."""
    _finish("energy", L=L, lambda_p=lambda_p, **kw)


@main.command()
@click.option("--L", "L", required=True, help="Separation in nm.")
@click.option("--lambda-p", required=True, help=_LP_HELP)
@click.option("--k", required=True, help="Wavenumbers in nm^-1 (list or sweep).")
@_common
def response(L, lambda_p, k, **kw):
    """Response function G(k) and sensitivity rho(k)."""
    _finish("response", L=L, lambda_p=lambda_p, k=k, **kw)


@main.command()
@click.option("--L", "L", required=True, help=_L_HELP)
@click.option("--lambda-p", required=True, help=_LP_HELP)
@_common
def alpha(L, lambda_p, **kw):
    """High-k slope alpha of rho(k) = alpha k versus L."""
    _finish("alpha", L=L, lambda_p=lambda_p, **kw)


@main.command("rho-vs-lambdap")
@click.option("--L", "L", required=True, help="Separation in nm.")
@click.option("--k", required=True, help="Wavenumber in nm^-1.")
@click.option("--lambda-p", required=True, help="Plasma wavelengths in nm (list or sweep).")
@_common
def rho_vs_lambdap(L, k, lambda_p, **kw):
    """Sensitivity rho at fixed k and L versus the plasma wavelength."""
    _finish("rho-vs-lambdap", L=L, k=k, lambda_p=lambda_p, **kw)


@main.command()
@click.option("--L", "L", required=True, help=_L_HELP)
@click.option("--lambda-p", required=True, help=_LP_HELP)
@click.option("--gaussian", default=None, help="Gaussian spectrum, e.g. a=1,ellc=50 (nm).")
@click.option("--spectrum", type=click.Path(), default=None,
              help="Tabulated spectrum CSV (k_nm_inv,sigma_nm4).")
@_common
def correction(L, lambda_p, gaussian, spectrum, **kw):
    """Roughness correction Delta and its ratio to the PFA versus L."""
    try:
        g = parse_gaussian(gaussian) if gaussian else None
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    _finish("correction", L=L, lambda_p=lambda_p, gaussian=g, spectrum=spectrum, **kw)


@main.command("spectrum-validate")
@click.argument("path", type=click.Path())
@_common
def spectrum_validate(path, **kw):
    """Check a tabulated spectrum file and report its variance."""
    _finish("spectrum-validate", spectrum=path, **kw)


@main.command("run")
@click.argument("config", type=click.Path())
def run_config(config):
    """Replay a JSON run configuration."""
    path = Path(config)
    if not path.is_file():
        click.echo(f"input file error: config not found: {path}", err=True)
        sys.exit(EXIT_INPUT)
    try:
        cfg = RunConfig.from_json(path.read_text())
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    sys.exit(execute(cfg))


if __name__ == "__main__":
    main()
