"""Roughness spectra and the roughness correction to the Casimir energy.

For isotropic spectra the correction is
``dE/(hbar c A) = (1/2pi) int_0^inf k G(k) sigma(k) dk`` and the height variance
is ``(1/2pi) int_0^inf k sigma(k) dk``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .optics import CavityConfig, casimir_energy_curvature, casimir_energy_pp
from .quadrature import QuadratureSpec, gauss_legendre
from .response import response_G0, response_G_fixed

CSV_HEADER = "k_nm_inv,sigma_nm4"

# Gaussian tail cut: exp(-k^2 l^2 / 4) < 1e-18 beyond k = GAUSS_CUT / l
GAUSS_CUT = 2 * math.sqrt(18 * math.log(10))
# Perturbative validity: a and lengths compared with this ratio
PERTURBATIVE_RATIO = 0.1


class PerturbativeWarning(UserWarning):
    """Roughness amplitude not small compared with L or the correlation length."""


class ValidityWarning(UserWarning):
    """Geometry outside the proximity-force validity window."""


class SpectrumFileError(ValueError):
    """A tabulated spectrum file violates the schema.

    ``problems`` lists ``(line_number, message)`` pairs (1-based lines).
    """

    def __init__(self, path, problems):
        self.path = str(path)
        self.problems = list(problems)
        lines = "; ".join(f"line {n}: {m}" for n, m in self.problems)
        super().__init__(f"{self.path}: {lines}")


@dataclass(frozen=True)
class GaussianSpectrum:
    """``sigma(k) = pi a^2 l^2 exp(-k^2 l^2 / 4)`` with rms height ``a`` (nm)."""

    a: float
    ell_C: float

    def __post_init__(self):
        if not (self.a > 0 and self.ell_C > 0):
            raise ValueError("a and ell_C must be positive")
        if self.a > PERTURBATIVE_RATIO * self.ell_C:
            warnings.warn(f"a = {self.a} nm is not small compared with ell_C = {self.ell_C} nm",
                          PerturbativeWarning, stacklevel=3)

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        out = math.pi * self.a ** 2 * self.ell_C ** 2 * np.exp(-(k * self.ell_C) ** 2 / 4)
        return out if out.ndim else float(out)

    @property
    def k_max(self) -> float:
        return GAUSS_CUT / self.ell_C

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(self.k_max * np.arange(1, 8) / 8)


@dataclass(frozen=True)
class TabulatedSpectrum:
    """Sampled spectrum ``(k_i, sigma_i)``.

    Between samples ``sigma`` is interpolated linearly in ``log sigma`` (linearly
    where a sample is zero), held at ``sigma_0`` below the first sample and
    set to zero beyond the last one. A single sample therefore describes a
    constant spectrum on ``[0, k_0]``.
    """

    k: tuple[float, ...]
    sigma: tuple[float, ...]

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        s = np.asarray(self.sigma, dtype=float)
        if k.ndim != 1 or k.size == 0 or k.shape != s.shape:
            raise ValueError("k and sigma must be equal-length, non-empty sequences")
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(s))):
            raise ValueError("spectrum samples must be finite")
        if np.any(k < 0) or np.any(np.diff(k) <= 0):
            raise ValueError("k must be non-negative and strictly increasing")
        if np.any(s < 0):
            raise ValueError("sigma must be non-negative")

    @classmethod
    def from_csv(cls, path) -> "TabulatedSpectrum":
        k, s, problems = parse_spectrum_csv(Path(path).read_text())
        if problems:
            raise SpectrumFileError(path, problems)
        return cls(tuple(k), tuple(s))

    def to_csv(self) -> str:
        rows = [CSV_HEADER] + [f"{k!r},{s!r}" for k, s in zip(self.k, self.sigma)]
        return "\n".join(rows) + "\n"

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        ks = np.asarray(self.k)
        ss = np.asarray(self.sigma)
        out = np.zeros_like(k)
        out[k <= ks[0]] = ss[0]
        inside = (k > ks[0]) & (k <= ks[-1])
        if np.any(inside):
            x = k[inside]
            j = np.clip(np.searchsorted(ks, x) - 1, 0, ks.size - 2)
            t = (x - ks[j]) / (ks[j + 1] - ks[j])
            s0, s1 = ss[j], ss[j + 1]
            pos = (s0 > 0) & (s1 > 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                logv = s0 * np.exp(t * np.log(np.where(pos, s1 / s0, 1.0)))
            out[inside] = np.where(pos, logv, s0 + t * (s1 - s0))
        return out if out.ndim else float(out)

    @property
    def k_max(self) -> float:
        return float(self.k[-1])

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(self.k)


Spectrum = GaussianSpectrum | TabulatedSpectrum


@dataclass(frozen=True)
class SumSpectrum:
    """Pointwise sum of spectra (uncorrelated roughness contributions)."""

    parts: tuple

    def __call__(self, k):
        return sum(p(k) for p in self.parts)

    @property
    def k_max(self) -> float:
        return max(p.k_max for p in self.parts)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted({b for p in self.parts for b in p.breakpoints}))


def parse_spectrum_csv(text: str):
    """Parse the ``k_nm_inv,sigma_nm4`` format.

    Returns ``(k, sigma, problems)``; ``problems`` holds ``(line, message)``
    for every schema violation, so all of them can be reported at once.
    """
    problems = []
    ks, ss = [], []
    header_seen = False
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            header_seen = True
            if line.replace(" ", "") != CSV_HEADER:
                problems.append((n, f"expected header '{CSV_HEADER}', got '{line}'"))
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != 2:
            problems.append((n, f"expected 2 columns, got {len(cells)}"))
            continue
        try:
            k, s = float(cells[0]), float(cells[1])
        except ValueError:
            problems.append((n, f"non-numeric value in '{line}'"))
            continue
        if not (math.isfinite(k) and math.isfinite(s)):
            problems.append((n, "non-finite value"))
            continue
        if k < 0:
            problems.append((n, f"negative k = {k}"))
        if s < 0:
            problems.append((n, f"negative sigma = {s}"))
        if ks and k <= ks[-1]:
            problems.append((n, f"k = {k} is not strictly increasing"))
        ks.append(k)
        ss.append(s)
    if not header_seen:
        problems.append((1, f"empty file: missing header '{CSV_HEADER}'"))
    elif not ks:
        problems.append((1, "no data rows"))
    return ks, ss, problems


def _k_rule(breaks, k_max: float, n: int = 16):
    """Gauss-Legendre panels on ``[0, k_max]`` split at ``breaks``."""
    edges = np.unique(np.clip(np.concatenate([[0.0, k_max], np.asarray(breaks, float)]),
                              0.0, k_max))
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            x, w = gauss_legendre(a, b, n)
            xs.append(x)
            ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def spectrum_eval(s, k):
    """``sigma(k)`` in nm^4."""
    if np.any(np.asarray(k) < 0):
        raise ValueError("k must be non-negative")
    return s(k)


def spectrum_variance(s) -> float:
    """Height variance ``(1/2pi) int k sigma(k) dk`` in nm^2."""
    k, w = _k_rule(s.breakpoints, s.k_max)
    val = float(np.sum(w * k * s(k))) / (2 * math.pi)
    if not math.isfinite(val):
        raise ValueError("spectrum variance diverges")
    return val


@dataclass(frozen=True)
class ResponseTable:
    """``rho(k)`` sampled on a uniform grid ``[0, k_max]`` with a cubic spline.

    ``rho`` is smooth in ``k`` (quadratic at the origin, linear at large
    ``k``), so a uniform grid with a not-a-knot spline converges at fourth
    order; doubling the interval count reuses every previous sample. Samples
    use the base node set of ``quad``; ``err_est`` is the node-doubling
    change of ``G`` at a probe wavenumber.
    """

    cfg: CavityConfig
    quad: QuadratureSpec
    k: tuple[float, ...]
    rho: tuple[float, ...]
    G0: float
    err_est: float
    _spline: CubicSpline = field(repr=False, compare=False, default=None)

    @classmethod
    def build(cls, cfg: CavityConfig, k_max: float, n_intervals: int = 8,
              quad: QuadratureSpec | None = None, probe_k: float | None = None,
              _known=None, _err=None) -> "ResponseTable":
        quad = quad or QuadratureSpec()
        G0 = response_G0(cfg)
        ks = k_max * np.arange(n_intervals + 1) / n_intervals
        known = dict(_known or {})
        old = np.array(sorted(known))
        rho = []
        for k in ks:
            # reuse samples whose abscissa agrees to rounding
            j = np.searchsorted(old, k) if old.size else 0
            near = [x for x in old[max(j - 1, 0):j + 1] if abs(x - k) <= 1e-12 * k_max]
            if near:
                rho.append(known[float(near[0])])
            else:
                rho.append(1.0 if k == 0 else response_G_fixed(k, cfg, quad) / G0)
        rho = tuple(rho)
        if _err is None:
            probe = k_max / 2 if probe_k is None else probe_k
            coarse = response_G_fixed(probe, cfg, quad)
            fine = response_G_fixed(probe, cfg, quad.doubled())
            _err = max(abs(fine - coarse) / abs(fine), 1e-13)
        spline = CubicSpline(ks, rho)
        return cls(cfg, quad, tuple(float(k) for k in ks), rho, G0, _err, spline)

    @property
    def k_max(self) -> float:
        return self.k[-1]

    def _known(self):
        return dict(zip(self.k, self.rho))

    def refined(self) -> "ResponseTable":
        return ResponseTable.build(self.cfg, self.k_max, 2 * (len(self.k) - 1),
                                   self.quad, _known=self._known(), _err=self.err_est)

    def extended(self, k_max: float) -> "ResponseTable":
        """Same spacing, grid extended to cover ``k_max``."""
        h = self.k[1] - self.k[0]
        n = math.ceil(k_max / h - 1e-9)
        return ResponseTable.build(self.cfg, n * h, n, self.quad,
                                   _known=self._known(), _err=self.err_est)

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        if np.any(k > self.k_max * (1 + 1e-12)):
            raise ValueError("k beyond response table coverage")
        return self._spline(k)


@dataclass(frozen=True)
class CorrectionReport:
    """Roughness correction for one spectrum and cavity.

    Attributes
    ----------
    delta_E_reduced : float
        ``dE/(hbar c A)`` in nm^-3.
    delta_relative : float
        ``Delta = dE/E_PP``.
    pfa_delta_relative : float
        The proximity-force value ``(E''/2) <h^2> / E_PP``.
    ratio_to_pfa : float
        ``Delta / Delta_PFA``.
    variance : float
        Height variance in nm^2.
    err_est : float
        Relative change of ``dE`` under the last grid refinement.
    """

    delta_E_reduced: float
    delta_relative: float
    pfa_delta_relative: float
    ratio_to_pfa: float
    variance: float
    err_est: float = 0.0


def _check_perturbative(s, cfg: CavityConfig, variance: float):
    a = math.sqrt(variance)
    if a > PERTURBATIVE_RATIO * cfg.L:
        warnings.warn(f"rms roughness {a:.3g} nm is not small compared with L = {cfg.L} nm",
                      PerturbativeWarning, stacklevel=3)


def _weighted_integral(s, table: ResponseTable) -> float:
    """``(1/2pi) int k sigma(k) rho(k) dk`` on panels split at both grids."""
    k, w = _k_rule(tuple(s.breakpoints) + table.k, s.k_max)
    return float(np.sum(w * k * s(k) * table(k))) / (2 * math.pi)


def energy_correction(s, cfg: CavityConfig, quad: QuadratureSpec | None = None,
                      rel_tol: float = 1e-5, table: ResponseTable | None = None,
                      max_refinements: int = 4) -> CorrectionReport:
    """Roughness correction ``dE = (1/2pi) int k G(k) sigma(k) dk``.

    ``rho(k)`` is tabulated on a uniform grid over the spectrum support and
    the grid is refined until ``dE`` changes by less than ``rel_tol``. Passing
    ``table`` reuses existing samples (extended if the spectrum reaches
    further); with a fixed table ``dE`` is exactly linear in ``sigma``.
    """
    if cfg.is_transparent:
        raise ValueError("no Casimir energy for transparent mirrors")
    variance = spectrum_variance(s)
    _check_perturbative(s, cfg, variance)
    E = casimir_energy_pp(cfg)
    G0 = response_G0(cfg)
    err = 0.0
    if table is not None:
        if table.cfg != cfg:
            raise ValueError("response table was built for another cavity")
        if table.k_max < s.k_max:
            table = table.extended(s.k_max)
        integral = _weighted_integral(s, table)
    else:
        k_probe, w_probe = _k_rule(s.breakpoints, s.k_max)
        peak = float(k_probe[np.argmax(k_probe * s(k_probe))])
        table = ResponseTable.build(cfg, s.k_max, 8, quad, probe_k=peak)
        integral = _weighted_integral(s, table)
        err = math.inf
        for _ in range(max_refinements):
            table = table.refined()
            new = _weighted_integral(s, table)
            err = abs(new - integral) / abs(new)
            integral = new
            if err <= rel_tol:
                break
        else:
            warnings.warn(f"roughness correction reached relative change {err:.2e} "
                          f"> rel_tol {rel_tol:.1e}", RuntimeWarning, stacklevel=2)
    dE = G0 * integral
    pfa = G0 * variance / E
    delta = dE / E
    return CorrectionReport(dE, delta, pfa, delta / pfa, variance, max(err, table.err_est))


def pfa_correction(s, cfg: CavityConfig) -> float:
    """Proximity-force relative correction ``(E''/2) <h^2> / E_PP``."""
    return casimir_energy_curvature(cfg) / 2 * spectrum_variance(s) / casimir_energy_pp(cfg)


@dataclass(frozen=True)
class PlaneSphereResult:
    """Plane-sphere force per ``hbar c`` (nm^-2) and its relative roughness correction."""

    F_PS_reduced: float
    delta_relative: float | None


def plane_sphere(R: float, cfg: CavityConfig, s=None, quad: QuadratureSpec | None = None,
                 report: CorrectionReport | None = None) -> PlaneSphereResult:
    """Proximity-force plane-sphere force ``F_PS = 2 pi R E_PP/A``.

    The relative roughness correction equals the plane-plane ``Delta``.
    Warns when ``L >= R/10`` or ``ell_C^2 >= R L/10``.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    if cfg.L >= R / 10:
        warnings.warn(f"L = {cfg.L} nm is not small compared with R = {R} nm",
                      ValidityWarning, stacklevel=2)
    ell = getattr(s, "ell_C", None)
    if ell is not None and ell ** 2 >= R * cfg.L / 10:
        warnings.warn(f"ell_C^2 = {ell ** 2:g} nm^2 is not small compared with R L",
                      ValidityWarning, stacklevel=2)
    F = 2 * math.pi * R * casimir_energy_pp(cfg)
    delta = None
    if report is None and s is not None:
        report = energy_correction(s, cfg, quad)
    if report is not None:
        delta = report.delta_relative
    return PlaneSphereResult(F, delta)


def perfect_gaussian_asymptote(s: GaussianSpectrum, L: float) -> float:
    """``Delta/a^2 = 2 sqrt(pi)/(ell_C L)`` (nm^-2) for ``lambda_p << ell_C << L``."""
    return 2 * math.sqrt(math.pi) / (s.ell_C * L)


def effective_correlation_length(s) -> float:
    """``2 pi / k_half`` with ``sigma(k_half) = sigma(0)/2`` (nm)."""
    k, _ = _k_rule(s.breakpoints, s.k_max, 64)
    k = np.concatenate([[0.0], k])
    vals = s(k)
    half = vals[0] / 2
    below = np.nonzero(vals <= half)[0]
    if vals[0] <= 0 or below.size == 0:
        return math.inf
    j = below[0]
    k0, k1, v0, v1 = k[j - 1], k[j], vals[j - 1], vals[j]
    kh = k0 + (half - v0) * (k1 - k0) / (v1 - v0) if v1 != v0 else k1
    return 2 * math.pi / kh


__all__ = [
    "GaussianSpectrum", "TabulatedSpectrum", "SumSpectrum", "Spectrum", "CSV_HEADER",
    "SpectrumFileError", "PerturbativeWarning", "ValidityWarning", "parse_spectrum_csv",
    "spectrum_eval", "spectrum_variance", "ResponseTable", "CorrectionReport",
    "energy_correction", "pfa_correction", "PlaneSphereResult", "plane_sphere",
    "perfect_gaussian_asymptote", "effective_correlation_length",
]
