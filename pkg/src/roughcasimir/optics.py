"""Plasma-model mirrors at imaginary frequency and the ideal plane-plane cavity.

Internally every quantity is dimensionless: wavevectors are multiplied by
the mirror separation ``L`` (``q = kL``), frequencies are written as
``Omega = xi L / c`` and decay constants as ``gamma = kappa L``. Extensive
results are reported per unit ``hbar c A`` in powers of nm.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .quadrature import DEFAULT_BREAKS, GAMMA_MAX, QuadratureError, panel_rule

PERFECT = 0.0
TRANSPARENT = math.inf


class Polarization(enum.IntEnum):
    """Matrix index order used by every 2x2 polarization matrix."""

    TE = 0
    TM = 1


@dataclass(frozen=True)
class CavityConfig:
    """Two identical plasma-model mirrors a distance ``L`` apart.

    ``lambda_p = 0`` selects perfect reflectors and ``lambda_p = inf``
    transparent mirrors; both are exact code paths, not tiny/huge numbers.
    """

    L: float
    lambda_p: float

    def __post_init__(self):
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError(f"L must be positive and finite, got {self.L!r}")
        if not self.lambda_p >= 0:
            raise ValueError(f"lambda_p must be >= 0, got {self.lambda_p!r}")

    @classmethod
    def perfect(cls, L: float) -> "CavityConfig":
        return cls(L, PERFECT)

    @property
    def is_perfect(self) -> bool:
        return self.lambda_p == 0

    @property
    def is_transparent(self) -> bool:
        return math.isinf(self.lambda_p)

    @property
    def k_p(self) -> float:
        """Plasma wavenumber 2 pi / lambda_p in nm^-1."""
        if self.is_perfect:
            return math.inf
        return 2 * math.pi / self.lambda_p

    @property
    def K_p(self) -> float:
        """Dimensionless plasma wavenumber 2 pi L / lambda_p."""
        if self.is_perfect:
            return math.inf
        return 2 * math.pi * self.L / self.lambda_p


def dielectric(xi, omega_p):
    """Plasma-model permittivity ``1 + omega_p**2 / xi**2`` on the imaginary axis.

    ``xi`` and ``omega_p`` only need to share units. ``xi = 0`` is the pole of
    the model; callers needing that point must use the analytic limits.
    """
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= 0):
        raise ValueError("dielectric function has a pole at xi = 0")
    out = 1.0 + (omega_p / xi) ** 2
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class WaveState:
    """Kinematics of one in-plane momentum at one imaginary frequency.

    Attributes hold numpy arrays (or floats) so a whole grid of states can be
    evaluated at once. ``q`` is the in-plane momentum magnitude ``|k| L``.
    """

    q: np.ndarray
    Omega: np.ndarray
    K_p: float
    gamma: np.ndarray
    gamma_t: np.ndarray
    beta: np.ndarray
    beta_t: np.ndarray


def wave_kinematics(q, Omega, K_p: float) -> WaveState:
    """Decay constants and in-plane fractions for ``(q, Omega)``.

    ``gamma = sqrt(q^2 + Omega^2)``, ``gamma_t = sqrt(gamma^2 + K_p^2)``,
    ``beta = q / gamma`` and ``beta_t = q / gamma_t``. At ``q = Omega = 0`` the
    direction is undefined and ``beta`` is returned as 0. For perfect mirrors
    (``K_p = inf``) ``gamma_t`` is infinite and ``beta_t`` is 0.
    """
    q = np.asarray(q, dtype=float)
    Omega = np.asarray(Omega, dtype=float)
    if np.any(q < 0) or np.any(Omega < 0):
        raise ValueError("q and Omega must be non-negative")
    gamma = np.hypot(q, Omega)
    safe = np.where(gamma > 0, gamma, 1.0)
    beta = np.where(gamma > 0, q / safe, 0.0)
    if np.ndim(K_p) == 0 and math.isinf(K_p):
        gamma_t = np.full_like(gamma, math.inf)
        beta_t = np.zeros_like(gamma)
    else:
        gamma_t = np.hypot(gamma, K_p)
        beta_t = np.where(gamma_t > 0, q / np.where(gamma_t > 0, gamma_t, 1.0), 0.0)
    return WaveState(q, Omega, K_p, gamma, gamma_t, beta, beta_t)


def _reflection(w: WaveState):
    """Return ``(r_TE, r_TM, 1 - r_TE**2, 1 - r_TM**2)`` without cancellation."""
    if np.ndim(w.K_p) == 0 and math.isinf(w.K_p):
        one = np.ones_like(w.gamma)
        zero = np.zeros_like(w.gamma)
        return -one, one, zero, zero
    K2 = w.K_p ** 2
    g, gt, O2 = w.gamma, w.gamma_t, w.Omega ** 2
    s = g + gt
    # gamma_t - gamma = K^2 / (gamma_t + gamma)
    r_te = -K2 / s ** 2
    one_minus_r2_te = (2 * g / s) * (1 - r_te)
    den = K2 * g + O2 * s
    with np.errstate(invalid="ignore", divide="ignore"):
        r_tm = K2 * (g - O2 / s) / den
        # 1 - r_TM = 2 Omega^2 gamma_t / den
        one_minus_r_tm = 2 * O2 * gt / den
    vacuum = den == 0
    if np.any(vacuum):
        r_tm = np.where(vacuum, 0.0, r_tm)
        one_minus_r_tm = np.where(vacuum, 1.0, one_minus_r_tm)
    one_minus_r2_tm = one_minus_r_tm * (1 + r_tm)
    return r_te, r_tm, one_minus_r2_te, one_minus_r2_tm


def fresnel_specular(w: WaveState) -> tuple[np.ndarray, np.ndarray]:
    """Specular reflection amplitudes ``(r_TE, r_TM)`` of a plasma half-space.

    ``r_TE = -(gamma_t - gamma)/(gamma_t + gamma)`` and
    ``r_TM = (eps gamma - gamma_t)/(eps gamma + gamma_t)`` with
    ``eps = 1 + K_p^2/Omega^2``; at ``Omega = 0`` the analytic limit
    ``r_TM = 1`` is used.
    """
    r_te, r_tm, _, _ = _reflection(w)
    return r_te, r_tm


def loop_functions(w: WaveState) -> tuple[np.ndarray, np.ndarray]:
    """Round-trip loop functions ``(f_TE, f_TM)`` for two identical mirrors.

    ``f = r^2 e^{-2 gamma} / (1 - r^2 e^{-2 gamma})``, with the denominator
    assembled as ``(1 - r^2) - r^2 expm1(-2 gamma)`` to stay accurate where
    ``r -> 1`` and ``gamma -> 0``.
    """
    r_te, r_tm, d_te, d_tm = _reflection(w)
    e = np.exp(-2 * w.gamma)
    em1 = -np.expm1(-2 * w.gamma)
    out = []
    for r, d in ((r_te, d_te), (r_tm, d_tm)):
        r2 = r * r
        denom = d + r2 * em1
        with np.errstate(divide="ignore", invalid="ignore"):
            f = r2 * e / denom
        out.append(f)
    return out[0], out[1]


def loop_function(p: Polarization, w: WaveState):
    """Loop function of a single polarization; see :func:`loop_functions`."""
    return loop_functions(w)[Polarization(p)]


def wedge_rule(n: int, K_p: float, gamma_max: float = GAMMA_MAX):
    """Product rule for ``int_0^gmax dgamma int_0^gamma dOmega F(gamma, Omega)``.

    Written as ``Omega = t gamma``; the Jacobian ``gamma`` is folded into the
    returned weights. For small ``K_p`` the TM reflection switches off at
    ``Omega ~ K_p``, so the ``t`` panels are graded geometrically toward 0.
    """
    g, wg = panel_rule([b for b in DEFAULT_BREAKS if b < gamma_max] + [gamma_max], n)
    t_breaks = [0.0, 0.25, 0.5, 0.75, 1.0]
    if math.isfinite(K_p) and K_p > 0:
        depth = max(0, math.ceil(math.log2(gamma_max / K_p)) + 3)
        t_breaks += [2.0 ** -j for j in range(1, depth + 1)]
    t, wt = panel_rule(t_breaks, n)
    G, T = np.meshgrid(g, t, indexing="ij")
    W = np.outer(wg, wt) * G
    return G, G * T, W


def _energy_integrand(cfg: CavityConfig, G, O):
    if cfg.is_perfect:
        return 2 * np.log(-np.expm1(-2 * G))
    w = wave_kinematics(np.sqrt(np.maximum(G * G - O * O, 0.0)), O, cfg.K_p)
    r_te, r_tm, _, _ = _reflection(w)
    total = np.zeros_like(G)
    e = np.exp(-2 * G)
    for r in (r_te, r_tm):
        total += np.log1p(-r * r * e)
    return total


def _converged(fn, n_gl: int | None, rel_tol: float, max_doublings: int = 3):
    if n_gl is not None:
        return fn(n_gl)
    n = 16
    prev = fn(n)
    err = math.inf
    for _ in range(max_doublings):
        n *= 2
        cur = fn(n)
        err = abs(cur - prev) / max(abs(cur), 1e-300)
        if err <= rel_tol:
            return cur
        prev = cur
    raise QuadratureError("plane-plane quadrature did not converge", err)


def casimir_energy_pp(cfg: CavityConfig, rel_tol: float = 1e-8,
                      n_gl: int | None = None) -> float:
    """Ideal plane-plane Casimir energy per unit ``hbar c A``, in nm^-3.

    ``E = (1/L^3) int dOmega/2pi int d^2q/(2pi)^2 sum_p ln(1 - r_p^2 e^{-2 gamma})``,
    evaluated as ``1/(4 pi^2 L^3) int gamma dgamma int_0^gamma dOmega``.
    Passing ``n_gl`` pins the node count (no convergence loop), which keeps
    the rule fixed across nearby separations.
    """
    if cfg.is_transparent:
        return 0.0

    def evaluate(n):
        G, O, W = wedge_rule(n, cfg.K_p)
        F = _energy_integrand(cfg, G, O) * G
        return float(np.sum(W * F)) / (4 * math.pi ** 2 * cfg.L ** 3)

    return _converged(evaluate, n_gl, rel_tol)


def casimir_energy_curvature(cfg: CavityConfig, rel_tol: float = 1e-8,
                             n_gl: int | None = None) -> float:
    """Second derivative ``E''_PP/(hbar c A)`` in nm^-5.

    Differentiating under the integral (only ``e^{-2 kappa L}`` depends on
    ``L``) gives ``d^2/dL^2 ln(1 - r^2 e^{-2 kappa L}) = -4 kappa^2 f (1 + f)``.
    """
    if cfg.is_transparent:
        return 0.0

    def evaluate(n):
        G, O, W = wedge_rule(n, cfg.K_p)
        w = wave_kinematics(np.sqrt(np.maximum(G * G - O * O, 0.0)), O, cfg.K_p)
        f_te, f_tm = loop_functions(w)
        F = (f_te * (1 + f_te) + f_tm * (1 + f_tm)) * 4 * G ** 3
        return -float(np.sum(W * F)) / (4 * math.pi ** 2 * cfg.L ** 5)

    return _converged(evaluate, n_gl, rel_tol)
