"""Asymptotic regimes of the response function.

Reduced-dimension formulas for the high-``k`` slope ``alpha``, perfect
reflectors and the non-retarded plasmon regime. They double as fast paths
and as independent checks of the full three-dimensional response.
"""
from __future__ import annotations

import enum
import math

import numpy as np

from .kernel import KernelPoint, _perfect_loop
from .optics import (CavityConfig, casimir_energy_curvature, loop_functions,
                     wave_kinematics, wedge_rule)
from .quadrature import DEFAULT_BREAKS, GAMMA_MAX, QuadratureError, panel_rule

PLASMON_SLOPE = 0.4492  # alpha / L for 1/k << L << lambda_p
LONG_DISTANCE_SLOPE = 7 / (15 * math.pi)  # alpha / lambda_p for 1/k << lambda_p << L


class RegimeTag(enum.Enum):
    """Asymptotic regimes, each with its validity condition as value."""

    HighK_general = "1/k << lambda_p, L"
    HighK_shortDistance = "1/k << L << lambda_p"
    HighK_longDistance = "1/k << lambda_p << L"
    PerfectReflector = "lambda_p << 1/k, L"
    PerfectHighK = "lambda_p << 1/k << L"
    Plasmon = "L << lambda_p"
    PlasmonHighK = "1/k << L << lambda_p"

    @property
    def condition(self) -> str:
        return self.value


def _converge(fn, rel_tol: float, n0: int = 16, max_doublings: int = 4) -> float:
    n = n0
    prev = fn(n)
    err = math.inf
    for _ in range(max_doublings):
        n *= 2
        cur = fn(n)
        err = abs(cur - prev) / max(abs(cur), 1e-300)
        if err <= rel_tol:
            return cur
        prev = cur
    raise QuadratureError("asymptotic-regime quadrature did not converge", err)


# --- high-k slope ------------------------------------------------------------

def high_k_integral(K_p: float, rel_tol: float = 1e-9) -> float:
    """The wedge integral multiplying ``1/((2 pi)^2 L^4 G(0))`` in ``alpha``.

    ``int gamma dgamma int_0^gamma dOmega K^2/(2 Omega^2 + K^2)
    [gamma f_TE + N/D gamma f_TM]`` with
    ``N = 2(gamma^2 - Omega^2)^2 - gamma_t^2 (2 gamma^2 - 3 Omega^2)`` and
    ``D = (gamma gamma_t)^2 - (gamma^2 - Omega^2)^2 = gamma^2 (K^2 + 2 Omega^2) - Omega^4``.
    """
    if not (math.isfinite(K_p) and K_p > 0):
        raise ValueError("high-k integral needs a finite plasma wavenumber")

    def evaluate(n):
        G, O, W = wedge_rule(n, K_p)
        w = wave_kinematics(np.sqrt(np.maximum(G * G - O * O, 0.0)), O, K_p)
        f_te, f_tm = loop_functions(w)
        g2, O2, K2 = G * G, O * O, K_p * K_p
        num = 2 * (g2 - O2) ** 2 - w.gamma_t ** 2 * (2 * g2 - 3 * O2)
        den = g2 * (K2 + 2 * O2) - O2 * O2
        assert np.all(den > 0)
        F = K2 / (2 * O2 + K2) * (G * f_te + num / den * G * f_tm) * G
        return float(np.sum(W * F))

    return _converge(evaluate, rel_tol)


def alpha_high_k(cfg: CavityConfig, rel_tol: float = 1e-9) -> float:
    """Slope ``alpha`` (nm) of ``rho(k) = alpha k`` for ``1/k << lambda_p, L``."""
    if cfg.is_perfect or cfg.is_transparent:
        raise ValueError("alpha_high_k needs a finite, nonzero plasma wavelength")
    G0 = casimir_energy_curvature(cfg, rel_tol=min(rel_tol, 1e-8)) / 2
    return high_k_integral(cfg.K_p, rel_tol) / ((2 * math.pi) ** 2 * cfg.L ** 4 * G0)


def alpha_zeroth_order(rel_tol: float = 1e-12) -> float:
    """The ``lambda_p^0`` wedge integral ``int dgamma/(e^{2gamma}-1) int_0^gamma (gamma^2 - 3 Omega^2)``.

    Vanishes because the inner integral does; evaluated numerically as a check.
    """

    def evaluate(n):
        G, O, W = wedge_rule(n, math.inf)
        return float(np.sum(W * _perfect_loop(G) * (G * G - 3 * O * O)))

    return evaluate(32)


def alpha_long_distance(cfg: CavityConfig, numeric: bool = False,
                        rel_tol: float = 1e-12) -> float:
    """Saturated slope ``7 lambda_p/(15 pi)`` for ``1/k << lambda_p << L``.

    With ``numeric=True`` the one-dimensional integral
    ``(60/pi^5) lambda_p int dgamma e^{2gamma}/(gamma (e^{2gamma}-1)^2) (14/15) gamma^5``
    is evaluated by quadrature instead (the inner ``Omega`` polynomial is
    integrated exactly).
    """
    if cfg.is_perfect:
        return 0.0
    if cfg.is_transparent:
        raise ValueError("alpha is undefined for transparent mirrors")
    if not numeric:
        return LONG_DISTANCE_SLOPE * cfg.lambda_p

    def evaluate(n):
        g, w = panel_rule(DEFAULT_BREAKS, n)
        em = np.expm1(-2 * g)
        # e^{2g}/(e^{2g}-1)^2 = e^{-2g}/(1-e^{-2g})^2
        F = np.exp(-2 * g) / em ** 2 * (14 / 15) * g ** 4
        return float(np.sum(w * F))

    return 60 / math.pi ** 5 * cfg.lambda_p * _converge(evaluate, rel_tol)


# --- perfect reflectors ------------------------------------------------------

def _graded(a: float, b: float, n: int):
    offsets = np.asarray(DEFAULT_BREAKS)
    breaks = [a + o for o in offsets if a + o < b] + [b]
    return panel_rule(breaks, n)


def perfect_G(q: float, L: float, rel_tol: float = 1e-10) -> float:
    """Response ``G/(hbar c A)`` (nm^-5) of perfect mirrors at ``q = kL > 0``.

    ``-(1/(4 pi^2 L^5 q)) int dg e^{-2g}/(1-e^{-2g}) int_{|g-q|}^{g+q} dg'
    [(g g')^2 + (g^2 + g'^2 - q^2)^2/4] / (1 - e^{-2g'})``.
    """
    if not q > 0:
        raise ValueError("perfect_G needs q > 0; use -pi^2/(120 L^5) at q = 0")
    if not L > 0:
        raise ValueError("L must be positive")

    def evaluate(n):
        breaks = list(DEFAULT_BREAKS) + ([q] if q < GAMMA_MAX else [])
        g, wg = panel_rule(breaks, n)
        inner = np.empty(g.size)
        for i, gi in enumerate(g):
            lo, hi = abs(gi - q), gi + q
            gp, wp = _graded(lo, hi, n)
            num = (gi * gp) ** 2 + 0.25 * (gi * gi + gp * gp - q * q) ** 2
            inner[i] = np.sum(wp * num / -np.expm1(-2 * gp))
        return float(np.sum(wg * _perfect_loop(g) * inner))

    return -_converge(evaluate, rel_tol, n0=8) / (4 * math.pi ** 2 * L ** 5 * q)


def perfect_G0(L: float) -> float:
    """``G(0)/(hbar c A) = -pi^2/(120 L^5)`` for perfect mirrors."""
    return -math.pi ** 2 / (120 * L ** 5)


def perfect_nonspecular(kp: KernelPoint):
    """Perfect-mirror rough reflection coefficients on the imaginary axis.

    Returns ``(R1, R2_TE, R2_TM)`` for the point ``(k, k') = (kp.w1, kp.w2)``:
    ``R1`` is the 2x2 first-order matrix (index order TE, TM) and ``R2_p``
    the diagonal second-order coefficients, all reduced by ``1/L``
    (``R1``) or ``1/L^2`` (``R2``)::

        R1 = [[2 g' C,          2 Omega S                 ],
              [2 Omega g' S/g,  -2 (q q' + Omega^2 C)/g   ]]
        R2_TE = -2 g g' C^2 - 2 Omega^2 g S^2/g'
        R2_TM = 2 (q q' + Omega^2 C)^2/(g g') + 2 Omega^2 g' S^2/g

    The overall sign of ``R1`` is fixed so that ``R1(k, k) = -2 gamma r_p``
    with ``r_TE = -1``, ``r_TM = +1``; only products of two ``R1`` enter the
    energy.
    """
    w1, w2 = kp.w1, kp.w2
    g1, g2, O = w1.gamma, w2.gamma, w1.Omega
    C, S = kp.angle.C, kp.angle.S
    tm = w1.q * w2.q + O * O * C
    R1 = np.array(np.broadcast_arrays(
        2 * g2 * C, 2 * O * S,
        2 * O * g2 * S / g1, -2 * tm / g1)).reshape((2, 2) + np.shape(np.broadcast(g1, g2, C)))
    R2_te = -2 * g1 * g2 * C ** 2 - 2 * O * O * g1 * S ** 2 / g2
    R2_tm = 2 * tm ** 2 / (g1 * g2) + 2 * O * O * g2 * S ** 2 / g1
    return R1, R2_te, R2_tm


def perfect_b_from_coefficients(kp: KernelPoint):
    """``(b_i, b_ii)`` assembled from :func:`perfect_nonspecular`.

    ``b_i = 1/2 sum f' f'' r_p r_p'' R1_{pp''}(k',k'') R1_{p''p}(k'',k')`` and
    ``b_ii = sum_p f' r_p R2_p(k', k'')`` with ``r = (-1, +1)``.
    """
    r = np.array([-1.0, 1.0])
    f1 = _perfect_loop(kp.w1.gamma)
    f2 = _perfect_loop(kp.w2.gamma)
    fwd, R2_te, R2_tm = perfect_nonspecular(kp)
    back = perfect_nonspecular(kp.swapped())[0]
    b_i = 0.0
    for p in range(2):
        for pp in range(2):
            b_i = b_i + r[p] * r[pp] * fwd[p, pp] * back[pp, p]
    b_i = 0.5 * f1 * f2 * b_i
    b_ii = f1 * (r[0] * R2_te + r[1] * R2_tm)
    return b_i, b_ii


# --- plasmon (non-retarded) regime ---------------------------------------------

def plasmon_reflection(zeta):
    """Non-retarded TM reflection ``1/(2 zeta^2 + 1)`` with ``zeta = xi/omega_p``."""
    zeta = np.asarray(zeta, dtype=float)
    if np.any(zeta < 0):
        raise ValueError("zeta must be non-negative")
    out = 1.0 / (2 * zeta * zeta + 1)
    return out if out.ndim else float(out)


def plasmon_b(q1, q2, C, zeta):
    """``(b_i, b_ii)`` in the plasmon regime, reduced by ``1/L^2``.

    ``q1 = k'L`` and ``q2 = k''L`` are the leg magnitudes (``kappa -> k``) and
    ``C`` the cosine between them.
    """
    q1, q2, C = (np.asarray(x, dtype=float) for x in (q1, q2, C))
    r = np.asarray(plasmon_reflection(zeta))
    e1, e2 = np.exp(-2 * q1), np.exp(-2 * q2)
    d1, d2 = 1 - r * r * e1, 1 - r * r * e2
    b_i = (q1 * q2 * r ** 4 * e1 * e2 / (2 * d1 * d2)
           * ((C + 1) ** 2 + 2 * r * (1 - C * C) + r * r * (1 - C) ** 2))
    b_ii = (2 * q1 ** 2 * r * r * e1 / d1
            + q1 * q2 * r ** 3 * e1 / d1 * (r * (1 - C) ** 2 + 1 - C * C))
    return b_i, b_ii


def _plasmon_rule(n: int):
    """Product rule on ``(zeta, gamma) in [0, inf) x [0, gamma_max]``.

    ``zeta = tan(theta)`` turns the algebraic ``zeta^-4`` tail into a
    smooth finite interval.
    """
    th, wt = panel_rule(np.linspace(0, math.pi / 2, 9), n)
    zeta = np.tan(th)
    wz = wt / np.cos(th) ** 2
    g, wg = panel_rule(DEFAULT_BREAKS, n)
    Z, Gm = np.meshgrid(zeta, g, indexing="ij")
    return Z, Gm, np.outer(wz, wg)


def _plasmon_integrals(rel_tol: float):
    """``(I_G, I_E, I_h)`` of the plasmon regime (dimensionless)."""

    def make(kind):
        def evaluate(n):
            Z, Gm, W = _plasmon_rule(n)
            s2 = (2 * Z * Z + 1) ** 2
            x = np.exp(-2 * Gm) / s2  # r^2 e^{-2 gamma}
            if kind == "G":
                # gamma^3 s^2 e^{2g}/(s^2 e^{2g}-1)^2 = gamma^3 x/(1-x)^2
                F = Gm ** 3 * x / (1 - x) ** 2
            elif kind == "E":
                F = Gm ** 2 * x / (1 - x)
            else:
                F = Gm ** 2 * (2 * Z * Z + 4) / s2 * x / (1 - x)
            return float(np.sum(W * F))
        return _converge(evaluate, rel_tol)

    return make("G"), make("E"), make("h")


def plasmon_G0_and_energy(cfg: CavityConfig, rel_tol: float = 1e-10):
    """``(G0, E_vk)`` per ``hbar c A`` in the plasmon regime ``L << lambda_p``.

    ``G0 = -(K_p/(2 pi^2 L^5)) int dzeta int dgamma gamma^3 s^2 e^{2gamma}/(s^2 e^{2gamma}-1)^2``
    and ``E_vk = -(K_p/(4 pi^2 L^3)) int dzeta int dgamma gamma^2/(s^2 e^{2gamma}-1)``
    with ``s = 2 zeta^2 + 1``. Since ``E_vk`` scales as ``1/L^2``,
    ``G0 = E_vk''/2 = 3 E_vk/L^2``.
    """
    if cfg.is_perfect or cfg.is_transparent:
        raise ValueError("plasmon regime needs a finite, nonzero plasma wavelength")
    I_G, I_E, _ = _plasmon_integrals(rel_tol)
    K = cfg.K_p
    return (-K / (2 * math.pi ** 2 * cfg.L ** 5) * I_G,
            -K / (4 * math.pi ** 2 * cfg.L ** 3) * I_E)


def plasmon_G_high_k(k: float, cfg: CavityConfig, rel_tol: float = 1e-10) -> float:
    """Plasmon-regime ``G/(hbar c A)`` for ``1/k << L``, linear in ``k``.

    ``-(K_p/(8 pi^2 L^4)) k int dzeta int dgamma gamma^2 (2 zeta^2 + 4)/(s^2 (s^2 e^{2gamma}-1))``.
    """
    if cfg.is_perfect or cfg.is_transparent:
        raise ValueError("plasmon regime needs a finite, nonzero plasma wavelength")
    _, _, I_h = _plasmon_integrals(rel_tol)
    return -cfg.K_p / (8 * math.pi ** 2 * cfg.L ** 4) * k * I_h


def plasmon_alpha(cfg: CavityConfig, rel_tol: float = 1e-10) -> float:
    """Slope ``G_high_k(k)/(k G0)`` in nm; tends to ``0.4492 L``."""
    G0, _ = plasmon_G0_and_energy(cfg, rel_tol)
    return plasmon_G_high_k(1.0, cfg, rel_tol) / G0


__all__ = [
    "RegimeTag", "PLASMON_SLOPE", "LONG_DISTANCE_SLOPE", "high_k_integral",
    "alpha_high_k", "alpha_zeroth_order", "alpha_long_distance", "perfect_G",
    "perfect_G0", "perfect_nonspecular", "perfect_b_from_coefficients",
    "plasmon_reflection", "plasmon_b", "plasmon_G0_and_energy",
    "plasmon_G_high_k", "plasmon_alpha",
]
