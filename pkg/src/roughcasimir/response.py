"""Roughness response function ``G(k)`` and the sensitivity ``rho(k) = G(k)/G(0)``.

``G(k)/(hbar c A) = -(1/L^5) (1/2pi) int dOmega int y dy/(4 pi^2) int dphi
b_hat(k', k' - k)`` with ``y = k'L``. Nodes are fixed for a given
:class:`QuadratureSpec`: Gauss-Legendre panels in ``Omega`` (outer) and in
the first-leg decay constant ``gamma' in [Omega, gamma_max]`` (middle, using
``y dy = gamma' dgamma'``), and an even periodic trapezoid in ``phi``
(inner).

Rather than evaluating ``b_hat`` at every node, the integrand is
``b_ii(k', k'-k) + 2 W b_i(k', k'-k)`` with ``W = gamma''^4/(gamma'^4 + gamma''^4)``.
The substitution ``k' -> k - k'`` swaps the two legs, so both forms have the
same integral; the weight removes the ``1/gamma''`` peak of the second-leg
loop function where ``k' -> k`` at low frequency.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .kernel import KernelPoint, b_first_order, b_second_order, symmetric_weight
from .optics import CavityConfig, casimir_energy_curvature
from .quadrature import (DEFAULT_BREAKS, QuadratureError, QuadratureSpec,
                         panel_rule, periodic_half_trapezoid, semi_infinite_rule)

THREADS_ENV = "ROUGHCASIMIR_THREADS"


@dataclass(frozen=True)
class ResponseSample:
    """One point of the response curve.

    Attributes
    ----------
    k : float
        Roughness wavenumber in nm^-1.
    G_reduced : float
        ``G/(hbar c A)`` in nm^-5.
    rho : float or None
        ``G(k)/G(0)``; ``None`` until normalized.
    err_est : float
        Relative change of ``G`` under the last node doubling.
    """

    k: float
    G_reduced: float
    rho: float | None
    err_est: float

    def with_rho(self, G0: float) -> "ResponseSample":
        return ResponseSample(self.k, self.G_reduced, self.G_reduced / G0, self.err_est)


def _omega_breaks(K_p: float, gamma_max: float) -> list[float]:
    breaks = [b for b in DEFAULT_BREAKS if b < gamma_max] + [gamma_max]
    if math.isfinite(K_p) and K_p > 0:
        # r_TM switches off around Omega ~ K_p
        breaks += [K_p * 2.0 ** j for j in range(-3, 4) if K_p * 2.0 ** j < gamma_max]
    return breaks


def _integrand(kp: KernelPoint, cfg: CavityConfig):
    b_i = b_first_order(kp, cfg)
    b_ii = b_second_order(kp, cfg)
    return b_ii + 2.0 * symmetric_weight(kp.w1.gamma, kp.w2.gamma) * b_i


def _response_fixed(q: float, cfg: CavityConfig, quad: QuadratureSpec) -> float:
    """``G/(hbar c A)`` on the fixed node set of ``quad`` (no convergence check)."""
    K_p = cfg.K_p
    omegas, w_omega = panel_rule(_omega_breaks(K_p, quad.gamma_max), quad.n_gl)
    phi, w_phi = periodic_half_trapezoid(quad.n_phi)
    cphi, sphi = np.cos(phi), np.sin(phi)
    partial = np.empty(omegas.size)
    for i, Omega in enumerate(omegas):
        g1, w_g = semi_infinite_rule(quad.n_gl, Omega, quad.gamma_max,
                                     extra=(math.hypot(q, Omega),))
        y = np.sqrt(np.maximum(g1 * g1 - Omega * Omega, 0.0))[:, None]
        k1 = np.stack([y * cphi, y * sphi], axis=-1)
        k2 = np.stack([y * cphi - q, y * sphi], axis=-1)
        kp = KernelPoint.from_vectors(k1, k2, Omega, K_p)
        F = _integrand(kp, cfg)
        partial[i] = np.sum(((w_g * g1)[:, None] * F * w_phi).ravel())
    total = float(np.sum(w_omega * partial))
    return -total / (cfg.L ** 5 * 2 * math.pi * 4 * math.pi ** 2)


def response_G_fixed(k: float, cfg: CavityConfig, quad: QuadratureSpec | None = None) -> float:
    """``G/(hbar c A)`` on the base node set of ``quad`` without the doubling check.

    Used for dense tables where the quadrature error is probed separately.
    """
    quad = quad or QuadratureSpec()
    k = abs(float(k))
    if cfg.is_transparent:
        return 0.0
    if k == 0:
        return response_G0(cfg)
    return _response_fixed(k * cfg.L, cfg, quad)


def response_G0(cfg: CavityConfig, rel_tol: float = 1e-8) -> float:
    """``G(0)/(hbar c A) = E''_PP/2`` in nm^-5."""
    return casimir_energy_curvature(cfg, rel_tol=rel_tol) / 2


def response_G(k: float, cfg: CavityConfig,
               quad: QuadratureSpec | None = None) -> ResponseSample:
    """Response function at wavenumber ``k`` (nm^-1).

    The node count is doubled until two successive results agree to
    ``quad.rel_tol``; the finer result is returned with that relative
    difference as ``err_est``. ``k = 0`` is routed to :func:`response_G0`.

    Raises
    ------
    QuadratureError
        If ``quad.max_doublings`` doublings do not reach ``quad.rel_tol``.
    """
    quad = quad or QuadratureSpec()
    k = abs(float(k))
    if not math.isfinite(k):
        raise ValueError(f"k must be finite, got {k!r}")
    if cfg.is_transparent:
        return ResponseSample(k, 0.0, None, 0.0)
    if k == 0:
        return ResponseSample(0.0, response_G0(cfg), None, 0.0)
    q = k * cfg.L
    spec = quad
    prev = _response_fixed(q, cfg, spec)
    err = math.inf
    for _ in range(max(1, quad.max_doublings)):
        spec = spec.doubled()
        cur = _response_fixed(q, cfg, spec)
        err = abs(cur - prev) / abs(cur)
        if err <= quad.rel_tol:
            # floor at the rounding level of a ~10^6-term sum
            return ResponseSample(k, cur, None, max(err, 1e-13))
        prev = cur
    raise QuadratureError(f"response G(k={k:g}) did not converge", err)


def rho(k: float, cfg: CavityConfig, quad: QuadratureSpec | None = None) -> float:
    """Sensitivity ``G(k)/G(0)``; exactly 1 at ``k = 0``."""
    if k == 0:
        return 1.0
    return response_G(k, cfg, quad).G_reduced / response_G0(cfg)


def default_workers() -> int:
    """Thread count from the environment (defaults to 1)."""
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def response_curve(k_grid, cfg: CavityConfig, quad: QuadratureSpec | None = None,
                   workers: int | None = None) -> list[ResponseSample]:
    """``ResponseSample`` for every ``k`` in an ascending grid, sharing ``G(0)``.

    Samples are independent and may be computed on several threads; each
    result depends only on its own ``k``, so output is identical for any
    worker count. A decrease of ``rho`` along the grid only triggers a
    warning.
    """
    ks = [float(k) for k in k_grid]
    if any(b < a for a, b in zip(ks, ks[1:])):
        raise ValueError("k_grid must be sorted ascending")
    if cfg.is_transparent:
        return [ResponseSample(k, 0.0, math.nan, 0.0) for k in ks]
    quad = quad or QuadratureSpec()
    G0 = response_G0(cfg)
    workers = workers or default_workers()

    def one(k):
        if k == 0:
            return ResponseSample(0.0, G0, 1.0, 0.0)
        return response_G(k, cfg, quad).with_rho(G0)

    if workers > 1 and len(ks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(one, ks))
    else:
        samples = [one(k) for k in ks]
    rhos = [s.rho for s in samples]
    if any(b < a * (1 - 1e-9) for a, b in zip(rhos, rhos[1:])):
        warnings.warn("rho(k) is not monotone on this grid", RuntimeWarning, stacklevel=2)
    return samples


__all__ = ["ResponseSample", "response_G", "response_G_fixed", "response_G0", "rho",
           "response_curve",
           "default_workers", "THREADS_ENV"]
