"""Fixed-node quadrature rules shared by the energy and response integrals.

All rules here are deterministic: a given node count always produces the
same nodes, weights and summation order, so results are reproducible
bit-for-bit across runs.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

GAMMA_MAX = 18.0

# Panel breakpoints for integrands decaying like exp(-2 gamma); dense near
# the origin where loop functions behave like 1/(2 gamma).
DEFAULT_BREAKS = (0.0, 1 / 64, 1 / 32, 1 / 16, 0.125, 0.25, 0.5, 1.0, 2.0,
                  3.0, 4.5, 6.5, 9.0, 12.5, 18.0)


class QuadratureError(RuntimeError):
    """Raised when a quadrature fails to reach its tolerance within budget."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved relative error {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings for the three-dimensional response quadrature.

    Attributes
    ----------
    rel_tol : float
        Target relative error, checked by node doubling.
    gamma_max : float
        Hard truncation of every dimensionless decay variable.
    n_phi : int
        Even number of trapezoid nodes on the periodic angular domain.
    n_gl : int
        Gauss-Legendre nodes per radial/frequency panel.
    max_doublings : int
        Node-doubling budget before giving up.
    scheme : str
        Identifier of the panel layout, recorded in output metadata.
    """

    rel_tol: float = 1e-6
    gamma_max: float = GAMMA_MAX
    n_phi: int = 64
    n_gl: int = 8
    max_doublings: int = 3
    scheme: str = "gl-panels/trapezoid-v1"

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.gamma_max < 10:
            raise ValueError("gamma_max must be at least 10")
        if self.n_phi < 4 or self.n_phi % 2:
            raise ValueError("n_phi must be an even integer >= 4")
        if self.n_gl < 2:
            raise ValueError("n_gl must be >= 2")

    def doubled(self) -> "QuadratureSpec":
        return replace(self, n_phi=2 * self.n_phi, n_gl=2 * self.n_gl)


@lru_cache(maxsize=64)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def panel_rule(breaks, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule over consecutive breakpoints.

    Zero-width panels are dropped, so callers may pass unsorted or
    duplicated breakpoints.
    """
    edges = np.unique(np.asarray(breaks, dtype=float))
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0:
            continue
        x, w = gauss_legendre(a, b, n)
        xs.append(x)
        ws.append(w)
    if not xs:
        return np.empty(0), np.empty(0)
    return np.concatenate(xs), np.concatenate(ws)


def semi_infinite_rule(n: int, lower: float = 0.0, upper: float = GAMMA_MAX,
                       extra=()) -> tuple[np.ndarray, np.ndarray]:
    """Panel rule on ``[lower, upper]`` with breakpoints graded towards ``lower``.

    ``extra`` adds breakpoints (e.g. at a known near-singular point).
    """
    offsets = np.asarray(DEFAULT_BREAKS)
    offsets = offsets[offsets < upper - lower]
    breaks = list(lower + offsets) + [upper]
    breaks += [e for e in extra if lower < e < upper]
    return panel_rule(breaks, n)


def periodic_half_trapezoid(n_phi: int) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid rule for an even periodic integrand over ``[0, 2 pi)``.

    Only the ``n_phi // 2 + 1`` nodes on ``[0, pi]`` are returned; the weights
    already account for the mirror half, so the result equals the full
    ``n_phi``-point periodic trapezoid sum.
    """
    m = n_phi // 2
    phi = np.pi * np.arange(m + 1) / m
    w = np.full(m + 1, 2.0 * np.pi / n_phi)
    w[1:-1] *= 2.0
    return phi, w


def pairwise_sum(values: np.ndarray) -> float:
    """Deterministic sum of a flattened array.

    numpy's reduction over a contiguous 1-D array uses blocked pairwise
    summation with a fixed block size, so the result depends only on the
    values and their order.
    """
    return float(np.ascontiguousarray(values, dtype=float).ravel().sum())
