"""Second-order roughness kernels for plasma-model mirrors.

A kernel point consists of two in-plane momenta (the incoming leg and the
diffracted leg) at one shared imaginary frequency. Two independent
formulations of the kernels ``b_i`` (two first-order rough reflections) and
``b_ii`` (one second-order rough reflection) are provided:

* the explicit closed forms summed over the ``mu_+/-`` factors, and
* a matrix path that builds the 2x2 polarization matrices ``Lambda`` and
  contracts them with the loop functions.

Transmission coefficients never appear: in every closed loop the dressing
``t^{p'}/t^{p}`` of one rough reflection is undone by the next.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .optics import CavityConfig, WaveState, loop_functions, wave_kinematics


@dataclass(frozen=True)
class AngularPair:
    """Cosine and sine of the angle from the first leg to the second.

    ``S`` carries the orientation sign (``S(k', k'') = -S(k'', k')``). The
    closed-form kernels only use ``S**2``; the matrix path needs the sign.
    """

    C: np.ndarray
    S: np.ndarray

    @classmethod
    def from_cos(cls, C, sign=1.0) -> "AngularPair":
        C = np.clip(np.asarray(C, dtype=float), -1.0, 1.0)
        return cls(C, sign * np.sqrt(1.0 - C * C))

    @classmethod
    def from_vectors(cls, a, b) -> "AngularPair":
        """Angle between 2-vectors ``a`` and ``b`` (last axis has length 2)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        na = np.hypot(a[..., 0], a[..., 1])
        nb = np.hypot(b[..., 0], b[..., 1])
        norm = na * nb
        ok = norm > 0
        safe = np.where(ok, norm, 1.0)
        C = np.where(ok, (a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1]) / safe, 1.0)
        cross = np.where(ok, (a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]) / safe, 0.0)
        C = np.clip(C, -1.0, 1.0)
        return cls(C, np.copysign(np.sqrt(1.0 - C * C), cross))

    def reversed(self) -> "AngularPair":
        return AngularPair(self.C, -self.S)


@dataclass(frozen=True)
class KernelPoint:
    """Two legs ``w1`` (momentum ``k'``) and ``w2`` (``k''``) at one frequency."""

    w1: WaveState
    w2: WaveState
    angle: AngularPair

    @classmethod
    def build(cls, q1, q2, C, Omega, K_p: float, sign=1.0) -> "KernelPoint":
        """Kernel point from magnitudes ``q1 = k'L``, ``q2 = k''L`` and cosine ``C``."""
        w1 = wave_kinematics(q1, Omega, K_p)
        w2 = wave_kinematics(q2, Omega, K_p)
        return cls(w1, w2, AngularPair.from_cos(C, sign))

    @classmethod
    def from_vectors(cls, k1, k2, Omega, K_p: float) -> "KernelPoint":
        """Kernel point from dimensionless 2-vectors ``k1 = k'L``, ``k2 = k''L``."""
        k1 = np.asarray(k1, dtype=float)
        k2 = np.asarray(k2, dtype=float)
        w1 = wave_kinematics(np.hypot(k1[..., 0], k1[..., 1]), Omega, K_p)
        w2 = wave_kinematics(np.hypot(k2[..., 0], k2[..., 1]), Omega, K_p)
        return cls(w1, w2, AngularPair.from_vectors(k1, k2))

    def swapped(self) -> "KernelPoint":
        return KernelPoint(self.w2, self.w1, self.angle.reversed())


def _check_plasma(cfg: CavityConfig):
    if cfg.is_perfect:
        raise ValueError("plasma kernels are undefined for perfect mirrors; "
                         "use the perfect-reflector kernel")


def mu_pm(w: WaveState):
    """``mu_+/- = (gamma +/- gamma_t) / (1 +/- beta beta_t)`` (reduced by 1/L)."""
    bb = w.beta * w.beta_t
    mu_plus = (w.gamma + w.gamma_t) / (1 + bb)
    return mu_plus, -_gap(w) / _one_minus_bb(w)


def _gap(w: WaveState):
    """``gamma_t - gamma`` written as ``K_p^2 / (gamma + gamma_t)``."""
    return w.K_p ** 2 / (w.gamma + w.gamma_t)


def _one_minus_bb(w: WaveState):
    """``1 - beta beta_t = (gamma (gamma_t - gamma) + Omega^2) / (gamma gamma_t)``."""
    return (w.gamma * _gap(w) + w.Omega ** 2) / (w.gamma * w.gamma_t)


def _mu_sums(w: WaveState):
    """Closed forms of the sums over ``eps = +/-`` that enter the kernels.

    ``sum mu_eps = 2 Omega^2 / (gamma (1 - (beta beta_t)^2))`` and
    ``sum eps mu_eps = 2 (Omega^2 + K_p^2) / (gamma_t (1 - (beta beta_t)^2))``;
    the third sum, ``sum mu_eps (1 + eps beta beta_t)``, is just ``2 gamma``.
    Summing analytically avoids the ``gamma_t +/- gamma`` cancellation that
    costs about ``(gamma_t / gamma)^2`` ulps when the sums are done term by term.
    """
    d = _one_minus_bb(w) * (1 + w.beta * w.beta_t)
    m = 2 * w.Omega ** 2 / (w.gamma * d)
    p = 2 * (w.Omega ** 2 + w.K_p ** 2) / (w.gamma_t * d)
    return m, p


def b_first_order(kp: KernelPoint, cfg: CavityConfig):
    """Kernel ``b_i`` from two first-order rough reflections (closed form).

    The double sum over ``eps, eps' = +/-`` of ``mu_eps(k') mu'_eps'(k'')`` times
    the TE-TE, TE-TM, TM-TE and TM-TM channels factorizes into single sums,
    which are evaluated in closed form (see ``_mu_sums``).
    """
    if cfg.is_perfect:
        return perfect_b(kp)[0]
    w1, w2 = kp.w1, kp.w2
    C = kp.angle.C
    S2 = kp.angle.S ** 2
    f1e, f1m = loop_functions(w1)
    f2e, f2m = loop_functions(w2)
    m1, p1 = _mu_sums(w1)
    m2, p2 = _mu_sums(w2)
    g1, g2 = w1.gamma, w2.gamma
    tm1 = C * m1 + w1.beta * w2.beta_t * p1
    tm2 = C * m2 + w2.beta * w1.beta_t * p2
    return 0.5 * (4 * g1 * g2 * C ** 2 * f1e * f2e
                  + 2 * g1 * m2 * S2 * f1e * f2m
                  + 2 * g2 * m1 * S2 * f1m * f2e
                  + tm1 * tm2 * f1m * f2m)


def lambda2_stable(kp: KernelPoint):
    """Diagonal ``(Lambda2_TE, Lambda2_TM)`` with the leading ``2 gamma gamma_t`` cancelled.

    * TE: ``2 g1 (g2 + gt1 - gt2 + S^2 bb2 mu2_-)``
    * TM: ``2 g1 (g2 + gt1 - gt2) + (gt2 - g2)(bt1 - C bt2)(b1 P1 + C b2 M1)/(1 - bb2)``

    Equal to :func:`lambda2_diagonal` but free of the ``gamma_t/gamma``
    cancellation of the matrix product.
    """
    w1, w2 = kp.w1, kp.w2
    C = kp.angle.C
    S2 = kp.angle.S ** 2
    m1, p1 = _mu_sums(w1)
    g1, g2 = w1.gamma, w2.gamma
    bb2 = w2.beta * w2.beta_t
    gap2 = _gap(w2)
    mu2_minus = -gap2 / _one_minus_bb(w2)
    # gamma_t1 - gamma_t2 at equal frequency
    dgt = (w1.q ** 2 - w2.q ** 2) / (w1.gamma_t + w2.gamma_t)
    base = g2 + dgt
    te = 2 * g1 * (base + S2 * bb2 * mu2_minus)
    tm = (2 * g1 * base
          + gap2 * (w1.beta_t - C * w2.beta_t) * (w1.beta * p1 + C * w2.beta * m1)
          / _one_minus_bb(w2))
    return te, tm


def b_second_order(kp: KernelPoint, cfg: CavityConfig):
    """Kernel ``b_ii`` from one second-order rough reflection (closed form).

    ``2 gamma_t gamma (f_TE + f_TM) + sum_eps mu_eps mu'_- [...]`` regrouped so
    that the leading ``2 gamma gamma_t`` cancels analytically; see
    :func:`lambda2_stable`.
    """
    if cfg.is_perfect:
        return perfect_b(kp)[1]
    f1e, f1m = loop_functions(kp.w1)
    te, tm = lambda2_stable(kp)
    return f1e * te + f1m * tm


def b_second_order_termwise(kp: KernelPoint, cfg: CavityConfig):
    """``b_ii`` with the ``eps`` sum written out term by term.

    Algebraically identical to :func:`b_second_order` but loses about
    ``(gamma_t/gamma)^2`` ulps; kept as a transcription check.
    """
    _check_plasma(cfg)
    w1, w2 = kp.w1, kp.w2
    C = kp.angle.C
    S2 = kp.angle.S ** 2
    f1e, f1m = loop_functions(w1)
    mu1 = dict(zip((1, -1), mu_pm(w1)))
    mu2_minus = mu_pm(w2)[1]
    bb1 = w1.beta * w1.beta_t
    bb2 = w2.beta * w2.beta_t
    total = 2 * w1.gamma_t * w1.gamma * (f1e + f1m)
    for e1 in (1, -1):
        bracket = (f1e * (1 - C ** 2 * bb2) * (1 + e1 * bb1)
                   + f1m * S2 * (1 - bb2)
                   + f1m * (C + e1 * w1.beta * w2.beta_t) * (C - w2.beta * w1.beta_t))
        total = total + mu1[e1] * mu2_minus * bracket
    return total


def b_first_order_termwise(kp: KernelPoint, cfg: CavityConfig):
    """``b_i`` with the double ``eps`` sum written out term by term."""
    _check_plasma(cfg)
    w1, w2 = kp.w1, kp.w2
    C = kp.angle.C
    S2 = kp.angle.S ** 2
    f1e, f1m = loop_functions(w1)
    f2e, f2m = loop_functions(w2)
    mu1 = dict(zip((1, -1), mu_pm(w1)))
    mu2 = dict(zip((1, -1), mu_pm(w2)))
    bb1 = w1.beta * w1.beta_t
    bb2 = w2.beta * w2.beta_t
    total = 0.0
    for e1 in (1, -1):
        for e2 in (1, -1):
            bracket = (f1e * f2e * C ** 2 * (1 + e1 * bb1) * (1 + e2 * bb2)
                       + f1e * f2m * S2 * (1 + e1 * bb1)
                       + f1m * f2e * S2 * (1 + e2 * bb2)
                       + f1m * f2m * (C + e1 * w1.beta * w2.beta_t)
                       * (C + e2 * w2.beta * w1.beta_t))
            total = total + mu1[e1] * mu2[e2] * bracket
    return 0.5 * total


def b_total(kp: KernelPoint, cfg: CavityConfig):
    return b_first_order(kp, cfg) + b_second_order(kp, cfg)


def b_hat(kp: KernelPoint, cfg: CavityConfig):
    """Kernel symmetrized over the two legs, ``(b(k',k'') + b(k'',k'))/2``."""
    return 0.5 * (b_total(kp, cfg) + b_total(kp.swapped(), cfg))


# --- matrix path -----------------------------------------------------------

def _bt_entry(w: WaveState):
    """TM entry ``c kappa_t / (sqrt(eps) xi)`` of ``B_t``, i.e. ``gamma_t / sqrt(Omega^2 + K_p^2)``.

    Written this way the Omega -> 0 limit is regular for ``K_p > 0``.
    """
    return w.gamma_t / np.hypot(w.Omega, w.K_p)


def lambda1_matrices(w1: WaveState, w2: WaveState, angle: AngularPair):
    """``(Lambda_-, Lambda_+, Lambda1 = Lambda_- - Lambda_+)`` for scattering ``w2 -> w1``.

    Each is returned as an array of shape ``(2, 2) + broadcast shape`` indexed
    ``[p, p']`` with TE = 0 and TM = 1.
    """
    C, S = angle.C, angle.S
    bt1 = _bt_entry(w1)
    bt2 = _bt_entry(w2)
    bb1 = w1.beta * w1.beta_t
    out = []
    for sgn in (-1, 1):
        pref = w1.gamma_t + sgn * w1.gamma
        den = 1 + sgn * bb1
        m = np.array(np.broadcast_arrays(
            pref * C,
            pref * S * bt2,
            -pref * S / den / bt1,
            pref * (C + sgn * w1.beta * w2.beta_t) / den * bt2 / bt1,
        ))
        out.append(m.reshape((2, 2) + m.shape[1:]))
    lam_minus, lam_plus = out
    return lam_minus, lam_plus, lam_minus - lam_plus


def _matmul(a, b):
    return np.einsum("ij...,jk...->ik...", a, b)


def lambda2_diagonal(w1: WaveState, w2: WaveState, angle: AngularPair):
    """Diagonal ``(Lambda2_TE, Lambda2_TM)`` of the second-order matrix.

    ``Lambda2 = 2 gamma gamma_t I + Lambda1(k', k'') Lambda_-(k'', k')``: the
    scattering goes out to the second leg and comes back, so the second
    factor is evaluated with the legs exchanged.
    """
    _, _, lam1 = lambda1_matrices(w1, w2, angle)
    lam_minus_back, _, _ = lambda1_matrices(w2, w1, angle.reversed())
    prod = _matmul(lam1, lam_minus_back)
    base = 2 * w1.gamma * w1.gamma_t
    return base + prod[0, 0], base + prod[1, 1]


def b_matrix_path(kp: KernelPoint, cfg: CavityConfig):
    """``(b_i, b_ii)`` assembled from the Lambda matrices and loop functions.

    ``b_i = 1/2 sum_{p p''} f_p(k') f_p''(k'') Lambda1_{p p''}(k', k'') Lambda1_{p'' p}(k'', k')``
    and ``b_ii = sum_p f_p(k') Lambda2_p(k', k'')``.
    """
    _check_plasma(cfg)
    w1, w2 = kp.w1, kp.w2
    f1 = np.array(np.broadcast_arrays(*loop_functions(w1)))
    f2 = np.array(np.broadcast_arrays(*loop_functions(w2)))
    _, _, fwd = lambda1_matrices(w1, w2, kp.angle)
    _, _, back = lambda1_matrices(w2, w1, kp.angle.reversed())
    b_i = 0.0
    for p in range(2):
        for pp in range(2):
            b_i = b_i + f1[p] * f2[pp] * fwd[p, pp] * back[pp, p]
    lam2_te, lam2_tm = lambda2_diagonal(w1, w2, kp.angle)
    b_ii = f1[0] * lam2_te + f1[1] * lam2_tm
    return 0.5 * b_i, b_ii


def dressed_first_order(w: WaveState, angle: AngularPair | None = None):
    """First-order coefficient ``R1_{pp'}(k, k) = r_p Lambda1_{pp'}(k, k)`` at zero transfer.

    At the specular point the transmission dressing is ``t^{p'}/t^{p} = 1`` on
    the diagonal and the off-diagonal entries vanish with ``S``.
    """
    from .optics import fresnel_specular

    angle = angle or AngularPair.from_cos(np.ones_like(w.gamma))
    r_te, r_tm = fresnel_specular(w)
    _, _, lam1 = lambda1_matrices(w, w, angle)
    r = np.array(np.broadcast_arrays(r_te, r_tm))
    return r[:, None] * lam1


def dressed_second_order(w: WaveState):
    """Second-order diagonal ``R2_p(k, k) = r_p Lambda2_p(k, k)``."""
    from .optics import fresnel_specular

    r_te, r_tm = fresnel_specular(w)
    lam_te, lam_tm = lambda2_stable(KernelPoint(w, w, AngularPair.from_cos(np.ones_like(w.gamma))))
    return r_te * lam_te, r_tm * lam_tm


# --- perfect reflectors ----------------------------------------------------

def perfect_b(kp: KernelPoint):
    """``(b_i, b_ii)`` for perfect mirrors (``r_TE = -1``, ``r_TM = +1``).

    Both share the polarization sum ``X``; with ``f`` the common loop function
    ``b_i = f' f'' X`` and ``b_ii = f' X``.
    """
    w1, w2 = kp.w1, kp.w2
    g1, g2, O2 = w1.gamma, w2.gamma, w1.Omega ** 2
    C, S2 = kp.angle.C, kp.angle.S ** 2
    X = 2 * (g1 * g2 * C ** 2
             + (w1.q * w2.q + O2 * C) ** 2 / (g1 * g2)
             + O2 * S2 * (g1 / g2 + g2 / g1))
    f1 = _perfect_loop(g1)
    f2 = _perfect_loop(g2)
    return f1 * f2 * X, f1 * X


def _perfect_loop(gamma):
    with np.errstate(divide="ignore"):
        return 1.0 / np.expm1(2 * gamma)


def leading_inverse_lambda_p(kp: KernelPoint, cfg: CavityConfig):
    """The ``1/lambda_p`` part of ``b_ii`` near the perfect limit.

    ``4 pi f_pr(k') (k' . (k' - k'')) / (kappa' lambda_p)``, reduced by ``1/L^2``;
    with ``4 pi L / lambda_p = 2 K_p`` it reads ``2 K_p f q1 (q1 - q2 C) / gamma1``.
    """
    w1, w2 = kp.w1, kp.w2
    f = _perfect_loop(w1.gamma)
    dot = w1.q * (w1.q - w2.q * kp.angle.C)
    return 2 * cfg.K_p * f * dot / w1.gamma


def symmetric_weight(gamma1, gamma2):
    """Partition-of-unity weight ``g2^4 / (g1^4 + g2^4)``.

    ``W(g1, g2) + W(g2, g1) = 1`` and ``W`` vanishes like ``g2^4`` where the
    second leg's loop function blows up.
    """
    a = gamma1 ** 4
    b = gamma2 ** 4
    return b / (a + b)


__all__ = [
    "AngularPair", "KernelPoint", "mu_pm", "b_first_order", "b_second_order",
    "b_first_order_termwise", "b_second_order_termwise", "b_total", "b_hat",
    "lambda1_matrices", "lambda2_diagonal", "lambda2_stable", "b_matrix_path",
    "dressed_first_order", "dressed_second_order", "perfect_b",
    "leading_inverse_lambda_p", "symmetric_weight",
]
