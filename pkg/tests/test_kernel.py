import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughcasimir.kernel import (AngularPair, KernelPoint, b_first_order,
                                 b_first_order_termwise, b_hat, b_matrix_path,
                                 b_second_order, b_second_order_termwise, b_total,
                                 dressed_first_order, dressed_second_order,
                                 lambda1_matrices, lambda2_diagonal, lambda2_stable,
                                 leading_inverse_lambda_p, mu_pm, perfect_b)
from roughcasimir.optics import CavityConfig, fresnel_specular, loop_functions, wave_kinematics

mp.mp.dps = 50
CFG = CavityConfig(100.0, 136.0)


def random_points(n, seed, q_hi=5.0, K_lo=0.1, K_hi=20.0):
    rng = np.random.default_rng(seed)
    q1 = rng.uniform(0, q_hi, n)
    q2 = rng.uniform(0, q_hi, n)
    C = rng.uniform(-1, 1, n)
    O = rng.uniform(0.01, 5, n)
    K = rng.uniform(K_lo, K_hi, n)
    sign = rng.choice([-1.0, 1.0], n)
    return q1, q2, C, O, K, sign


# --- independent high-precision transcription ------------------------------------

class MpLeg:
    def __init__(self, q, O, K):
        self.q, self.O, self.K = mp.mpf(q), mp.mpf(O), mp.mpf(K)
        self.g = mp.sqrt(self.q ** 2 + self.O ** 2)
        self.gt = mp.sqrt(self.g ** 2 + self.K ** 2)
        self.b = self.q / self.g
        self.bt = self.q / self.gt
        eps = 1 + self.K ** 2 / self.O ** 2
        self.Bt = self.gt / (mp.sqrt(eps) * self.O)
        r_te = -(self.gt - self.g) / (self.gt + self.g)
        r_tm = (eps * self.g - self.gt) / (eps * self.g + self.gt)
        e = mp.exp(-2 * self.g)
        self.f = [r ** 2 * e / (1 - r ** 2 * e) for r in (r_te, r_tm)]
        self.mu = {s: (self.g + s * self.gt) / (1 + s * self.b * self.bt) for s in (1, -1)}


def mp_lambda(l1, l2, C, S, sgn):
    bb = l1.b * l1.bt
    M = mp.matrix([[C, S], [-S / (1 + sgn * bb), (C + sgn * l1.b * l2.bt) / (1 + sgn * bb)]])
    Binv = mp.diag([1, 1 / l1.Bt])
    B2 = mp.diag([1, l2.Bt])
    return (l1.gt + sgn * l1.g) * Binv * M * B2


def mp_lambda1(l1, l2, C, S):
    return mp_lambda(l1, l2, C, S, -1) - mp_lambda(l1, l2, C, S, 1)


def mp_b_explicit(l1, l2, C, S):
    """Explicit b_i and b_ii with every eps term written out."""
    S2 = S ** 2
    bi = 0
    for e1 in (1, -1):
        for e2 in (1, -1):
            br = (l1.f[0] * l2.f[0] * C ** 2 * (1 + e1 * l1.b * l1.bt) * (1 + e2 * l2.b * l2.bt)
                  + l1.f[0] * l2.f[1] * S2 * (1 + e1 * l1.b * l1.bt)
                  + l1.f[1] * l2.f[0] * S2 * (1 + e2 * l2.b * l2.bt)
                  + l1.f[1] * l2.f[1] * (C + e1 * l1.b * l2.bt) * (C + e2 * l2.b * l1.bt))
            bi += l1.mu[e1] * l2.mu[e2] * br
    bii = 2 * l1.gt * l1.g * (l1.f[0] + l1.f[1])
    for e1 in (1, -1):
        br = (l1.f[0] * (1 - C ** 2 * l2.b * l2.bt) * (1 + e1 * l1.b * l1.bt)
              + l1.f[1] * S2 * (1 - l2.b * l2.bt)
              + l1.f[1] * (C + e1 * l1.b * l2.bt) * (C - l2.b * l1.bt))
        bii += l1.mu[e1] * l2.mu[-1] * br
    return bi / 2, bii


# --- mu ---------------------------------------------------------------------------

def test_mu_transparent_medium():
    w = wave_kinematics(1.2, 0.7, 0.0)
    mp_, mm = mu_pm(w)
    assert mm == 0.0
    assert mp_ == pytest.approx(2 * w.gamma / (1 + w.beta ** 2), rel=1e-15)


def test_mu_normal_incidence():
    w = wave_kinematics(0.0, 0.7, 2.5)
    mp_, mm = mu_pm(w)
    assert mp_ == pytest.approx(w.gamma + w.gamma_t, rel=1e-15)
    assert mm == pytest.approx(w.gamma - w.gamma_t, rel=1e-15)


def test_mu_high_precision():
    leg = MpLeg(math.sqrt(3.0), 1.0, 3.0)  # gamma = 2
    mp_, mm = mu_pm(wave_kinematics(math.sqrt(3.0), 1.0, 3.0))
    assert mp_ == pytest.approx(float(leg.mu[1]), rel=1e-15)
    assert mm == pytest.approx(float(leg.mu[-1]), rel=1e-14)
    assert mm < 0 < mp_


# --- Lambda matrices ------------------------------------------------------------------

def test_lambda1_no_mixing_at_zero_angle():
    w1 = wave_kinematics(np.array([0.3, 1.0, 2.0]), 0.8, 4.0)
    w2 = wave_kinematics(np.array([1.5, 0.2, 2.0]), 0.8, 4.0)
    lam_m, lam_p, lam1 = lambda1_matrices(w1, w2, AngularPair.from_cos(np.ones(3)))
    for m in (lam_m, lam_p, lam1):
        assert np.all(m[0, 1] == 0) and np.all(m[1, 0] == 0)


@pytest.mark.parametrize("seed", range(5))
def test_lambda_matrices_match_high_precision(seed):
    q1, q2, C, O, K, sign = (x[0] for x in random_points(1, seed))
    S = sign * math.sqrt(1 - C * C)
    l1, l2 = MpLeg(q1, O, K), MpLeg(q2, O, K)
    w1, w2 = wave_kinematics(q1, O, K), wave_kinematics(q2, O, K)
    angle = AngularPair(np.float64(C), np.float64(S))
    _, _, lam1 = lambda1_matrices(w1, w2, angle)
    ref = mp_lambda1(l1, l2, C, S)
    for i in range(2):
        for j in range(2):
            assert float(lam1[i, j]) == pytest.approx(float(ref[i, j]), rel=1e-12, abs=1e-14)
    back_minus = mp_lambda(l2, l1, C, -S, -1)
    ref2 = 2 * l1.g * l1.gt * mp.eye(2) + ref * back_minus
    te, tm = lambda2_diagonal(w1, w2, angle)
    assert float(te) == pytest.approx(float(ref2[0, 0]), rel=1e-11)
    assert float(tm) == pytest.approx(float(ref2[1, 1]), rel=1e-11)


def test_lambda2_stable_matches_matrix_product():
    q1, q2, C, O, K, sign = random_points(5000, 9)
    kp = KernelPoint.build(q1, q2, C, O, K, sign)
    te, tm = lambda2_diagonal(kp.w1, kp.w2, kp.angle)
    ste, stm = lambda2_stable(kp)
    scale = 2 * kp.w1.gamma * kp.w1.gamma_t
    assert np.max(np.abs(ste - te) / scale) < 1e-13
    assert np.max(np.abs(stm - tm) / scale) < 1e-13


def test_lambda2_vacuum_limit():
    w1 = wave_kinematics(np.array([0.3, 1.0]), 0.8, 0.0)
    w2 = wave_kinematics(np.array([1.5, 0.2]), 0.8, 0.0)
    te, tm = lambda2_diagonal(w1, w2, AngularPair.from_cos(np.array([0.2, -0.7])))
    assert np.allclose(te, 2 * w1.gamma ** 2, rtol=1e-15)
    assert np.allclose(tm, 2 * w1.gamma ** 2, rtol=1e-15)


# --- explicit kernels ------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(10))
def test_explicit_kernels_match_high_precision(seed):
    q1, q2, C, O, K, sign = (x[0] for x in random_points(1, 100 + seed))
    l1, l2 = MpLeg(q1, O, K), MpLeg(q2, O, K)
    ref_i, ref_ii = mp_b_explicit(l1, l2, mp.mpf(C), mp.sqrt(1 - mp.mpf(C) ** 2))
    kp = KernelPoint.build(q1, q2, C, O, K)
    assert float(b_first_order(kp, CFG)) == pytest.approx(float(ref_i), rel=1e-12)
    assert float(b_second_order(kp, CFG)) == pytest.approx(float(ref_ii), rel=1e-12)


def test_matrix_path_equivalence_random():
    q1, q2, C, O, K, sign = random_points(10_000, 7)
    kp = KernelPoint.build(q1, q2, C, O, K, sign)
    bi, bii = b_first_order(kp, CFG), b_second_order(kp, CFG)
    mi, mii = b_matrix_path(kp, CFG)
    assert np.max(np.abs(mi / bi - 1)) < 1e-10
    assert np.max(np.abs(mii / bii - 1)) < 1e-10


def test_termwise_forms_agree():
    q1, q2, C, O, K, sign = random_points(2000, 8)
    kp = KernelPoint.build(q1, q2, C, O, K)
    assert np.allclose(b_first_order_termwise(kp, CFG), b_first_order(kp, CFG), rtol=1e-9)
    assert np.allclose(b_second_order_termwise(kp, CFG), b_second_order(kp, CFG), rtol=1e-9)


def test_transparent_leg_gives_zero_b_i():
    kp = KernelPoint.build(np.array([0.5, 1.0]), np.array([1.0, 2.0]), np.array([0.3, -0.2]),
                           0.6, 0.0)
    assert np.all(b_first_order(kp, CFG) == 0.0)
    assert np.all(b_second_order(kp, CFG) == 0.0)


def test_zero_angle_matrix_path_has_no_mixed_terms():
    w1 = wave_kinematics(np.array([0.7]), 0.5, 3.0)
    w2 = wave_kinematics(np.array([1.4]), 0.5, 3.0)
    angle = AngularPair.from_cos(np.ones(1))
    _, _, fwd = lambda1_matrices(w1, w2, angle)
    _, _, back = lambda1_matrices(w2, w1, angle.reversed())
    assert fwd[0, 1] * back[1, 0] == 0 and fwd[1, 0] * back[0, 1] == 0


# --- specular identities ------------------------------------------------------------------

def specular_states(n=5000, seed=11):
    rng = np.random.default_rng(seed)
    q = rng.uniform(0, 5, n)
    O = rng.uniform(0.01, 5, n)
    K = rng.uniform(0.1, 20, n)
    return wave_kinematics(q, O, K)


def test_specular_first_order_coefficient():
    w = specular_states()
    R1 = dressed_first_order(w)
    r_te, r_tm = fresnel_specular(w)
    assert np.max(np.abs(R1[0, 0] / (-2 * w.gamma * r_te) - 1)) < 1e-12
    assert np.max(np.abs(R1[1, 1] / (-2 * w.gamma * r_tm) - 1)) < 1e-12
    assert np.all(R1[0, 1] == 0) and np.all(R1[1, 0] == 0)


def test_specular_second_order_coefficient():
    w = specular_states()
    R2_te, R2_tm = dressed_second_order(w)
    r_te, r_tm = fresnel_specular(w)
    assert np.max(np.abs(R2_te / (2 * w.gamma ** 2 * r_te) - 1)) < 1e-12
    assert np.max(np.abs(R2_tm / (2 * w.gamma ** 2 * r_tm) - 1)) < 1e-12


def test_specular_kernel_identity():
    w = specular_states()
    kp = KernelPoint(w, w, AngularPair.from_cos(np.ones_like(w.gamma)))
    f_te, f_tm = loop_functions(w)
    g2 = 2 * w.gamma ** 2
    assert np.max(np.abs(b_first_order(kp, CFG) / (g2 * (f_te ** 2 + f_tm ** 2)) - 1)) < 1e-12
    assert np.max(np.abs(b_second_order(kp, CFG) / (g2 * (f_te + f_tm)) - 1)) < 1e-12
    total = g2 * (f_te * (1 + f_te) + f_tm * (1 + f_tm))
    assert np.max(np.abs(b_total(kp, CFG) / total - 1)) < 1e-12


# --- symmetrization ----------------------------------------------------------------------

def test_b_hat_symmetric():
    q1, q2, C, O, K, sign = random_points(500, 12)
    kp = KernelPoint.build(q1, q2, C, O, K, sign)
    assert np.array_equal(b_hat(kp, CFG), b_hat(kp.swapped(), CFG))


def test_b_hat_specular_equals_b():
    w = specular_states(200)
    kp = KernelPoint(w, w, AngularPair.from_cos(np.ones_like(w.gamma)))
    assert np.allclose(b_hat(kp, CFG), b_total(kp, CFG), rtol=1e-15)


def test_b_hat_is_mean_of_orders():
    q1, q2, C, O, K, sign = random_points(100, 13)
    kp = KernelPoint.build(q1, q2, C, O, K)
    mean = 0.5 * (b_total(kp, CFG) + b_total(kp.swapped(), CFG))
    assert np.array_equal(b_hat(kp, CFG), mean)


# --- perfect-mirror limit ------------------------------------------------------------------

def test_perfect_limit_order_counting():
    rng = np.random.default_rng(14)
    n = 50
    q1, q2 = rng.uniform(0.1, 3, n), rng.uniform(0.1, 3, n)
    C, O = rng.uniform(-1, 1, n), rng.uniform(0.1, 3, n)
    Ks = np.geomspace(1e3, 1e5, 5)
    perfect_i, _ = perfect_b(KernelPoint.build(q1, q2, C, O, math.inf))
    slopes, firsts = [], []
    for K in Ks:
        cfg = CavityConfig(100.0, 2 * math.pi * 100.0 / K)
        kp = KernelPoint.build(q1, q2, C, O, K)
        kp2 = KernelPoint.build(q1, q2, C, O, 2 * K)
        cfg2 = CavityConfig(100.0, cfg.lambda_p / 2)
        slope = (b_second_order(kp2, cfg2) - b_second_order(kp, cfg)) / K
        lead = leading_inverse_lambda_p(kp, cfg) / K
        slopes.append(np.max(np.abs(slope / lead - 1)))
        firsts.append(np.max(np.abs(b_first_order(kp, cfg) / perfect_i - 1)))
    # 1/lambda_p coefficient of b_ii, and b_i finite with the perfect value as its limit
    assert slopes[-1] < 1e-2
    assert firsts[-1] < 1e-3
    assert np.all(np.diff(firsts) < 0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1, 1))
def test_angular_pair_unit(C):
    a = AngularPair.from_cos(C)
    assert a.C ** 2 + a.S ** 2 == pytest.approx(1.0, abs=1e-15)


def test_angular_pair_from_vectors_clamps():
    a = AngularPair.from_vectors(np.array([1.0, 1e-17]), np.array([3.0, 0.0]))
    assert a.C == 1.0 and a.S == 0.0
    b = AngularPair.from_vectors(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    assert b.C == pytest.approx(0.0, abs=1e-16) and b.S == -1.0
