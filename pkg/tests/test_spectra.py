import math
import warnings

import numpy as np
import pytest

from roughcasimir.limits import perfect_G, perfect_G0
from roughcasimir.optics import CavityConfig
from roughcasimir.quadrature import QuadratureSpec
from roughcasimir.spectra import (CSV_HEADER, GaussianSpectrum, PerturbativeWarning,
                                  ResponseTable, SpectrumFileError, SumSpectrum,
                                  TabulatedSpectrum, ValidityWarning, _k_rule,
                                  effective_correlation_length, energy_correction,
                                  parse_spectrum_csv, perfect_gaussian_asymptote,
                                  pfa_correction, plane_sphere, spectrum_eval,
                                  spectrum_variance)

CFG = CavityConfig(100.0, 136.0)
CHEAP = QuadratureSpec(n_gl=4, n_phi=16)


@pytest.fixture(scope="module")
def table():
    return ResponseTable.build(CFG, 0.2, 16, CHEAP)


# --- spectra --------------------------------------------------------------------------

@pytest.mark.parametrize("a, ell", [(1.0, 50.0), (2.0, 150.0), (0.3, 5.0), (5.0, 1000.0)])
def test_gaussian_variance(a, ell):
    assert spectrum_variance(GaussianSpectrum(a, ell)) == pytest.approx(a * a, rel=1e-10)


def test_gaussian_value_at_origin():
    s = GaussianSpectrum(1.0, 50.0)
    assert spectrum_eval(s, 0.0) == pytest.approx(math.pi * 2500.0)
    with pytest.raises(ValueError):
        spectrum_eval(s, -1.0)


def test_gaussian_rejects_bad_parameters():
    with pytest.raises(ValueError):
        GaussianSpectrum(0.0, 10.0)
    with pytest.warns(PerturbativeWarning):
        GaussianSpectrum(5.0, 10.0)


def test_tabulated_log_linear_exact_for_exponential():
    ks = np.linspace(0.0, 1.0, 11)
    s = TabulatedSpectrum(tuple(ks), tuple(np.exp(-3 * ks)))
    mid = 0.5 * (ks[1:] + ks[:-1])
    assert np.allclose(s(mid), np.exp(-3 * mid), rtol=1e-13)


def test_tabulated_extrapolation_rules():
    s = TabulatedSpectrum((0.1, 0.2), (4.0, 1.0))
    assert s(0.0) == 4.0 and s(0.05) == 4.0
    assert s(0.2) == 1.0 and s(0.21) == 0.0
    assert s(0.15) == pytest.approx(2.0, rel=1e-14)


def test_tabulated_zero_sample_falls_back_to_linear():
    s = TabulatedSpectrum((0.0, 1.0), (2.0, 0.0))
    assert s(0.25) == pytest.approx(1.5)


def test_tabulated_variance_of_sampled_gaussian():
    g = GaussianSpectrum(1.0, 50.0)
    ks = np.linspace(0, g.k_max, 400)
    s = TabulatedSpectrum(tuple(ks), tuple(g(ks)))
    assert spectrum_variance(s) == pytest.approx(1.0, rel=1e-4)


@pytest.mark.parametrize("k, sigma", [((0.2, 0.1), (1.0, 1.0)), ((0.1,), (-1.0,)),
                                      ((), ()), ((0.1, math.nan), (1.0, 1.0))])
def test_tabulated_validation(k, sigma):
    with pytest.raises(ValueError):
        TabulatedSpectrum(k, sigma)


def test_csv_round_trip(tmp_path):
    s = TabulatedSpectrum((0.0, 0.01, 0.05), (100.0, 50.0, 1e-3))
    path = tmp_path / "s.csv"
    path.write_text(s.to_csv())
    assert TabulatedSpectrum.from_csv(path) == s


def test_csv_reports_every_problem(tmp_path):
    text = "\n".join([CSV_HEADER, "0.0,1.0", "0.1,abc", "0.0,1.0", "0.2,-1", "0.3,1,2", ""])
    _, _, problems = parse_spectrum_csv(text)
    assert [n for n, _ in problems] == [3, 4, 5, 6]
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(SpectrumFileError) as info:
        TabulatedSpectrum.from_csv(path)
    assert len(info.value.problems) == 4 and "line 3" in str(info.value)


def test_csv_header_and_empty():
    assert parse_spectrum_csv("k,sigma\n0,1\n")[2][0][0] == 1
    assert parse_spectrum_csv("")[2]
    assert parse_spectrum_csv(CSV_HEADER + "\n")[2] == [(1, "no data rows")]
    ks, ss, problems = parse_spectrum_csv("# comment\n" + CSV_HEADER + "\n0, 2\n")
    assert (ks, ss, problems) == ([0.0], [2.0], [])


def test_sum_spectrum_variance_adds():
    a, b = GaussianSpectrum(1.0, 50.0), GaussianSpectrum(0.5, 10.0)
    assert spectrum_variance(SumSpectrum((a, b))) == pytest.approx(1.25, rel=1e-10)


def test_effective_correlation_length_of_gaussian():
    s = GaussianSpectrum(1.0, 40.0)
    assert effective_correlation_length(s) == pytest.approx(math.pi * 40.0 / math.sqrt(math.log(2)),
                                                            rel=1e-3)


# --- response table and corrections -------------------------------------------------------

def test_table_interpolates_through_samples(table):
    assert np.allclose(table(np.asarray(table.k)), table.rho, rtol=0, atol=1e-15)
    assert table(0.0) == 1.0
    with pytest.raises(ValueError):
        table(1.0)


def test_table_refinement_reuses_samples(table):
    fine = table.refined()
    assert fine.rho[::2] == table.rho
    ext = table.extended(0.3)
    assert ext.k_max >= 0.3 and ext.rho[:len(table.rho)] == table.rho


def test_correction_linear_in_spectrum(table):
    s1, s2 = GaussianSpectrum(1.0, 50.0), GaussianSpectrum(0.7, 80.0)
    d1 = energy_correction(s1, CFG, table=table).delta_E_reduced
    d2 = energy_correction(s2, CFG, table=table).delta_E_reduced
    d12 = energy_correction(SumSpectrum((s1, s2)), CFG, table=table).delta_E_reduced
    assert d12 == pytest.approx(d1 + d2, rel=1e-10)


def test_correction_scales_with_a_squared(table):
    d1 = energy_correction(GaussianSpectrum(1.0, 50.0), CFG, table=table)
    d2 = energy_correction(GaussianSpectrum(2.0, 50.0), CFG, table=table)
    assert d2.delta_E_reduced == pytest.approx(4 * d1.delta_E_reduced, rel=1e-12)
    assert d2.ratio_to_pfa == pytest.approx(d1.ratio_to_pfa, rel=1e-12)


def test_correction_reduces_to_pfa_for_long_correlation(table):
    r = energy_correction(GaussianSpectrum(1.0, 2000.0), CFG, table=table)
    assert r.ratio_to_pfa == pytest.approx(1.0, abs=5e-3)
    assert r.delta_relative > 0


def test_correction_rejects_foreign_table(table):
    with pytest.raises(ValueError):
        energy_correction(GaussianSpectrum(1.0, 50.0), CavityConfig(200.0, 136.0), table=table)


def test_correction_warns_when_not_perturbative(table):
    with pytest.warns(PerturbativeWarning):
        energy_correction(GaussianSpectrum(15.0, 2000.0), CFG, table=table)


def test_pfa_correction_perfect():
    L, a = 100.0, 1.0
    s = GaussianSpectrum(a, 50.0)
    assert pfa_correction(s, CavityConfig.perfect(L)) == pytest.approx(6 * a * a / L ** 2, rel=1e-8)


def test_perfect_gaussian_asymptote():
    L, ell = 1000.0, 10.0
    s = GaussianSpectrum(1.0, ell)
    k, w = _k_rule(s.breakpoints, s.k_max, 6)
    rho = np.array([perfect_G(x * L, L, rel_tol=1e-6) for x in k]) / perfect_G0(L)
    delta = 6 / L ** 2 * float(np.sum(w * k * s(k) * rho)) / (2 * math.pi)
    assert delta == pytest.approx(perfect_gaussian_asymptote(s, L), rel=2e-2)


# --- plane-sphere ----------------------------------------------------------------------------

def test_plane_sphere_uses_plane_plane_delta(table):
    s = GaussianSpectrum(1.0, 50.0)
    rep = energy_correction(s, CFG, table=table)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        res = plane_sphere(1e5, CFG, s, report=rep)
    assert res.delta_relative == rep.delta_relative
    perfect = plane_sphere(1e5, CavityConfig.perfect(100.0))
    assert perfect.F_PS_reduced == pytest.approx(-2 * math.pi * 1e5 * math.pi ** 2 / (720 * 1e6),
                                                 rel=1e-8)
    assert perfect.delta_relative is None


def test_plane_sphere_validity_warnings():
    with pytest.warns(ValidityWarning):
        plane_sphere(500.0, CFG)
    with pytest.warns(ValidityWarning):
        plane_sphere(1e4, CFG, GaussianSpectrum(1.0, 400.0),
                     report=energy_correction(GaussianSpectrum(1.0, 400.0), CFG,
                                              table=ResponseTable.build(CFG, 0.05, 4, CHEAP)))
    with pytest.raises(ValueError):
        plane_sphere(-1.0, CFG)
