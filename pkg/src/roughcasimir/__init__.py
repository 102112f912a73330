"""Second-order roughness correction to the Casimir energy between plasma-model mirrors."""
from __future__ import annotations

from .kernel import (AngularPair, KernelPoint, b_first_order, b_hat, b_matrix_path,
                     b_second_order, b_total, lambda1_matrices, lambda2_diagonal, mu_pm)
from .limits import (RegimeTag, alpha_high_k, alpha_long_distance, perfect_G,
                     perfect_nonspecular, plasmon_b, plasmon_G0_and_energy,
                     plasmon_G_high_k, plasmon_reflection)
from .optics import (PERFECT, TRANSPARENT, CavityConfig, Polarization, WaveState,
                     casimir_energy_curvature, casimir_energy_pp, dielectric,
                     fresnel_specular, loop_function, wave_kinematics)
from .quadrature import QuadratureError, QuadratureSpec
from .response import ResponseSample, response_curve, response_G, response_G0, rho
from .spectra import (CorrectionReport, GaussianSpectrum, TabulatedSpectrum,
                      energy_correction, perfect_gaussian_asymptote, pfa_correction,
                      plane_sphere, spectrum_eval, spectrum_variance)

__version__ = "0.1.0"

__all__ = [
    "AngularPair", "KernelPoint", "b_first_order", "b_hat", "b_matrix_path",
    "b_second_order", "b_total", "lambda1_matrices", "lambda2_diagonal", "mu_pm",
    "RegimeTag", "alpha_high_k", "alpha_long_distance", "perfect_G",
    "perfect_nonspecular", "plasmon_b", "plasmon_G0_and_energy", "plasmon_G_high_k",
    "plasmon_reflection", "PERFECT", "TRANSPARENT", "CavityConfig", "Polarization",
    "WaveState", "casimir_energy_curvature", "casimir_energy_pp", "dielectric",
    "fresnel_specular", "loop_function", "wave_kinematics", "QuadratureError",
    "QuadratureSpec", "ResponseSample", "response_curve", "response_G", "response_G0",
    "rho", "CorrectionReport", "GaussianSpectrum", "TabulatedSpectrum",
    "energy_correction", "perfect_gaussian_asymptote", "pfa_correction",
    "plane_sphere", "spectrum_eval", "spectrum_variance", "__version__",
]
