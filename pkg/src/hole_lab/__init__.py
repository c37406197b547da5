"""Hole radii and zero statistics of weighted Kac polynomials near the unit circle."""

from .experiment import HoleCurve, ProbeResult, hole_scan, hole_scan_multi, real_root_probe, universality_compare
from .gaf import zero_count_stats
from .kernel import f_deriv, f_derivs, rho1, rho2, corr_defect
from .polynomial import PolySpec, sample
from .quadrature import IntensityReport, mean_count, small_ball_mean, variance_report
from .rootfind import RootSet, all_roots
from .stats import wilson_ci
from .windows import Window

__version__ = "0.1.0"

__all__ = ["HoleCurve", "ProbeResult", "hole_scan", "hole_scan_multi", "real_root_probe",
           "universality_compare", "zero_count_stats", "f_deriv", "f_derivs", "rho1", "rho2",
           "corr_defect", "PolySpec", "sample", "IntensityReport", "mean_count", "small_ball_mean",
           "variance_report", "RootSet", "all_roots", "wilson_ci", "Window"]
