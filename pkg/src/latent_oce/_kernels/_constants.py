"""Coefficient tables shared by both kernel backends."""

import math

import numpy as np

INV_SQRT2 = 0.7071067811865476  # 1/sqrt(2) correctly rounded
INV_SQRT2_LO = -4.833646656726457e-17  # 1/sqrt(2) - INV_SQRT2
TWO_OVER_SQRT_PI = 1.1283791670955126
DEKKER_SPLIT = 134217729.0  # 2**27 + 1
# beyond this |x| the cdf is 0/1 to working precision
PHI_CORRECT_LIMIT = 40.0
SQRT_2PI = math.sqrt(2.0 * math.pi)
INV_SQRT_2PI = 1.0 / SQRT_2PI
INV_2PI = 1.0 / (2.0 * math.pi)

# Gauss-Legendre rule on [-1, 1], applied panel-wise to the Owen integrals.
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
QUARTER_PI = 0.25 * math.pi
# Owen integrands are cut once the exponent has grown by OWEN_CUT over its
# starting value (relative remainder < 2e-35) and split into panels across
# which it grows by at most OWEN_PANEL, where 24 nodes are exact to ~1e-17.
OWEN_CUT = 80.0
OWEN_PANEL = 16.0
# the part of [0, ps1] below this fraction of ps1 is dropped (weight <= 1)
OWEN_HI_FLOOR = 1e-17
# exp(-kappa^2 / 2) is zero in double precision beyond this
KAPPA_UNDERFLOW = math.sqrt(2.0 * 745.2)

# Acklam's rational approximation to the normal quantile (rel. err ~1.15e-9),
# polished afterwards by one Halley step.
PPF_A = np.array([
    -3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
    1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00,
])
PPF_B = np.array([
    -5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
    6.680131188771972e01, -1.328068155288572e01,
])
PPF_C = np.array([
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
    -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00,
])
PPF_D = np.array([
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
    3.754408661907416e00,
])
PPF_P_LOW = 0.02425

# Beyond this |x| the Halley correction overflows exp(x^2 / 2).
PPF_REFINE_LIMIT = 37.5
