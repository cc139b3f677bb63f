"""numba-compiled scalar kernels, exposed as broadcasting ufuncs."""

import math

import numba
import numpy as np

from ._constants import (
    DEKKER_SPLIT,
    KAPPA_UNDERFLOW,
    GL_NODES,
    GL_WEIGHTS,
    INV_2PI,
    INV_SQRT2,
    INV_SQRT2_LO,
    INV_SQRT_2PI,
    OWEN_CUT,
    OWEN_HI_FLOOR,
    OWEN_PANEL,
    PHI_CORRECT_LIMIT,
    PPF_A,
    PPF_B,
    PPF_C,
    PPF_D,
    PPF_P_LOW,
    PPF_REFINE_LIMIT,
    QUARTER_PI,
    SQRT_2PI,
    TWO_OVER_SQRT_PI,
)

_NODES = np.ascontiguousarray(GL_NODES)
_WEIGHTS = np.ascontiguousarray(GL_WEIGHTS)
_A = PPF_A
_B = PPF_B
_C = PPF_C
_D = PPF_D


@numba.njit(cache=True, nogil=True)
def _phi(x):
    # erfc is steep in the tails, so the rounding of -x/sqrt(2) alone would
    # cost ~2t^2 ulps; add back the first-order term of the lost residual
    z = -x
    t = z * INV_SQRT2
    val = math.erfc(t)
    if abs(x) < PHI_CORRECT_LIMIT:
        zs = DEKKER_SPLIT * z
        z_hi = zs - (zs - z)
        z_lo = z - z_hi
        cs = DEKKER_SPLIT * INV_SQRT2
        c_hi = cs - (cs - INV_SQRT2)
        c_lo = INV_SQRT2 - c_hi
        err = ((z_hi * c_hi - t) + z_hi * c_lo + z_lo * c_hi) + z_lo * c_lo
        delta = err + z * INV_SQRT2_LO
        val -= delta * TWO_OVER_SQRT_PI * math.exp(-t * t)
    return 0.5 * val


@numba.njit(cache=True, nogil=True)
def _pdf(x):
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


@numba.njit(cache=True, nogil=True)
def _ppf_lower(p):
    # p in (0, 0.5]
    if p < PPF_P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    else:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
            ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        )
    if abs(x) < PPF_REFINE_LIMIT:
        e = _phi(x) - p
        u = e * SQRT_2PI * math.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x


@numba.njit(cache=True, nogil=True)
def _ppf(p):
    if p > 0.0 and p < 1.0:
        if p > 0.5:
            return -_ppf_lower(1.0 - p)
        return _ppf_lower(p)
    if p == 0.0:
        return -np.inf
    if p == 1.0:
        return np.inf
    return np.nan


@numba.njit(cache=True, nogil=True)
def _gl_lo(kappa, th0, th1):
    """Integral of exp(-kappa^2 / (2 cos^2 t)) over [th0, th1] within [0, pi/4].

    The substitution x = tan t turns this into the Owen integrand. Panels
    are spaced evenly in the exponent, which grows with t.
    """
    if kappa > KAPPA_UNDERFLOW:
        return 0.0
    hk = 0.5 * kappa * kappa
    t0 = math.tan(th0)
    t1 = math.tan(th1)
    u0 = t0 * t0
    u1 = t1 * t1
    drop = hk * (u1 - u0)
    if drop > OWEN_CUT:
        u1 = u0 + OWEN_CUT / hk
        th1 = math.atan(math.sqrt(u1))
        drop = OWEN_CUT
    n = 1 + int(drop / OWEN_PANEL)
    total = 0.0
    lo = th0
    for p in range(1, n + 1):
        hi = th1 if p == n else math.atan(math.sqrt(u0 + (u1 - u0) * p / n))
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        acc = 0.0
        for j in range(_NODES.shape[0]):
            c = math.cos(mid + half * _NODES[j])
            acc += _WEIGHTS[j] * math.exp(-hk / (c * c))
        total += acc * half
        lo = hi
    return total


@numba.njit(cache=True, nogil=True)
def _gl_hi(kappa, ps1):
    """Integral of exp(-kappa^2 / (2 sin^2 t)) over [0, ps1] within [0, pi/4].

    This is the Owen integrand beyond x = cot(ps1). The exponent grows as t
    falls, so panels run downward from ps1, each spanning at most
    OWEN_PANEL of exponent growth and a factor two in t.
    """
    sn = math.sin(ps1)
    if kappa > KAPPA_UNDERFLOW * sn:
        return 0.0
    hk = 0.5 * kappa * kappa
    if hk == 0.0:
        return ps1
    # sin of the point where the exponent has grown by d: s * sqrt(E / (E + d));
    # written so that a vanishing hk cannot overflow
    q = hk / (sn * sn)
    ps_end = max(math.asin(sn * math.sqrt(q / (q + OWEN_CUT))), OWEN_HI_FLOOR * ps1)
    total = 0.0
    hi = ps1
    while hi > ps_end:
        sh = math.sin(hi)
        lo = math.asin(sh * math.sqrt(hk / (hk + OWEN_PANEL * sh * sh)))
        lo = max(lo, 0.5 * hi, ps_end)
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        acc = 0.0
        for j in range(_NODES.shape[0]):
            sj = math.sin(mid + half * _NODES[j])
            acc += _WEIGHTS[j] * math.exp(-hk / (sj * sj))
        total += acc * half
        hi = lo
    return total


@numba.njit(cache=True, nogil=True)
def _owen_u_pos(kappa, c):
    # tail integral of the Owen integrand over [c, inf), c >= 0
    if c == np.inf:
        return 0.0
    if c >= 1.0:
        return _gl_hi(kappa, math.atan(1.0 / c)) * INV_2PI
    tail = _phi(-kappa)
    return _gl_lo(kappa, math.atan(c), QUARTER_PI) * INV_2PI + 0.5 * tail * tail


@numba.njit(cache=True, nogil=True)
def _owen_u(kappa, c):
    if c < 0.0:
        return _phi(-kappa) - _owen_u_pos(kappa, -c)
    return _owen_u_pos(kappa, c)


@numba.njit(cache=True, nogil=True)
def _owen_t(h, a):
    if math.isnan(h) or math.isnan(a):
        return np.nan
    if a == 0.0:
        return 0.0
    h = abs(h)
    sgn = 1.0
    if a < 0.0:
        a = -a
        sgn = -1.0
    if math.isinf(h):
        return 0.0
    if math.isinf(a):
        return sgn * 0.5 * _phi(-h)
    if a <= 1.0:
        return sgn * _gl_lo(h, 0.0, math.atan(a)) * INV_2PI
    return sgn * (0.5 * _phi(-h) - _owen_u_pos(h, a))


@numba.njit(cache=True, nogil=True)
def _ratio_slope(num, den, r, s):
    """``(num / den - r) / s`` with the ratio saturating to +-inf instead of overflowing."""
    if abs(num) * 1e-300 > abs(den) * s:
        return np.inf if (num < 0.0) == (den < 0.0) else -np.inf
    return (num / den - r) / s


@numba.njit(cache=True, nogil=True)
def _bvn(h, k, r):
    if math.isnan(h) or math.isnan(k) or math.isnan(r):
        return np.nan
    if h == -np.inf or k == -np.inf:
        return 0.0
    if h == np.inf:
        return _phi(k)
    if k == np.inf:
        return _phi(h)
    if r >= 1.0:
        return _phi(min(h, k))
    if r <= -1.0:
        return max(0.0, _phi(h) - _phi(-k))
    if h == 0.0 and k == 0.0:
        return 0.25 + math.asin(r) * INV_2PI
    s = math.sqrt((1.0 - r) * (1.0 + r))
    # Each Owen term 0.5 Phi(x) - T(x, a) is either U(|x|, a) (x < 0) or
    # 1/2 - U(x, -a) (x > 0), U being the upper tail of the T integrand.
    # The halves and the sign correction cancel exactly, so only tail-sized
    # quantities are added and rectangles deep in a tail keep their digits.
    const = 0.0
    small = 0.0
    if h == 0.0:
        const += 0.5 if k < 0.0 else 0.0
    else:
        a_h = _ratio_slope(k, h, r, s)
        if h < 0.0:
            small += _owen_u(-h, a_h)
        else:
            const += 0.5
            small -= _owen_u(h, -a_h)
    if k == 0.0:
        const += 0.5 if h < 0.0 else 0.0
    else:
        a_k = _ratio_slope(h, k, r, s)
        if k < 0.0:
            small += _owen_u(-k, a_k)
        else:
            const += 0.5
            small -= _owen_u(k, -a_k)
    # compare signs, not h * k, which may underflow
    if h == 0.0 or k == 0.0:
        if h + k < 0.0:
            const -= 0.5
    elif (h < 0.0) != (k < 0.0):
        const -= 0.5
    val = const + small
    if val < 0.0:
        return 0.0
    if val > 1.0:
        return 1.0
    return val


@numba.vectorize(["float64(float64)"], cache=True)
def norm_cdf(x):
    return _phi(x)


@numba.vectorize(["float64(float64)"], cache=True)
def norm_pdf(x):
    return _pdf(x)


@numba.vectorize(["float64(float64)"], cache=True)
def norm_ppf(p):
    return _ppf(p)


@numba.vectorize(["float64(float64, float64)"], cache=True)
def owen_t(h, a):
    return _owen_t(h, a)


@numba.vectorize(["float64(float64, float64, float64)"], cache=True)
def bvn_cdf(h, k, r):
    return _bvn(h, k, r)
