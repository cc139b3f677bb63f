"""Pure-array implementations of the special-function kernels.

Same algorithms as the numba backend, written with masks instead of
branches. Used when numba is unavailable or disabled.
"""

import math

import numpy as np
from scipy.special import erfc, erfcx

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


def _as_float(*args):
    arrs = np.broadcast_arrays(*[np.asarray(a, dtype=np.float64) for a in args])
    return [np.array(a, dtype=np.float64) for a in arrs]


def _split(a):
    s = DEKKER_SPLIT * a
    hi = s - (s - a)
    return hi, a - hi


def _erfc(t):
    """erfc with tail relative accuracy near 1 ulp.

    For ``t > 0.5`` uses ``erfcx(t) exp(-t^2)`` with ``t^2`` split so the
    large part is exact; scipy's plain erfc loses ~1e-14 there.
    """
    out = erfc(t)
    tail = (t > 0.5) & (t < 27.3)
    if np.any(tail):
        tt = t[tail]
        th = np.floor(tt * 4096.0) / 4096.0
        out[tail] = erfcx(tt) * np.exp(-th * th) * np.exp(-(tt - th) * (tt + th))
    return out


def _phi_scalar(x: float) -> float:
    # plain-float twin of the array path; quadrature calls Phi point by point
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
        val -= (err + z * INV_SQRT2_LO) * TWO_OVER_SQRT_PI * math.exp(-t * t)
    return 0.5 * val


SMALL = 16  # below this size a float loop beats the array set-up cost


def norm_cdf(x):
    if isinstance(x, float):
        return np.float64(_phi_scalar(x))
    x = np.asarray(x, dtype=np.float64)
    if x.size <= SMALL:
        out = np.array([_phi_scalar(v) for v in x.ravel().tolist()], dtype=np.float64).reshape(x.shape)
        return out[()] if out.ndim == 0 else out
    z = -x
    t = z * INV_SQRT2
    val = _erfc(np.atleast_1d(t)).reshape(t.shape)
    # first-order repair of the rounding in t (see the numba kernel)
    zz = np.where(np.abs(z) < PHI_CORRECT_LIMIT, z, 0.0)
    tt = zz * INV_SQRT2
    z_hi, z_lo = _split(zz)
    c_hi, c_lo = _split(INV_SQRT2)
    err = ((z_hi * c_hi - tt) + z_hi * c_lo + z_lo * c_hi) + z_lo * c_lo
    delta = err + zz * INV_SQRT2_LO
    return 0.5 * (val - delta * TWO_OVER_SQRT_PI * np.exp(-tt * tt))


def norm_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    return INV_SQRT_2PI * np.exp(-0.5 * x * x)


def _horner(coefs, x):
    out = np.full_like(x, coefs[0])
    for c in coefs[1:]:
        out = out * x + c
    return out


def _ppf_lower(p):
    with np.errstate(divide="ignore", invalid="ignore"):
        q_tail = np.sqrt(-2.0 * np.log(np.where(p > 0, p, 1.0)))
        x_tail = _horner(PPF_C, q_tail) / (_horner(PPF_D, q_tail) * q_tail + 1.0)
        q = p - 0.5
        r = q * q
        x_mid = _horner(PPF_A, r) * q / (_horner(PPF_B, r) * r + 1.0)
    x = np.where(p < PPF_P_LOW, x_tail, x_mid)
    refine = np.abs(x) < PPF_REFINE_LIMIT
    xs = np.where(refine, x, 0.0)
    e = norm_cdf(xs) - p
    u = e * SQRT_2PI * np.exp(0.5 * xs * xs)
    return np.where(refine, xs - u / (1.0 + 0.5 * xs * u), x)


_PA, _PB, _PC, _PD = (tuple(float(c) for c in cs) for cs in (PPF_A, PPF_B, PPF_C, PPF_D))


def _poly(coefs, x: float) -> float:
    out = coefs[0]
    for c in coefs[1:]:
        out = out * x + c
    return out


def _ppf_scalar(p: float) -> float:
    pl = 1.0 - p if p > 0.5 else p
    if pl < PPF_P_LOW:
        q = math.sqrt(-2.0 * math.log(pl))
        x = _poly(_PC, q) / (_poly(_PD, q) * q + 1.0)
    else:
        q = pl - 0.5
        r = q * q
        x = _poly(_PA, r) * q / (_poly(_PB, r) * r + 1.0)
    if abs(x) < PPF_REFINE_LIMIT:
        u = (_phi_scalar(x) - pl) * SQRT_2PI * math.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return -x if p > 0.5 else x


def norm_ppf(p):
    if isinstance(p, float) and 0.0 < p < 1.0:
        return np.float64(_ppf_scalar(p))
    p = np.asarray(p, dtype=np.float64)
    if p.ndim == 0 and 0.0 < p < 1.0:
        return np.float64(_ppf_scalar(float(p)))
    upper = p > 0.5
    pl = np.where(upper, 1.0 - p, p)
    inside = (p > 0.0) & (p < 1.0)
    x = _ppf_lower(np.where(inside, pl, 0.25))
    x = np.where(upper, -x, x)
    x = np.where(p == 0.0, -np.inf, x)
    x = np.where(p == 1.0, np.inf, x)
    return np.where(inside | (p == 0.0) | (p == 1.0), x, np.nan)


def _gl_panel(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t = mid[..., None] + half[..., None] * GL_NODES
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        vals = f(t)
    # idle elements have zero-width panels; keep their 0 * inf terms out
    vals = np.where(half[..., None] > 0.0, vals, 0.0)
    return (GL_WEIGHTS * vals).sum(axis=-1) * half


def _gl_lo(kappa, th0, th1):
    """Panelled integral of exp(-kappa^2 / (2 cos^2 t)) over [th0, th1] in [0, pi/4]."""
    gone = kappa > KAPPA_UNDERFLOW
    kappa = np.where(gone, 0.0, kappa)
    hk = 0.5 * kappa * kappa
    t0 = np.tan(th0)
    t1 = np.tan(th1)
    u0 = t0 * t0
    u1 = t1 * t1
    drop = hk * (u1 - u0)
    cut = drop > OWEN_CUT
    u1 = np.where(cut, u0 + OWEN_CUT / np.where(cut, hk, 1.0), u1)
    th1 = np.where(cut, np.arctan(np.sqrt(u1)), th1)
    drop = np.where(cut, OWEN_CUT, drop)
    n = 1 + (drop / OWEN_PANEL).astype(np.int64)
    hk_ = hk[..., None]

    def f(t):
        c = np.cos(t)
        return np.exp(-hk_ / (c * c))

    total = np.zeros_like(hk)
    lo = th0
    for p in range(1, int(n.max(initial=1)) + 1):
        nxt = np.arctan(np.sqrt(u0 + (u1 - u0) * p / n))
        hi = np.where(p == n, th1, np.where(p < n, nxt, lo))
        total = total + _gl_panel(f, lo, hi)
        lo = hi
    return np.where(gone, 0.0, total)


def _gl_hi(kappa, ps1):
    """Panelled integral of exp(-kappa^2 / (2 sin^2 t)) over [0, ps1] in [0, pi/4]."""
    sn = np.sin(ps1)
    under = kappa > KAPPA_UNDERFLOW * sn
    kappa = np.where(under, 0.0, kappa)
    hk = 0.5 * kappa * kappa
    zero_k = hk == 0.0
    live = ~zero_k & ~under
    hk_s = np.where(live, hk, 1.0)
    sn_s = np.where(live, sn, 1.0)
    q = hk_s / (sn_s * sn_s)
    ps_end = np.maximum(np.arcsin(sn_s * np.sqrt(q / (q + OWEN_CUT))), OWEN_HI_FLOOR * ps1)
    hk_ = hk_s[..., None]

    def f(t):
        sj = np.sin(t)
        return np.exp(-hk_ / (sj * sj))

    total = np.zeros_like(hk)
    hi = np.where(live, ps1, 0.0)
    ps_end = np.where(live, ps_end, 0.0)
    active = hi > ps_end
    while np.any(active):
        sh = np.sin(hi)
        lo = np.arcsin(sh * np.sqrt(hk_s / (hk_s + OWEN_PANEL * sh * sh)))
        lo = np.maximum(np.maximum(lo, 0.5 * hi), ps_end)
        lo = np.where(active, lo, hi)
        total = total + _gl_panel(f, lo, hi)
        hi = lo
        active = hi > ps_end
    total = np.where(zero_k & ~under, ps1, total)
    return np.where(under, 0.0, total)


def _owen_u_pos(kappa, c):
    """Tail integral of the Owen integrand over ``[c, inf)``, ``c >= 0``."""
    big = c >= 1.0
    with np.errstate(divide="ignore"):
        ps1 = np.arctan(1.0 / np.where(big, c, 1.0))
    u_hi = _gl_hi(kappa, ps1) * INV_2PI
    tail = norm_cdf(-kappa)
    th0 = np.arctan(np.where(big, 0.0, c))
    u_lo = _gl_lo(kappa, th0, np.full_like(th0, QUARTER_PI)) * INV_2PI + 0.5 * tail * tail
    out = np.where(big, u_hi, u_lo)
    return np.where(c == np.inf, 0.0, out)


def _owen_u(kappa, c):
    neg = c < 0.0
    u = _owen_u_pos(kappa, np.abs(c))
    return np.where(neg, norm_cdf(-kappa) - u, u)


def owen_t(h, a):
    h, a = _as_float(h, a)
    nan = np.isnan(h) | np.isnan(a)
    ha = np.abs(h)
    sgn = np.where(a < 0.0, -1.0, 1.0)
    aa = np.abs(a)
    ainf = np.isinf(aa)
    hinf = np.isinf(ha)
    small = aa <= 1.0
    hs = np.where(hinf | nan, 0.0, ha)
    a_small = np.where(small, aa, 0.0)
    a_big = np.where(small | ainf | nan, 2.0, aa)
    t_small = _gl_lo(hs, np.zeros_like(hs), np.arctan(a_small)) * INV_2PI
    t_big = 0.5 * norm_cdf(-hs) - _owen_u_pos(hs, a_big)
    out = np.where(small, t_small, t_big)
    out = np.where(ainf, 0.5 * norm_cdf(-hs), out)
    out = sgn * out
    out = np.where(hinf, 0.0, out)
    out = np.where(aa == 0.0, 0.0, out)
    return np.where(nan, np.nan, out)


def _slope(num, den, r, s):
    # (num / den - r) / s, saturating to +-inf instead of overflowing
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        sat = np.abs(num) * 1e-300 > np.abs(den) * s
        val = (num / np.where(sat, 1.0, den) - r) / s
    return np.where(sat, np.where((num < 0.0) == (den < 0.0), np.inf, -np.inf), val)


def bvn_cdf(h, k, r):
    h, k, r = _as_float(h, k, r)
    nan = np.isnan(h) | np.isnan(k) | np.isnan(r)
    finite = np.isfinite(h) & np.isfinite(k)
    inner = finite & (np.abs(r) < 1.0) & ~nan
    hf = np.where(finite, h, 0.0)
    kf = np.where(finite, k, 0.0)
    rf = np.where(inner, r, 0.0)
    s = np.sqrt((1.0 - rf) * (1.0 + rf))
    h0 = hf == 0.0
    k0 = kf == 0.0
    # Owen terms as exact constants plus tail integrals, see the numba kernel
    a_h = _slope(kf, np.where(h0, 1.0, hf), rf, s)
    a_k = _slope(hf, np.where(k0, 1.0, kf), rf, s)
    u_h = _owen_u(np.abs(hf), np.where(hf < 0.0, a_h, -a_h))
    u_k = _owen_u(np.abs(kf), np.where(kf < 0.0, a_k, -a_k))
    const = np.where(h0, np.where(kf < 0.0, 0.5, 0.0), np.where(hf > 0.0, 0.5, 0.0))
    const = const + np.where(k0, np.where(hf < 0.0, 0.5, 0.0), np.where(kf > 0.0, 0.5, 0.0))
    small = np.where(h0, 0.0, np.where(hf < 0.0, u_h, -u_h))
    small = small + np.where(k0, 0.0, np.where(kf < 0.0, u_k, -u_k))
    # compare signs, not h * k, which may underflow
    opposite = ~h0 & ~k0 & ((hf < 0.0) != (kf < 0.0))
    beta = np.where(opposite | ((h0 | k0) & (hf + kf < 0.0)), 0.5, 0.0)
    val = (const - beta) + small
    val = np.where(h0 & k0, 0.25 + np.arcsin(rf) * INV_2PI, val)
    out = np.clip(val, 0.0, 1.0)

    # degenerate correlations
    out = np.where(finite & (r >= 1.0), norm_cdf(np.minimum(hf, kf)), out)
    out = np.where(finite & (r <= -1.0), np.maximum(0.0, norm_cdf(hf) - norm_cdf(-kf)), out)

    # infinite limits
    out = np.where(h == np.inf, norm_cdf(k), out)
    out = np.where((k == np.inf) & (h != np.inf), norm_cdf(h), out)
    out = np.where((h == -np.inf) | (k == -np.inf), 0.0, out)
    return np.where(nan, np.nan, out)
