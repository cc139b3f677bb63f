"""Univariate/bivariate normal special functions and truncated normals.

Scalar inputs give Python floats back, array inputs give arrays. The heavy
lifting happens in :mod:`latent_oce._kernels`, which is compiled with numba
when available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateIntervalError, DomainError

#: Truncation masses below this are treated as empty intervals.
DEGENERATE_MASS = 1e-300


def _out(x):
    if np.ndim(x) == 0:
        return float(x)
    return x


def std_normal_cdf(x):
    """Standard normal CDF, exact 0/1 at -inf/+inf."""
    return _out(_kernels.norm_cdf(np.asarray(x, dtype=np.float64)))


def std_normal_pdf(x):
    return _out(_kernels.norm_pdf(np.asarray(x, dtype=np.float64)))


def std_normal_sf(x):
    """Upper tail ``1 - Phi(x)`` without cancellation."""
    return _out(_kernels.norm_cdf(-np.asarray(x, dtype=np.float64)))


def std_normal_quantile(p):
    """Inverse standard normal CDF on the open interval (0, 1).

    Raises:
        DomainError: if any ``p`` lies outside (0, 1).
    """
    p = np.asarray(p, dtype=np.float64)
    if not np.all((p > 0.0) & (p < 1.0)):
        raise DomainError("normal quantile requires 0 < p < 1")
    return _out(_kernels.norm_ppf(p))


def owen_t(h, a):
    """Owen's T function ``T(h, a)``.

    ``a`` may be infinite (``T(h, inf) = (1 - Phi(|h|)) / 2``); ``h`` must be
    finite.
    """
    h = np.asarray(h, dtype=np.float64)
    if not np.all(np.isfinite(h)):
        raise DomainError("owen_t requires finite h")
    return _out(_kernels.owen_t(h, np.asarray(a, dtype=np.float64)))


def bvn_cdf(h, k, rho):
    """``P(Z1 <= h, Z2 <= k)`` for a standard bivariate normal with correlation rho.

    Evaluated through Owen's decomposition into ``Phi`` and ``T`` terms.
    Infinite limits collapse to the univariate CDF; ``|rho| = 1`` uses the
    degenerate limits.
    """
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(np.abs(rho) > 1.0) or np.any(np.isnan(rho)):
        raise DomainError("bvn_cdf requires -1 <= rho <= 1")
    return _out(
        _kernels.bvn_cdf(
            np.asarray(h, dtype=np.float64), np.asarray(k, dtype=np.float64), rho
        )
    )


def normal_band(lo, hi):
    """``Phi(hi) - Phi(lo)``, evaluated on whichever side of zero is more precise."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    upper = lo > 0.0
    lower_form = _kernels.norm_cdf(hi) - _kernels.norm_cdf(lo)
    upper_form = _kernels.norm_cdf(-lo) - _kernels.norm_cdf(-hi)
    return _out(np.where(upper, upper_form, lower_form))


def bvn_rect(h1, h2, k1, k2, rho):
    """Probability of the rectangle ``(h1, h2] x (k1, k2]`` under correlation rho.

    Bands lying in the positive half-line are reflected to the negative side
    before differencing so that tail rectangles keep relative precision.
    """
    h1, h2, k1, k2, rho = np.broadcast_arrays(
        *[np.asarray(v, dtype=np.float64) for v in (h1, h2, k1, k2, rho)]
    )
    if np.any(np.abs(rho) > 1.0):
        raise DomainError("bvn_rect requires -1 <= rho <= 1")
    flip_h = h1 > 0.0
    flip_k = k1 > 0.0
    a1 = np.where(flip_h, -h2, h1)
    a2 = np.where(flip_h, -h1, h2)
    c1 = np.where(flip_k, -k2, k1)
    c2 = np.where(flip_k, -k1, k2)
    r = np.where(flip_h != flip_k, -rho, rho)
    bvn = _kernels.bvn_cdf
    val = bvn(a2, c2, r) - bvn(a1, c2, r) - bvn(a2, c1, r) + bvn(a1, c1, r)
    return _out(val)


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal ``N(mu, sigma^2)`` restricted to ``[lower, upper]``.

    Bounds may be ``-inf``/``+inf``. Construction fails with
    :class:`DegenerateIntervalError` when the interval mass underflows.
    """

    mu: float
    sigma: float
    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        if not self.sigma > 0.0 or not math.isfinite(self.sigma):
            raise DomainError(f"sigma must be positive and finite, got {self.sigma}")
        if not self.lower < self.upper:
            raise DomainError(f"need lower < upper, got [{self.lower}, {self.upper}]")
        if self.mass < DEGENERATE_MASS:
            raise DegenerateIntervalError(
                f"truncation interval [{self.lower}, {self.upper}] of "
                f"N({self.mu}, {self.sigma}^2) has mass {self.mass:.3g}"
            )

    @property
    def alpha(self) -> float:
        return (self.lower - self.mu) / self.sigma

    @property
    def beta(self) -> float:
        return (self.upper - self.mu) / self.sigma

    @property
    def mass(self) -> float:
        return normal_band(self.alpha, self.beta)

    @property
    def _upper_side(self) -> bool:
        return self.alpha > 0.0

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        z = (x - self.mu) / self.sigma
        inside = (x >= self.lower) & (x <= self.upper)
        dens = _kernels.norm_pdf(np.where(inside, z, 0.0)) / (self.sigma * self.mass)
        return _out(np.where(inside, dens, 0.0))

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        z = np.clip((x - self.mu) / self.sigma, self.alpha, self.beta)
        if self._upper_side:
            val = (_kernels.norm_cdf(-self.alpha) - _kernels.norm_cdf(-z)) / self.mass
        else:
            val = (_kernels.norm_cdf(z) - _kernels.norm_cdf(self.alpha)) / self.mass
        val = np.where(x >= self.upper, 1.0, np.clip(val, 0.0, 1.0))
        return _out(np.where(x <= self.lower, 0.0, val))

    def quantile(self, p):
        p = np.asarray(p, dtype=np.float64)
        if np.any((p < 0.0) | (p > 1.0)) or np.any(np.isnan(p)):
            raise DomainError("truncated-normal quantile requires 0 <= p <= 1")
        if self._upper_side:
            # work with survival probabilities: sf(x) = sf(a) - p * mass
            sf_a = _kernels.norm_cdf(-self.alpha)
            target = np.clip(sf_a - p * self.mass, 0.0, 1.0)
            z = -_kernels.norm_ppf(target)
        else:
            cdf_a = _kernels.norm_cdf(self.alpha)
            target = np.clip(cdf_a + p * self.mass, 0.0, 1.0)
            z = _kernels.norm_ppf(target)
        x = self.mu + self.sigma * z
        x = np.clip(x, self.lower, self.upper)
        x = np.where(p == 0.0, self.lower, x)
        return _out(np.where(p == 1.0, self.upper, x))

    def mean(self) -> float:
        a, b = self.alpha, self.beta
        pa = 0.0 if math.isinf(a) else float(_kernels.norm_pdf(a))
        pb = 0.0 if math.isinf(b) else float(_kernels.norm_pdf(b))
        return self.mu + self.sigma * (pa - pb) / self.mass

    def var(self) -> float:
        a, b = self.alpha, self.beta
        apa = 0.0 if math.isinf(a) else a * float(_kernels.norm_pdf(a))
        bpb = 0.0 if math.isinf(b) else b * float(_kernels.norm_pdf(b))
        pa = 0.0 if math.isinf(a) else float(_kernels.norm_pdf(a))
        pb = 0.0 if math.isinf(b) else float(_kernels.norm_pdf(b))
        z = self.mass
        return self.sigma**2 * (1.0 + (apa - bpb) / z - ((pa - pb) / z) ** 2)

    def sample(self, rng, size=None):
        """Inverse-CDF draws; always inside ``[lower, upper]``.

        Args:
            rng: an ``RngHandle``, ``numpy.random.Generator`` or integer seed.
            size: output shape; ``None`` for a single float.
        """
        from .datagen import as_generator

        u = as_generator(rng).random(size)
        return self.quantile(u)
