"""Kernel density estimators: symmetric (Gaussian, Epanechnikov, Cauchy),
asymmetric (gamma, reciprocal inverse Gaussian) with per-point normalization,
and the Mellin-transform varying-kernel estimator with integer bandwidth.

Also provides the bandwidth rules (Silverman nrd0, Sheather-Jones
solve-the-equation, least-squares CV, fixed) and model smoothing for the
smoothed-model estimator.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy import optimize as _sp_optimize
from scipy import special as _sp_special

from .families import Family, Gaussian, _arr, _ret
from .numerics import (DEFAULT_QUAD, ConfigError, DomainError, QuadratureSpec,
                       composite_gl, integrate)

_SQRT2PI = math.sqrt(2.0 * math.pi)

SYMMETRIC_KERNELS = ("gaussian", "epanechnikov", "cauchy", "triangular")
ASYMMETRIC_KERNELS = ("gamma", "rig")
ALL_KERNELS = SYMMETRIC_KERNELS + ASYMMETRIC_KERNELS + ("mt",)


class BandwidthError(ValueError):
    pass


# ---------------------------------------------------------------------------
# bandwidth rules
# ---------------------------------------------------------------------------

def _robust_scale(x: np.ndarray) -> float:
    sd = float(np.std(x, ddof=1))
    iqr = float(np.subtract(*np.percentile(x, [75, 25])))
    candidates = [v for v in (sd, iqr / 1.34) if v > 0]
    if not candidates:
        raise BandwidthError("sample has zero spread")
    return min(candidates)


def silverman_bandwidth(x: np.ndarray) -> float:
    """R's nrd0: 0.9 * min(sd, IQR/1.34) * n^(-1/5)."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise BandwidthError("need at least two observations")
    return 0.9 * _robust_scale(x) * x.size ** (-0.2)


def _norm_deriv_functional(x, b, order):
    # (1/(n(n-1) b^(order+1))) * sum_{i != j} phi^(order)((xi-xj)/b)
    d = (x[:, None] - x[None, :]) / b
    u = d.ravel()
    phi = np.exp(-0.5 * u * u) / _SQRT2PI
    if order == 4:
        h = u ** 4 - 6 * u ** 2 + 3
    elif order == 6:
        h = u ** 6 - 15 * u ** 4 + 45 * u ** 2 - 15
    else:
        raise ValueError(order)
    n = x.size
    total = float(np.sum(h * phi)) - n * (3.0 if order == 4 else -15.0) / _SQRT2PI
    return total / (n * (n - 1) * b ** (order + 1))


def sheather_jones_bandwidth(x: np.ndarray) -> float:
    """Solve-the-equation plug-in (Sheather & Jones 1991); falls back to
    Silverman's rule with a warning when root bracketing fails."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise BandwidthError("need at least two observations")
    n = x.size
    lam = _robust_scale(x)
    a = 0.920 * lam * n ** (-1.0 / 7.0)
    b = 0.912 * lam * n ** (-1.0 / 9.0)
    try:
        TD = -_norm_deriv_functional(x, b, 6)
        SD = _norm_deriv_functional(x, a, 4)
        if TD <= 0 or SD <= 0:
            raise ValueError("negative derivative functionals")

        RK = 1.0 / (2.0 * math.sqrt(math.pi))

        def eq(h):
            alpha2 = 1.357 * (SD / TD) ** (1.0 / 7.0) * h ** (5.0 / 7.0)
            SD_a2 = _norm_deriv_functional(x, alpha2, 4)
            if SD_a2 <= 0:
                return np.nan
            return (RK / (n * SD_a2)) ** 0.2 - h

        h0 = silverman_bandwidth(x)
        lo, hi = h0 / 10.0, h0 * 10.0
        flo, fhi = eq(lo), eq(hi)
        if not (np.isfinite(flo) and np.isfinite(fhi)) or flo * fhi > 0:
            raise ValueError("no sign change for the SJ equation")
        return float(_sp_optimize.brentq(eq, lo, hi, xtol=1e-8))
    except Exception:
        warnings.warn("Sheather-Jones root finding failed; using Silverman's rule")
        return silverman_bandwidth(x)


def lscv_bandwidth(x: np.ndarray, grid_size: int = 40) -> float:
    """Least-squares CV for the Gaussian kernel (closed-form criterion)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        raise BandwidthError("need at least two observations")
    d = x[:, None] - x[None, :]
    h0 = silverman_bandwidth(x)
    hs = h0 * np.exp(np.linspace(math.log(0.2), math.log(5.0), grid_size))

    def crit(h):
        # int fhat^2 = mean phi_{sqrt(2) h}(d); leave-one-out sum excludes i=j
        k2 = np.exp(-0.25 * (d / h) ** 2) / (h * math.sqrt(4.0 * math.pi))
        k1 = np.exp(-0.5 * (d / h) ** 2) / (h * _SQRT2PI)
        int_f2 = float(np.sum(k2)) / n ** 2
        loo = (float(np.sum(k1)) - n / (h * _SQRT2PI)) / (n * (n - 1))
        return int_f2 - 2.0 * loo

    vals = [crit(h) for h in hs]
    return float(hs[int(np.argmin(vals))])


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def _sym_kernel(kind: str):
    if kind == "gaussian":
        return lambda u: np.exp(-0.5 * u * u) / _SQRT2PI
    if kind == "epanechnikov":
        return lambda u: np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)
    if kind == "cauchy":
        return lambda u: 1.0 / (math.pi * (1.0 + u * u))
    if kind == "triangular":
        return lambda u: np.where(np.abs(u) <= 1.0, 1.0 - np.abs(u), 0.0)
    raise ConfigError(f"unknown symmetric kernel {kind!r}")


def _gamma_kernel_log(x, w, y):
    # log K_{x,w}(y) with K the gamma kernel of index x/w evaluated at y >= 0
    a = x / w
    with np.errstate(divide="ignore"):
        ly = np.log(y)
    return a * ly - _sp_special.gammaln(1.0 + a) - (1.0 + a) * math.log(w) - y / w


def _rig_kernel(x, w, y):
    # reciprocal inverse Gaussian kernel; m = max(x - w, tiny) keeps the
    # boundary case x < w evaluable
    m = np.maximum(x - w, 1e-12)
    val = np.exp(-(y - 2.0 * m + m * m / y) / (2.0 * w)) / np.sqrt(2.0 * math.pi * w * y)
    return val


@dataclass
class KernelDensityEstimate:
    """A fitted density estimate, evaluable at any point of its support."""
    kernel: str
    bandwidth: float
    sample: np.ndarray = field(repr=False)
    _norm: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        self.sample = np.asarray(self.sample, dtype=float)
        if self.kernel not in ALL_KERNELS:
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        if self.kernel in ASYMMETRIC_KERNELS + ("mt",):
            if np.any(self.sample < 0):
                raise DomainError(f"{self.kernel} kernel requires nonnegative data")
        if self.kernel == "mt":
            alpha = self.bandwidth
            if alpha != int(alpha) or not 1 <= alpha <= 50:
                raise BandwidthError("mt bandwidth must be an integer in 1..50")
        elif self.bandwidth <= 0:
            raise BandwidthError("bandwidth must be positive")
        if self.kernel in ASYMMETRIC_KERNELS:
            self._norm = self._build_normalizer()

    # -- asymmetric-kernel normalization c(y) = int K_{z,w}(y) dz ------------
    def _build_normalizer(self):
        w = self.bandwidth
        ymax = float(np.max(self.sample)) if self.sample.size else 1.0
        grid = np.unique(np.concatenate([
            np.linspace(0.0, min(10.0 * w, ymax + w), 64),
            np.geomspace(max(w * 1e-3, 1e-8), ymax * 1.5 + 10.0 * w, 128),
        ]))
        vals = np.array([self._c_of_y(float(y)) for y in grid])
        def norm(y):
            return np.interp(y, grid, vals)
        return norm

    def _c_of_y(self, y: float) -> float:
        w = self.bandwidth
        if y <= 0:
            return 1.0
        hi = y + 20.0 * math.sqrt(w * max(y, w)) + 20.0 * w
        if self.kernel == "gamma":
            f = lambda z: np.exp(_gamma_kernel_log(z, w, y))
        else:
            f = lambda z: _rig_kernel(z, w, y)
        return composite_gl(f, 0.0, hi, segments=200, nodes=8)

    # -- evaluation -----------------------------------------------------------
    @property
    def support(self):
        if self.kernel in ASYMMETRIC_KERNELS + ("mt",):
            return (0.0, np.inf)
        return (-np.inf, np.inf)

    _CHUNK = 4_000_000  # cap on pairwise-matrix size

    def _blocks(self, x):
        step = max(1, self._CHUNK // max(self.sample.size, 1))
        for i in range(0, x.size, step):
            yield slice(i, i + step)

    def evaluate(self, x):
        x = _arr(x)
        y = self.sample
        n = y.size
        w = self.bandwidth
        out = np.empty_like(x)
        if self.kernel in SYMMETRIC_KERNELS:
            K = _sym_kernel(self.kernel)
            for s in self._blocks(x):
                out[s] = K((x[s, None] - y[None, :]) / w).sum(axis=1) / (n * w)
        elif self.kernel == "mt":
            out = self._mt_eval(x)
        else:
            c = self._norm(y)
            for s in self._blocks(x):
                if self.kernel == "gamma":
                    terms = np.exp(_gamma_kernel_log(x[s, None], w, y[None, :]))
                else:
                    terms = _rig_kernel(x[s, None], w, y[None, :])
                out[s] = (terms / c[None, :]).sum(axis=1) / n
            out[x < 0] = 0.0
        return _ret(np.maximum(out, 0.0), x)

    def _mt_eval(self, x):
        alpha = int(self.bandwidth)
        y = self.sample
        out = np.zeros_like(x)
        pos = np.flatnonzero(x > 0)
        xp = x[pos]
        vals = np.empty_like(xp)
        for s in self._blocks(xp):
            r = alpha * xp[s, None] / y[None, :]
            log_terms = alpha * np.log(r) - r - np.log(y[None, :]) - _sp_special.gammaln(alpha)
            vals[s] = np.exp(log_terms).sum(axis=1) / y.size
        out[pos] = vals
        return out

    __call__ = evaluate

    def pdf(self, x):
        return self.evaluate(x)

    def logpdf(self, x):
        x = _arr(x)
        y = self.sample
        w = self.bandwidth
        out = np.empty_like(x)
        if self.kernel == "gaussian":
            for s in self._blocks(x):
                z = (x[s, None] - y[None, :]) / w
                out[s] = _sp_special.logsumexp(-0.5 * z * z, axis=1) - math.log(y.size * w * _SQRT2PI)
        elif self.kernel == "cauchy":
            for s in self._blocks(x):
                z = (x[s, None] - y[None, :]) / w
                out[s] = _sp_special.logsumexp(-np.log1p(z * z), axis=1) - math.log(y.size * w * math.pi)
        else:
            with np.errstate(divide="ignore"):
                out = np.log(_arr(self.evaluate(x)))
        return _ret(out, x)

    def cdf(self, x):
        x = _arr(x)
        if self.kernel != "gaussian":
            raise ConfigError("smoothed cdf wired for the Gaussian kernel only")
        z = (x[:, None] - self.sample[None, :]) / self.bandwidth
        return _ret(_sp_special.ndtr(z).mean(axis=1), x)


BandwidthRule = Union[str, float, Tuple[str, float]]


def fit(kernel: str, bandwidth_rule: BandwidthRule, sample) -> KernelDensityEstimate:
    """Fit a KDE; `bandwidth_rule` is "silverman" | "sj" | "lscv" |
    ("fixed", value) | a bare number (fixed)."""
    sample = np.asarray(sample, dtype=float)
    if sample.size < 2:
        raise BandwidthError("need at least two observations")
    if isinstance(bandwidth_rule, (int, float)):
        bw = float(bandwidth_rule)
    elif isinstance(bandwidth_rule, tuple) and bandwidth_rule[0] == "fixed":
        bw = float(bandwidth_rule[1])
    elif bandwidth_rule == "silverman":
        bw = silverman_bandwidth(sample)
    elif bandwidth_rule == "sj":
        bw = sheather_jones_bandwidth(sample)
    elif bandwidth_rule == "lscv":
        bw = lscv_bandwidth(sample)
    else:
        raise ConfigError(f"unknown bandwidth rule {bandwidth_rule!r}")
    return KernelDensityEstimate(kernel=kernel, bandwidth=bw, sample=sample)


# ---------------------------------------------------------------------------
# model smoothing (smoothed-model estimator)
# ---------------------------------------------------------------------------

@dataclass
class SmoothedModel:
    """p*(x) = (1/w) int p(y) K((x-y)/w) dy, or its MT analogue."""
    family: Family
    kernel: str
    bandwidth: float
    _gauss_closed: Optional[Gaussian] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kernel in ASYMMETRIC_KERNELS:
            raise ConfigError("asymmetric kernels are not supported for model smoothing")
        if self.kernel == "gaussian" and isinstance(self.family, Gaussian):
            # Gaussian model + Gaussian kernel convolves in closed form
            self._gauss_closed = Gaussian(self.family.mu,
                                          math.hypot(self.family.sigma, self.bandwidth))

    @property
    def support(self):
        if self.kernel == "mt":
            return (0.0, np.inf)
        return (-np.inf, np.inf)

    def pdf(self, x):
        x = _arr(x)
        if self._gauss_closed is not None:
            return _ret(_arr(self._gauss_closed.pdf(x)), x)
        w = self.bandwidth
        lo, hi = self.family.support
        if self.kernel == "mt":
            alpha = int(w)
            lo = max(lo, 1e-12)
            hi = min(hi, np.inf)
            if not np.isfinite(hi):
                hi = float(self.family.quantile(1 - 1e-9))
            def transform(xi):
                def f(y):
                    r = alpha * xi / y
                    with np.errstate(divide="ignore", invalid="ignore"):
                        lt = alpha * np.log(r) - r - np.log(y) - _sp_special.gammaln(alpha)
                    return np.where(y > 0, np.exp(lt) * _arr(self.family.pdf(y)), 0.0)
                return composite_gl(f, lo, hi, segments=200, nodes=8) if xi > 0 else 0.0
            return _ret(np.array([transform(float(xi)) for xi in x]), x)
        K = _sym_kernel(self.kernel)
        qlo = lo if np.isfinite(lo) else float(self.family.quantile(1e-10))
        qhi = hi if np.isfinite(hi) else float(self.family.quantile(1 - 1e-10))
        out = np.empty_like(x)
        for i, xi in enumerate(x):
            a = max(qlo, xi - 12 * w) if self.kernel == "gaussian" else max(qlo, xi - w)
            b = min(qhi, xi + 12 * w) if self.kernel == "gaussian" else min(qhi, xi + w)
            if self.kernel == "cauchy":
                a, b = qlo, qhi
            if a >= b:
                out[i] = 0.0
                continue
            out[i] = composite_gl(
                lambda y: K((xi - y) / w) * _arr(self.family.pdf(y)) / w,
                a, b, segments=64, nodes=8)
        return _ret(out, x)

    def logpdf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore"):
            return _ret(np.log(_arr(self.pdf(x))), x)

    __call__ = pdf


def smooth_model(family: Family, kernel: str, bandwidth: float) -> SmoothedModel:
    return SmoothedModel(family=family, kernel=kernel, bandwidth=bandwidth)


# ---------------------------------------------------------------------------
# bivariate product kernel (baselines in the bivariate experiments)
# ---------------------------------------------------------------------------

@dataclass
class ProductKDE:
    """Gaussian product kernel, one bandwidth per coordinate."""
    sample: np.ndarray
    bandwidths: Tuple[float, float]

    @classmethod
    def fit(cls, sample):
        sample = np.asarray(sample, dtype=float)
        return cls(sample=sample, bandwidths=tuple(
            silverman_bandwidth(sample[:, j]) for j in range(sample.shape[1])))

    def pdf(self, xy):
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        out = np.ones(xy.shape[0])
        acc = np.zeros(xy.shape[0])
        kx = np.exp(-0.5 * ((xy[:, None, 0] - self.sample[None, :, 0]) / self.bandwidths[0]) ** 2)
        ky = np.exp(-0.5 * ((xy[:, None, 1] - self.sample[None, :, 1]) / self.bandwidths[1]) ** 2)
        acc = (kx * ky).sum(axis=1)
        norm = self.sample.shape[0] * self.bandwidths[0] * self.bandwidths[1] * 2.0 * math.pi
        return acc / norm
