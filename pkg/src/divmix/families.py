"""Parametric families and two-component mixtures used by the experiments:
pdf/cdf/quantile/sampling/parameter gradients, closed-form moments and
L-moments, contamination schemes, and parameter-space wrappers for the
estimators.

Scale/shape parameters must be positive, correlations in (-1, 1); violations
raise ParameterError at construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize as _sp_optimize
from scipy import special as _sp_special
from scipy import stats as _sp_stats

from .numerics import ConfigError, DEFAULT_QUAD, integrate

_SQRT2PI = math.sqrt(2.0 * math.pi)


class ParameterError(ValueError):
    pass


class UnsupportedError(NotImplementedError):
    pass


def _arr(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def _ret(out, x):
    out = np.asarray(out)
    if out.size == 1 and out.ndim <= 1:
        return float(out.reshape(-1)[0])
    return out


def _shifted_legendre(r: int) -> np.polynomial.Polynomial:
    # L_r(u) = sum_k (-1)^{r-k} C(r,k) C(r+k,k) u^k  (exact integer coefficients)
    coeffs = [(-1) ** (r - k) * math.comb(r, k) * math.comb(r + k, k) for k in range(r + 1)]
    return np.polynomial.Polynomial(coeffs)


def _lmoment_from_quantile(quantile: Callable, r: int, tol: float = 1e-8) -> float:
    # lambda_r = int_0^1 F^{-1}(u) L_{r-1}(u) du, by adaptive quadrature
    L = _shifted_legendre(r - 1)

    def f(u):
        return quantile(u) * L(u)

    from .numerics import QuadratureSpec
    return integrate(f, 1e-12, 1.0 - 1e-12,
                     QuadratureSpec(abs_tol=tol, rel_tol=tol))


class Family:
    """Common behavior; concrete families fill in the distribution calls."""

    kind = "family"
    support: Tuple[float, float] = (-np.inf, np.inf)

    @property
    def theta(self) -> np.ndarray:
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    def logpdf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore"):
            return _ret(np.log(_arr(self.pdf(x))), x)

    def cdf(self, x):
        raise NotImplementedError

    def quantile(self, u):
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return _arr(self.quantile(rng.uniform(size=n)))

    def moment(self, i: int) -> float:
        raise UnsupportedError(f"moment({i}) for {self.kind}")

    def lmoment(self, r: int) -> float:
        if r not in (2, 3, 4):
            raise UnsupportedError(f"lmoment order {r}")
        return _lmoment_from_quantile(lambda u: _arr(self.quantile(u)), r)

    def grad_theta(self, x) -> np.ndarray:
        """Gradient of the pdf with respect to the free parameters, at x."""
        raise UnsupportedError(f"grad_theta for {self.kind}")


# ---------------------------------------------------------------------------
# univariate families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gaussian(Family):
    mu: float = 0.0
    sigma: float = 1.0
    kind = "gaussian"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ParameterError("sigma must be positive")

    @property
    def theta(self):
        return np.array([self.mu, self.sigma])

    def pdf(self, x):
        x = _arr(x)
        z = (x - self.mu) / self.sigma
        return _ret(np.exp(-0.5 * z * z) / (self.sigma * _SQRT2PI), x)

    def logpdf(self, x):
        x = _arr(x)
        z = (x - self.mu) / self.sigma
        return _ret(-0.5 * z * z - math.log(self.sigma * _SQRT2PI), x)

    def cdf(self, x):
        x = _arr(x)
        return _ret(_sp_special.ndtr((x - self.mu) / self.sigma), x)

    def quantile(self, u):
        u = _arr(u)
        return _ret(self.mu + self.sigma * _sp_special.ndtri(u), u)

    def sample(self, n, rng):
        return self.mu + self.sigma * rng.standard_normal(n)

    def moment(self, i):
        # binomial expansion around the mean; central moments (i-1)!! sigma^i
        tot = 0.0
        for k in range(0, i + 1, 2):
            central = self.sigma ** k * math.prod(range(k - 1, 0, -2)) if k else 1.0
            tot += math.comb(i, k) * self.mu ** (i - k) * central
        return tot

    def lmoment(self, r):
        if r == 2:
            return self.sigma / math.sqrt(math.pi)
        if r == 3:
            return 0.0
        if r == 4:
            tau4 = 30.0 / math.pi * math.atan(math.sqrt(2.0)) - 9.0
            return tau4 * self.sigma / math.sqrt(math.pi)
        raise UnsupportedError(f"lmoment order {r}")

    def grad_theta(self, x):
        x = _arr(x)
        p = _arr(self.pdf(x))
        z = (x - self.mu) / self.sigma
        dmu = p * z / self.sigma
        dsig = p * (z * z - 1.0) / self.sigma
        return np.stack([dmu, dsig])


@dataclass(frozen=True)
class Exponential(Family):
    rate: float = 1.0
    kind = "exponential"
    support = (0.0, np.inf)

    def __post_init__(self):
        if self.rate <= 0:
            raise ParameterError("rate must be positive")

    @property
    def theta(self):
        return np.array([self.rate])

    def pdf(self, x):
        x = _arr(x)
        out = np.where(x >= 0, self.rate * np.exp(-self.rate * x), 0.0)
        return _ret(out, x)

    def cdf(self, x):
        x = _arr(x)
        return _ret(np.where(x >= 0, -np.expm1(-self.rate * x), 0.0), x)

    def quantile(self, u):
        u = _arr(u)
        return _ret(-np.log1p(-u) / self.rate, u)

    def moment(self, i):
        return math.factorial(i) / self.rate ** i

    def lmoment(self, r):
        if r == 2:
            return 0.5 / self.rate
        if r == 3:
            return 1.0 / (6.0 * self.rate)
        if r == 4:
            return 1.0 / (12.0 * self.rate)
        raise UnsupportedError(f"lmoment order {r}")

    def grad_theta(self, x):
        x = _arr(x)
        p = _arr(self.pdf(x))
        return np.stack([p * (1.0 / self.rate - x)])


@dataclass(frozen=True)
class Weibull(Family):
    scale: float = 1.0
    shape: float = 1.0
    kind = "weibull"
    support = (0.0, np.inf)

    def __post_init__(self):
        if self.scale <= 0 or self.shape <= 0:
            raise ParameterError("scale and shape must be positive")

    @property
    def theta(self):
        return np.array([self.scale, self.shape])

    def pdf(self, x):
        x = _arr(x)
        out = np.zeros_like(x)
        pos = x > 0
        z = x[pos] / self.scale
        out[pos] = (self.shape / self.scale) * z ** (self.shape - 1.0) * np.exp(-z ** self.shape)
        return _ret(out, x)

    def logpdf(self, x):
        x = _arr(x)
        out = np.full_like(x, -np.inf)
        pos = x > 0
        z = x[pos] / self.scale
        out[pos] = (math.log(self.shape / self.scale)
                    + (self.shape - 1.0) * np.log(z) - z ** self.shape)
        return _ret(out, x)

    def cdf(self, x):
        x = _arr(x)
        out = np.where(x > 0, -np.expm1(-(np.maximum(x, 0) / self.scale) ** self.shape), 0.0)
        return _ret(out, x)

    def quantile(self, u):
        u = _arr(u)
        return _ret(self.scale * (-np.log1p(-u)) ** (1.0 / self.shape), u)

    def moment(self, i):
        return self.scale ** i * math.gamma(1.0 + i / self.shape)

    def lmoment(self, r):
        # closed forms shared with the semiparametric L-moment constraints
        s, v = self.scale, self.shape
        lam2 = s * (1.0 - 2.0 ** (-1.0 / v)) * math.gamma(1.0 + 1.0 / v)
        if r == 2:
            return lam2
        if r == 3:
            return lam2 * (3.0 - 2.0 * (1.0 - 3.0 ** (-1.0 / v)) / (1.0 - 2.0 ** (-1.0 / v)))
        if r == 4:
            return lam2 * (6.0 + (5.0 * (1.0 - 4.0 ** (-1.0 / v))
                                  - 10.0 * (1.0 - 3.0 ** (-1.0 / v))) / (1.0 - 2.0 ** (-1.0 / v)))
        raise UnsupportedError(f"lmoment order {r}")

    def grad_theta(self, x):
        x = _arr(x)
        p = _arr(self.pdf(x))
        out = np.zeros((2, x.size))
        pos = x > 0
        z = x[pos] / self.scale
        zs = z ** self.shape
        out[0, pos] = p[pos] * (self.shape / self.scale) * (zs - 1.0)
        out[1, pos] = p[pos] * (1.0 / self.shape + np.log(z) * (1.0 - zs))
        return out


@dataclass(frozen=True)
class GPD(Family):
    """Generalized Pareto with positive shape, location fixed at `loc`."""
    shape: float = 1.0
    scale: float = 1.0
    loc: float = 0.0
    kind = "gpd"

    def __post_init__(self):
        if self.scale <= 0 or self.shape <= 0:
            raise ParameterError("scale and shape must be positive")
        object.__setattr__(self, "support", (self.loc, np.inf))

    @property
    def theta(self):
        return np.array([self.shape, self.scale])

    def pdf(self, x):
        x = _arr(x)
        y = x - self.loc
        out = np.zeros_like(x)
        pos = y >= 0
        out[pos] = (1.0 / self.scale) * (1.0 + self.shape * y[pos] / self.scale) ** (-1.0 - 1.0 / self.shape)
        return _ret(out, x)

    def cdf(self, x):
        x = _arr(x)
        y = np.maximum(x - self.loc, 0.0)
        out = np.where(x >= self.loc,
                       1.0 - (1.0 + self.shape * y / self.scale) ** (-1.0 / self.shape), 0.0)
        return _ret(out, x)

    def quantile(self, u):
        u = _arr(u)
        return _ret(self.loc + self.scale / self.shape * ((1.0 - u) ** (-self.shape) - 1.0), u)

    def moment(self, i):
        if i * self.shape >= 1.0:
            return np.inf
        def f(u):
            return _arr(self.quantile(u)) ** i
        return integrate(f, 1e-12, 1 - 1e-12, DEFAULT_QUAD)

    def grad_theta(self, x):
        x = _arr(x)
        p = _arr(self.pdf(x))
        out = np.zeros((2, x.size))
        pos = x >= self.loc
        y = x[pos] - self.loc
        w = 1.0 + self.shape * y / self.scale
        out[0, pos] = p[pos] * (np.log(w) / self.shape ** 2
                                - (1.0 + 1.0 / self.shape) * (y / self.scale) / w)
        out[1, pos] = p[pos] * (-1.0 / self.scale
                                + (1.0 + self.shape) * y / (self.scale ** 2 * w))
        return out


@dataclass(frozen=True)
class Lognormal(Family):
    mu: float = 0.0
    sigma: float = 1.0
    kind = "lognormal"
    support = (0.0, np.inf)

    def __post_init__(self):
        if self.sigma <= 0:
            raise ParameterError("sigma must be positive")

    @property
    def theta(self):
        return np.array([self.mu, self.sigma])

    def pdf(self, x):
        x = _arr(x)
        out = np.zeros_like(x)
        pos = x > 0
        z = (np.log(x[pos]) - self.mu) / self.sigma
        out[pos] = np.exp(-0.5 * z * z) / (x[pos] * self.sigma * _SQRT2PI)
        return _ret(out, x)

    def cdf(self, x):
        x = _arr(x)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = _sp_special.ndtr((np.log(x[pos]) - self.mu) / self.sigma)
        return _ret(out, x)

    def quantile(self, u):
        u = _arr(u)
        return _ret(np.exp(self.mu + self.sigma * _sp_special.ndtri(u)), u)

    def moment(self, i):
        return math.exp(i * self.mu + 0.5 * i * i * self.sigma ** 2)

    # L-moments have no closed formula; inherited quantile quadrature is used.

    def grad_theta(self, x):
        x = _arr(x)
        p = _arr(self.pdf(x))
        out = np.zeros((2, x.size))
        pos = x > 0
        z = (np.log(x[pos]) - self.mu) / self.sigma
        out[0, pos] = p[pos] * z / self.sigma
        out[1, pos] = p[pos] * (z * z - 1.0) / self.sigma
        return out


@dataclass(frozen=True)
class TwoSidedWeibull(Family):
    """Symmetric two-sided Weibull (generalizes the Laplace distribution)."""
    shape: float = 1.0
    scale: float = 1.0
    kind = "two-sided-weibull"

    def __post_init__(self):
        if self.scale <= 0 or self.shape <= 0:
            raise ParameterError("scale and shape must be positive")

    @property
    def theta(self):
        return np.array([self.shape, self.scale])

    def pdf(self, x):
        x = _arr(x)
        z = np.abs(x) / self.scale
        out = np.zeros_like(x)
        pos = z > 0
        out[pos] = 0.5 * (self.shape / self.scale) * z[pos] ** (self.shape - 1.0) * np.exp(-z[pos] ** self.shape)
        if self.shape == 1.0:
            out[~pos] = 0.5 / self.scale
        elif self.shape < 1.0:
            out[~pos] = np.inf
        return _ret(out, x)

    def cdf(self, x):
        x = _arr(x)
        z = (np.abs(x) / self.scale) ** self.shape
        out = np.where(x >= 0, 1.0 - 0.5 * np.exp(-z), 0.5 * np.exp(-z))
        return _ret(out, x)

    def quantile(self, u):
        u = _arr(u)
        upper = u >= 0.5
        out = np.empty_like(u)
        out[upper] = self.scale * (-np.log(2.0 * (1.0 - u[upper]))) ** (1.0 / self.shape)
        out[~upper] = -self.scale * (-np.log(2.0 * u[~upper])) ** (1.0 / self.shape)
        return _ret(out, u)

    def sample(self, n, rng):
        # sign +-1 w.p. 1/2, magnitude Weibull(shape, scale)
        signs = rng.integers(0, 2, size=n) * 2 - 1
        mags = self.scale * rng.weibull(self.shape, size=n)
        return signs * mags

    def moment(self, i):
        if i % 2 == 1:
            return 0.0
        return self.scale ** i * math.gamma(1.0 + i / self.shape)

    def lmoment(self, r):
        v, s = self.shape, self.scale
        g = s * math.gamma(1.0 + 1.0 / v)
        if r == 2:
            return (1.0 - 0.5 ** (1.0 + 1.0 / v)) * g
        if r == 3:
            return 0.0
        if r == 4:
            return (1.0 - 6.0 / 2.0 ** (1.0 + 1.0 / v)
                    + 15.0 / (2.0 * 3.0 ** (1.0 + 1.0 / v))
                    - 5.0 / (2.0 * 4.0 ** (1.0 + 1.0 / v))) * g
        raise UnsupportedError(f"lmoment order {r}")

    def grad_theta(self, x):
        x = _arr(x)
        p = _arr(self.pdf(x))
        out = np.zeros((2, x.size))
        pos = np.abs(x) > 0
        z = np.abs(x[pos]) / self.scale
        zs = z ** self.shape
        out[0, pos] = p[pos] * (1.0 / self.shape + np.log(z) * (1.0 - zs))
        out[1, pos] = p[pos] * (self.shape / self.scale) * (zs - 1.0)
        return out


@dataclass(frozen=True)
class BivariateGaussian(Family):
    """Bivariate normal with common marginal variance and correlation rho,
    the covariance structure of the linear-discriminant example."""
    mean: Tuple[float, float] = (0.0, 0.0)
    sigma2: float = 1.0
    rho: float = 0.0
    kind = "bivariate-gaussian"

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ParameterError("sigma2 must be positive")
        if abs(self.rho) >= self.sigma2:
            raise ParameterError("|rho| must be below sigma2 for a valid covariance")

    @property
    def theta(self):
        return np.array([*self.mean, self.sigma2, self.rho])

    @property
    def cov(self):
        return np.array([[self.sigma2, self.rho], [self.rho, self.sigma2]])

    def pdf(self, xy):
        xy = np.asarray(xy, dtype=float)
        pts = xy.reshape(-1, 2)
        det = self.sigma2 ** 2 - self.rho ** 2
        inv = np.array([[self.sigma2, -self.rho], [-self.rho, self.sigma2]]) / det
        c = pts - np.asarray(self.mean)
        q = np.einsum("ni,ij,nj->n", c, inv, c)
        out = np.exp(-0.5 * q) / (2.0 * math.pi * math.sqrt(det))
        return out if xy.ndim > 1 else float(out[0])

    def sample(self, n, rng):
        L = np.linalg.cholesky(self.cov)
        z = rng.standard_normal((n, 2))
        return np.asarray(self.mean) + z @ L.T

    def moment2d(self, a: int, b: int) -> float:
        """Mixed moment E[X^a Y^b] for a + b <= 4 via central-moment tables."""
        if a + b > 4:
            raise UnsupportedError("bivariate moments wired up to total degree 4")
        s2, r = self.sigma2, self.rho
        central = {
            (0, 0): 1.0, (1, 0): 0.0, (0, 1): 0.0,
            (2, 0): s2, (0, 2): s2, (1, 1): r,
            (3, 0): 0.0, (0, 3): 0.0, (2, 1): 0.0, (1, 2): 0.0,
            (4, 0): 3 * s2 ** 2, (0, 4): 3 * s2 ** 2,
            (3, 1): 3 * s2 * r, (1, 3): 3 * s2 * r,
            (2, 2): s2 ** 2 + 2 * r ** 2,
        }
        mx, my = self.mean
        tot = 0.0
        for i in range(a + 1):
            for j in range(b + 1):
                tot += (math.comb(a, i) * math.comb(b, j)
                        * mx ** (a - i) * my ** (b - j) * central[(i, j)])
        return tot


# ---------------------------------------------------------------------------
# mixtures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MixtureSpec:
    """lam * component1 + (1 - lam) * component0."""
    lam: float
    component1: Family
    component0: Family
    kind = "mixture"

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ParameterError("mixture proportion must lie in (0, 1)")

    @property
    def support(self):
        lo = min(self.component1.support[0], self.component0.support[0])
        hi = max(self.component1.support[1], self.component0.support[1])
        return (lo, hi)

    @property
    def theta(self):
        return np.concatenate([[self.lam], self.component1.theta, self.component0.theta])

    def pdf(self, x):
        x = _arr(x)
        out = self.lam * _arr(self.component1.pdf(x)) + (1.0 - self.lam) * _arr(self.component0.pdf(x))
        return _ret(out, x)

    def logpdf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore"):
            return _ret(np.log(_arr(self.pdf(x))), x)

    def cdf(self, x):
        x = _arr(x)
        out = self.lam * _arr(self.component1.cdf(x)) + (1.0 - self.lam) * _arr(self.component0.cdf(x))
        return _ret(out, x)

    def quantile(self, u):
        u = _arr(u)
        lo = min(self.component1.quantile(1e-12), self.component0.quantile(1e-12))
        hi = max(self.component1.quantile(1 - 1e-12), self.component0.quantile(1 - 1e-12))
        out = np.array([_sp_optimize.brentq(lambda x, ui=ui: self.cdf(x) - ui, lo, hi,
                                            xtol=1e-12) for ui in u])
        return _ret(out, u)

    def sample(self, n, rng):
        return self.sample_with_labels(n, rng)[0]

    def sample_with_labels(self, n, rng):
        # component indicator first; keeps labels available for SEM baselines
        z = rng.uniform(size=n) < self.lam
        out = np.empty(n) if not isinstance(self.component1, BivariateGaussian) else np.empty((n, 2))
        n1 = int(z.sum())
        out[z] = self.component1.sample(n1, rng)
        out[~z] = self.component0.sample(n - n1, rng)
        return out, z.astype(int)

    def labels(self, x) -> np.ndarray:
        """Conditional label densities h(j | x), columns (component1, component0)."""
        x = _arr(x)
        p1 = self.lam * _arr(self.component1.pdf(x))
        p0 = (1.0 - self.lam) * _arr(self.component0.pdf(x))
        tot = p1 + p0
        tot = np.where(tot > 0, tot, 1.0)
        h1 = p1 / tot
        return np.column_stack([h1, 1.0 - h1])

    def moment(self, i):
        return self.lam * self.component1.moment(i) + (1 - self.lam) * self.component0.moment(i)


# ---------------------------------------------------------------------------
# contamination schemes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContaminationSpec:
    scheme: str
    count: int = 0
    value: float = 0.0
    low: Optional[Tuple[float, float]] = None
    high: Optional[Tuple[float, float]] = None
    dist: Optional[Family] = None
    interval: Optional[Tuple[float, float]] = None  # for uniform replace/append
    upper: Optional[float] = None                   # ReplaceRandomByDist with U[max(y), upper]

    SCHEMES = ("replace-largest-by-value", "append-uniform-tails",
               "replace-random-by-dist", "add-uniform-to-extremes")

    def __post_init__(self):
        if self.scheme not in self.SCHEMES:
            raise ConfigError(f"unknown contamination scheme {self.scheme!r}")
        if self.count < 0:
            raise ConfigError("count must be nonnegative")


def contaminate(sample: np.ndarray, spec: ContaminationSpec, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(sample, dtype=float).copy()
    n = x.shape[0]
    k = spec.count
    if k == 0:
        return x
    if k > n:
        raise ConfigError("contamination count exceeds sample size")
    if spec.scheme == "replace-largest-by-value":
        idx = np.argsort(x)[-k:]
        x[idx] = spec.value
        return x
    if spec.scheme == "add-uniform-to-extremes":
        order = np.argsort(x)
        if spec.low is not None:
            x[order[:k]] += rng.uniform(spec.low[0], spec.low[1], size=k)
        if spec.high is not None:
            x[order[-k:]] += rng.uniform(spec.high[0], spec.high[1], size=k)
        return x
    if spec.scheme == "append-uniform-tails":
        if spec.interval is None:
            raise ConfigError("append-uniform-tails requires an interval")
        extra = rng.uniform(spec.interval[0], spec.interval[1], size=k)
        return np.concatenate([x, extra])
    # replace-random-by-dist
    idx = rng.choice(n, size=k, replace=False)
    if spec.dist is not None:
        x[idx] = spec.dist.sample(k, rng)
    elif spec.upper is not None:
        x[idx] = rng.uniform(np.max(x), spec.upper, size=k)
    elif spec.interval is not None:
        x[idx] = rng.uniform(spec.interval[0], spec.interval[1], size=k)
    else:
        raise ConfigError("replace-random-by-dist requires dist, interval or upper")
    return x


# ---------------------------------------------------------------------------
# parameter spaces for the estimators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpace:
    """A parametrized model: phi-vector -> density object, plus search box."""
    names: Tuple[str, ...]
    bounds: Tuple[Tuple[float, float], ...]
    build: Callable[[np.ndarray], object]
    label: str = ""
    is_mixture: bool = False

    @property
    def dim(self) -> int:
        return len(self.names)

    def clip(self, phi):
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return np.clip(np.atleast_1d(np.asarray(phi, dtype=float)), lo, hi)


def gaussian_space(mu_bounds=(-10.0, 10.0), sigma_bounds=(1e-3, 50.0),
                   fixed_sigma: Optional[float] = None) -> ModelSpace:
    if fixed_sigma is not None:
        return ModelSpace(names=("mu",), bounds=(mu_bounds,),
                          build=lambda v: Gaussian(float(v[0]), fixed_sigma),
                          label="gaussian-location")
    return ModelSpace(names=("mu", "sigma"), bounds=(mu_bounds, sigma_bounds),
                      build=lambda v: Gaussian(float(v[0]), float(v[1])),
                      label="gaussian")


def gpd_space(shape_bounds=(1e-3, 50.0), scale_bounds=(1e-3, 50.0)) -> ModelSpace:
    return ModelSpace(names=("shape", "scale"), bounds=(shape_bounds, scale_bounds),
                      build=lambda v: GPD(float(v[0]), float(v[1])), label="gpd")


def weibull_space(scale_bounds=(1e-3, 50.0), shape_bounds=(1e-3, 50.0)) -> ModelSpace:
    return ModelSpace(names=("scale", "shape"), bounds=(scale_bounds, shape_bounds),
                      build=lambda v: Weibull(float(v[0]), float(v[1])), label="weibull")


def gaussian_mixture_space(sigma1=1.0, sigma2=1.0, lam_bounds=(0.01, 0.99),
                           mu_bounds=(-10.0, 10.0)) -> ModelSpace:
    def build(v):
        return MixtureSpec(float(v[0]), Gaussian(float(v[1]), sigma1), Gaussian(float(v[2]), sigma2))
    return ModelSpace(names=("lam", "mu1", "mu2"),
                      bounds=(lam_bounds, mu_bounds, mu_bounds),
                      build=build, label="gaussian-mixture", is_mixture=True)


def weibull_mixture_space(scale1=0.5, scale2=2.0, lam_bounds=(0.01, 0.99),
                          shape_bounds=(0.05, 20.0)) -> ModelSpace:
    def build(v):
        return MixtureSpec(float(v[0]), Weibull(scale1, float(v[1])), Weibull(scale2, float(v[2])))
    return ModelSpace(names=("lam", "shape1", "shape2"),
                      bounds=(lam_bounds, shape_bounds, shape_bounds),
                      build=build, label="weibull-mixture", is_mixture=True)


# ---------------------------------------------------------------------------
# serialization of samples (one observation per line; two comma-separated
# columns for bivariate data)
# ---------------------------------------------------------------------------

def save_sample(path, sample: np.ndarray):
    sample = np.asarray(sample, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        if sample.ndim == 1:
            for v in sample:
                fh.write(f"{float(v)!r}\n")
        else:
            for row in sample:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_sample(path) -> np.ndarray:
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            if len(parts) != width:
                raise ConfigError(f"{path}:{lineno}: inconsistent column count")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    arr = np.asarray(rows, dtype=float)
    if width == 1:
        return arr.ravel()
    return arr


FAMILY_KINDS = {
    "gaussian": Gaussian,
    "exponential": Exponential,
    "weibull": Weibull,
    "gpd": GPD,
    "lognormal": Lognormal,
    "two-sided-weibull": TwoSidedWeibull,
    "bivariate-gaussian": BivariateGaussian,
}


def family_from_config(cfg: dict) -> Family:
    kind = cfg.get("kind")
    if kind == "mixture":
        return MixtureSpec(float(cfg["lambda"]),
                           family_from_config(cfg["component1"]),
                           family_from_config(cfg["component0"]))
    if kind not in FAMILY_KINDS:
        raise ConfigError(f"unknown family kind {kind!r}")
    params = {k: (tuple(v) if isinstance(v, list) else v)
              for k, v in cfg.items() if k != "kind"}
    return FAMILY_KINDS[kind](**params)
