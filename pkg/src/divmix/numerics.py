"""Shared numeric substrate: derivative-free optimizers, quadrature with
Gauss-Legendre fallback, small linear algebra helpers and seeded RNG streams.

Optimizers and adaptive quadrature are thin wrappers over scipy; the wrappers
pin down the contracts the estimators rely on (bounds respected, f* never
worse than f(x0), fallback quadrature on adaptive failure, deterministic
restarts).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate as _sp_integrate
from scipy import linalg as _sp_linalg
from scipy import optimize as _sp_optimize


class DomainError(ValueError):
    """Argument outside the mathematical domain of the function."""


class IntegrationError(RuntimeError):
    """Quadrature produced a non-finite value; carries the offending abscissa."""

    def __init__(self, message: str, abscissa: Optional[float] = None):
        super().__init__(message)
        self.abscissa = abscissa


class SingularMatrixError(RuntimeError):
    pass


class ConfigError(ValueError):
    """Invalid experiment or estimator configuration."""


RNG_KIND = "numpy-pcg64-seedseq"


def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def split(seed: int, index: int) -> np.random.Generator:
    """Independent stream for replication `index`; deterministic in (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


# ---------------------------------------------------------------------------
# optimizers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimizerSpec:
    method: str = "nelder-mead"
    tol_x: float = 1e-8
    tol_f: float = 1e-10
    max_evals: int = 4000
    bounds: Optional[Tuple[Tuple[float, float], ...]] = None
    restarts: int = 1
    polish: bool = False

    def __post_init__(self):
        if self.tol_x <= 0 or self.tol_f <= 0:
            raise ConfigError("optimizer tolerances must be positive")


@dataclass
class OptResult:
    x: np.ndarray
    fun: float
    nfev: int
    status: str  # "converged" | "max-iter"


def _clip_to_bounds(x: np.ndarray, bounds) -> np.ndarray:
    if bounds is None:
        return x
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    return np.clip(x, lo, hi)


def _coordinate_polish(f, x, fx, bounds, tol, max_sweeps=4):
    # Brent line searches per coordinate; cheap high-precision finish for
    # smooth low-dimensional objectives where Nelder-Mead stalls near 1e-6.
    d = len(x)
    x = np.asarray(x, dtype=float).copy()
    nfev = 0
    for _ in range(max_sweeps):
        moved = 0.0
        for i in range(d):
            if bounds is not None:
                lo, hi = bounds[i]
            else:
                lo, hi = x[i] - 1.0, x[i] + 1.0
            span = max(abs(x[i]) * 1e-3, 1e-4)
            a, b = max(lo, x[i] - span), min(hi, x[i] + span)
            if not a < b:
                continue

            def g(t, i=i):
                xt = x.copy()
                xt[i] = t
                return f(xt)

            res = _sp_optimize.minimize_scalar(
                g, bounds=(a, b), method="bounded",
                options={"xatol": tol * 1e-2, "maxiter": 80})
            nfev += res.nfev
            if np.isfinite(res.fun) and res.fun < fx:
                moved = max(moved, abs(res.x - x[i]))
                x[i], fx = res.x, res.fun
        if moved < tol:
            break
    return x, fx, nfev


def nelder_mead(f: Callable[[np.ndarray], float], x0, spec: OptimizerSpec,
                rng_: Optional[np.random.Generator] = None) -> OptResult:
    """Bounded Nelder-Mead with deterministic jittered restarts.

    Guarantee: the returned f* is never worse than f(x0); bounds are enforced
    by clipping candidate points before evaluation.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    bounds = spec.bounds
    x0 = _clip_to_bounds(x0, bounds)
    if rng_ is None:
        rng_ = rng(20230517)

    def fc(x):
        v = f(_clip_to_bounds(np.atleast_1d(x), bounds))
        return v if np.isfinite(v) else 1e50

    starts = [x0]
    for _ in range(max(0, spec.restarts - 1)):
        if bounds is not None:
            lo = np.array([b[0] for b in bounds])
            hi = np.array([b[1] for b in bounds])
            jitter = x0 + 0.05 * (hi - lo) * rng_.standard_normal(x0.size)
        else:
            jitter = x0 * (1 + 0.1 * rng_.standard_normal(x0.size)) + 0.1 * rng_.standard_normal(x0.size)
        starts.append(_clip_to_bounds(jitter, bounds))

    best_x, best_f, nfev, status = x0, fc(x0), 1, "converged"
    for s in starts:
        res = _sp_optimize.minimize(
            fc, s, method="Nelder-Mead", bounds=bounds,
            options={"xatol": spec.tol_x, "fatol": spec.tol_f,
                     "maxfev": spec.max_evals, "adaptive": x0.size > 2})
        nfev += res.nfev
        if not res.success and res.nfev >= spec.max_evals:
            status = "max-iter"
        if np.isfinite(res.fun) and res.fun < best_f:
            best_x, best_f = _clip_to_bounds(np.atleast_1d(res.x), bounds), res.fun
    if spec.polish:
        best_x, best_f, extra = _coordinate_polish(fc, best_x, best_f, bounds, spec.tol_x)
        nfev += extra
    return OptResult(x=best_x, fun=best_f, nfev=nfev, status=status)


def brent(f: Callable[[float], float], a: float, b: float, spec: OptimizerSpec) -> OptResult:
    """Brent minimization on the bracket [a, b]."""
    if not a < b:
        raise ConfigError("brent requires a < b")

    def fc(t):
        v = f(float(t))
        return v if np.isfinite(v) else 1e50

    res = _sp_optimize.minimize_scalar(
        fc, bounds=(a, b), method="bounded",
        options={"xatol": spec.tol_x, "maxiter": spec.max_evals})
    status = "converged" if res.success else "max-iter"
    return OptResult(x=np.array([res.x]), fun=res.fun, nfev=res.nfev, status=status)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "adaptive-gl-fallback"  # or "fixed-gl"
    abs_tol: float = 1e-8
    rel_tol: float = 1e-6
    nodes: int = 200
    transform: str = "none"  # "none" | "quantile" | "tail-truncate"
    tail_eps: float = 1e-10

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ConfigError("quadrature tolerances must be positive")


DEFAULT_QUAD = QuadratureSpec()


def gauss_legendre_nodes(lo: float, hi: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return mid + half * x, half * w


def fixed_gauss_legendre(f, lo: float, hi: float, nodes: int) -> float:
    x, w = gauss_legendre_nodes(lo, hi, nodes)
    vals = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = x[~np.isfinite(vals)]
        raise IntegrationError("non-finite integrand value", abscissa=float(bad[0]))
    return float(np.dot(w, vals))


def composite_gl(f, lo: float, hi: float, segments: int = 64, nodes: int = 10,
                 breakpoints: Optional[Sequence[float]] = None) -> float:
    """Composite Gauss-Legendre; vectorized over all nodes at once.

    `breakpoints` force segment edges (used for piecewise-smooth integrands
    such as functionals of an empirical cdf).
    """
    if breakpoints is None:
        edges = np.linspace(lo, hi, segments + 1)
    else:
        bp = np.asarray(sorted(set([lo, hi, *[float(b) for b in breakpoints if lo < b < hi]])))
        # subdivide long stretches so tails are still resolved
        edges = [bp[0]]
        max_len = (hi - lo) / segments
        for left, right in zip(bp[:-1], bp[1:]):
            k = max(1, int(np.ceil((right - left) / max_len)))
            edges.extend(np.linspace(left, right, k + 1)[1:])
        edges = np.asarray(edges)
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    mids = 0.5 * (edges[1:] + edges[:-1])
    halfs = 0.5 * (edges[1:] - edges[:-1])
    pts = (mids[:, None] + halfs[:, None] * xg[None, :]).ravel()
    wts = (halfs[:, None] * wg[None, :]).ravel()
    vals = np.asarray(f(pts), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = pts[~np.isfinite(vals)]
        raise IntegrationError("non-finite integrand value", abscissa=float(bad[0]))
    return float(np.dot(wts, vals))


def _truncate_infinite(f, lo, hi, spec: QuadratureSpec):
    # scan outward until the integrand is negligible; assumes eventual decay
    cut = spec.abs_tol * 1e-2
    if np.isinf(lo):
        left = -1.0 if np.isinf(hi) else min(hi, 0.0) - 1.0
        while abs(float(np.max(np.abs(f(np.array([left])))))) > cut and left > -1e12:
            left *= 4.0
        lo = left
    if np.isinf(hi):
        right = 1.0 if np.isinf(lo) else max(lo, 0.0) + 1.0
        while abs(float(np.max(np.abs(f(np.array([right])))))) > cut and right < 1e12:
            right *= 4.0
        hi = right
    return lo, hi


def integrate(f, lo: float, hi: float, spec: QuadratureSpec = DEFAULT_QUAD,
              quantile: Optional[Callable] = None) -> float:
    """Integrate a vectorized scalar function on [lo, hi] (infinite ends allowed).

    Adaptive quadrature first; on failure or non-convergence the value is
    recomputed by fixed Gauss-Legendre on a truncated finite window.

    With `quantile` given (or spec.transform == "quantile"), the domain is cut
    at quantile slices so heavy tails cannot swallow the body of the mass --
    plain adaptive rules on one huge interval can report convergence while
    missing it entirely.
    """
    if quantile is not None or spec.transform == "quantile":
        if quantile is None:
            raise ConfigError("quantile transform requires a quantile function")
        eps = min(spec.tail_eps, 1e-9)
        ugrid = np.concatenate([[eps], np.linspace(0.1, 0.9, 9),
                                1.0 - np.geomspace(1e-2, eps, 8)])
        cuts = np.clip(np.asarray(quantile(ugrid), dtype=float), lo, hi)
        cuts = np.unique(np.concatenate([[lo] if np.isfinite(lo) else [],
                                         cuts, [hi] if np.isfinite(hi) else []]))
        sub = QuadratureSpec(method=spec.method, abs_tol=spec.abs_tol / max(len(cuts), 1),
                             rel_tol=spec.rel_tol, nodes=spec.nodes)
        return float(sum(integrate(f, a, b, sub)
                         for a, b in zip(cuts[:-1], cuts[1:]) if b > a))
    if spec.method == "fixed-gl":
        flo, fhi = _truncate_infinite(f, lo, hi, spec)
        return fixed_gauss_legendre(f, flo, fhi, spec.nodes)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sp_integrate.IntegrationWarning)
        try:
            out = _sp_integrate.quad(lambda t: float(f(np.array([t]))[0]), lo, hi,
                                     epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                                     limit=200, full_output=1)
        except Exception:
            out = None
    if out is not None and len(out) >= 3 and np.isfinite(out[0]):
        ier_ok = len(out) == 3  # no error message appended
        if ier_ok:
            return float(out[0])
    # Gauss-Legendre fallback
    flo, fhi = _truncate_infinite(f, lo, hi, spec)
    return composite_gl(f, flo, fhi, segments=max(16, spec.nodes // 8), nodes=12)


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------

COND_LIMIT = 1e12


def lu_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigError("lu_solve expects a square matrix")
    c = np.linalg.cond(A)
    if not np.isfinite(c) or c > COND_LIMIT:
        raise SingularMatrixError(f"condition number {c:.3e} exceeds {COND_LIMIT:.0e}")
    lu, piv = _sp_linalg.lu_factor(A)
    return _sp_linalg.lu_solve((lu, piv), b)


def is_spd(A: np.ndarray, sym_tol: float = 1e-8) -> bool:
    """Sylvester leading-principal-minor test for symmetric positive definiteness."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.T)) > sym_tol * scale:
        return False
    for k in range(1, A.shape[0] + 1):
        # sign of the determinant via LU (slogdet), robust to over/underflow
        sign, _ = np.linalg.slogdet(A[:k, :k])
        if sign <= 0:
            return False
    return True


def solve_spd(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    if not is_spd(A):
        raise SingularMatrixError("matrix is not symmetric positive definite")
    return lu_solve(A, b)
