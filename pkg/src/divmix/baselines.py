"""Competitor estimators for the semiparametric two-component mixture: the
symmetry-based distance fit, two EM-type weight iterations, the proportion-
maximizing scan and the stochastic EM.

All methods carry a per-observation weight vector in [0,1]^n whose mean is the
proportion estimate of the parametric component.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .dual import EstimateReport
from .families import Family, ModelSpace, _arr
from .kde import KernelDensityEstimate, ProductKDE, fit as kde_fit, silverman_bandwidth
from .numerics import ConfigError, OptimizerSpec, brent, nelder_mead


def _weighted_mle(parametric: ModelSpace, sample, weights, start) -> np.ndarray:
    def negll(theta):
        try:
            f = parametric.build(theta)
        except Exception:
            return np.inf
        lp = _arr(f.logpdf(sample))
        if np.any(~np.isfinite(lp) & (weights > 0)):
            return np.inf
        return -float(np.dot(weights, np.where(weights > 0, lp, 0.0)))

    if parametric.dim == 1:
        res = brent(lambda t: negll(np.array([t])),
                    parametric.bounds[0][0], parametric.bounds[0][1],
                    OptimizerSpec(tol_x=1e-9, max_evals=300))
    else:
        res = nelder_mead(negll, start,
                          OptimizerSpec(tol_x=1e-9, tol_f=1e-12, max_evals=2000,
                                        bounds=parametric.bounds))
    return np.atleast_1d(res.x)


def bordes_symmetry(parametric: ModelSpace, sample, kernel_cdf: Optional[str] = None,
                    bandwidth="silverman", opt: OptimizerSpec = OptimizerSpec(),
                    mu0_bounds=(-10.0, 10.0), lam_bounds=(0.1, 0.9),
                    starts=None, rng=None) -> EstimateReport:
    """Symmetry-based estimator: the unknown component is symmetric about mu0,
    and (lam, theta, mu0) minimize sum_i [H1(x_i) - H2(x_i)]^2 where H1/H2
    reconstruct the unknown cdf from the left and from the right."""
    t0 = time.perf_counter()
    x = np.asarray(sample, dtype=float)
    if x.ndim != 1:
        raise ConfigError("symmetry method is univariate only")
    n = x.size
    xs = np.sort(x)

    if kernel_cdf == "gaussian":
        est = kde_fit("gaussian", bandwidth, x)
        F = est.cdf
    else:
        F = lambda y: np.searchsorted(xs, _arr(y), side="right") / n

    def objective(phi):
        lam = phi[0]
        theta = phi[1:1 + parametric.dim]
        mu0 = phi[-1]
        if not lam_bounds[0] <= lam <= lam_bounds[1]:
            return np.inf
        try:
            f1 = parametric.build(theta)
        except Exception:
            return np.inf
        c = 1.0 / (1.0 - lam)
        h1 = c * _arr(F(x + mu0)) - lam * c * _arr(f1.cdf(x + mu0))
        h2 = 1.0 - c * _arr(F(mu0 - x)) + lam * c * _arr(f1.cdf(mu0 - x))
        return float(np.sum((h1 - h2) ** 2))

    bounds = (lam_bounds, *parametric.bounds, mu0_bounds)
    if starts is None:
        if rng is None:
            rng = np.random.default_rng(11)
        lo = np.array([b[0] for b in bounds])
        hi = np.array([b[1] for b in bounds])
        starts = [lo + (hi - lo) * rng.uniform(size=len(bounds)) for _ in range(5)]
    best = None
    for s in starts:
        res = nelder_mead(objective, np.asarray(s, dtype=float),
                          OptimizerSpec(tol_x=1e-8, tol_f=1e-12,
                                        max_evals=opt.max_evals, bounds=bounds))
        if best is None or res.fun < best.fun:
            best = res
    names = ("lam", *parametric.names, "mu0")
    return EstimateReport(estimator="bordes-symmetry", names=names,
                          phi=np.atleast_1d(best.x), trace=[float(best.fun)],
                          status=best.status, wall_time=time.perf_counter() - t0)


def robin_em(parametric: ModelSpace, sample, kernel: str = "gaussian",
             bandwidth="silverman", init_lam: float = 0.5,
             init_theta=None, init_weights=None, tol: float = 1e-6,
             max_iter: int = 1000, degenerate_eta: float = 1e-3) -> EstimateReport:
    """EM-type iteration with a weighted kernel estimate of the unknown
    component rebuilt at every step."""
    t0 = time.perf_counter()
    x = np.asarray(sample, dtype=float)
    n = x.size
    if kernel in ("epanechnikov", "triangular"):
        raise ConfigError("a positive (non-compact-support) kernel is required")
    bw = silverman_bandwidth(x) if bandwidth == "silverman" else float(bandwidth)
    from .kde import _sym_kernel
    K = _sym_kernel(kernel)
    kmat = K((x[:, None] - x[None, :]) / bw) / bw  # K_h(x_i - x_l)

    w = np.full(n, 0.5) if init_weights is None else np.asarray(init_weights, dtype=float)
    theta = np.asarray(init_theta, dtype=float) if init_theta is not None \
        else np.array([0.5 * (b[0] + b[1]) for b in parametric.bounds])
    lam = init_lam
    status = "max-iter"
    for _ in range(max_iter):
        lam = float(np.mean(w))
        if lam < degenerate_eta or lam > 1.0 - degenerate_eta:
            status = "degenerate"
            break
        theta = _weighted_mle(parametric, x, w, theta)
        f1 = parametric.build(theta)
        anti = 1.0 - w
        p0 = kmat @ anti / np.sum(anti)
        p1v = lam * _arr(f1.pdf(x))
        denom = p1v + (1.0 - lam) * p0
        w_new = np.where(denom > 0, p1v / denom, 0.0)
        if float(np.max(np.abs(w_new - w))) < tol:
            w = w_new
            status = "converged"
            break
        w = w_new
    lam = float(np.mean(w))
    phi = np.concatenate([[lam], np.atleast_1d(theta)])
    return EstimateReport(estimator="robin-em", names=("lam", *parametric.names),
                          phi=phi, status=status,
                          wall_time=time.perf_counter() - t0,
                          extras={"bandwidth": bw, "weights_min": float(np.min(w)),
                                  "weights_max": float(np.max(w))})


def song_em(parametric: ModelSpace, sample, kde, variant: str = "stabilized",
            init_lam: float = 0.5, init_theta=None, tol: float = 1e-6,
            max_iter: int = 1000, degenerate_eta: float = 1e-3) -> EstimateReport:
    """EM-type iteration against a mixture density estimate fitted once.

    variant "plain":       w_i = min(1, lam p1 / fhat)
    variant "stabilized":  w_i = min(1, 2 lam p1 / (lam p1 + fhat))
    """
    if variant not in ("plain", "stabilized"):
        raise ConfigError(f"unknown variant {variant!r}")
    t0 = time.perf_counter()
    x = np.asarray(sample, dtype=float)
    fhat = _arr(kde.pdf(x))  # fitted once, reused every iteration
    lam = init_lam
    theta = np.asarray(init_theta, dtype=float) if init_theta is not None \
        else np.array([0.5 * (b[0] + b[1]) for b in parametric.bounds])
    w = np.full(x.shape[0], 0.5)
    status = "max-iter"
    for _ in range(max_iter):
        f1 = parametric.build(theta)
        p1v = lam * _arr(f1.pdf(x))
        if variant == "plain":
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(fhat > 0, p1v / fhat, 1.0)
        else:
            denom = p1v + fhat
            ratio = np.where(denom > 0, 2.0 * p1v / denom, 1.0)
        w_new = np.minimum(1.0, ratio)
        lam = float(np.mean(w_new))
        if lam < degenerate_eta or lam > 1.0 - degenerate_eta:
            w = w_new
            status = "degenerate"
            break
        theta = _weighted_mle(parametric, x, w_new, theta)
        if float(np.max(np.abs(w_new - w))) < tol:
            w = w_new
            status = "converged"
            break
        w = w_new
    phi = np.concatenate([[float(np.mean(w))], np.atleast_1d(theta)])
    return EstimateReport(estimator=f"song-em-{variant}",
                          names=("lam", *parametric.names), phi=phi,
                          status=status, wall_time=time.perf_counter() - t0,
                          extras={"weights_max": float(np.max(w))})


def song_pi_max(parametric: ModelSpace, sample, kde,
                opt: OptimizerSpec = OptimizerSpec(tol_x=1e-8, max_evals=500)) -> EstimateReport:
    """Proportion-maximizing scan: lam = sup_theta min_i fhat(x_i)/f1(x_i|theta)."""
    t0 = time.perf_counter()
    x = np.asarray(sample, dtype=float)
    fhat = _arr(kde.pdf(x)) if x.ndim == 1 else np.asarray(kde.pdf(x))

    def min_ratio(theta):
        try:
            f1 = parametric.build(np.atleast_1d(theta))
        except Exception:
            return -np.inf
        p1 = _arr(f1.pdf(x)) if x.ndim == 1 else np.asarray(f1.pdf(x))
        if np.any(p1 <= 0):
            return -np.inf
        return float(np.min(fhat / p1))

    if parametric.dim == 1:
        res = brent(lambda t: -min_ratio(t), parametric.bounds[0][0],
                    parametric.bounds[0][1], opt)
    else:
        start = np.array([0.5 * (b[0] + b[1]) for b in parametric.bounds])
        res = nelder_mead(lambda v: -min_ratio(v), start,
                          OptimizerSpec(tol_x=1e-8, tol_f=1e-12,
                                        max_evals=2000, bounds=parametric.bounds))
    lam = -res.fun
    status = "converged" if np.isfinite(lam) else "degenerate"
    phi = np.concatenate([[min(lam, 1.0)], np.atleast_1d(res.x)])
    return EstimateReport(estimator="song-pi-max", names=("lam", *parametric.names),
                          phi=phi, status=status,
                          wall_time=time.perf_counter() - t0)


def stochastic_em(parametric: ModelSpace, sample, kernel: str = "gaussian",
                  bandwidth="silverman", iters: int = 5000, burn: int = 1000,
                  rng=None, init_theta=None) -> EstimateReport:
    """Stochastic EM: Bernoulli labels resampled each sweep; the estimate
    averages the post-burn iterations."""
    t0 = time.perf_counter()
    if rng is None:
        rng = np.random.default_rng(0)
    x = np.asarray(sample, dtype=float)
    n = x.shape[0]
    if n < 10:
        raise ConfigError("stochastic EM needs at least 10 observations")
    univariate = x.ndim == 1
    if univariate:
        bw = silverman_bandwidth(x) if bandwidth == "silverman" else float(bandwidth)
        from .kde import _sym_kernel
        K = _sym_kernel(kernel)
        kmat = K((x[:, None] - x[None, :]) / bw) / bw
    else:
        kx = ProductKDE.fit(x)
        d0 = x[:, None, :] - x[None, :, :]
        kmat = (np.exp(-0.5 * (d0[:, :, 0] / kx.bandwidths[0]) ** 2)
                * np.exp(-0.5 * (d0[:, :, 1] / kx.bandwidths[1]) ** 2)
                / (2.0 * np.pi * kx.bandwidths[0] * kx.bandwidths[1]))

    z = rng.integers(0, 2, size=n)
    theta = np.asarray(init_theta, dtype=float) if init_theta is not None \
        else np.array([0.5 * (b[0] + b[1]) for b in parametric.bounds])
    lam_hist, theta_hist = [], []
    empty_streak = 0
    status = "converged"
    for _ in range(iters):
        ones = int(np.sum(z))
        if ones in (0, n):
            empty_streak += 1
            if empty_streak >= 2:
                status = "degenerate"
                break
            z = rng.integers(0, 2, size=n)
            continue
        empty_streak = 0
        lam = ones / n
        mask1 = z == 1
        theta = _weighted_mle(parametric, x, mask1.astype(float), theta)
        f1 = parametric.build(theta)
        anti = (~mask1).astype(float)
        p0 = kmat @ anti / np.sum(anti)
        p1v = lam * (_arr(f1.pdf(x)) if univariate else np.asarray(f1.pdf(x)))
        denom = p1v + (1.0 - lam) * p0
        w = np.where(denom > 0, p1v / denom, 0.0)
        z = (rng.uniform(size=n) < w).astype(int)
        lam_hist.append(lam)
        theta_hist.append(np.atleast_1d(theta).copy())
    if len(lam_hist) <= burn:
        status = "degenerate"
        keep = slice(None)
    else:
        keep = slice(burn, None)
    lam_avg = float(np.mean(lam_hist[keep])) if lam_hist else np.nan
    theta_avg = np.mean(np.asarray(theta_hist)[keep], axis=0) if theta_hist else theta
    phi = np.concatenate([[lam_avg], np.atleast_1d(theta_avg)])
    return EstimateReport(estimator="stochastic-em", names=("lam", *parametric.names),
                          phi=phi, status=status,
                          wall_time=time.perf_counter() - t0,
                          extras={"iterations": len(lam_hist)})
