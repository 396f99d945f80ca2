"""Divergence-based estimators for parametric models: the classical dual
estimator (inner supremum over a parametric anchor), the kernel-anchored dual
estimator, the fixed-escort dual estimator, the smoothed-empirical and
smoothed-model minimum-divergence estimators, the minimum density power
divergence estimator, maximum likelihood / EM, and the dual-curve diagnostic.

Density ratios are always formed in log space; heavy-tail model integrals use
the quantile change of variables int_0^1 g(F^{-1}(u)) du whenever the model
exposes a quantile.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .divergences import PhiGenerator, divergence
from .families import (Family, Gaussian, MixtureSpec, ModelSpace, Weibull,
                       _arr)
from .kde import KernelDensityEstimate, SmoothedModel, smooth_model
from .numerics import (DEFAULT_QUAD, ConfigError, OptimizerSpec, OptResult,
                       QuadratureSpec, brent, composite_gl,
                       gauss_legendre_nodes, nelder_mead, rng as make_rng,
                       RNG_KIND)

PENALTY = 1e50

DEFAULT_OPT = OptimizerSpec(tol_x=1e-7, tol_f=1e-10, max_evals=4000, restarts=1)


@dataclass
class EstimateReport:
    """Standard estimator output."""
    estimator: str
    names: Tuple[str, ...]
    phi: np.ndarray
    inner: Optional[np.ndarray] = None
    trace: list = field(default_factory=list)
    status: str = "converged"  # "converged" | "max-iter" | "degenerate"
    wall_time: float = 0.0
    rng_kind: str = RNG_KIND
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "estimator": self.estimator,
            "names": list(self.names),
            "phi": [float(v) for v in np.atleast_1d(self.phi)],
            "inner": None if self.inner is None else [float(v) for v in np.atleast_1d(self.inner)],
            "trace": [float(v) for v in self.trace],
            "status": self.status,
            "wall_time": self.wall_time,
            "rng_kind": self.rng_kind,
            "extras": {k: (float(v) if isinstance(v, (int, float, np.floating)) else v)
                       for k, v in self.extras.items()},
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


# ---------------------------------------------------------------------------
# integration helpers
# ---------------------------------------------------------------------------

_U_NODES = {}


def _unit_nodes(n=128):
    if n not in _U_NODES:
        _U_NODES[n] = gauss_legendre_nodes(0.0, 1.0, n)
    return _U_NODES[n]


def integration_range(density, eps: float = 1e-7) -> Tuple[float, float]:
    """Finite range carrying all but ~eps of the density's mass."""
    if isinstance(density, MixtureSpec):
        los, his = [], []
        for comp in (density.component1, density.component0):
            l, h = integration_range(comp, eps)
            los.append(l)
            his.append(h)
        return min(los), max(his)
    lo, hi = density.support
    if hasattr(density, "quantile"):
        try:
            lo2 = float(density.quantile(eps))
            hi2 = float(density.quantile(1.0 - eps))
            lo = lo2 if not np.isfinite(lo) else max(lo, lo2)
            hi = hi2 if not np.isfinite(hi) else min(hi, hi2)
        except NotImplementedError:
            pass
    if not np.isfinite(lo) or not np.isfinite(hi):
        raise ConfigError("cannot determine an integration range")
    return lo, hi


def model_expectation(density, g: Callable, u_nodes: int = 128,
                      x_segments: int = 96) -> float:
    """E_density[g(X)] with the quantile change of variables when available.

    Mixtures decompose as lam E_1[g] + (1-lam) E_0[g], each component through
    its own quantile, which keeps the nodes on every component's scale.
    """
    if isinstance(density, MixtureSpec):
        comps = (density.component1, density.component0)
        if all(hasattr(c, "quantile") and not isinstance(c, MixtureSpec) for c in comps):
            u, w = _unit_nodes(u_nodes)
            e1 = float(np.dot(w, g(_arr(comps[0].quantile(u)))))
            e0 = float(np.dot(w, g(_arr(comps[1].quantile(u)))))
            return density.lam * e1 + (1.0 - density.lam) * e0
        lo, hi = integration_range(density)
        return composite_gl(lambda x: g(x) * _arr(density.pdf(x)), lo, hi,
                            segments=x_segments, nodes=6)
    u, w = _unit_nodes(u_nodes)
    x = _arr(density.quantile(u))
    return float(np.dot(w, g(x)))


def _log_ratio(model_log, anchor_log):
    delta = model_log - anchor_log
    return np.where(np.isfinite(delta), delta, np.where(model_log > anchor_log, 700.0, -700.0))


# ---------------------------------------------------------------------------
# dual objectives
# ---------------------------------------------------------------------------

@dataclass
class DualObjective:
    """Empirical dual divergence estimate as a function of the model parameter.

    anchor is ("kernel", kde) for the kernel-anchored form, or
    ("parametric", alpha_space) for the classical supremal form.
    """
    gen: PhiGenerator
    space: ModelSpace
    anchor: Tuple[str, object]
    sample: np.ndarray
    opt: OptimizerSpec = DEFAULT_OPT
    u_nodes: int = 128
    x_segments: int = 96

    def __post_init__(self):
        self.sample = np.asarray(self.sample, dtype=float)
        kind, obj = self.anchor
        if kind == "kernel":
            self._log_k_data = _arr(obj.logpdf(self.sample))
        self._warm_alpha = None

    # -- kernel-anchored ------------------------------------------------------
    def _value_kernel(self, phi_vec) -> float:
        kde = self.anchor[1]
        try:
            density = self.space.build(phi_vec)
        except Exception:
            return PENALTY
        logp_data = _arr(density.logpdf(self.sample))
        if self.gen.gamma == 0.0:
            # int phi'(p/K) p dx = int (p - K) dx is parameter-free here, so the
            # modified-KL objective reduces to the (negative) log-likelihood
            if np.any(~np.isfinite(logp_data)):
                return PENALTY
            return float(np.mean(self._log_k_data) - np.mean(logp_data))
        def g(x):
            lp = _arr(density.logpdf(x))
            lk = _arr(kde.logpdf(x))
            return self.gen.phi_prime_logratio(_log_ratio(lp, lk))
        try:
            integral = model_expectation(density, g, self.u_nodes, self.x_segments)
        except Exception:
            return PENALTY
        delta_data = _log_ratio(logp_data, self._log_k_data)
        value = integral - float(np.mean(self.gen.phi_sharp_logratio(delta_data)))
        return value if np.isfinite(value) else PENALTY

    # -- classical (parametric anchor) -----------------------------------------
    def value_at(self, phi_vec, alpha_vec) -> float:
        """Dual estimate before the supremum, at (phi, alpha)."""
        phi_vec = np.atleast_1d(np.asarray(phi_vec, dtype=float))
        alpha_vec = np.atleast_1d(np.asarray(alpha_vec, dtype=float))
        try:
            density = self.space.build(phi_vec)
            anchor = self.anchor[1].build(alpha_vec)
        except Exception:
            return -PENALTY
        def g(x):
            lp = _arr(density.logpdf(x))
            la = _arr(anchor.logpdf(x))
            return self.gen.phi_prime_logratio(_log_ratio(lp, la))
        try:
            integral = model_expectation(density, g, self.u_nodes, self.x_segments)
        except Exception:
            return -PENALTY
        delta = _log_ratio(_arr(density.logpdf(self.sample)), _arr(anchor.logpdf(self.sample)))
        value = integral - float(np.mean(self.gen.phi_sharp_logratio(delta)))
        return value if np.isfinite(value) else -PENALTY

    def sup_alpha(self, phi_vec, alpha0=None) -> Tuple[float, np.ndarray]:
        alpha_space: ModelSpace = self.anchor[1]
        if alpha0 is None:
            alpha0 = self._warm_alpha
        if alpha0 is None:
            alpha0 = np.array([0.5 * (b[0] + b[1]) for b in alpha_space.bounds])
        neg = lambda a: -self.value_at(phi_vec, a)
        if alpha_space.dim == 1:
            res = brent(neg, alpha_space.bounds[0][0], alpha_space.bounds[0][1],
                        OptimizerSpec(tol_x=1e-9, max_evals=200))
        else:
            res = nelder_mead(neg, alpha0,
                              OptimizerSpec(tol_x=1e-8, tol_f=1e-12,
                                            max_evals=self.opt.max_evals,
                                            bounds=alpha_space.bounds))
        self._warm_alpha = res.x
        return -res.fun, res.x

    def __call__(self, phi_vec) -> float:
        if self.anchor[0] == "kernel":
            return self._value_kernel(phi_vec)
        value, _ = self.sup_alpha(phi_vec)
        return value if np.isfinite(value) else PENALTY


def kernel_dual_objective(gen, space, kde, sample, **kw) -> DualObjective:
    return DualObjective(gen=gen, space=space, anchor=("kernel", kde), sample=sample, **kw)


def classical_dual_objective(gen, space, sample, alpha_space=None, **kw) -> DualObjective:
    return DualObjective(gen=gen, space=space,
                         anchor=("parametric", alpha_space or space), sample=sample, **kw)


# ---------------------------------------------------------------------------
# generic outer minimization
# ---------------------------------------------------------------------------

def _default_start(space: ModelSpace, sample: np.ndarray) -> np.ndarray:
    """Cheap moment-based initialization inside the box."""
    x = np.asarray(sample, dtype=float)
    mean, sd = float(np.mean(x)), float(np.std(x, ddof=1)) or 1.0
    start = []
    for name, b in zip(space.names, space.bounds):
        if name.startswith("mu") or name == "loc":
            start.append(mean)
        elif name.startswith("sigma") or name == "scale":
            start.append(sd)
        elif name == "lam":
            start.append(0.5)
        else:
            start.append(np.clip(1.0, b[0], b[1]))
    return space.clip(np.array(start))


def _minimize_outer(objective, space: ModelSpace, start, opt: OptimizerSpec,
                    rng_=None) -> OptResult:
    spec = OptimizerSpec(tol_x=opt.tol_x, tol_f=opt.tol_f, max_evals=opt.max_evals,
                         bounds=space.bounds, restarts=opt.restarts, polish=opt.polish)
    if space.dim == 1:
        # Nelder-Mead is unreliable in one dimension; use Brent on the box
        res = brent(lambda t: objective(np.array([t])),
                    space.bounds[0][0], space.bounds[0][1], spec)
        return res
    return nelder_mead(objective, start, spec, rng_=rng_)


def _finish(name, space, res, t0, inner=None, trace=None, extras=None) -> EstimateReport:
    status = res.status
    if res.fun >= PENALTY * 0.5 or not np.all(np.isfinite(res.x)):
        status = "degenerate"
    return EstimateReport(estimator=name, names=space.names,
                          phi=np.atleast_1d(res.x), inner=inner,
                          trace=trace if trace is not None else [float(res.fun)],
                          status=status, wall_time=time.perf_counter() - t0,
                          extras=extras or {})


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def classical_mdphide(gen: PhiGenerator, space: ModelSpace, sample,
                      alpha_space: Optional[ModelSpace] = None,
                      opt: OptimizerSpec = DEFAULT_OPT, start=None,
                      rng_=None) -> EstimateReport:
    """Minimum dual divergence with the supremal parametric anchor."""
    t0 = time.perf_counter()
    obj = classical_dual_objective(gen, space, sample, alpha_space)
    if start is None:
        start = _default_start(space, sample)
    res = _minimize_outer(obj, space, start, opt, rng_)
    _, alpha = obj.sup_alpha(res.x)
    return _finish("classical-mdphide", space, res, t0, inner=alpha)


def kernel_mdphide(gen: PhiGenerator, space: ModelSpace, sample,
                   kde: KernelDensityEstimate, opt: OptimizerSpec = DEFAULT_OPT,
                   start=None, rng_=None) -> EstimateReport:
    """Kernel-anchored minimum dual divergence estimator."""
    t0 = time.perf_counter()
    obj = kernel_dual_objective(gen, space, kde, sample)
    if start is None:
        start = _default_start(space, sample)
    res = _minimize_outer(obj, space, start, opt, rng_)
    return _finish("kernel-mdphide", space, res, t0,
                   extras={"kernel": kde.kernel, "bandwidth": kde.bandwidth})


def dphide(gen: PhiGenerator, space: ModelSpace, sample, escort_phi,
           opt: OptimizerSpec = DEFAULT_OPT) -> EstimateReport:
    """argsup over the anchor for a fixed escort parameter."""
    t0 = time.perf_counter()
    obj = classical_dual_objective(gen, space, sample, space)
    escort = space.clip(escort_phi)
    neg = lambda a: -obj.value_at(escort, a)
    if space.dim == 1:
        res = brent(lambda t: neg(np.array([t])), space.bounds[0][0], space.bounds[0][1], opt)
    else:
        res = nelder_mead(neg, escort,
                          OptimizerSpec(tol_x=opt.tol_x, tol_f=opt.tol_f,
                                        max_evals=opt.max_evals, bounds=space.bounds))
    res = OptResult(x=res.x, fun=-res.fun, nfev=res.nfev, status=res.status)
    rep = _finish("dphide", space, res, t0, extras={"escort": list(map(float, escort))})
    if rep.trace and rep.trace[0] <= -PENALTY * 0.5:
        rep.status = "degenerate"
    return rep


def _anchor_window(sample, anchor):
    w = getattr(anchor, "bandwidth", 1.0)
    lo = float(np.min(sample)) - 8.0 * w
    hi = float(np.max(sample)) + 8.0 * w
    bps = None
    if anchor.support[0] == 0.0:
        lo = max(lo, 1e-12)
        # geometric refinement near the boundary resolves spiky models
        bps = np.geomspace(1e-8, max(hi * 0.1, 1e-6), 24)
    return lo, hi, bps


def _divergence_to_anchor(gen: PhiGenerator, density, anchor, lo, hi, bps) -> float:
    """int phi(p/K) K dx for unit-mass p and K.

    Both p and K integrate to one, so the linear terms of phi integrate to a
    constant and only the cross term int p^g K^(1-g) needs quadrature; it is
    concentrated where the anchor K has mass, which keeps the nodes on the
    data scale whatever the model parameters are.
    """
    g = gen.gamma
    if g == 1.0:
        def f(x):
            return _log_ratio(_arr(density.logpdf(x)), _arr(anchor.logpdf(x)))
        return model_expectation(density, f)
    if g == 0.0:
        def f(x):
            kx = _arr(anchor.pdf(x))
            delta = _log_ratio(_arr(density.logpdf(x)), np.log(np.maximum(kx, 1e-300)))
            return -delta * kx
        return composite_gl(f, lo, hi, segments=128, nodes=6, breakpoints=bps)

    def cross(x):
        lp = _arr(density.logpdf(x))
        lk = _arr(anchor.logpdf(x)) if hasattr(anchor, "logpdf") else np.log(
            np.maximum(_arr(anchor.pdf(x)), 1e-300))
        expo = g * lp + (1.0 - g) * lk
        expo = np.where(np.isfinite(expo), expo, -np.inf)
        return np.exp(np.minimum(expo, 700.0))

    integral = composite_gl(cross, lo, hi, segments=128, nodes=6, breakpoints=bps)
    return (integral - 1.0) / (g * (g - 1.0))


def beran(gen: PhiGenerator, space: ModelSpace, sample,
          kde: KernelDensityEstimate, opt: OptimizerSpec = DEFAULT_OPT,
          start=None, rng_=None, anchor_density=None) -> EstimateReport:
    """Minimum divergence against the smoothed empirical distribution:
    arginf int phi(p_phi / K) K."""
    t0 = time.perf_counter()
    sample = np.asarray(sample, dtype=float)
    anchor = anchor_density if anchor_density is not None else kde
    lo, hi, bps = _anchor_window(sample, anchor)

    def objective(phi_vec):
        try:
            density = space.build(phi_vec)
            val = _divergence_to_anchor(gen, density, anchor, lo, hi, bps)
        except Exception:
            return PENALTY
        return val if np.isfinite(val) else PENALTY

    if start is None:
        start = _default_start(space, sample)
    res = _minimize_outer(objective, space, start, opt, rng_)
    return _finish("beran", space, res, t0,
                   extras={"kernel": getattr(anchor, "kernel", "analytic"),
                           "bandwidth": getattr(anchor, "bandwidth", np.nan)})


def basu_lindsay(gen: PhiGenerator, space: ModelSpace, sample,
                 kde: KernelDensityEstimate, opt: OptimizerSpec = DEFAULT_OPT,
                 start=None, rng_=None) -> EstimateReport:
    """Smoothed-model variant: arginf int phi(p*_phi / K) K; the smoothed
    model p* keeps unit mass so the cross-term reduction applies as well."""
    t0 = time.perf_counter()
    sample = np.asarray(sample, dtype=float)
    lo, hi, bps = _anchor_window(sample, kde)

    def objective(phi_vec):
        try:
            density = space.build(phi_vec)
            smooth = smooth_model(density, kde.kernel, kde.bandwidth)
            val = _divergence_to_anchor(gen, smooth, kde, lo, hi, bps)
        except Exception:
            return PENALTY
        return val if np.isfinite(val) else PENALTY

    if start is None:
        start = _default_start(space, sample)
    res = _minimize_outer(objective, space, start, opt, rng_)
    return _finish("basu-lindsay", space, res, t0,
                   extras={"kernel": kde.kernel, "bandwidth": kde.bandwidth})


def _power_integral(density, a: float) -> float:
    """int p^(1+a) dx; closed form in the Gaussian case."""
    if isinstance(density, Gaussian):
        return (2.0 * np.pi) ** (-a / 2.0) * density.sigma ** (-a) / np.sqrt(1.0 + a)
    return model_expectation(density, lambda x: _arr(density.pdf(x)) ** a)


def mdpd(space: ModelSpace, sample, a: float, opt: OptimizerSpec = DEFAULT_OPT,
         start=None, rng_=None) -> EstimateReport:
    """Minimum density power divergence with tradeoff a in (0, 1]."""
    if not 0.0 < a <= 1.0:
        raise ConfigError("tradeoff must lie in (0, 1]")
    t0 = time.perf_counter()
    sample = np.asarray(sample, dtype=float)

    def objective(phi_vec):
        try:
            density = space.build(phi_vec)
            integral = _power_integral(density, a)
        except Exception:
            return PENALTY
        if not np.isfinite(integral):
            return PENALTY
        lp = _arr(density.logpdf(sample))
        term = np.exp(a * np.clip(lp, -700, 700))
        value = integral - (a + 1.0) / a * float(np.mean(term))
        return value if np.isfinite(value) else PENALTY

    if start is None:
        start = _default_start(space, sample)
    res = _minimize_outer(objective, space, start, opt, rng_)
    return _finish("mdpd", space, res, t0, extras={"a": a})


def mle(space: ModelSpace, sample, opt: OptimizerSpec = DEFAULT_OPT,
        start=None, rng_=None) -> EstimateReport:
    """Maximum likelihood; closed form in the Gaussian model (unbiased sd,
    matching how the simulation tables report it)."""
    t0 = time.perf_counter()
    sample = np.asarray(sample, dtype=float)
    if space.label == "gaussian":
        mu = float(np.mean(sample))
        sd = float(np.std(sample, ddof=1))
        x = space.clip(np.array([mu, sd]))
        res = OptResult(x=x, fun=-float(np.mean(_arr(Gaussian(*x).logpdf(sample)))),
                        nfev=1, status="converged")
        rep = _finish("mle", space, res, t0)
        if sd <= 0:
            rep.status = "degenerate"
        return rep

    def objective(phi_vec):
        try:
            density = space.build(phi_vec)
        except Exception:
            return PENALTY
        lp = _arr(density.logpdf(sample))
        if np.any(~np.isfinite(lp)):
            return PENALTY
        return -float(np.mean(lp))

    if start is None:
        start = _default_start(space, sample)
    res = _minimize_outer(objective, space, start, opt, rng_)
    return _finish("mle", space, res, t0)


# ---------------------------------------------------------------------------
# EM for two-component mixtures
# ---------------------------------------------------------------------------

def _weighted_mstep(space: ModelSpace, sample, h, phi_prev):
    """Exact weighted-likelihood M-step for the wired mixture spaces."""
    lam = float(np.mean(h[:, 0]))
    if space.label == "gaussian-mixture":
        mu1 = float(np.dot(h[:, 0], sample) / np.sum(h[:, 0]))
        mu2 = float(np.dot(h[:, 1], sample) / np.sum(h[:, 1]))
        return np.array([lam, mu1, mu2])
    if space.label == "weibull-mixture":
        out = [lam]
        mix_prev = space.build(phi_prev)
        for j, comp in enumerate((mix_prev.component1, mix_prev.component0)):
            scale = comp.scale
            wcol = h[:, j]

            def negll(shape):
                f = Weibull(scale, float(shape))
                return -float(np.dot(wcol, _arr(f.logpdf(sample))))

            res = brent(negll, 0.05, 20.0, OptimizerSpec(tol_x=1e-10, max_evals=300))
            out.append(float(res.x[0]))
        return np.array(out)
    # generic: numeric joint M-step over the non-proportion block
    def negq(theta_block):
        vec = np.concatenate([[lam], theta_block])
        mix = space.build(space.clip(vec))
        l1 = _arr(mix.component1.logpdf(sample))
        l0 = _arr(mix.component0.logpdf(sample))
        return -float(np.dot(h[:, 0], l1) + np.dot(h[:, 1], l0))

    res = nelder_mead(negq, phi_prev[1:],
                      OptimizerSpec(tol_x=1e-10, tol_f=1e-12, max_evals=2000,
                                    bounds=space.bounds[1:], polish=True))
    return np.concatenate([[lam], res.x])


def mle_em(space: ModelSpace, sample, init=None, tol: float = 1e-9,
           max_iter: int = 500, degenerate_eta: float = 1e-3) -> EstimateReport:
    """EM for a two-component mixture space; the log-likelihood trace is
    nondecreasing and a proportion collapsing to {0, 1} flags degeneracy."""
    t0 = time.perf_counter()
    sample = np.asarray(sample, dtype=float)
    if not space.is_mixture:
        raise ConfigError("mle_em expects a mixture model space")
    phi = space.clip(init if init is not None else _default_start(space, sample))
    trace = []
    status = "max-iter"
    for _ in range(max_iter):
        mix = space.build(phi)
        ll = float(np.mean(_arr(mix.logpdf(sample))))
        trace.append(ll)
        h = mix.labels(sample)
        phi_new = space.clip(_weighted_mstep(space, sample, h, phi))
        if phi_new[0] < degenerate_eta or phi_new[0] > 1.0 - degenerate_eta:
            phi = phi_new
            status = "degenerate"
            break
        if len(trace) > 1 and abs(trace[-1] - trace[-2]) < tol:
            phi = phi_new
            status = "converged"
            break
        phi = phi_new
    mix = space.build(phi)
    trace.append(float(np.mean(_arr(mix.logpdf(sample)))))
    return EstimateReport(estimator="mle-em", names=space.names, phi=phi,
                          trace=trace, status=status,
                          wall_time=time.perf_counter() - t0)


def em_step(space: ModelSpace, sample, phi) -> np.ndarray:
    """One closed-form EM update, exposed for the proximal-equivalence checks."""
    mix = space.build(space.clip(phi))
    h = mix.labels(np.asarray(sample, dtype=float))
    return space.clip(_weighted_mstep(space, np.asarray(sample, dtype=float), h, space.clip(phi)))


# ---------------------------------------------------------------------------
# dual-curve diagnostic
# ---------------------------------------------------------------------------

def dual_curve(gen: PhiGenerator, space: ModelSpace, data_or_density,
               anchor: str, grid: Sequence[float],
               kde: Optional[KernelDensityEstimate] = None,
               alpha_space: Optional[ModelSpace] = None) -> np.ndarray:
    """Values of a divergence(-estimate) curve over a scalar parameter grid.

    anchor: "classical" (empirical supremal dual), "kernel" (kernel-anchored
    empirical dual) or "true" (quadrature divergence against a density).
    Returns an array of rows (phi, value).
    """
    if space.dim != 1:
        raise ConfigError("dual_curve expects a scalar parameter space")
    grid = np.asarray(grid, dtype=float)
    out = np.empty((grid.size, 2))
    if anchor == "classical":
        obj = classical_dual_objective(gen, space, data_or_density,
                                       alpha_space or space)
        for i, g in enumerate(grid):
            val, _ = obj.sup_alpha(np.array([g]))
            out[i] = (g, val)
    elif anchor == "kernel":
        if kde is None:
            kde_ = KernelDensityEstimate("gaussian",
                                         max(1e-6, np.std(data_or_density, ddof=1))
                                         * len(data_or_density) ** -0.2 * 0.9,
                                         data_or_density)
        else:
            kde_ = kde
        obj = kernel_dual_objective(gen, space, kde_, data_or_density)
        for i, g in enumerate(grid):
            out[i] = (g, obj(np.array([g])))
    elif anchor == "true":
        density = data_or_density
        lo, hi = integration_range(density, 1e-9) if hasattr(density, "quantile") else density.support
        for i, g in enumerate(grid):
            model = space.build(np.array([g]))
            mlo, mhi = integration_range(model, 1e-9)
            out[i] = (g, divergence(gen, model.pdf, density.pdf,
                                    (min(lo, mlo), max(hi, mhi))))
    else:
        raise ConfigError(f"unknown dual_curve anchor {anchor!r}")
    return out
