"""Semiparametric two-component mixture estimation with the unknown component
defined through moment constraints.

The unknown component is eliminated through the Fenchel dual of the
constrained projection: for the chi-square generator the inner supremum over
the dual variable has the closed form xi(phi) = Omega^{-1} (m(alpha) - s(phi))
and every integral reduces to moment arithmetic, so no quadrature is needed.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .divergences import PEARSON_CHI2, PhiGenerator
from .dual import EstimateReport
from .families import Family, ModelSpace, _arr
from .numerics import (ConfigError, OptimizerSpec, SingularMatrixError,
                       integrate, is_spd, lu_solve, nelder_mead,
                       QuadratureSpec)

INFEASIBLE_PENALTY = 100.0  # objective value assigned outside the feasible set

Exponent = Union[int, Tuple[int, int]]


@dataclass(frozen=True)
class MomentConstraintSet:
    """Constraint functions g (monomials, g0 == 1) and target map m(alpha)
    (m0 == 1)."""
    exponents: Tuple[Exponent, ...]
    m: Callable[[np.ndarray], np.ndarray]
    alpha_names: Tuple[str, ...]
    alpha_bounds: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        first = self.exponents[0]
        zero = (0, 0) if isinstance(first, tuple) else 0
        if first != zero:
            raise ConfigError("constraint list must start with the mass function g0 == 1")

    @property
    def bivariate(self) -> bool:
        return isinstance(self.exponents[0], tuple)

    @property
    def ell(self) -> int:
        return len(self.exponents) - 1

    def g_matrix(self, x: np.ndarray) -> np.ndarray:
        """Rows g(x_i) for the sample."""
        if self.bivariate:
            x = np.asarray(x, dtype=float).reshape(-1, 2)
            return np.column_stack([x[:, 0] ** a * x[:, 1] ** b for a, b in self.exponents])
        x = _arr(x)
        return np.column_stack([x ** k for k in self.exponents])

    def targets(self, alpha: np.ndarray) -> np.ndarray:
        vec = np.asarray(self.m(np.atleast_1d(alpha)), dtype=float)
        if vec.shape != (len(self.exponents),) or vec[0] != 1.0:
            raise ConfigError("m(alpha) must return one value per constraint with m0 == 1")
        return vec


def univariate_moment_constraints(orders: Sequence[int], m, alpha_names,
                                  alpha_bounds) -> MomentConstraintSet:
    return MomentConstraintSet(exponents=(0, *[int(k) for k in orders]), m=m,
                               alpha_names=tuple(alpha_names),
                               alpha_bounds=tuple(tuple(b) for b in alpha_bounds))


def _exp_add(a: Exponent, b: Exponent) -> Exponent:
    if isinstance(a, tuple):
        return (a[0] + b[0], a[1] + b[1])
    return a + b


def _family_moment(family: Family, e: Exponent) -> float:
    if isinstance(e, tuple):
        return family.moment2d(*e)
    return family.moment(e)


class _MomentTable:
    """Empirical (or model) raw moments for all needed exponents, cached."""

    def __init__(self, constraints: MomentConstraintSet, data):
        exps = list(constraints.exponents)
        needed = {e if isinstance(e, tuple) else int(e) for e in exps}
        for a in exps:
            for b in exps:
                needed.add(_exp_add(a, b))
        self.is_sample = isinstance(data, np.ndarray) or isinstance(data, (list, tuple))
        self.values = {}
        if self.is_sample:
            x = np.asarray(data, dtype=float)
            if constraints.bivariate:
                x = x.reshape(-1, 2)
                for e in needed:
                    self.values[e] = float(np.mean(x[:, 0] ** e[0] * x[:, 1] ** e[1]))
            else:
                for e in needed:
                    self.values[e] = float(np.mean(x ** e))
        else:
            for e in needed:
                self.values[e] = _family_moment(data, e)

    def __getitem__(self, e):
        return self.values[e]


def _omega_and_s(constraints: MomentConstraintSet, lam: float, table: _MomentTable,
                 p1: Family):
    exps = constraints.exponents
    k = len(exps)
    c0 = 1.0 / (1.0 - lam)
    c1 = lam / (1.0 - lam)
    s = np.array([c0 * table[e] - c1 * _family_moment(p1, e) for e in exps])
    omega = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            e = _exp_add(exps[i], exps[j])
            omega[i, j] = omega[j, i] = c0 * table[e] - c1 * _family_moment(p1, e)
    return omega, s


def omega_and_xi(constraints: MomentConstraintSet, lam: float, theta,
                 data_or_model, parametric: ModelSpace, alpha):
    """(Omega, xi) of the chi-square inner supremum; xi is None when Omega
    fails the Sylvester positive-definiteness test."""
    p1 = parametric.build(np.atleast_1d(theta))
    table = data_or_model if isinstance(data_or_model, _MomentTable) \
        else _MomentTable(constraints, data_or_model)
    omega, s = _omega_and_s(constraints, lam, table, p1)
    if not is_spd(omega):
        return omega, None
    try:
        xi = lu_solve(omega, constraints.targets(alpha) - s)
    except SingularMatrixError:
        return omega, None
    return omega, xi


def h_empirical(constraints: MomentConstraintSet, gen: PhiGenerator, phi, xi,
                sample, parametric: ModelSpace,
                table: Optional[_MomentTable] = None) -> float:
    """Empirical dual criterion at (phi, xi).

    For the chi-square generator every term is moment arithmetic; other
    generators integrate psi(xi^T g) against the parametric component by
    quadrature.
    """
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    lam = float(phi[0])
    td = parametric.dim
    theta, alpha = phi[1:1 + td], phi[1 + td:]
    xi = np.asarray(xi, dtype=float)
    p1 = parametric.build(theta)
    m = constraints.targets(alpha)
    if gen.gamma == 2.0:
        if table is None:
            table = _MomentTable(constraints, np.asarray(sample, dtype=float))
        omega, s = _omega_and_s(constraints, lam, table, p1)
        return float(xi @ m - 0.5 * xi @ omega @ xi - xi @ s)
    # generic generator: psi evaluated pointwise, quadrature on the model side
    x = np.asarray(sample, dtype=float)
    gx = constraints.g_matrix(x) @ xi
    emp = float(np.mean(gen.psi(gx)))
    lo, hi = p1.support
    if not np.isfinite(lo):
        lo = float(p1.quantile(1e-9))
    if not np.isfinite(hi):
        hi = float(p1.quantile(1 - 1e-9))

    def f(y):
        gy = constraints.g_matrix(y) @ xi
        return np.asarray(gen.psi(gy), dtype=float) * _arr(p1.pdf(y))

    model_term = integrate(f, lo, hi, QuadratureSpec(abs_tol=1e-9, rel_tol=1e-8))
    return float(xi @ m - emp / (1.0 - lam) + lam / (1.0 - lam) * model_term)


@dataclass
class SemiparametricMomentProblem:
    """Bundles the pieces of the outer minimization; reusable across calls."""
    constraints: MomentConstraintSet
    parametric: ModelSpace
    sample: np.ndarray
    gen: PhiGenerator = PEARSON_CHI2

    def __post_init__(self):
        self.sample = np.asarray(self.sample, dtype=float)
        self.table = _MomentTable(self.constraints, self.sample)
        self.lam_bounds = (0.01, 0.99)

    @property
    def bounds(self):
        return (self.lam_bounds, *self.parametric.bounds, *self.constraints.alpha_bounds)

    @property
    def names(self):
        return ("lam", *self.parametric.names, *self.constraints.alpha_names)

    def split(self, phi):
        td = self.parametric.dim
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        return float(phi[0]), phi[1:1 + td], phi[1 + td:]

    def objective(self, phi) -> float:
        lam, theta, alpha = self.split(phi)
        if not (self.lam_bounds[0] <= lam <= self.lam_bounds[1]):
            return INFEASIBLE_PENALTY
        try:
            p1 = self.parametric.build(theta)
            m = self.constraints.targets(alpha)
        except Exception:
            return INFEASIBLE_PENALTY
        if self.gen.gamma == 2.0:
            omega, s = _omega_and_s(self.constraints, lam, self.table, p1)
            if not is_spd(omega):
                return INFEASIBLE_PENALTY
            try:
                diff = m - s
                xi = lu_solve(omega, diff)
            except SingularMatrixError:
                return INFEASIBLE_PENALTY
            return float(0.5 * diff @ xi)
        # numeric inner supremum for other generators (slow path)
        def neg(xi):
            try:
                return -h_empirical(self.constraints, self.gen, phi, xi,
                                    self.sample, self.parametric, self.table)
            except Exception:
                return np.inf
        res = nelder_mead(neg, np.zeros(len(self.constraints.exponents)),
                          OptimizerSpec(tol_x=1e-9, tol_f=1e-12, max_evals=4000))
        return float(-res.fun) if np.isfinite(res.fun) else INFEASIBLE_PENALTY

    def xi_at(self, phi):
        lam, theta, alpha = self.split(phi)
        _, xi = omega_and_xi(self.constraints, lam, theta, self.table,
                             self.parametric, alpha)
        return xi


def estimate_spm_moments(constraints: MomentConstraintSet, parametric: ModelSpace,
                         sample, gen: PhiGenerator = PEARSON_CHI2,
                         opt: OptimizerSpec = OptimizerSpec(tol_x=1e-8, tol_f=1e-12,
                                                            max_evals=6000),
                         restarts: int = 10, rng=None,
                         max_feasible_draws: int = 1000) -> EstimateReport:
    """Outer minimization over (lambda, theta, alpha) with multi-start from
    random feasible points; infeasible parameters carry a flat penalty."""
    t0 = time.perf_counter()
    if rng is None:
        rng = np.random.default_rng(4)
    problem = SemiparametricMomentProblem(constraints, parametric,
                                          np.asarray(sample, dtype=float), gen)
    d = constraints.ell
    need = parametric.dim + len(constraints.alpha_names) + 1
    if d < need:
        raise ConfigError(f"need at least {need} effective constraints, got {d}")
    bounds = problem.bounds
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    starts = []
    draws = 0
    while len(starts) < restarts and draws < max_feasible_draws:
        cand = lo + (hi - lo) * rng.uniform(size=len(bounds))
        draws += 1
        if problem.objective(cand) < INFEASIBLE_PENALTY:
            starts.append(cand)
    if not starts:
        raise ConfigError("no feasible starting point found")

    results = []
    for s in starts:
        res = nelder_mead(problem.objective, s,
                          OptimizerSpec(tol_x=opt.tol_x, tol_f=opt.tol_f,
                                        max_evals=opt.max_evals, bounds=bounds))
        results.append(res)
    results.sort(key=lambda r: r.fun)
    best = results[0]
    top = np.array([r.x for r in results[:3]])
    spread = float(np.max(np.ptp(top, axis=0))) if len(results) >= 2 else 0.0
    xi = problem.xi_at(best.x)
    status = "converged" if best.fun < INFEASIBLE_PENALTY else "degenerate"
    return EstimateReport(estimator="spm-moments", names=problem.names,
                          phi=np.atleast_1d(best.x),
                          inner=None if xi is None else np.asarray(xi),
                          trace=[float(best.fun)], status=status,
                          wall_time=time.perf_counter() - t0,
                          extras={"multistart_spread": spread,
                                  "ambiguous": spread > 0.1,
                                  "feasible_draws": draws})
