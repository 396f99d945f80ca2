"""Proximal-point iterations for divergence-based objectives on mixtures:
one-step, proportion/shape-split two-step, and the relaxed variant with a
vanishing penalty sequence.

The proximal term penalizes movement of the conditional label densities:

    D_psi(phi, phi') = (1/n) sum_i sum_j psi(h_i(j|phi) / h_i(j|phi')) h_i(j|phi')

with psi >= 0, psi(1) = psi'(1) = 0.  Each accepted step may not increase the
penalized objective, which forces the plain objective to be nonincreasing
along the iterates.
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .families import ModelSpace
from .numerics import ConfigError, DomainError, OptimizerSpec, brent, nelder_mead

PENALTY = 1e50


def sqrt_prox(t):
    """Default proximal generator 0.5*(sqrt(t)-1)^2."""
    return 0.5 * (np.sqrt(t) - 1.0) ** 2


def kl_mod_prox(t):
    """-log t + t - 1; recovers the EM algorithm for likelihood objectives."""
    return -np.log(t) + t - 1.0


@dataclass
class ProximalTerm:
    """psi generator plus the model's conditional label densities."""
    space: ModelSpace
    psi: Callable = sqrt_prox
    min_h: float = 1e-300

    def labels(self, phi_vec, sample) -> np.ndarray:
        mix = self.space.build(self.space.clip(phi_vec))
        return mix.labels(np.asarray(sample, dtype=float))

    def dpsi_from_labels(self, h_new: np.ndarray, h_old: np.ndarray) -> float:
        if np.any(h_old <= 0):
            i, j = np.argwhere(h_old <= 0)[0]
            raise DomainError(f"conditional label density vanished at observation {i}, label {j}")
        ratio = np.maximum(h_new, self.min_h) / h_old
        return float(np.mean(np.sum(self.psi(ratio) * h_old, axis=1)))


def dpsi(prox: ProximalTerm, phi, phi_prev, sample) -> float:
    """D_psi(phi, phi_prev) over the given sample; zero at phi == phi_prev."""
    h_old = prox.labels(phi_prev, sample)
    h_new = prox.labels(phi, sample)
    return prox.dpsi_from_labels(h_new, h_old)


@dataclass
class ProximalRun:
    iterates: np.ndarray
    objective_values: np.ndarray
    step_norms: np.ndarray
    mode: str
    status: str
    betas: Optional[np.ndarray] = None

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def final_objective(self) -> float:
        return float(self.objective_values[-1])


def _inner_solve(penalized, space: ModelSpace, start, inner: OptimizerSpec):
    spec = OptimizerSpec(tol_x=inner.tol_x, tol_f=inner.tol_f,
                         max_evals=inner.max_evals, bounds=space.bounds,
                         restarts=inner.restarts, polish=inner.polish)
    return nelder_mead(penalized, start, spec)


DEFAULT_INNER = OptimizerSpec(tol_x=1e-10, tol_f=1e-13, max_evals=3000,
                              restarts=1, polish=True)


def _run(objective, prox, sample, init, step_fn, mode, tol, max_iter, betas=None):
    space = prox.space
    phi = space.clip(np.asarray(init, dtype=float))
    iterates = [phi.copy()]
    values = [float(objective(phi))]
    steps = []
    status = "max-iter"
    for k in range(max_iter):
        beta = 1.0 if betas is None else float(betas[min(k, len(betas) - 1)])
        phi_new, accepted = step_fn(phi, values[-1], beta)
        if not accepted:
            # relaxed acceptance: no improving local infimum; stop at phi_k
            iterates.append(phi.copy())
            values.append(values[-1])
            steps.append(0.0)
            status = "degenerate" if k == 0 else "converged"
            break
        new_val = float(objective(phi_new))
        steps.append(float(np.linalg.norm(phi_new - phi)))
        iterates.append(phi_new.copy())
        values.append(new_val)
        if abs(values[-2] - values[-1]) < tol or steps[-1] < tol:
            phi = phi_new
            status = "converged"
            break
        phi = phi_new
    return ProximalRun(iterates=np.asarray(iterates),
                       objective_values=np.asarray(values),
                       step_norms=np.asarray(steps), mode=mode, status=status,
                       betas=None if betas is None else np.asarray(betas))


def proximal_minimize(objective: Callable, prox: ProximalTerm, sample, init,
                      inner: OptimizerSpec = DEFAULT_INNER, tol: float = 1e-8,
                      max_iter: int = 500) -> ProximalRun:
    """phi_{k+1} = arginf objective(phi) + D_psi(phi, phi_k)."""
    sample = np.asarray(sample, dtype=float)
    space = prox.space

    def step(phi, f_phi, beta):
        h_old = prox.labels(phi, sample)

        def penalized(v):
            val = objective(v)
            if not np.isfinite(val) or val >= PENALTY * 0.5:
                return PENALTY
            try:
                pen = prox.dpsi_from_labels(prox.labels(v, sample), h_old)
            except DomainError:
                return PENALTY
            return val + beta * pen

        res = _inner_solve(penalized, space, phi, inner)
        cand = space.clip(res.x)
        # accept only if the penalized value does not exceed f(phi_k); this
        # preserves monotonicity of the raw objective since D_psi >= 0
        if res.fun <= f_phi + 1e-14 * max(1.0, abs(f_phi)):
            return cand, True
        retry = _inner_solve(penalized, space, phi,
                             OptimizerSpec(tol_x=inner.tol_x * 0.1,
                                           tol_f=inner.tol_f * 0.1,
                                           max_evals=inner.max_evals, polish=True))
        if retry.fun <= f_phi + 1e-14 * max(1.0, abs(f_phi)):
            return space.clip(retry.x), True
        return phi, False

    return _run(objective, prox, sample, init, step, "one-step", tol, max_iter)


def proximal_two_step(objective: Callable, prox: ProximalTerm, sample, init,
                      inner: OptimizerSpec = DEFAULT_INNER, tol: float = 1e-8,
                      max_iter: int = 500, lam_dim: int = 1) -> ProximalRun:
    """Proportion step then component-parameter step, each against the full
    proximal anchor phi_k."""
    sample = np.asarray(sample, dtype=float)
    space = prox.space
    if not space.is_mixture or space.names[0] != "lam":
        raise ConfigError("two-step iteration expects a mixture space led by the proportion")

    def step(phi, f_phi, beta):
        h_old = prox.labels(phi, sample)

        def penalized(v):
            val = objective(v)
            if not np.isfinite(val) or val >= PENALTY * 0.5:
                return PENALTY
            try:
                pen = prox.dpsi_from_labels(prox.labels(v, sample), h_old)
            except DomainError:
                return PENALTY
            return val + beta * pen

        # proportion substep (scalar -> Brent)
        theta = phi[lam_dim:]

        def pen_lam(t):
            return penalized(np.concatenate([[t], theta]))

        lam_res = brent(pen_lam, space.bounds[0][0], space.bounds[0][1],
                        OptimizerSpec(tol_x=inner.tol_x, max_evals=inner.max_evals))
        lam_new = float(lam_res.x[0]) if lam_res.fun <= pen_lam(phi[0]) else float(phi[0])

        # component-parameter substep
        def pen_theta(tv):
            return penalized(np.concatenate([[lam_new], tv]))

        th_res = nelder_mead(pen_theta, theta,
                             OptimizerSpec(tol_x=inner.tol_x, tol_f=inner.tol_f,
                                           max_evals=inner.max_evals,
                                           bounds=space.bounds[lam_dim:],
                                           polish=inner.polish))
        cand = space.clip(np.concatenate([[lam_new], th_res.x]))
        if penalized(cand) <= f_phi + 1e-14 * max(1.0, abs(f_phi)):
            return cand, True
        return phi, False

    return _run(objective, prox, sample, init, step, "two-step", tol, max_iter)


def proximal_relaxed(objective: Callable, prox: ProximalTerm, sample, init,
                     beta_sequence: Sequence[float],
                     inner: OptimizerSpec = DEFAULT_INNER, tol: float = 1e-8,
                     max_iter: int = 500) -> ProximalRun:
    """Vanishing-penalty variant: phi_{k+1} = arginf objective + beta_k D_psi."""
    betas = np.asarray(list(beta_sequence), dtype=float)
    if np.any(betas < 0):
        raise ConfigError("beta sequence must be nonnegative")
    sample = np.asarray(sample, dtype=float)
    space = prox.space

    def step(phi, f_phi, beta):
        h_old = prox.labels(phi, sample)

        def penalized(v):
            val = objective(v)
            if not np.isfinite(val) or val >= PENALTY * 0.5:
                return PENALTY
            if beta == 0.0:
                return val
            try:
                pen = prox.dpsi_from_labels(prox.labels(v, sample), h_old)
            except DomainError:
                return PENALTY
            return val + beta * pen

        res = _inner_solve(penalized, space, phi, inner)
        cand = space.clip(res.x)
        if res.fun <= f_phi + 1e-14 * max(1.0, abs(f_phi)):
            return cand, True
        return phi, False

    return _run(objective, prox, sample, init, step, "relaxed", tol,
                min(max_iter, len(betas)), betas=betas)


def trace_to_csv(run: ProximalRun, path, names: Sequence[str]):
    """Trace export: (iter, objective, step_norm, phi components)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "objective", "step_norm", *names])
        for k, (phi, val) in enumerate(zip(run.iterates, run.objective_values)):
            step = run.step_norms[k - 1] if k > 0 else 0.0
            writer.writerow([k, f"{val:.6g}", f"{step:.6g}",
                             *[f"{v:.6g}" for v in phi]])
