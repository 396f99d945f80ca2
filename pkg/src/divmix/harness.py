"""Config-driven Monte-Carlo experiments: run estimator panels over seeded
replications, aggregate into result tables, and reproduce the reference
simulation tables at desk scale.

Per-replication seeds are split deterministically from the experiment seed,
so results are independent of worker-pool size and bitwise reproducible.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import baselines, dual, kde, proximal, spm_lmoments, spm_moments
from .divergences import PhiGenerator, error_criteria
from .dual import EstimateReport, integration_range
from .families import (ContaminationSpec, Family, Gaussian, Lognormal,
                       MixtureSpec, ModelSpace, TwoSidedWeibull, Weibull,
                       contaminate, family_from_config, gaussian_mixture_space,
                       gaussian_space, gpd_space, load_sample,
                       weibull_mixture_space, weibull_space)
from .numerics import ConfigError, OptimizerSpec

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    model: dict
    n: int
    replications: int
    estimators: List[dict]
    seed: int = 0
    contamination: Optional[dict] = None
    outputs: dict = field(default_factory=dict)
    keep_reports: bool = False
    section: str = "main"

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.n < 2:
            raise ConfigError("sample size must be >= 2")
        # fail fast: every estimator config must build before sampling starts
        for cfg in self.estimators:
            _resolve_estimator(cfg)

    def to_dict(self):
        return {"model": self.model, "n": self.n, "replications": self.replications,
                "estimators": self.estimators, "seed": self.seed,
                "contamination": self.contamination, "outputs": self.outputs,
                "keep_reports": self.keep_reports, "section": self.section}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {k: d[k] for k in ("model", "n", "replications", "estimators",
                                   "seed", "contamination", "outputs",
                                   "keep_reports", "section") if k in d}
        return cls(**known)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def space_from_config(cfg: dict) -> ModelSpace:
    kind = cfg.get("kind")
    if kind == "gaussian":
        return gaussian_space(mu_bounds=tuple(cfg.get("mu_bounds", (-10, 10))),
                              sigma_bounds=tuple(cfg.get("sigma_bounds", (1e-3, 50))),
                              fixed_sigma=cfg.get("fixed_sigma"))
    if kind == "gpd":
        return gpd_space(shape_bounds=tuple(cfg.get("shape_bounds", (1e-3, 50))),
                         scale_bounds=tuple(cfg.get("scale_bounds", (1e-3, 50))))
    if kind == "weibull":
        sb = tuple(cfg.get("shape_bounds", (0.05, 20.0)))
        fixed_scale = cfg.get("fixed_scale")
        if fixed_scale is not None:
            return ModelSpace(names=("shape",), bounds=(sb,),
                              build=lambda v: Weibull(float(fixed_scale), float(v[0])),
                              label="weibull-shape")
        return weibull_space(scale_bounds=tuple(cfg.get("scale_bounds", (1e-3, 50))),
                             shape_bounds=sb)
    if kind == "gaussian-mixture":
        return gaussian_mixture_space(sigma1=cfg.get("sigma1", 1.0),
                                      sigma2=cfg.get("sigma2", 1.0),
                                      lam_bounds=tuple(cfg.get("lam_bounds", (0.01, 0.99))),
                                      mu_bounds=tuple(cfg.get("mu_bounds", (-10, 10))))
    if kind == "weibull-mixture":
        return weibull_mixture_space(scale1=cfg.get("scale1", 0.5),
                                     scale2=cfg.get("scale2", 2.0),
                                     lam_bounds=tuple(cfg.get("lam_bounds", (0.01, 0.99))),
                                     shape_bounds=tuple(cfg.get("shape_bounds", (0.1, 12.0))))
    raise ConfigError(f"unknown model space kind {kind!r}")


def constraints_from_config(cfg: dict):
    kind = cfg.get("kind")
    if kind == "lognormal-moments":
        sigma = float(cfg["sigma"])
        orders = tuple(cfg.get("orders", (1, 2, 3)))
        mb = tuple(cfg.get("mu_bounds", (0.1, 8.0)))

        def m(alpha):
            mu = float(alpha[0])
            return np.array([1.0, *[math.exp(k * mu + 0.5 * k * k * sigma ** 2)
                                    for k in orders]])

        return spm_moments.univariate_moment_constraints(orders, m, ("mu0",), (mb,))
    if kind == "weibull-moments":
        scale = float(cfg["scale"])
        orders = tuple(cfg.get("orders", (1, 2, 3)))
        sb = tuple(cfg.get("shape_bounds", (0.1, 20.0)))

        def m(alpha):
            nu = float(alpha[0])
            return np.array([1.0, *[scale ** k * math.gamma(1.0 + k / nu)
                                    for k in orders]])

        return spm_moments.univariate_moment_constraints(orders, m, ("shape0",), (sb,))
    if kind == "two-sided-weibull-moments":
        scale = float(cfg["scale"])
        orders = tuple(cfg.get("orders", (2, 3, 4)))
        sb = tuple(cfg.get("shape_bounds", (0.2, 20.0)))

        def m(alpha):
            f = TwoSidedWeibull(float(alpha[0]), scale)
            return np.array([1.0, *[f.moment(k) for k in orders]])

        return spm_moments.univariate_moment_constraints(orders, m, ("shape0",), (sb,))
    if kind == "weibull-lmoments":
        return spm_lmoments.weibull_lmoment_constraints(
            float(cfg["scale"]), tuple(cfg.get("orders", (2, 3, 4))),
            tuple(cfg.get("shape_bounds", (0.1, 20.0))))
    if kind == "lognormal-lmoments":
        return spm_lmoments.lognormal_lmoment_constraints(
            float(cfg["sigma"]), tuple(cfg.get("orders", (2, 3, 4))),
            tuple(cfg.get("mu_bounds", (0.1, 8.0))))
    if kind == "two-sided-weibull-lmoments":
        return spm_lmoments.two_sided_weibull_lmoment_constraints(
            float(cfg["scale"]), tuple(cfg.get("orders", (2, 3, 4))),
            tuple(cfg.get("shape_bounds", (0.2, 20.0))))
    raise ConfigError(f"unknown constraint kind {kind!r}")


# ---------------------------------------------------------------------------
# estimator registry
# ---------------------------------------------------------------------------

def _gen(cfg) -> PhiGenerator:
    return PhiGenerator(float(cfg.get("gamma", 0.5)))


def _fit_kde(cfg, sample):
    bw = cfg.get("bandwidth", "silverman")
    if isinstance(bw, list):
        bw = tuple(bw)
    return kde.fit(cfg.get("kernel", "gaussian"), bw, sample)


def _resolve_estimator(cfg: dict) -> Callable:
    """Returns runner(sample, rng) -> (report, fitted_density_or_None)."""
    name = cfg.get("name")
    if name is None:
        raise ConfigError("estimator config needs a name")

    if name == "mle":
        space = space_from_config(cfg["space"])
        return lambda x, r: _with_density(dual.mle(space, x, rng_=r), space)
    if name == "mle-em":
        space = space_from_config(cfg["space"])
        init = cfg.get("init")
        return lambda x, r: _with_density(
            dual.mle_em(space, x, init=np.asarray(init, dtype=float) if init else None), space)
    if name == "classical-mdphide":
        space = space_from_config(cfg["space"])
        gen = _gen(cfg)
        return lambda x, r: _with_density(dual.classical_mdphide(gen, space, x, rng_=r), space)
    if name == "kernel-mdphide":
        space = space_from_config(cfg["space"])
        gen = _gen(cfg)
        return lambda x, r: _with_density(
            dual.kernel_mdphide(gen, space, x, _fit_kde(cfg, x), rng_=r), space)
    if name == "beran":
        space = space_from_config(cfg["space"])
        gen = _gen(cfg)
        return lambda x, r: _with_density(
            dual.beran(gen, space, x, _fit_kde(cfg, x), rng_=r), space)
    if name == "basu-lindsay":
        space = space_from_config(cfg["space"])
        gen = _gen(cfg)
        return lambda x, r: _with_density(
            dual.basu_lindsay(gen, space, x, _fit_kde(cfg, x), rng_=r), space)
    if name == "mdpd":
        space = space_from_config(cfg["space"])
        a = float(cfg.get("a", 0.5))
        return lambda x, r: _with_density(dual.mdpd(space, x, a, rng_=r), space)
    if name == "dphide":
        space = space_from_config(cfg["space"])
        gen = _gen(cfg)
        escort = cfg.get("escort", "mle")

        def run(x, r):
            if escort == "mle":
                esc = dual.mle(space, x).phi
            elif escort == "kernel-mdphide":
                esc = dual.kernel_mdphide(gen, space, x, _fit_kde(cfg, x), rng_=r).phi
            else:
                esc = np.asarray(escort, dtype=float)
            return _with_density(dual.dphide(gen, space, x, esc), space)

        return run
    if name == "proximal-kernel-mdphide":
        space = space_from_config(cfg["space"])
        gen = _gen(cfg)
        psi = proximal.kl_mod_prox if cfg.get("psi") == "kl-mod" else proximal.sqrt_prox
        mode = cfg.get("mode", "one-step")

        def run(x, r):
            est = _fit_kde(cfg, x)
            objective = dual.kernel_dual_objective(gen, space, est, x)
            prox = proximal.ProximalTerm(space=space, psi=psi)
            init = cfg.get("init") or dual._default_start(space, x)
            fn = proximal.proximal_two_step if mode == "two-step" else proximal.proximal_minimize
            run_ = fn(objective, prox, x, np.asarray(init, dtype=float))
            rep = EstimateReport(estimator=f"proximal-{mode}", names=space.names,
                                 phi=run_.final,
                                 trace=[float(v) for v in run_.objective_values],
                                 status="converged" if run_.status != "degenerate" else "degenerate")
            return _with_density(rep, space)

        return run
    if name == "spm-moments":
        parametric = space_from_config(cfg["parametric"])
        constraints = constraints_from_config(cfg["constraints"])
        restarts = int(cfg.get("restarts", 10))
        return lambda x, r: (spm_moments.estimate_spm_moments(
            constraints, parametric, x, restarts=restarts, rng=r), None)
    if name == "spm-lmoments":
        parametric = space_from_config(cfg["parametric"])
        constraints = constraints_from_config(cfg["constraints"])
        restarts = int(cfg.get("restarts", 10))
        starts = cfg.get("starts")
        return lambda x, r: (spm_lmoments.estimate_spm_lmoments(
            constraints, parametric, x, restarts=restarts, rng=r,
            starts=[np.asarray(s, dtype=float) for s in starts] if starts else None), None)
    if name == "song-em":
        parametric = space_from_config(cfg["space"])
        variant = cfg.get("variant", "stabilized")
        return lambda x, r: (baselines.song_em(
            parametric, x, _fit_kde(cfg, x), variant=variant,
            init_lam=float(cfg.get("init_lam", 0.5)),
            init_theta=cfg.get("init_theta")), None)
    if name == "song-pi-max":
        parametric = space_from_config(cfg["space"])
        return lambda x, r: (baselines.song_pi_max(parametric, x, _fit_kde(cfg, x)), None)
    if name == "robin-em":
        parametric = space_from_config(cfg["space"])
        return lambda x, r: (baselines.robin_em(
            parametric, x, kernel=cfg.get("kernel", "gaussian"),
            bandwidth=cfg.get("bandwidth", "silverman"),
            init_lam=float(cfg.get("init_lam", 0.5)),
            init_theta=cfg.get("init_theta")), None)
    if name == "stochastic-em":
        parametric = space_from_config(cfg["space"])
        return lambda x, r: (baselines.stochastic_em(
            parametric, x, kernel=cfg.get("kernel", "gaussian"),
            bandwidth=cfg.get("bandwidth", "silverman"),
            iters=int(cfg.get("iters", 5000)), burn=int(cfg.get("burn", 1000)),
            rng=r, init_theta=cfg.get("init_theta")), None)
    if name == "bordes":
        parametric = space_from_config(cfg["space"])
        return lambda x, r: (baselines.bordes_symmetry(
            parametric, x, kernel_cdf=cfg.get("kernel"),
            bandwidth=cfg.get("bandwidth", "silverman"), rng=r), None)
    raise ConfigError(f"unknown estimator {name!r}")


def _with_density(report: EstimateReport, space: ModelSpace):
    try:
        density = space.build(report.phi)
    except Exception:
        density = None
    return report, density


def estimator_label(cfg: dict) -> str:
    return cfg.get("label", cfg["name"])


# ---------------------------------------------------------------------------
# running experiments
# ---------------------------------------------------------------------------

def _criteria_support(model: Family, fitted):
    chi = integration_range(model, 1e-7)
    lo, hi = chi
    if fitted is not None:
        flo, fhi = integration_range(fitted, 1e-8)
        lo, hi = min(lo, flo), max(hi, fhi)
    return (lo, hi), chi


def _one_replication(cfg_dict: dict, rep: int) -> dict:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    model = family_from_config(cfg.model)
    rng = stream(cfg.seed, rep)
    sample = model.sample(cfg.n, rng)
    if cfg.contamination is not None:
        spec_kwargs = dict(cfg.contamination)
        if "dist" in spec_kwargs and isinstance(spec_kwargs["dist"], dict):
            spec_kwargs["dist"] = family_from_config(spec_kwargs["dist"])
        for k in ("low", "high", "interval"):
            if k in spec_kwargs and isinstance(spec_kwargs[k], list):
                spec_kwargs[k] = tuple(spec_kwargs[k])
        sample = contaminate(sample, ContaminationSpec(**spec_kwargs), rng)
    out = {"rep": rep, "estimates": {}}
    for j, est_cfg in enumerate(cfg.estimators):
        runner = _resolve_estimator(est_cfg)
        report, fitted = runner(sample, stream(cfg.seed, rep, j))
        entry = {"phi": [float(v) for v in np.atleast_1d(report.phi)],
                 "names": list(report.names), "status": report.status}
        if fitted is not None and report.status != "degenerate":
            try:
                support, chi_support = _criteria_support(model, fitted)
                tvd, chi = error_criteria(fitted.pdf, model.pdf, support,
                                          chi_support=chi_support)
                entry["tvd"], entry["chi_root"] = float(tvd), float(chi)
            except Exception:
                pass
        if cfg.keep_reports:
            entry["report"] = report.to_dict()
        out["estimates"][estimator_label(est_cfg)] = entry
    return out


@dataclass
class ResultTable:
    """Per-estimator summary rows; degenerate runs are excluded from the means
    but counted."""
    section: str
    rows: List[dict] = field(default_factory=list)
    references: Dict[str, float] = field(default_factory=dict)

    def row_for(self, label) -> Optional[dict]:
        for r in self.rows:
            if r["estimator"] == label:
                return r
        return None

    def to_csv(self, path):
        import csv as _csv
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = _csv.writer(fh)
            w.writerow(["section", "estimator", "quantity", "mean", "sd",
                        "median", "reference", "degenerate", "used"])
            for row in self.rows:
                for q in row["quantities"]:
                    ref = self.references.get(f"{row['estimator']}|{q['name']}", "")
                    w.writerow([self.section, row["estimator"], q["name"],
                                _fmt(q["mean"]), _fmt(q["sd"]), _fmt(q["median"]),
                                _fmt(ref) if ref != "" else "",
                                row["degenerate"], row["used"]])


def _fmt(v) -> str:
    if v == "" or v is None:
        return ""
    if isinstance(v, float) and not np.isfinite(v):
        return "inf" if v > 0 else "-inf"
    return f"{float(v):.6g}"


def _aggregate(section: str, labels: Sequence[str], results: List[dict],
               references=None) -> ResultTable:
    table = ResultTable(section=section, references=dict(references or {}))
    for label in labels:
        entries = [r["estimates"][label] for r in results]
        ok = [e for e in entries if e["status"] != "degenerate"]
        degenerate = len(entries) - len(ok)
        quantities = []
        if ok:
            names = ok[0]["names"]
            phis = np.array([e["phi"] for e in ok])
            for i, nm in enumerate(names):
                col = phis[:, i]
                quantities.append({"name": nm, "mean": float(np.mean(col)),
                                   "sd": float(np.std(col, ddof=1)) if len(col) > 1 else 0.0,
                                   "median": float(np.median(col))})
            for crit in ("tvd", "chi_root"):
                vals = np.array([e[crit] for e in ok if crit in e])
                if vals.size:
                    finite = vals[np.isfinite(vals)]
                    mean = float(np.mean(vals)) if finite.size == vals.size else np.inf
                    quantities.append({"name": crit, "mean": mean,
                                       "sd": float(np.std(finite, ddof=1)) if finite.size > 1 else 0.0,
                                       "median": float(np.median(vals))})
        table.rows.append({"estimator": label, "quantities": quantities,
                           "degenerate": degenerate, "used": len(ok)})
    return table


def run_experiment(cfg: ExperimentConfig, references=None) -> ResultTable:
    labels = [estimator_label(e) for e in cfg.estimators]
    if len(set(labels)) != len(labels):
        raise ConfigError("estimator labels must be unique (use 'label')")
    threads = int(os.environ.get("DIVMIX_THREADS", "1") or "1")
    cfg_dict = cfg.to_dict()
    if threads > 1 and cfg.replications > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_worker, [(cfg_dict, i) for i in range(cfg.replications)]))
    else:
        results = [_one_replication(cfg_dict, i) for i in range(cfg.replications)]
    results.sort(key=lambda r: r["rep"])
    table = _aggregate(cfg.section, labels, results, references)
    if cfg.keep_reports and cfg.outputs.get("reports_dir"):
        os.makedirs(cfg.outputs["reports_dir"], exist_ok=True)
        for r in results:
            for label, e in r["estimates"].items():
                if "report" in e:
                    fname = f"{cfg.section}-{label}-{r['rep']:04d}.json".replace("|", "-")
                    with open(os.path.join(cfg.outputs["reports_dir"], fname),
                              "w", encoding="utf-8") as fh:
                        json.dump(e["report"], fh, indent=1)
    return table


def _worker(args):
    return _one_replication(*args)


# ---------------------------------------------------------------------------
# reference tables (desk scale)
# ---------------------------------------------------------------------------

def _gaussian_errors_table(scale, seed):
    reps = max(25, int(round(100 * scale)))
    model = {"kind": "gaussian", "mu": 0.0, "sigma": 1.0}
    space = {"kind": "gaussian", "mu_bounds": [-5, 12], "sigma_bounds": [0.05, 12]}
    estimators = [
        {"name": "mle", "space": space},
        {"name": "classical-mdphide", "gamma": 0.5, "space": space},
        {"name": "kernel-mdphide", "gamma": 0.5, "space": space,
         "kernel": "gaussian", "bandwidth": "silverman"},
    ]
    clean = ExperimentConfig(model=model, n=100, replications=reps,
                             estimators=estimators, seed=seed, section="clean")
    outl = ExperimentConfig(model=model, n=100, replications=reps,
                            estimators=estimators, seed=seed,
                            contamination={"scheme": "replace-largest-by-value",
                                           "count": 10, "value": 10.0},
                            section="outliers")
    refs_clean = {"mle|tvd": 0.053, "classical-mdphide|tvd": 0.054,
                  "kernel-mdphide|tvd": 0.056,
                  "mle|mu": 0.005, "mle|sigma": 0.988,
                  "classical-mdphide|sigma": 0.983,
                  "kernel-mdphide|sigma": 0.967}
    refs_outl = {"mle|tvd": 0.518, "classical-mdphide|tvd": 0.516,
                 "kernel-mdphide|tvd": 0.136,
                 "mle|mu": 0.833, "mle|sigma": 3.172,
                 "kernel-mdphide|mu": -0.187, "kernel-mdphide|sigma": 0.810}
    return [(clean, refs_clean), (outl, refs_outl)]


def _gaussian_mixture_errors_table(scale, seed):
    reps = max(25, int(round(100 * scale)))
    model = {"kind": "mixture", "lambda": 0.35,
             "component1": {"kind": "gaussian", "mu": -2.0, "sigma": 1.0},
             "component0": {"kind": "gaussian", "mu": 1.5, "sigma": 1.0}}
    space = {"kind": "gaussian-mixture", "mu_bounds": [-8, 8]}
    estimators = [
        {"name": "mle-em", "space": space, "init": [0.5, -1.0, 1.0]},
        {"name": "kernel-mdphide", "gamma": 0.5, "space": space,
         "kernel": "gaussian", "bandwidth": "silverman"},
    ]
    clean = ExperimentConfig(model=model, n=100, replications=reps,
                             estimators=estimators, seed=seed, section="clean")
    outl = ExperimentConfig(model=model, n=100, replications=reps,
                            estimators=estimators, seed=seed,
                            contamination={"scheme": "add-uniform-to-extremes",
                                           "count": 5, "low": [-5, -2], "high": [2, 5]},
                            section="outliers")
    refs_clean = {"mle-em|tvd": 0.064, "kernel-mdphide|tvd": 0.064,
                  "mle-em|lam": 0.360, "mle-em|mu1": -1.989, "mle-em|mu2": 1.493}
    refs_outl = {"mle-em|tvd": 0.150, "kernel-mdphide|tvd": 0.087,
                 "kernel-mdphide|lam": 0.349, "kernel-mdphide|mu1": -1.767,
                 "kernel-mdphide|mu2": 1.377}
    return [(clean, refs_clean), (outl, refs_outl)]


def _weibull_lognormal_moments_table(scale, seed):
    reps = max(25, int(round(100 * scale)))
    model = {"kind": "mixture", "lambda": 0.3,
             "component1": {"kind": "weibull", "scale": 1.0, "shape": 1.5},
             "component0": {"kind": "lognormal", "mu": 3.0, "sigma": 0.5}}
    est = {"name": "spm-moments",
           "parametric": {"kind": "weibull", "fixed_scale": 1.0,
                          "shape_bounds": [0.2, 6.0]},
           "constraints": {"kind": "lognormal-moments", "sigma": 0.5,
                           "orders": [1, 2, 3], "mu_bounds": [1.0, 5.0]},
           "restarts": 10}
    cfg = ExperimentConfig(model=model, n=1000, replications=reps,
                           estimators=[est], seed=seed, section="mixture-1")
    refs = {"spm-moments|lam": 0.308, "spm-moments|shape": 1.484,
            "spm-moments|mu0": 3.002}
    return [(cfg, refs)]


def _weibull_lognormal_lmoments_table(scale, seed):
    reps = max(25, int(round(100 * scale)))
    model = {"kind": "mixture", "lambda": 0.3,
             "component1": {"kind": "weibull", "scale": 1.0, "shape": 1.5},
             "component0": {"kind": "lognormal", "mu": 3.0, "sigma": 0.5}}
    est = {"name": "spm-lmoments",
           "parametric": {"kind": "weibull", "fixed_scale": 1.0,
                          "shape_bounds": [0.2, 6.0]},
           "constraints": {"kind": "lognormal-lmoments", "sigma": 0.5,
                           "mu_bounds": [1.0, 5.0]},
           "starts": [[0.1, 0.5, 2.0], [0.15, 0.5, 2.8], [0.05, 1.5, 2.5],
                      [0.1, 1.0, 3.0], [0.3, 2.0, 3.2], [0.5, 1.0, 3.5]]}
    cfg = ExperimentConfig(model=model, n=1000, replications=reps,
                           estimators=[est], seed=seed, section="mixture-1")
    refs = {"spm-lmoments|lam": 0.313, "spm-lmoments|shape": 1.027,
            "spm-lmoments|mu0": 2.992}
    return [(cfg, refs)]


def _two_sided_weibull_gaussian_lmoments_table(scale, seed):
    reps = max(25, int(round(100 * scale)))
    model = {"kind": "mixture", "lambda": 0.7,
             "component1": {"kind": "gaussian", "mu": 0.0, "sigma": 0.5},
             "component0": {"kind": "two-sided-weibull", "shape": 3.0, "scale": 1.5}}
    est = {"name": "spm-lmoments",
           "parametric": {"kind": "gaussian", "fixed_sigma": 0.5,
                          "mu_bounds": [-3.0, 3.0]},
           "constraints": {"kind": "two-sided-weibull-lmoments", "scale": 1.5,
                           "shape_bounds": [0.5, 8.0]},
           "starts": [[0.8, 1.0, 1.0], [0.5, -1.0, 2.5], [0.8, 0.5, 2.0],
                      [0.7, 0.0, 3.0], [0.7, 1.0, 4.0], [0.5, 2.0, 3.5]]}
    cfg = ExperimentConfig(model=model, n=100, replications=reps,
                           estimators=[est], seed=seed, section="mixture-1")
    refs = {"spm-lmoments|lam": 0.758, "spm-lmoments|mu": -0.002,
            "spm-lmoments|shape0": 3.040}
    return [(cfg, refs)]


def _weibull_mixture_baselines_table(scale, seed):
    reps = max(10, int(round(100 * scale / 10.0)))
    model = {"kind": "mixture", "lambda": 0.3,
             "component1": {"kind": "weibull", "scale": 0.5, "shape": 2.0},
             "component0": {"kind": "weibull", "scale": 1.0, "shape": 1.0}}
    parametric = {"kind": "weibull", "fixed_scale": 0.5, "shape_bounds": [0.3, 8.0]}
    estimators = [
        {"name": "song-em", "space": parametric, "kernel": "rig",
         "bandwidth": 0.01, "variant": "stabilized", "init_lam": 0.5,
         "init_theta": [1.5]},
        {"name": "spm-moments",
         "parametric": parametric,
         "constraints": {"kind": "weibull-moments", "scale": 1.0,
                         "orders": [1, 2, 3], "shape_bounds": [0.3, 6.0]},
         "restarts": 10},
    ]
    cfg = ExperimentConfig(model=model, n=10000, replications=reps,
                           estimators=estimators, seed=seed, section="lam-0.3")
    refs = {"song-em|lam": 0.806, "song-em|shape": 1.185,
            "spm-moments|lam": 0.304, "spm-moments|shape": 2.191,
            "spm-moments|shape0": 0.998}
    return [(cfg, refs)]


TABLES = {
    "gaussian-errors": (_gaussian_errors_table,
                        "Standard Gaussian model, Hellinger panel, clean vs 10 outliers at 10"),
    "gaussian-mixture-errors": (_gaussian_mixture_errors_table,
                                "Two-Gaussian mixture (0.35, -2, 1.5), clean vs extreme-noise outliers"),
    "weibull-lognormal-moments-mix1": (_weibull_lognormal_moments_table,
                                       "Weibull-Lognormal mixture 1, moment constraints"),
    "weibull-lognormal-lmoments-mix1": (_weibull_lognormal_lmoments_table,
                                        "Weibull-Lognormal mixture 1, L-moment constraints"),
    "two-sided-weibull-gaussian-lmoments-mix1": (_two_sided_weibull_gaussian_lmoments_table,
                                                 "Two-sided Weibull-Gaussian mixture 1, L-moment constraints"),
    "weibull-mixture-baselines": (_weibull_mixture_baselines_table,
                                  "Weibull mixture, EM-type baseline vs moment constraints"),
}


def reproduce_table(table_id: str, scale: float = 1.0, seed: int = 0,
                    out_dir: Optional[str] = None,
                    keep_reports: bool = False) -> List[ResultTable]:
    if table_id not in TABLES:
        raise ConfigError(f"unknown table {table_id!r}; see list-tables")
    if not 0.0 < scale <= 1.0:
        raise ConfigError("scale must lie in (0, 1]")
    builder, _ = TABLES[table_id]
    tables = []
    for cfg, refs in builder(scale, seed):
        cfg.keep_reports = keep_reports
        if out_dir:
            cfg.outputs.setdefault("reports_dir", os.path.join(out_dir, "reports"))
        tables.append(run_experiment(cfg, references=refs))
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, f"{table_id}.csv")
        _write_tables_csv(tables, path)
    return tables


def _write_tables_csv(tables: List[ResultTable], path):
    import csv as _csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _csv.writer(fh)
        w.writerow(["section", "estimator", "quantity", "mean", "sd",
                    "median", "reference", "degenerate", "used"])
        for t in tables:
            for row in t.rows:
                for q in row["quantities"]:
                    ref = t.references.get(f"{row['estimator']}|{q['name']}", "")
                    w.writerow([t.section, row["estimator"], q["name"],
                                _fmt(q["mean"]), _fmt(q["sd"]), _fmt(q["median"]),
                                _fmt(ref) if ref != "" else "",
                                row["degenerate"], row["used"]])


def estimate_file(data_path, estimator_cfg: dict, out_path=None) -> EstimateReport:
    sample = load_sample(data_path)
    runner = _resolve_estimator(estimator_cfg)
    report, _ = runner(sample, stream(int(estimator_cfg.get("seed", 0)), 0))
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(report.to_json(indent=1))
    return report
