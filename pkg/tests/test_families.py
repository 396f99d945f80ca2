import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from divmix.families import (BivariateGaussian, ContaminationSpec, Exponential,
                             GPD, Gaussian, Lognormal, MixtureSpec,
                             ParameterError, TwoSidedWeibull, Weibull,
                             contaminate, load_sample, save_sample)
from divmix.numerics import ConfigError, composite_gl, rng as make_rng

FAMILIES = [
    Gaussian(0.3, 1.2),
    Exponential(0.7),
    Weibull(1.5, 0.8),
    GPD(0.7, 3.0),
    Lognormal(0.5, 0.6),
    TwoSidedWeibull(2.5, 1.5),
]


def _mass_range(f):
    return float(f.quantile(1e-9)), float(f.quantile(1 - 1e-9))


@pytest.mark.parametrize("f", FAMILIES, ids=lambda f: f.kind)
def test_pdf_integrates_to_one(f):
    from divmix.numerics import QuadratureSpec, integrate
    lo, hi = _mass_range(f)
    total = integrate(lambda x: np.atleast_1d(f.pdf(x)), lo, hi,
                      QuadratureSpec(abs_tol=1e-10, rel_tol=1e-9),
                      quantile=f.quantile)
    assert total == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("f", FAMILIES, ids=lambda f: f.kind)
def test_cdf_quantile_roundtrip_and_monotone(f):
    u = np.linspace(0.001, 0.999, 57)
    x = np.asarray(f.quantile(u))
    assert np.allclose(np.asarray(f.cdf(x)), u, atol=1e-8)
    grid = np.asarray(f.quantile(np.linspace(1e-4, 1 - 1e-4, 1000)))
    c = np.asarray(f.cdf(grid))
    assert np.all(np.diff(c) >= -1e-12)


@pytest.mark.parametrize("f", FAMILIES, ids=lambda f: f.kind)
def test_sampler_matches_cdf_ks_band(f):
    n = 10_000
    x = np.sort(f.sample(n, make_rng(123)))
    emp = np.arange(1, n + 1) / n
    dn = np.max(np.abs(np.asarray(f.cdf(x)) - emp))
    # 99% Kolmogorov-Smirnov band
    assert dn < 1.628 / math.sqrt(n)


@pytest.mark.parametrize("f,orders", [
    (Gaussian(0.3, 1.2), (1, 2, 3, 4)),
    (Exponential(0.7), (1, 2, 3)),
    (Weibull(1.5, 0.8), (1, 2)),
    (Lognormal(0.5, 0.6), (1, 2)),
    (TwoSidedWeibull(2.5, 1.5), (1, 2, 3, 4)),
], ids=lambda v: getattr(v, "kind", str(v)))
def test_moments_match_monte_carlo(f, orders):
    x = f.sample(1_000_000, make_rng(7))
    for i in orders:
        mc = float(np.mean(x ** i))
        se = float(np.std(x ** i, ddof=1)) / math.sqrt(x.size)
        assert abs(f.moment(i) - mc) < 3 * se + 1e-12


def test_weibull_moment_formula():
    assert Weibull(1.0, 1.0).moment(1) == pytest.approx(1.0)  # Gamma(2)
    assert Weibull(2.0, 0.5).moment(2) == pytest.approx(4.0 * math.gamma(5.0))


def test_lognormal_moments():
    f = Lognormal(3.0, 0.5)
    for i in (1, 2, 3):
        assert f.moment(i) == pytest.approx(math.exp(i * 3 + i * i * 0.125))


def test_gpd_quantile_and_moment():
    assert GPD(1.0, 1.0).quantile(0.5) == pytest.approx(1.0)
    assert GPD(1.0, 1.0).moment(1) == np.inf  # shape*order >= 1
    # finite case vs Monte Carlo
    f = GPD(0.3, 2.0)
    x = f.sample(1_000_000, make_rng(5))
    se = np.std(x) / 1000.0
    assert f.moment(1) == pytest.approx(np.mean(x), abs=4 * se)


def test_two_sided_weibull_basics():
    f = TwoSidedWeibull(2.5, 1.5)
    assert f.cdf(0.0) == pytest.approx(0.5)
    assert f.moment(3) == 0.0
    assert f.lmoment(3) == 0.0
    # Laplace special case: lambda2 = 3 sigma / 4, tau4 = 17/72
    lap = TwoSidedWeibull(1.0, 2.0)
    assert lap.lmoment(2) == pytest.approx(1.5)
    assert lap.lmoment(4) / lap.lmoment(2) == pytest.approx(17.0 / 72.0)


def test_theoretical_lmoments():
    assert Weibull(1.0, 1.0).lmoment(2) == pytest.approx(0.5)
    assert Exponential(2.0).lmoment(2) == pytest.approx(0.25)  # 1/(2a)
    assert Gaussian(0, 2.0).lmoment(2) == pytest.approx(2.0 / math.sqrt(math.pi))
    assert Gaussian(5, 1.0).lmoment(3) == pytest.approx(0.0)


def test_lognormal_lmoment_monte_carlo_oracle():
    from divmix.spm_lmoments import empirical_lmoments
    f = Lognormal(3.0, 0.5)
    x = f.sample(1_000_000, make_rng(2))
    est = empirical_lmoments(x, [2, 3])
    # MC standard error of the L-moment estimator, via subsampling
    parts = np.array([empirical_lmoments(chunk, [2])[0]
                      for chunk in np.split(x, 100)])
    se2 = float(np.std(parts, ddof=1)) / 10.0
    assert abs(f.lmoment(2) - est[0]) < 3 * se2


@pytest.mark.parametrize("f", FAMILIES, ids=lambda f: f.kind)
def test_grad_theta_matches_finite_differences(f):
    rng = make_rng(17)
    xs = f.sample(6, rng)
    xs = xs[np.abs(xs) > 1e-3]
    grad = f.grad_theta(xs)
    theta = f.theta
    h = 1e-6
    for i in range(len(theta)):
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        fp = type(f)(*tp)
        fm = type(f)(*tm)
        fd = (np.asarray(fp.pdf(xs)) - np.asarray(fm.pdf(xs))) / (2 * h)
        denom = np.maximum(np.abs(fd), 1e-8)
        assert np.max(np.abs(grad[i] - fd) / denom) < 1e-4


def test_parameter_validation():
    with pytest.raises(ParameterError):
        Gaussian(0, -1)
    with pytest.raises(ParameterError):
        Weibull(0.0, 1.0)
    with pytest.raises(ParameterError):
        MixtureSpec(1.2, Gaussian(), Gaussian())
    with pytest.raises(ParameterError):
        BivariateGaussian((0, 0), 0.5, 0.9)


def test_mixture_pdf_and_moment_linearity():
    mix = MixtureSpec(0.35, Gaussian(-2, 1), Gaussian(1.5, 1))
    x = np.linspace(-6, 6, 101)
    direct = 0.35 * np.asarray(Gaussian(-2, 1).pdf(x)) + 0.65 * np.asarray(Gaussian(1.5, 1).pdf(x))
    assert np.allclose(np.asarray(mix.pdf(x)), direct)
    assert mix.moment(1) == pytest.approx(0.35 * -2 + 0.65 * 1.5)
    total = composite_gl(lambda t: np.atleast_1d(mix.pdf(t)), -12, 12, segments=400, nodes=8)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_mixture_sampling_with_labels():
    mix = MixtureSpec(0.35, Gaussian(-2, 1), Gaussian(1.5, 1))
    x, z = mix.sample_with_labels(20_000, make_rng(3))
    assert z.shape == (20_000,)
    assert np.mean(z) == pytest.approx(0.35, abs=0.02)
    # labeled subsamples follow their components
    assert np.mean(x[z == 1]) == pytest.approx(-2.0, abs=0.05)


def test_bivariate_moments_against_monte_carlo():
    f = BivariateGaussian((1.0, -0.5), 0.8, 0.3)
    x = f.sample(2_000_000, make_rng(9))
    for a, b in [(1, 0), (0, 1), (2, 0), (1, 1), (2, 2), (3, 1)]:
        mc = float(np.mean(x[:, 0] ** a * x[:, 1] ** b))
        se = float(np.std(x[:, 0] ** a * x[:, 1] ** b, ddof=1)) / math.sqrt(x.shape[0])
        assert abs(f.moment2d(a, b) - mc) < 4 * se


def test_contaminate_replace_largest():
    rng = make_rng(0)
    x = rng.standard_normal(100)
    y = contaminate(x, ContaminationSpec("replace-largest-by-value", count=10, value=10.0), rng)
    assert np.sum(y == 10.0) == 10
    # the 90 smallest originals are kept
    kept = np.sort(x)[:90]
    assert np.allclose(np.sort(y)[:90], kept)
    assert y.shape == x.shape


def test_contaminate_identity_and_determinism():
    rng = make_rng(0)
    x = rng.standard_normal(50)
    y = contaminate(x, ContaminationSpec("replace-largest-by-value", count=0, value=9.0), rng)
    assert np.array_equal(x, y)
    spec = ContaminationSpec("replace-random-by-dist", count=5, dist=Gaussian(10, 2))
    a = contaminate(x, spec, make_rng(5))
    b = contaminate(x, spec, make_rng(5))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, x)


def test_contaminate_extremes_and_append():
    x = np.arange(20.0)
    spec = ContaminationSpec("add-uniform-to-extremes", count=3, low=(-5, -2), high=(2, 5))
    y = contaminate(x, spec, make_rng(1))
    assert y.shape == x.shape
    assert np.all(y[:3] <= x[:3] - 2) and np.all(y[-3:] >= x[-3:] + 2)
    y2 = contaminate(x, ContaminationSpec("append-uniform-tails", count=4, interval=(30, 40)), make_rng(1))
    assert y2.shape == (24,)
    with pytest.raises(ConfigError):
        contaminate(x, ContaminationSpec("replace-largest-by-value", count=21, value=1.0), make_rng(1))


def test_sample_serialization_roundtrip(tmp_path):
    x = make_rng(4).standard_normal(17)
    path = tmp_path / "s.txt"
    save_sample(path, x)
    assert np.array_equal(load_sample(path), x)
    bad = tmp_path / "bad.txt"
    bad.write_text("1.0\nnot-a-number\n")
    with pytest.raises(ConfigError, match="bad.txt:2"):
        load_sample(bad)
