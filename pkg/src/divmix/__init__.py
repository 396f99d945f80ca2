"""divmix: robust estimation of parametric and semiparametric two-component
mixtures via phi-divergences, with a Monte-Carlo harness for the reference
simulation tables."""

from .divergences import (HELLINGER, KL, KL_MOD, NEYMAN_CHI2, PEARSON_CHI2,
                          PhiGenerator, divergence, error_criteria)
from .dual import (EstimateReport, basu_lindsay, beran, classical_mdphide,
                   dphide, dual_curve, kernel_dual_objective, kernel_mdphide,
                   mdpd, mle, mle_em)
from .families import (BivariateGaussian, ContaminationSpec, Exponential, GPD,
                       Gaussian, Lognormal, MixtureSpec, ModelSpace,
                       TwoSidedWeibull, Weibull, contaminate)
from .kde import KernelDensityEstimate, fit as fit_kde, smooth_model
from .proximal import (ProximalRun, ProximalTerm, dpsi, proximal_minimize,
                       proximal_relaxed, proximal_two_step)
from .spm_lmoments import (empirical_lmoments, estimate_spm_lmoments,
                           legendre_K, legendre_L)
from .spm_moments import estimate_spm_moments, omega_and_xi

__version__ = "0.1.0"
