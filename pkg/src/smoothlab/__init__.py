"""Weighted polynomial approximation on [-1, 1] via generalized translations."""
from .approx import (BestApprox, DecayFit, JacksonKernel, best_approx, decay_fit, jackson_approximant,
                     jackson_direct, kernel_gamma, m_for_n)
from .errors import *  # noqa: F401,F403
from .polybasis import SpectralFn, analyze, eigenvalue_R, synthesize
from .quadrature import QuadRule, gauss_jacobi, integrate, integrate_adaptive
from .smoothness import ModulusResult, difference, modulus, modulus_decay
from .translate import T_values, apply_hatT, hatT_values
from .verify import CheckReport, run_checks
from .wspace import ClassParams, NormParams, catalog, catalog_ids, validate_class, weighted_norm

__version__ = "0.1.0"
