# analysis/__init__.py
"""
Hardy-p-Laplace analysis package
"""

from .specfun import pi_p, build_gensine, get_gensine, eval_sp
from .exponents import ProblemParams, Verdict, hardy_constants, gamma_roots, beta_roots, classify
from .barriers import BarrierClass, RadialProfile, classify_barrier, existence_supersolution
from .prufer import AsymptoticCase, integrate_large_subsolution, fit_asymptotics, eps_sandwich_run
from .hardy import (RadialTestFunction, energy_form, rayleigh_min, improved_hardy_check,
                    sharpness_family, picone_check, nonexistence_witness)

__all__ = [
    'pi_p', 'build_gensine', 'get_gensine', 'eval_sp',
    'ProblemParams', 'Verdict', 'hardy_constants', 'gamma_roots', 'beta_roots', 'classify',
    'BarrierClass', 'RadialProfile', 'classify_barrier', 'existence_supersolution',
    'AsymptoticCase', 'integrate_large_subsolution', 'fit_asymptotics', 'eps_sandwich_run',
    'RadialTestFunction', 'energy_form', 'rayleigh_min', 'improved_hardy_check',
    'sharpness_family', 'picone_check', 'nonexistence_witness',
]
