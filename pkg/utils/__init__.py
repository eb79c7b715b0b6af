"""
Utilities Package: numerical kernel, errors and output writers
"""

from .errors import HardyPLaplaceError, NumericError, ConfigError
from .roots import Bracket, make_bracket, expand_bracket, find_root
from .ode import OdeProblem, Trajectory, integrate_ode, rk4_fixed
from .quadrature import quad_adaptive
from .dual import Dual2, dual2_eval
from .data_export import write_csv, write_json, read_csv

__all__ = [
    'HardyPLaplaceError', 'NumericError', 'ConfigError',
    'Bracket', 'make_bracket', 'expand_bracket', 'find_root',
    'OdeProblem', 'Trajectory', 'integrate_ode', 'rk4_fixed',
    'quad_adaptive', 'Dual2', 'dual2_eval',
    'write_csv', 'write_json', 'read_csv',
]
