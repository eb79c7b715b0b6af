# cli/__init__.py
"""
Command-line front-end package
"""

from .runner import RunConfig, RunReport, run, write_report
from .figures import region_dataset

__all__ = ['RunConfig', 'RunReport', 'run', 'write_report', 'region_dataset']
