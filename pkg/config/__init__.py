# config/__init__.py
"""
Configuration Package
"""

from .settings import *

