"""setuptools build backend that ignores the interactive setup.py.

setup.py in this repo is a guided-setup script (``python setup.py``), not a
packaging script, so the stock backend must not execute it. Metadata lives in
pyproject.toml.
"""

from setuptools import build_meta as _orig
from setuptools import setup as _setup


class _Backend(_orig._BuildMetaBackend):
    def run_setup(self, setup_script='setup.py'):
        _setup()


_backend = _Backend()
get_requires_for_build_wheel = _backend.get_requires_for_build_wheel
get_requires_for_build_sdist = _backend.get_requires_for_build_sdist
prepare_metadata_for_build_wheel = _backend.prepare_metadata_for_build_wheel
build_wheel = _backend.build_wheel
build_sdist = _backend.build_sdist
get_requires_for_build_editable = _backend.get_requires_for_build_editable
prepare_metadata_for_build_editable = _backend.prepare_metadata_for_build_editable
build_editable = _backend.build_editable
