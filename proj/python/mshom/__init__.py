"""Multiscale diffusion homogenization toolkit (pybind11 core)."""
from ._mshom import *  # noqa: F401,F403
from ._mshom import __doc__ as _core_doc

__doc__ = _core_doc
