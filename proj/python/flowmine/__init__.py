"""Message-flow mining for SoC communication traces.

Thin re-export of the pybind11 core. In an installed wheel `_core` sits
inside this package; when running against a CMake build tree it is a
top-level module on PYTHONPATH.
"""

try:
    from ._core import *  # noqa: F401,F403
    from . import _core  # noqa: F401
except ImportError:
    from _core import *  # noqa: F401,F403
    import _core  # noqa: F401

__version__ = "0.1.0"
