"""Context structurization toolkit: three-layer trees, schema-tolerant
parsing of model output, natural-language rendering, and scoring metrics.

The heavy lifting lives in the `_strux` pybind11 extension; this package
re-exports it for both the installed layout (extension inside the package)
and the build-tree layout (extension next to the build directory).
"""

try:
    from ._strux import *  # noqa: F401,F403
    from . import _strux as _impl
except ImportError:  # build tree: _strux.so on PYTHONPATH
    from _strux import *  # noqa: F401,F403
    import _strux as _impl

__all__ = [name for name in dir(_impl) if not name.startswith("_")]
__version__ = "0.1.0"
