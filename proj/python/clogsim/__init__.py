"""Two-scale colloid transport and clogging simulator.

Thin Python facade over the C++ core: cell-problem tortuosity tables,
scenario presets and runs, and the analysis oracles.
"""

try:
    from ._clogsim import *  # noqa: F401,F403  (installed layout)
    from . import _clogsim as _core
except ImportError:  # in-tree builds put the extension on sys.path directly
    from _clogsim import *  # noqa: F401,F403
    import _clogsim as _core

__all__ = [name for name in dir(_core) if not name.startswith("_")]
