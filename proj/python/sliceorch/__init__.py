"""Python bindings for the sliceorch network-slicing simulator."""

import os
import sys

try:
    from ._sliceorch import *  # noqa: F401,F403  (installed wheel layout)
    from ._sliceorch import __doc__ as _core_doc  # noqa: F401
except ImportError:
    # Source-checkout fallback: pick the extension up from the CMake build tree.
    _repo = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    _build = os.path.join(_repo, "build")
    if os.path.isdir(_build) and _build not in sys.path:
        sys.path.insert(0, _build)
    from _sliceorch import *  # noqa: F401,F403
