"""Kernel selection: compiled ``_core`` when importable, numpy fallback otherwise.

Set ``DSMBAYES_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

NAME = "python"
bessel_j_array = _fallback.bessel_j_array
pcn_segment = _fallback.pcn_segment

if os.environ.get("DSMBAYES_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core
    except ImportError:
        pass
    else:
        NAME = "cython"
        bessel_j_array = _core.bessel_j_array
        pcn_segment = _core.pcn_segment
