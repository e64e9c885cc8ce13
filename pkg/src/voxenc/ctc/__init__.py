"""CTC likelihood with a compiled forward kernel and a numpy fallback.

Backend selection happens at import: the Cython extension is preferred, the
pure-Python module is used if it is missing or if VOXENC_PURE_PYTHON=1.
"""

import os

if os.environ.get("VOXENC_PURE_PYTHON") == "1":
    from . import _forward_py as backend
else:
    try:
        from . import _forward_c as backend  # type: ignore[attr-defined]
    except ImportError:
        from . import _forward_py as backend

BACKEND_NAME = backend.__name__.rsplit(".", 1)[-1].lstrip("_")

from .core import (  # noqa: E402
    BLANK,
    CtcInstance,
    char_error_rate,
    collapse,
    count_alignments,
    ctc_brute_force,
    ctc_greedy_decode,
    ctc_log_likelihood,
    min_frames,
    word_error_rate,
)

__all__ = [
    "BLANK",
    "BACKEND_NAME",
    "CtcInstance",
    "backend",
    "char_error_rate",
    "collapse",
    "count_alignments",
    "ctc_brute_force",
    "ctc_greedy_decode",
    "ctc_log_likelihood",
    "min_frames",
    "word_error_rate",
]
