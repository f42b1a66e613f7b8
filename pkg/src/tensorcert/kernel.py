"""Selects the canonical-search kernel: compiled extension if built, else pure Python.

Set ``TENSORCERT_PURE=1`` to force the pure-Python kernel.
"""
import os

from . import _kernel_py

canon_search_py = _kernel_py.canon_search

try:
    if os.environ.get("TENSORCERT_PURE"):
        raise ImportError("pure kernel requested")
    from ._kernel import canon_search as canon_search_ext
except ImportError:
    canon_search_ext = None

if canon_search_ext is not None:
    canon_search = canon_search_ext
    BACKEND = "compiled"
else:
    canon_search = canon_search_py
    BACKEND = "python"
