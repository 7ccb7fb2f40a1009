"""Backend selection for the exhaustive-search kernel.

Prefers the compiled extension; falls back to the pure-Python kernel with
identical semantics.  ``BACKEND`` records which one is active.
"""
from __future__ import annotations

try:
    from . import _search as _impl

    BACKEND = "cython"
except ImportError:  # extension not built
    from . import _search_py as _impl

    BACKEND = "python"

from . import _search_py

STATUS_COMPLETED = _search_py.STATUS_COMPLETED
STATUS_TARGET = _search_py.STATUS_TARGET
STATUS_NODES = _search_py.STATUS_NODES
STATUS_TIME = _search_py.STATUS_TIME


def run_search(starts, ea, eb, n_colours, vertex_count,
               node_limit=0, time_limit=0.0, target=0, backend=None):
    """Dispatch to the selected backend.

    ``backend`` may force "cython" or "python" (used by the benchmark and
    the parity tests).
    """
    if backend == "python":
        impl = _search_py
    elif backend == "cython":
        if BACKEND != "cython":
            raise RuntimeError("compiled kernel not available")
        impl = _impl
    else:
        impl = _impl
    status, nodes, best_size, best_choice = impl.run_search(
        starts, ea, eb, n_colours, vertex_count,
        node_limit=int(node_limit), time_limit=float(time_limit),
        target=int(target),
    )
    return int(status), int(nodes), int(best_size), [int(x) for x in best_choice]
