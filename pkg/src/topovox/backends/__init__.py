"""Kernel backend selection.

The gather/scatter kernels that dominate runtime (stiffness and geometric
stiffness matvecs, diagonal extraction) exist twice: a numba @njit version
and a pure-numpy version. The environment variable TOPOVOX_BACKEND picks
one:

    TOPOVOX_BACKEND=numba   force numba (ImportError if unavailable)
    TOPOVOX_BACKEND=numpy   force the numpy fallback
    unset / auto            numba when importable, else numpy

Both backends share one calling convention built around an 8-coloring of
the voxel grid: elements of one color share no nodes, so scatter-adds
within a color are race-free and the result is bitwise independent of the
thread count. TOPOVOX_THREADS caps the numba thread pool.

See benchmarks/bench_kernels.py for a side-by-side timing of the two.
"""

from __future__ import annotations

import os

import numpy as np

# Prefer OpenMP over TBB: the TBB probe warns on older TBB runtimes.
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp tbb workqueue")

_choice = os.environ.get("TOPOVOX_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(f"TOPOVOX_BACKEND must be auto|numba|numpy, got {_choice!r}")

if _choice in ("auto", "numba"):
    try:
        from . import numba_kernels as _impl

        BACKEND = "numba"
    except ImportError:
        if _choice == "numba":
            raise
        from . import numpy_kernels as _impl

        BACKEND = "numpy"
else:
    from . import numpy_kernels as _impl

    BACKEND = "numpy"

apply_block24 = _impl.apply_block24
apply_block24_subset = _impl.apply_block24_subset
diag_block24 = _impl.diag_block24
apply_nodal_block8 = _impl.apply_nodal_block8


def backend_name() -> str:
    return BACKEND


def element_coloring(ix: np.ndarray, iy: np.ndarray, iz: np.ndarray):
    """Permutation and segment pointers grouping elements into the 8 parity
    colors; elements within one segment share no nodes."""
    color = (ix & 1) + 2 * (iy & 1) + 4 * (iz & 1)
    perm = np.argsort(color, kind="stable").astype(np.int64)
    counts = np.bincount(color, minlength=8)
    ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return perm, ptr


def set_threads(n: int) -> None:
    """Cap worker threads for the numba backend (no-op for numpy)."""
    if BACKEND != "numba":
        return
    import numba

    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)


if "TOPOVOX_THREADS" in os.environ:
    set_threads(int(os.environ["TOPOVOX_THREADS"]))
