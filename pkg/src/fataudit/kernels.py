"""Backend selection for the distance kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback is imported.  ``BACKEND`` records which one is active.
"""
from . import _kernels_py

try:
    from . import _kernels as _impl

    BACKEND = "cython"
except ImportError:  # extension not built
    _impl = _kernels_py
    BACKEND = "python"

pairwise_mixed_distance = _impl.pairwise_mixed_distance
kth_smallest_rows = _impl.kth_smallest_rows
