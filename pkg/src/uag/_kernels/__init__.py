"""Hot kernels: numba when available and enabled, numpy otherwise.

Set ``UAG_NUMBA=0`` to force the numpy path. Both backends return identical
results, including element order and derivation records.
"""
from ..config import use_numba
from . import _numpy_impl

if use_numba():
    from . import _numba_impl as _impl

    BACKEND = "numba"
else:
    _impl = _numpy_impl
    BACKEND = "numpy"

close_rows = _impl.close_rows
fd_closure = _impl.fd_closure

__all__ = ["BACKEND", "close_rows", "fd_closure", "_numpy_impl"]
