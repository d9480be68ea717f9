"""Backend selection for the hot kernels.

The compiled extension is preferred when importable; the pure NumPy/Python
twin is the fallback.  TURBRESTORE_BACKEND=native|python forces a choice
(forcing "native" raises if the extension is missing).  Both backends
implement the same contracts and agree to floating-point rounding.
"""

import os

import numpy as np

from turbrestore._kernels import _pyfallback


def _select():
    requested = os.environ.get("TURBRESTORE_BACKEND", "").strip().lower()
    if requested not in ("", "native", "python"):
        raise ValueError(
            f"TURBRESTORE_BACKEND must be 'native' or 'python', got {requested!r}")
    if requested == "python":
        return _pyfallback
    try:
        from turbrestore._kernels import _native
        return _native
    except ImportError:
        if requested == "native":
            raise ImportError(
                "TURBRESTORE_BACKEND=native but the compiled kernels are not "
                "installed; rebuild the package or unset the variable")
        return _pyfallback


_impl = _select()
BACKEND = _impl.NAME


def get_backend(name=None):
    """Return a kernel module by name ('native'/'python'), default: active."""
    if name is None:
        return _impl
    if name == "python":
        return _pyfallback
    if name == "native":
        from turbrestore._kernels import _native
        return _native
    raise ValueError(f"unknown backend {name!r}")


def _as_image(a, name):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def warp_bilinear(src, dx, dy, impl=None):
    src = _as_image(src, "src")
    dx = _as_image(dx, "dx")
    dy = _as_image(dy, "dy")
    if dx.shape != src.shape or dy.shape != src.shape:
        raise ValueError(
            f"flow shape {dx.shape} does not match image shape {src.shape}")
    return (impl or _impl).warp_bilinear(src, dx, dy)


def splat_bilinear(src, dx, dy, impl=None):
    src = _as_image(src, "src")
    dx = _as_image(dx, "dx")
    dy = _as_image(dy, "dy")
    if dx.shape != src.shape or dy.shape != src.shape:
        raise ValueError(
            f"flow shape {dx.shape} does not match image shape {src.shape}")
    return (impl or _impl).splat_bilinear(src, dx, dy)


def gs_sweep(u, v, mu, indptr, indices, cond, impl=None):
    """One in-place row-major Gauss-Seidel sweep of the graph diffusion
    system (mu + deg_i) u_i - sum_j c_ij u_j = mu v_i."""
    if u.dtype != np.float64 or not u.flags.c_contiguous:
        raise ValueError("u must be contiguous float64 (updated in place)")
    (impl or _impl).gs_sweep(
        u, np.ascontiguousarray(v, dtype=np.float64), float(mu),
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(cond, dtype=np.float64))
