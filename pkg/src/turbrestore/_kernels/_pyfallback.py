"""Pure NumPy/Python implementations of the hot kernels.

Used when the compiled extension is unavailable (or forced via
TURBRESTORE_BACKEND=python).  Same contracts as ``_native``:

* ``warp_bilinear``  - gather: out(x,y) = src at clamped (x+dx, y+dy)
* ``splat_bilinear`` - exact transpose of the gather (scatter-add)
* ``gs_sweep``       - one row-major Gauss-Seidel sweep of
                       (mu + sum_j c_ij) u_i - sum_j c_ij u_j = mu v_i

The warp/splat pair must use identical clamped coordinates and weights so
the two operators stay exact transposes of each other, boundaries included.
"""

import numpy as np

NAME = "python"


def _corner_indices(shape, dx, dy):
    h, w = shape
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    sx = np.clip(xx + dx, 0.0, w - 1.0)
    sy = np.clip(yy + dy, 0.0, h - 1.0)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    fx = sx - x0
    fy = sy - y0
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    return x0, x1, y0, y1, fx, fy


def warp_bilinear(src, dx, dy):
    h, w = src.shape
    x0, x1, y0, y1, fx, fy = _corner_indices(src.shape, dx, dy)
    flat = src.ravel()
    v00 = flat[y0 * w + x0]
    v01 = flat[y0 * w + x1]
    v10 = flat[y1 * w + x0]
    v11 = flat[y1 * w + x1]
    wx0 = 1.0 - fx
    wy0 = 1.0 - fy
    return (wy0 * wx0 * v00 + wy0 * fx * v01
            + fy * wx0 * v10 + fy * fx * v11)


def splat_bilinear(src, dx, dy):
    h, w = src.shape
    n = h * w
    x0, x1, y0, y1, fx, fy = _corner_indices(src.shape, dx, dy)
    wx0 = 1.0 - fx
    wy0 = 1.0 - fy
    r = src.ravel()
    # bincount is a deterministic, compiled scatter-add
    out = np.bincount((y0 * w + x0).ravel(), (wy0 * wx0 * r.reshape(h, w)).ravel(), minlength=n)
    out += np.bincount((y0 * w + x1).ravel(), (wy0 * fx * r.reshape(h, w)).ravel(), minlength=n)
    out += np.bincount((y1 * w + x0).ravel(), (fy * wx0 * r.reshape(h, w)).ravel(), minlength=n)
    out += np.bincount((y1 * w + x1).ravel(), (fy * fx * r.reshape(h, w)).ravel(), minlength=n)
    return out.reshape(h, w)


def gs_sweep(u, v, mu, indptr, indices, cond):
    # Sequential coordinate descent; plain lists beat np scalar indexing here.
    n = u.shape[0]
    ul = u.tolist()
    vl = v.tolist()
    ip = indptr.tolist()
    idx = indices.tolist()
    cl = cond.tolist()
    for i in range(n):
        s = 0.0
        c = 0.0
        for t in range(ip[i], ip[i + 1]):
            wgt = cl[t]
            s += wgt * ul[idx[t]]
            c += wgt
        ul[i] = (mu * vl[i] + s) / (mu + c)
    u[:] = ul
