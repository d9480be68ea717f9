"""Nonlocal-TV regularization: patch-similarity weight graph and the
proximal (denoising) step.

The regularizer is J(u) = sum_x sqrt(eps + sum_y w(x,y) (u(y)-u(x))^2),
reported with the constant sum_x sqrt(eps) subtracted so flat images score
zero.  Weights come from Gaussian patch similarity, sparsified to the k
best neighbors per pixel inside a search window and symmetrized with a
hard 2k degree cap so sweeps stay linear-time.

The prox argmin_u J(u) + (mu/2)||u - v||^2 runs lagged diffusivity: each
iteration freezes the 1/rho factors, giving a symmetric graph-diffusion
quadratic, and applies one Gauss-Seidel sweep to it.  Because sqrt is
concave the frozen quadratic majorizes J, so every accepted iterate can
only lower the composite energy; a guard rejects the (floating-point
pathological) alternative.
"""

from dataclasses import dataclass

import numpy as np

from turbrestore import _kernels
from turbrestore.image import as_image


@dataclass(frozen=True)
class NlParams:
    patch_radius: int = 2
    search_radius: int = 5
    neighbors_kept: int = 10
    h: float = 0.1
    sqrt_epsilon: float = 1e-6

    def __post_init__(self):
        if self.patch_radius < 1 or self.search_radius < 1:
            raise ValueError("radii must be >= 1")
        if self.neighbors_kept < 1:
            raise ValueError("neighbors_kept must be >= 1")
        if self.h <= 0 or self.sqrt_epsilon <= 0:
            raise ValueError("h and sqrt_epsilon must be > 0")


class NlGraph:
    """Sparse symmetric weighted pixel graph in CSR form.

    Every undirected edge is stored once per endpoint row; ``indptr``,
    ``indices``, ``weights`` follow the usual CSR layout over the
    row-major pixel index.
    """

    def __init__(self, shape, indptr, indices, weights):
        self.shape = (int(shape[0]), int(shape[1]))
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        n = self.shape[0] * self.shape[1]
        if self.indptr.shape != (n + 1,):
            raise ValueError(f"indptr must have length {n + 1}")
        if self.indices.shape != self.weights.shape:
            raise ValueError("indices/weights length mismatch")

    @property
    def n_pixels(self):
        return self.shape[0] * self.shape[1]

    @property
    def n_edges(self):
        return len(self.indices) // 2

    def rows(self):
        """Row index per stored entry (directed view of the edges)."""
        return np.repeat(np.arange(self.n_pixels, dtype=np.int64),
                         np.diff(self.indptr))

    def degrees(self):
        return np.diff(self.indptr)

    @classmethod
    def from_edges(cls, shape, edges):
        """Build from an iterable of undirected (i, j, w) triples."""
        n = shape[0] * shape[1]
        ri, rj, rw = [], [], []
        for i, j, w in edges:
            if i == j:
                raise ValueError("self-edges are not allowed")
            ri += [i, j]
            rj += [j, i]
            rw += [w, w]
        ri = np.asarray(ri, dtype=np.int64)
        rj = np.asarray(rj, dtype=np.int64)
        rw = np.asarray(rw, dtype=np.float64)
        order = np.lexsort((rj, ri))
        ri, rj, rw = ri[order], rj[order], rw[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, ri + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(shape, indptr, rj, rw)


def _box_sum_valid(a, m):
    """Exact (m x m) window sums of a, 'valid' placement."""
    z = np.zeros((a.shape[0] + 1, a.shape[1] + 1))
    z[1:, 1:] = np.cumsum(np.cumsum(a, axis=0), axis=1)
    return z[m:, m:] - z[:-m, m:] - z[m:, :-m] + z[:-m, :-m]


def patch_distances(v, params):
    """Mean squared patch difference for every search-window offset.

    Returns (d2, nbr): arrays of shape (n_offsets, n_pixels).  d2 is +inf
    where the offset leaves the image; nbr is the neighbor pixel index.
    Patch reads outside the image replicate the border.
    """
    v = as_image(v)
    h, w = v.shape
    pr, sr = params.patch_radius, params.search_radius
    n = h * w
    m = 2 * pr + 1
    padded = np.pad(v, pr, mode="edge")
    offsets = [(ty, tx)
               for ty in range(-sr, sr + 1)
               for tx in range(-sr, sr + 1)
               if (ty, tx) != (0, 0)]
    d2 = np.full((len(offsets), n), np.inf)
    nbr = np.zeros((len(offsets), n), dtype=np.int64)
    pix = np.arange(n, dtype=np.int64).reshape(h, w)
    for oi, (ty, tx) in enumerate(offsets):
        y_lo, y_hi = max(0, -ty), h - max(0, ty)
        x_lo, x_hi = max(0, -tx), w - max(0, tx)
        if y_lo >= y_hi or x_lo >= x_hi:
            continue
        a = padded[y_lo:y_hi + 2 * pr, x_lo:x_hi + 2 * pr]
        b = padded[y_lo + ty:y_hi + ty + 2 * pr,
                   x_lo + tx:x_hi + tx + 2 * pr]
        diff2 = (a - b) ** 2
        mean_sq = _box_sum_valid(diff2, m) / float(m * m)
        sel = pix[y_lo:y_hi, x_lo:x_hi].ravel()
        d2[oi, sel] = mean_sq.ravel()
        nbr[oi, sel] = sel + ty * w + tx
    return d2, nbr


def compute_weights(v, params=None):
    """Patch-similarity graph: per pixel keep the k most similar window
    neighbors (ties: smaller patch distance, then smaller pixel index),
    then symmetrize with a mutual best-2k degree cap."""
    params = params or NlParams()
    v = as_image(v)
    h, w = v.shape
    if h <= 2 * params.patch_radius + 1 or w <= 2 * params.patch_radius + 1:
        raise ValueError(
            f"image {v.shape} too small for patch radius {params.patch_radius}")
    n = h * w
    k = params.neighbors_kept

    d2, nbr = patch_distances(v, params)
    order = np.lexsort((nbr, d2), axis=0)
    take = order[:min(k, d2.shape[0])]
    d2_top = np.take_along_axis(d2, take, axis=0)
    nbr_top = np.take_along_axis(nbr, take, axis=0)
    valid = np.isfinite(d2_top)
    src = np.broadcast_to(np.arange(n, dtype=np.int64), d2_top.shape)
    wgt = np.exp(-d2_top[valid] / (params.h * params.h))
    ei, ej = src[valid], nbr_top[valid]

    # one record per undirected edge, max weight over the two directions
    lo, hi = np.minimum(ei, ej), np.maximum(ei, ej)
    key = lo * n + hi
    sort = np.argsort(key, kind="stable")
    key, lo, hi, wgt = key[sort], lo[sort], hi[sort], wgt[sort]
    first = np.ones(len(key), dtype=bool)
    first[1:] = key[1:] != key[:-1]
    starts = np.flatnonzero(first)
    wmax = np.maximum.reduceat(wgt, starts) if len(wgt) else wgt
    lo, hi = lo[starts], hi[starts]

    return _symmetrize_capped(2 * k, (h, w), lo, hi, wmax)


def _symmetrize_capped(cap, shape, lo, hi, wgt):
    """Keep an edge iff it ranks within the best ``cap`` at both endpoints
    (rank order: larger weight, then smaller neighbor index)."""
    n = shape[0] * shape[1]
    e = len(lo)
    ri = np.concatenate([lo, hi])
    rj = np.concatenate([hi, lo])
    rw = np.concatenate([wgt, wgt])
    eid = np.concatenate([np.arange(e), np.arange(e)])
    order = np.lexsort((rj, -rw, ri))
    ri, rj, rw, eid = ri[order], rj[order], rw[order], eid[order]
    row_start = np.searchsorted(ri, np.arange(n))
    rank = np.arange(len(ri)) - row_start[ri]
    kept_dir = rank < cap
    kept = np.bincount(eid[kept_dir], minlength=e) == 2

    keep_mask = kept[eid]
    ri, rj, rw = ri[keep_mask], rj[keep_mask], rw[keep_mask]
    order = np.lexsort((rj, ri))
    ri, rj, rw = ri[order], rj[order], rw[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, ri + 1, 1)
    np.cumsum(indptr, out=indptr)
    return NlGraph(shape, indptr, rj, rw)


def _neighbor_sq_sums(u_flat, graph):
    """Per pixel: sum_y w(x,y) (u(y) - u(x))^2."""
    rows = graph.rows()
    diff2 = (u_flat[graph.indices] - u_flat[rows]) ** 2
    return np.bincount(rows, weights=graph.weights * diff2,
                       minlength=graph.n_pixels)


def nltv_energy(u, graph, eps=1e-6):
    """Graph NLTV value, zero for constant images."""
    u = as_image(u)
    if u.shape != graph.shape:
        raise ValueError(f"image {u.shape} vs graph {graph.shape}")
    s = _neighbor_sq_sums(u.ravel(), graph)
    return float(np.sum(np.sqrt(eps + s)) - u.size * np.sqrt(eps))


def nltv_prox(v, graph, mu, params=None, max_iters=30, tol=1e-4,
              return_energies=False):
    """Approximately argmin_u J(u) + (mu/2)||u - v||^2.

    Lagged diffusivity with one Gauss-Seidel sweep per relinearization.
    The composite energy is non-increasing over accepted iterates; an
    iterate that fails to decrease it (possible only through rounding)
    is rejected and iteration stops.
    """
    params = params or NlParams()
    v = as_image(v, "v")
    if v.shape != graph.shape:
        raise ValueError(f"image {v.shape} vs graph {graph.shape}")
    if mu <= 0:
        raise ValueError(f"mu must be > 0, got {mu}")
    eps = params.sqrt_epsilon
    vf = v.ravel().copy()
    u = vf.copy()
    rows = graph.rows()

    def composite(x):
        s = _neighbor_sq_sums(x, graph)
        j = np.sum(np.sqrt(eps + s)) - x.size * np.sqrt(eps)
        return float(j + 0.5 * mu * np.sum((x - vf) ** 2))

    energies = [composite(u)]
    for _ in range(max_iters):
        s = _neighbor_sq_sums(u, graph)
        inv_rho = 1.0 / np.sqrt(eps + s)
        cond = graph.weights * (inv_rho[rows] + inv_rho[graph.indices])
        u_prev = u.copy()
        _kernels.gs_sweep(u, vf, mu, graph.indptr, graph.indices, cond)
        e_new = composite(u)
        if e_new > energies[-1] + 1e-12 * max(1.0, abs(energies[-1])):
            u = u_prev
            break
        energies.append(e_new)
        denom = np.linalg.norm(u_prev)
        if np.linalg.norm(u - u_prev) < tol * max(denom, 1e-30):
            break
    out = u.reshape(v.shape)
    if return_energies:
        return out, energies
    return out
