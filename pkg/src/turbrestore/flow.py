"""Dense pyramidal Lucas-Kanade flow estimation.

Estimates per-pixel displacements d such that warp(u, d) matches a frame f.
Coarse-to-fine over a Gaussian pyramid; per level, forward-additive
iterations re-warp u by the current flow, linearize brightness constancy
there, and solve a weighted 2x2 least-squares system per pixel.  Window
sums are Gaussian-weighted (sigma = radius/2) inside the (2r+1)^2 window;
windows whose structure tensor is near-singular keep the displacement they
inherited from the coarser level.
"""

from dataclasses import dataclass

import numpy as np

from turbrestore.image import as_image, gaussian_downsample, separable_filter, upsample2
from turbrestore.warp import FlowField, apply_warp


@dataclass(frozen=True)
class FlowParams:
    pyramid_levels: int = 3
    window_radius: int = 7
    iterations_per_level: int = 10
    min_eigen_threshold: float = 1e-6

    def __post_init__(self):
        if self.pyramid_levels < 1:
            raise ValueError("pyramid_levels must be >= 1")
        if self.window_radius < 1:
            raise ValueError("window_radius must be >= 1")
        if self.iterations_per_level < 1:
            raise ValueError("iterations_per_level must be >= 1")


def build_pyramid(img, levels):
    """Level 0 is the input; each next level is gaussian_downsample of it."""
    img = as_image(img)
    if levels < 1:
        raise ValueError("levels must be >= 1")
    pyramid = [img]
    for k in range(1, levels):
        prev = pyramid[-1]
        if prev.shape[0] < 2 or prev.shape[1] < 2:
            raise ValueError(
                f"image {img.shape} too small for {levels} pyramid levels "
                f"(level {k - 1} is already {prev.shape})")
        pyramid.append(gaussian_downsample(prev))
    return pyramid


def _window_kernel(radius):
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (t / (radius / 3.0)) ** 2)
    return k / k.sum()


def _central_gradients(img):
    p = np.pad(img, 1, mode="edge")
    gx = 0.5 * (p[1:-1, 2:] - p[1:-1, :-2])
    gy = 0.5 * (p[2:, 1:-1] - p[:-2, 1:-1])
    return gx, gy


def _lk_level(u, f, dx, dy, params):
    kernel = _window_kernel(params.window_radius)
    warped = apply_warp(u, FlowField(dx, dy))
    for _ in range(params.iterations_per_level):
        gx, gy = _central_gradients(warped)
        err = f - warped
        s11 = separable_filter(gx * gx, kernel)
        s12 = separable_filter(gx * gy, kernel)
        s22 = separable_filter(gy * gy, kernel)
        b1 = separable_filter(gx * err, kernel)
        b2 = separable_filter(gy * err, kernel)
        trace = s11 + s22
        disc = np.sqrt((s11 - s22) ** 2 + 4.0 * s12 * s12)
        min_eigen = 0.5 * (trace - disc)
        ok = min_eigen >= params.min_eigen_threshold
        det = np.where(ok, s11 * s22 - s12 * s12, 1.0)
        inc_x = np.where(ok, (s22 * b1 - s12 * b2) / det, 0.0)
        inc_y = np.where(ok, (s11 * b2 - s12 * b1) / det, 0.0)
        # damp per-iteration updates so repetitive texture cannot diverge
        np.clip(inc_x, -1.0, 1.0, out=inc_x)
        np.clip(inc_y, -1.0, 1.0, out=inc_y)
        cand_warp = apply_warp(u, FlowField(dx + inc_x, dy + inc_y))
        # keep an update only where it does not worsen the window residual;
        # stops drift where the linearization is meaningless
        cand_err = f - cand_warp
        better = (separable_filter(cand_err * cand_err, kernel)
                  <= separable_filter(err * err, kernel))
        dx = np.where(better, dx + inc_x, dx)
        dy = np.where(better, dy + inc_y, dy)
        warped = np.where(better, cand_warp, warped)
    return dx, dy


def estimate_flow(u, f, params=None):
    """Flow d with apply_warp(u, d) approximating f, coarse to fine."""
    params = params or FlowParams()
    u = as_image(u, "u")
    f = as_image(f, "f")
    if u.shape != f.shape:
        raise ValueError(f"image shapes differ: {u.shape} vs {f.shape}")
    need = 2 ** (params.pyramid_levels - 1)
    if u.shape[0] < need or u.shape[1] < need:
        raise ValueError(
            f"image {u.shape} smaller than {need} required by "
            f"{params.pyramid_levels} pyramid levels")

    pyr_u = build_pyramid(u, params.pyramid_levels)
    pyr_f = build_pyramid(f, params.pyramid_levels)

    dx = np.zeros(pyr_u[-1].shape)
    dy = np.zeros(pyr_u[-1].shape)
    for level in range(params.pyramid_levels - 1, -1, -1):
        dx, dy = _lk_level(pyr_u[level], pyr_f[level], dx, dy, params)
        if level > 0:
            target = pyr_u[level - 1].shape
            dx = 2.0 * upsample2(dx, target)
            dy = 2.0 * upsample2(dy, target)
    # displacements beyond the pyramid's reach are never trustworthy
    limit = float(2 ** params.pyramid_levels)
    return FlowField(np.clip(dx, -limit, limit), np.clip(dy, -limit, limit))
