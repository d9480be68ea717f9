"""The linear deformation operator, its exact adjoint, and the data-fit
gradient built from them.

A flow field stores per-pixel displacements (dx, dy): the source coordinate
for output pixel (x, y) is (x + dx(x,y), y + dy(x,y)).  ``apply_warp``
resamples an image there (clamped bilinear); ``apply_adjoint`` is the exact
transpose of that linear map, realized by splatting each pixel's value onto
the same four corners with the same weights the forward read used.  The
transpose property holds at boundaries too because both sides compute the
weights on the clamped coordinate.
"""

import struct
from dataclasses import dataclass

import numpy as np

from turbrestore import _kernels
from turbrestore.image import as_image, check_sequence

_FLOW_MAGIC = b"TFLW"


@dataclass(frozen=True)
class FlowField:
    """Per-pixel displacement field on the frame grid."""

    dx: np.ndarray
    dy: np.ndarray

    def __post_init__(self):
        dx = np.ascontiguousarray(self.dx, dtype=np.float64)
        dy = np.ascontiguousarray(self.dy, dtype=np.float64)
        if dx.ndim != 2 or dx.shape != dy.shape:
            raise ValueError(
                f"dx/dy must be matching 2-D arrays, got {dx.shape} and {dy.shape}")
        if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dy))):
            raise ValueError("flow contains non-finite displacements")
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "dy", dy)

    @property
    def shape(self):
        return self.dx.shape

    @classmethod
    def zero(cls, shape):
        return cls(np.zeros(shape), np.zeros(shape))

    def magnitude(self):
        return np.hypot(self.dx, self.dy)


def save_flow(flow, path):
    """Binary dump: magic 'TFLW', u32 width, u32 height, dx then dy rows as
    little-endian doubles."""
    h, w = flow.shape
    with open(path, "wb") as fh:
        fh.write(_FLOW_MAGIC)
        fh.write(struct.pack("<II", w, h))
        fh.write(flow.dx.astype("<f8").tobytes())
        fh.write(flow.dy.astype("<f8").tobytes())


def load_flow(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != _FLOW_MAGIC:
        raise ValueError(f"{path}: bad flow magic {buf[:4]!r}")
    w, h = struct.unpack_from("<II", buf, 4)
    need = 12 + 2 * 8 * w * h
    if len(buf) < need:
        raise ValueError(f"{path}: truncated flow file ({len(buf)} < {need})")
    dx = np.frombuffer(buf, dtype="<f8", count=w * h, offset=12).reshape(h, w)
    dy = np.frombuffer(buf, dtype="<f8", count=w * h,
                       offset=12 + 8 * w * h).reshape(h, w)
    return FlowField(dx.copy(), dy.copy())


def _check_dims(img, flow, name):
    if img.shape != flow.shape:
        raise ValueError(
            f"{name} shape {img.shape} does not match flow grid {flow.shape}")


def apply_warp(u, flow):
    """Resample u at the deformed coordinates; linear in u for fixed flow."""
    u = as_image(u, "u")
    _check_dims(u, flow, "u")
    return _kernels.warp_bilinear(u, flow.dx, flow.dy)


def apply_adjoint(r, flow):
    """Exact transpose of apply_warp: splat each pixel of r onto the up-to
    four grid points its forward read interpolated from."""
    r = as_image(r, "r")
    _check_dims(r, flow, "r")
    return _kernels.splat_bilinear(r, flow.dx, flow.dy)


def adjoint_by_spikes(r, flow):
    """Reference adjoint: entry y of the result is <warp(spike_y), r>.

    Quadratic cost; exists as the independent check that splatting realizes
    the same linear transpose.  Test-scale grids only.
    """
    r = as_image(r, "r")
    _check_dims(r, flow, "r")
    h, w = r.shape
    out = np.empty((h, w))
    spike = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            spike[y, x] = 1.0
            out[y, x] = float(np.sum(apply_warp(spike, flow) * r))
            spike[y, x] = 0.0
    return out


def fidelity_gradient(u, flows, targets):
    """Gradient of 0.5 * sum_i ||warp_i(u) - target_i||^2 at u.

    Per-frame terms are summed in frame order so results are reproducible.
    """
    u = as_image(u, "u")
    targets = check_sequence(targets, "targets")
    if len(flows) != len(targets):
        raise ValueError(
            f"{len(flows)} flows vs {len(targets)} target frames")
    grad = np.zeros_like(u)
    for flow, target in zip(flows, targets):
        _check_dims(u, flow, "u")
        if target.shape != u.shape:
            raise ValueError(
                f"target shape {target.shape} does not match u {u.shape}")
        grad += apply_adjoint(apply_warp(u, flow) - target, flow)
    return grad
