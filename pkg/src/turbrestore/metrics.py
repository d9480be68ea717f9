"""Quantitative evaluation helpers."""

import numpy as np

from turbrestore.image import as_image


def rmse(a, b):
    a = as_image(a, "a")
    b = as_image(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def psnr(rmse_value):
    """PSNR in dB for the [0,1] intensity range; inf for a perfect match."""
    if rmse_value < 0:
        raise ValueError("rmse must be >= 0")
    if rmse_value == 0.0:
        return float("inf")
    return float(20.0 * np.log10(1.0 / rmse_value))


def endpoint_error(estimated, truth, margin=0):
    """Mean Euclidean displacement error, optionally on interior pixels only."""
    if estimated.shape != truth.shape:
        raise ValueError(
            f"flow shape mismatch: {estimated.shape} vs {truth.shape}")
    err = np.hypot(estimated.dx - truth.dx, estimated.dy - truth.dy)
    if margin > 0:
        h, w = err.shape
        if 2 * margin >= h or 2 * margin >= w:
            raise ValueError(f"margin {margin} leaves no interior in {err.shape}")
        err = err[margin:h - margin, margin:w - margin]
    return float(np.mean(err))
