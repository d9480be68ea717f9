"""Synthetic turbulence: deformation fields with known ground truth, plus
frame-sequence generation at desk scale.

Frames are produced with the solver's own warp operator, so experiments
that inject the true flows are exact by construction.  Everything is
deterministic given the seed.
"""

import os
from dataclasses import dataclass

import numpy as np

from turbrestore.image import (as_image, gaussian_downsample, save_pgm,
                               upsample2)
from turbrestore.warp import FlowField, apply_warp, save_flow


@dataclass(frozen=True)
class SimParams:
    amplitude: float = 2.0
    wavelength: float = 16.0      # correlation length in smooth-random mode
    phase_seed: int = 0
    noise_sigma: float = 0.01
    frames: int = 20
    mode: str = "wave"            # "wave" | "smooth-random"

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be > 0")
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.mode not in ("wave", "smooth-random"):
            raise ValueError(f"unknown mode {self.mode!r}")


def wave_flow(shape, amplitude, wavelength, phases):
    """Crossed sinusoidal displacement field with four phase offsets."""
    if wavelength <= 0:
        raise ValueError("wavelength must be > 0")
    p1, p2, p3, p4 = [float(p) for p in phases]
    h, w = shape
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    f = 2.0 * np.pi / wavelength
    dx = amplitude * np.sin(f * yy + p1) * np.cos(f * xx + p2)
    dy = amplitude * np.sin(f * xx + p3) * np.cos(f * yy + p4)
    return FlowField(dx, dy)


def smooth_random_flow(shape, amplitude, correlation_length, seed):
    """Band-limited Gaussian displacement field.

    White noise is pushed down the pyramid and bilinearly expanded back,
    once per doubling of the requested correlation length, then rescaled so
    the 95th-percentile displacement magnitude equals ``amplitude``.
    """
    if correlation_length < 1:
        raise ValueError("correlation_length must be >= 1")
    rng = np.random.default_rng(seed)
    fields = [rng.standard_normal(shape), rng.standard_normal(shape)]
    levels = int(round(np.log2(correlation_length)))
    for i, f in enumerate(fields):
        shapes = [f.shape]
        for _ in range(levels):
            if f.shape[0] < 2 or f.shape[1] < 2:
                break
            f = gaussian_downsample(f)
            shapes.append(f.shape)
        for target in reversed(shapes[:-1]):
            f = upsample2(f, target)
        fields[i] = f
    dx, dy = fields
    mag = np.hypot(dx, dy)
    q95 = float(np.percentile(mag, 95))
    scale = amplitude / q95 if q95 > 0 else 0.0
    return FlowField(dx * scale, dy * scale)


def generate_sequence(truth, params=None):
    """Warp the truth image by per-frame random fields and add noise.

    Returns (frames, flows); flows are the exact fields used, so they can
    be fed back as ground truth.  Each frame draws from its own child seed,
    so the output is reproducible frame by frame.
    """
    params = params or SimParams()
    truth = as_image(truth, "truth")
    children = np.random.SeedSequence(params.phase_seed).spawn(params.frames)
    frames = []
    flows = []
    for i in range(params.frames):
        rng = np.random.default_rng(children[i])
        if params.mode == "wave":
            phases = rng.uniform(0.0, 2.0 * np.pi, 4)
            flow = wave_flow(truth.shape, params.amplitude,
                             params.wavelength, phases)
        else:
            flow = smooth_random_flow(truth.shape, params.amplitude,
                                      params.wavelength, rng)
        frame = apply_warp(truth, flow)
        if params.noise_sigma > 0:
            frame = frame + params.noise_sigma * rng.standard_normal(truth.shape)
        frames.append(frame)
        flows.append(flow)
    return frames, flows


def resolution_chart(size=64):
    """Deterministic test chart: bar groups at several pitches, a
    checkerboard, a disk and blocks, over a gentle shaded ramp."""
    n = int(size)
    if n < 16:
        raise ValueError("chart size must be >= 16")
    yy, xx = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    u = 0.45 + 0.20 * xx / (n - 1) + 0.10 * yy / (n - 1)
    u += 0.05 * np.sin(2.0 * np.pi * xx / n) * np.sin(2.0 * np.pi * yy / n)

    half = n // 2
    q = (slice(2, half - 1), slice(2, half - 1))          # top-left
    bars = np.where((xx[q] // 4) % 2 == 0, 0.88, 0.16)
    u[q] = 0.85 * bars + 0.15 * u[q]

    q = (slice(2, half - 1), slice(half + 1, n - 2))      # top-right
    bars = np.where((yy[q] // 4) % 2 == 0, 0.86, 0.18)
    u[q] = 0.85 * bars + 0.15 * u[q]

    q = (slice(half + 1, n - 2), slice(2, half - 1))      # bottom-left
    checker = np.where(((xx[q] // 4) + (yy[q] // 4)) % 2 == 0, 0.80, 0.22)
    u[q] = 0.85 * checker + 0.15 * u[q]

    cy = cx = (3 * n) // 4                                # bottom-right
    r2 = (yy - cy) ** 2 + (xx - cx) ** 2
    disk = r2 <= (n / 8.0) ** 2
    u[disk] = 0.92
    sq = (slice(half + 3, half + 3 + n // 8),
          slice(half + 3, half + 3 + n // 8))
    u[sq] = 0.08

    fine = (slice(half + 1, n - 2), slice(n - 2 - n // 8, n - 2))
    u[fine] = np.where((xx[fine] // 2) % 2 == 0, 0.78, 0.25)

    u[:2, :] = u[-2:, :] = 0.5
    u[:, :2] = u[:, -2:] = 0.5
    return np.clip(u, 0.0, 1.0)


def save_dataset(directory, frames, flows, params, truth=None):
    """Write a sequence directory: PGM frames, TFLW truth flows, manifest."""
    os.makedirs(directory, exist_ok=True)
    for i, frame in enumerate(frames):
        save_pgm(frame, os.path.join(directory, f"frame_{i:04d}.pgm"), depth=16)
    flow_dir = os.path.join(directory, "flows")
    os.makedirs(flow_dir, exist_ok=True)
    for i, flow in enumerate(flows):
        save_flow(flow, os.path.join(flow_dir, f"flow_{i:04d}.tflw"))
    if truth is not None:
        save_pgm(truth, os.path.join(directory, "truth.pgm"), depth=16)
    lines = [
        f"amplitude={params.amplitude!r}",
        f"wavelength={params.wavelength!r}",
        f"phase_seed={params.phase_seed}",
        f"noise_sigma={params.noise_sigma!r}",
        f"frames={params.frames}",
        f"mode={params.mode}",
    ]
    with open(os.path.join(directory, "manifest.txt"), "w",
              encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
