"""turbrestore: recover a static scene from turbulence-distorted frames.

Images are (H, W) float64 arrays in [0, 1]; coordinates are (x=col, y=row).
"""

__version__ = "0.1.0"

from turbrestore._kernels import BACKEND
from turbrestore.flow import FlowParams, build_pyramid, estimate_flow
from turbrestore.image import (PgmParseError, as_image, bilinear_sample,
                               gaussian_downsample, load_pgm, load_sequence,
                               save_pgm, save_sequence, temporal_mean)
from turbrestore.metrics import endpoint_error, psnr, rmse
from turbrestore.nltv import (NlGraph, NlParams, compute_weights, nltv_energy,
                              nltv_prox)
from turbrestore.simulate import (SimParams, generate_sequence,
                                  resolution_chart, save_dataset,
                                  smooth_random_flow, wave_flow)
from turbrestore.solver import (RestoreReport, SolverAbort, SolverConfig,
                                frame_quality_check, inner_splitting_loop,
                                restore, sliding_window_restore)
from turbrestore.warp import (FlowField, adjoint_by_spikes, apply_adjoint,
                              apply_warp, fidelity_gradient, load_flow,
                              save_flow)

__all__ = [
    "BACKEND", "FlowField", "FlowParams", "NlGraph", "NlParams",
    "PgmParseError", "RestoreReport", "SimParams", "SolverAbort",
    "SolverConfig", "adjoint_by_spikes", "apply_adjoint", "apply_warp",
    "as_image", "bilinear_sample", "build_pyramid", "compute_weights",
    "endpoint_error", "estimate_flow", "fidelity_gradient",
    "frame_quality_check", "gaussian_downsample", "generate_sequence",
    "inner_splitting_loop", "load_flow", "load_pgm", "load_sequence",
    "nltv_energy", "nltv_prox", "psnr", "restore", "resolution_chart",
    "rmse", "save_dataset", "save_flow", "save_pgm", "save_sequence",
    "sliding_window_restore", "smooth_random_flow", "temporal_mean",
    "wave_flow", "__version__",
]
