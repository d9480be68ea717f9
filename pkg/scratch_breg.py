import numpy as np

import turbrestore as tr
from turbrestore.solver import _inner_splitting, total_residual
from turbrestore.nltv import compute_weights, nltv_prox
from turbrestore.warp import fidelity_gradient

chart = tr.resolution_chart(64)
params = tr.SimParams(amplitude=2.0, noise_sigma=0.0, frames=20, phase_seed=7)
frames, flows = tr.generate_sequence(chart, params)

cfg = tr.SolverConfig(outer_iters=10)
n = len(frames)
delta = 0.9 / n
lam = cfg.lambda0
lam_max = cfg.resolved_lambda_max()

u = tr.temporal_mean(frames)
targets = [f.copy() for f in frames]
events = []
print("initial fidelity:", f"{total_residual(u, flows, frames):.4g}")
for outer in range(cfg.outer_iters):
    graph = compute_weights(u, cfg.nl)
    u, taken, delta, residuals = _inner_splitting(
        u, flows, targets, graph, lam, delta, cfg.inner_iters, cfg.inner_tol,
        cfg.nl, events)
    warped = [tr.apply_warp(u, fl) for fl in flows]
    fid = float(sum(np.sum((w - f) ** 2) for w, f in zip(warped, frames)))
    targets = [t + f - w for t, f, w in zip(targets, frames, warped)]
    print(f"outer {outer+1}: lam={lam:.3f} delta={delta:.4f} inner={taken} "
          f"breg_first={residuals[0]:.4g} breg_last={residuals[-1]:.4g} fid={fid:.4g}")
    lam = min(lam * cfg.lambda_growth, lam_max)
    u = np.clip(u, -0.5, 1.5)
print("events:", events[:8])
