import numpy as np

import turbrestore as tr
from turbrestore.solver import _inner_splitting, total_residual
from turbrestore.nltv import compute_weights


def run(inner_tol, inner_iters, lam0, growth, label, outer_iters=10):
    chart = tr.resolution_chart(64)
    params = tr.SimParams(amplitude=2.0, noise_sigma=0.0, frames=20,
                          phase_seed=7)
    frames, flows = tr.generate_sequence(chart, params)
    cfg = tr.SolverConfig(outer_iters=outer_iters, inner_iters=inner_iters,
                          inner_tol=inner_tol, lambda0=lam0,
                          lambda_growth=growth)
    n = len(frames)
    delta = 0.9 / n
    lam = cfg.lambda0
    u = tr.temporal_mean(frames)
    targets = [f.copy() for f in frames]
    events = []
    fids = []
    init = total_residual(u, flows, frames)
    for outer in range(cfg.outer_iters):
        graph = compute_weights(u, cfg.nl)
        u, taken, delta, residuals = _inner_splitting(
            u, flows, targets, graph, lam, delta, cfg.inner_iters,
            cfg.inner_tol, cfg.nl, events)
        warped = [tr.apply_warp(u, fl) for fl in flows]
        fid = float(sum(np.sum((w - f) ** 2) for w, f in zip(warped, frames)))
        targets = [t + f - w for t, f, w in zip(targets, frames, warped)]
        fids.append(fid)
        lam = min(lam * cfg.lambda_growth, cfg.resolved_lambda_max())
        u = np.clip(u, -0.5, 1.5)
    mono = all(b <= a * (1 + 1e-9) for a, b in zip(fids, fids[1:]))
    print(f"{label}: trace=" + " ".join(f"{v:.4g}" for v in fids) +
          f"  monotone={mono} ratio={fids[-1]/init:.2e}")


run(1e-4, 20, 0.5, 1.5, "defaults          ")
run(0.0, 20, 0.5, 1.5, "tol=0             ")
run(1e-6, 20, 0.5, 1.5, "tol=1e-6          ")
run(1e-4, 60, 0.5, 1.5, "inner=60          ")
run(0.0, 60, 0.5, 1.5, "inner=60 tol=0    ")
