import numpy as np

import turbrestore as tr
from turbrestore.solver import _inner_splitting, total_residual
from turbrestore.nltv import compute_weights


def run(label, rescale, outer_iters=10, noise=0.0, estimate=False,
        frames_n=20, seed=7):
    chart = tr.resolution_chart(64)
    params = tr.SimParams(amplitude=2.0, noise_sigma=noise, frames=frames_n,
                          phase_seed=seed)
    frames, flows_true = tr.generate_sequence(chart, params)
    cfg = tr.SolverConfig(outer_iters=outer_iters)
    n = len(frames)
    delta = 0.9 / n
    lam = cfg.lambda0
    u = tr.temporal_mean(frames)
    tmean_rmse = tr.rmse(np.clip(u, 0, 1), chart)
    targets = [f.copy() for f in frames]
    events = []
    fids = []
    init = total_residual(u, flows_true, frames)
    flows = flows_true
    for outer in range(cfg.outer_iters):
        if estimate:
            flows = [tr.estimate_flow(u, f, cfg.flow) for f in frames]
        graph = compute_weights(u, cfg.nl)
        u, taken, delta, residuals = _inner_splitting(
            u, flows, targets, graph, lam, delta, cfg.inner_iters,
            cfg.inner_tol, cfg.nl, events)
        warped = [tr.apply_warp(u, fl) for fl in flows]
        fid = float(sum(np.sum((w - f) ** 2) for w, f in zip(warped, frames)))
        lam_next = min(lam * cfg.lambda_growth, cfg.resolved_lambda_max())
        scale = lam / lam_next if rescale else 1.0
        targets = [f + scale * (t - w) for t, f, w in zip(targets, frames, warped)]
        fids.append(fid)
        lam = lam_next
        u = np.clip(u, -0.5, 1.5)
    mono = all(b <= a * (1 + 1e-9) for a, b in zip(fids, fids[1:]))
    r = tr.rmse(np.clip(u, 0, 1), chart)
    print(f"{label}: trace=" + " ".join(f"{v:.4g}" for v in fids) +
          f"\n    monotone={mono} ratio={fids[-1]/init:.2e} "
          f"rmse={r:.4f} tmean_rmse={tmean_rmse:.4f} ratio_rmse={r/tmean_rmse:.3f}")


run("plain    fixed flows", rescale=False)
run("rescaled fixed flows", rescale=True)
run("rescaled fixed flows noisy", rescale=True, noise=0.01)
run("rescaled estimated 5 outers noisy", rescale=True, outer_iters=5,
    noise=0.01, estimate=True)
run("plain    estimated 5 outers noisy", rescale=False, outer_iters=5,
    noise=0.01, estimate=True)
