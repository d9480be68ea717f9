import numpy as np

import turbrestore as tr
import turbrestore.nltv as nltv_mod
from turbrestore import _kernels
from turbrestore.solver import _inner_splitting, total_residual
from turbrestore.nltv import compute_weights, _neighbor_sq_sums

chart = tr.resolution_chart(64)
params = tr.SimParams(amplitude=2.0, noise_sigma=0.0, frames=20, phase_seed=7)
frames, flows = tr.generate_sequence(chart, params)


def prox_multi(v, graph, mu, params=None, max_iters=30, tol=1e-4,
               return_energies=False, sweeps=1):
    params = params or tr.NlParams()
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
        for _s in range(sweeps):
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


def run(sweeps, label):
    orig = nltv_mod.nltv_prox
    import turbrestore.solver as sol
    sol.nltv_prox = lambda v, g, mu, params=None, **kw: prox_multi(
        v, g, mu, params, sweeps=sweeps)
    cfg = tr.SolverConfig(outer_iters=10)
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
    sol.nltv_prox = orig
    mono = all(b <= a * (1 + 1e-9) for a, b in zip(fids, fids[1:]))
    print(f"{label}: init={init:.4g} trace=" +
          " ".join(f"{v:.4g}" for v in fids) +
          f"  monotone={mono} final_ratio={fids[-1]/init:.2e}")


run(1, "sweeps=1")
run(3, "sweeps=3")
run(5, "sweeps=5")
