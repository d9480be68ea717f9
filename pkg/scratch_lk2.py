import numpy as np

import turbrestore as tr
from turbrestore.flow import FlowParams, build_pyramid, _window_kernel
from turbrestore.image import separable_filter, upsample2
from turbrestore.warp import FlowField, apply_warp


def smooth_texture(shape, seed=0):
    r = np.random.default_rng(seed)
    img = r.standard_normal(shape)
    img = separable_filter(img, np.array([1, 4, 6, 4, 1]) / 16.0)
    img = separable_filter(img, np.array([1, 4, 6, 4, 1]) / 16.0)
    img -= img.min()
    img /= max(img.max(), 1e-12)
    return 0.1 + 0.8 * img


u = smooth_texture((64, 64), seed=3)
wf = tr.wave_flow((64, 64), 2.0, 16.0, (0.3, 1.1, 2.7, 0.6))
f = tr.apply_warp(u, wf)


def lk_level_dbg(u_l, f_l, dx, dy, params, sigma_div=2.0, alpha=0.0,
                 conf_damp=False):
    radius = params.window_radius
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (t / (radius / sigma_div)) ** 2)
    kernel /= kernel.sum()
    lam_min_last = None
    for _ in range(params.iterations_per_level):
        warped = apply_warp(u_l, FlowField(dx, dy))
        p = np.pad(warped, 1, mode="edge")
        gx = 0.5 * (p[1:-1, 2:] - p[1:-1, :-2])
        gy = 0.5 * (p[2:, 1:-1] - p[:-2, 1:-1])
        err = f_l - warped
        s11 = separable_filter(gx * gx, kernel) + alpha
        s12 = separable_filter(gx * gy, kernel)
        s22 = separable_filter(gy * gy, kernel) + alpha
        b1 = separable_filter(gx * err, kernel)
        b2 = separable_filter(gy * err, kernel)
        trace = s11 + s22
        disc = np.sqrt((s11 - s22) ** 2 + 4.0 * s12 * s12)
        lam_min = 0.5 * (trace - disc)
        lam_min_last = lam_min
        ok = lam_min >= params.min_eigen_threshold
        det = np.where(ok, s11 * s22 - s12 * s12, 1.0)
        inc_x = np.where(ok, (s22 * b1 - s12 * b2) / det, 0.0)
        inc_y = np.where(ok, (s11 * b2 - s12 * b1) / det, 0.0)
        if conf_damp:
            g = lam_min / (lam_min + 1e-3)
            inc_x *= g
            inc_y *= g
        np.clip(inc_x, -1.0, 1.0, out=inc_x)
        np.clip(inc_y, -1.0, 1.0, out=inc_y)
        dx = dx + inc_x
        dy = dy + inc_y
    return dx, dy, lam_min_last


def run(params, sigma_div, alpha=0.0, conf_damp=False, label=""):
    pyr_u = build_pyramid(u, params.pyramid_levels)
    pyr_f = build_pyramid(f, params.pyramid_levels)
    dx = np.zeros(pyr_u[-1].shape)
    dy = np.zeros(pyr_u[-1].shape)
    for level in range(params.pyramid_levels - 1, -1, -1):
        dx, dy, lam = lk_level_dbg(pyr_u[level], pyr_f[level], dx, dy, params,
                                   sigma_div, alpha, conf_damp)
        if level > 0:
            target = pyr_u[level - 1].shape
            dx = 2.0 * upsample2(dx, target)
            dy = 2.0 * upsample2(dy, target)
    est = FlowField(dx, dy)
    err = np.hypot(est.dx - wf.dx, est.dy - wf.dy)
    interior = err[9:-9, 9:-9]
    print(f"{label:44s} EPE(int)={interior.mean():.3f} "
          f"EPE(full)={err.mean():.3f} max|est|={est.magnitude().max():6.2f} "
          f"err>1px(int)={100*np.mean(interior > 1):.1f}%")
    return est, err, lam


p10 = FlowParams(iterations_per_level=10)
est, err, lam = run(p10, 2.0, label="baseline s=r/2")
# where is the big error?
big = np.argwhere(err > 2.0)
print("pixels with err>2px:", len(big), " rows span:", big[:, 0].min() if len(big) else "-",
      big[:, 0].max() if len(big) else "-")
print("lambda_min stats at level0: median", np.median(lam), "p5", np.percentile(lam, 5))

run(p10, 2.0, alpha=1e-6, label="alpha=1e-6")
run(p10, 2.0, alpha=1e-4, label="alpha=1e-4")
run(p10, 2.0, conf_damp=True, label="conf damp 1e-3")
run(p10, 3.0, conf_damp=True, label="s=r/3 conf damp")
run(p10, 3.0, alpha=1e-4, label="s=r/3 alpha=1e-4")
run(FlowParams(iterations_per_level=20), 3.0, alpha=1e-4, label="s=r/3 alpha=1e-4 iters=20")
run(p10, 4.0, alpha=1e-4, label="s=r/4 alpha=1e-4")
run(FlowParams(pyramid_levels=2), 3.0, alpha=1e-4, label="s=r/3 alpha=1e-4 levels=2")
