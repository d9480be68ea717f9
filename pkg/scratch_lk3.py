import numpy as np

import turbrestore as tr
from turbrestore.flow import FlowParams, build_pyramid
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


def lk_level(u_l, f_l, dx, dy, params, sigma_div, alpha, validate):
    radius = params.window_radius
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (t / (radius / sigma_div)) ** 2)
    kernel /= kernel.sum()
    warped = apply_warp(u_l, FlowField(dx, dy))
    for _ in range(params.iterations_per_level):
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
        ok = lam_min >= params.min_eigen_threshold
        det = np.where(ok, s11 * s22 - s12 * s12, 1.0)
        inc_x = np.where(ok, (s22 * b1 - s12 * b2) / det, 0.0)
        inc_y = np.where(ok, (s11 * b2 - s12 * b1) / det, 0.0)
        np.clip(inc_x, -1.0, 1.0, out=inc_x)
        np.clip(inc_y, -1.0, 1.0, out=inc_y)
        cand_dx = dx + inc_x
        cand_dy = dy + inc_y
        cand_warp = apply_warp(u_l, FlowField(cand_dx, cand_dy))
        if validate:
            before = separable_filter(err * err, kernel)
            cand_err = f_l - cand_warp
            after = separable_filter(cand_err * cand_err, kernel)
            good = after <= before
            dx = np.where(good, cand_dx, dx)
            dy = np.where(good, cand_dy, dy)
            warped = apply_warp(u_l, FlowField(dx, dy))
        else:
            dx, dy = cand_dx, cand_dy
            warped = cand_warp
    return dx, dy


def estimate(u, f, params, sigma_div, alpha, validate, skip_small):
    pyr_u = build_pyramid(u, params.pyramid_levels)
    pyr_f = build_pyramid(f, params.pyramid_levels)
    dx = np.zeros(pyr_u[-1].shape)
    dy = np.zeros(pyr_u[-1].shape)
    for level in range(params.pyramid_levels - 1, -1, -1):
        small = min(pyr_u[level].shape) < 2 * (2 * params.window_radius + 1)
        if not (skip_small and small):
            dx, dy = lk_level(pyr_u[level], pyr_f[level], dx, dy, params,
                              sigma_div, alpha, validate)
        if level > 0:
            target = pyr_u[level - 1].shape
            dx = 2.0 * upsample2(dx, target)
            dy = 2.0 * upsample2(dy, target)
    return FlowField(dx, dy)


u = smooth_texture((64, 64), seed=3)
cases = {
    "wave": tr.wave_flow((64, 64), 2.0, 16.0, (0.3, 1.1, 2.7, 0.6)),
    "shift21": tr.FlowField(np.full((64, 64), 2.0), np.full((64, 64), 1.0)),
    "bigshift": tr.FlowField(np.full((64, 64), 5.0), np.full((64, 64), -4.0)),
    "rand8": tr.smooth_random_flow((64, 64), 2.0, 8, 11),
}

p = FlowParams(iterations_per_level=10)
for label, (sd, al, va, sk) in {
    "s=r/3 a=1e-4 validate": (3.0, 1e-4, True, False),
    "s=r/3 a=1e-4 skip": (3.0, 1e-4, False, True),
    "s=r/3 a=1e-4 validate+skip": (3.0, 1e-4, True, True),
    "s=r/3 a=0    validate+skip": (3.0, 0.0, True, True),
    "s=r/2 a=1e-4 validate+skip": (2.0, 1e-4, True, True),
}.items():
    out = []
    for name, truth in cases.items():
        f = tr.apply_warp(u, truth)
        est = estimate(u, f, p, sd, al, va, sk)
        margin = 9 if name != "bigshift" else 12
        epe = tr.endpoint_error(est, truth, margin=margin)
        out.append(f"{name}: {epe:.3f}/mx{est.magnitude().max():.1f}")
    print(f"{label:28s} " + "  ".join(out))
