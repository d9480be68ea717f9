import numpy as np

import turbrestore as tr
from turbrestore.flow import FlowParams, _lk_level, build_pyramid, _window_kernel
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


def run(params, label):
    pyr_u = build_pyramid(u, params.pyramid_levels)
    pyr_f = build_pyramid(f, params.pyramid_levels)
    dx = np.zeros(pyr_u[-1].shape)
    dy = np.zeros(pyr_u[-1].shape)
    for level in range(params.pyramid_levels - 1, -1, -1):
        dx, dy = _lk_level(pyr_u[level], pyr_f[level], dx, dy, params)
        if level > 0:
            target = pyr_u[level - 1].shape
            dx = 2.0 * upsample2(dx, target)
            dy = 2.0 * upsample2(dy, target)
        scale = 2 ** level
        est_full = FlowField(dx, dy)
        true_level = tr.wave_flow(dx.shape, 2.0 / scale if level > 0 else 2.0, 16.0 / scale if level > 0 else 16.0, (0.3, 1.1, 2.7, 0.6))
    est = FlowField(dx, dy)
    print(label, "EPE:", tr.endpoint_error(est, wf, margin=9),
          "max |est|:", est.magnitude().max())


for sigma_div in (2.0, 3.0):
    import turbrestore.flow as fl

    orig = fl._window_kernel

    def patched(radius, sd=sigma_div):
        t = np.arange(-radius, radius + 1, dtype=np.float64)
        k = np.exp(-0.5 * (t / (radius / sd)) ** 2)
        return k / k.sum()

    fl._window_kernel = patched
    for levels in (2, 3):
        for iters in (10, 20):
            run(FlowParams(pyramid_levels=levels, iterations_per_level=iters),
                f"sigma=r/{sigma_div} levels={levels} iters={iters}")
    fl._window_kernel = orig
