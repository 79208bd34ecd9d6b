"""Acceptance criteria, one test per criterion, each reporting a PASS/FAIL line."""

import time

import numpy as np
import pytest

from foliamod import gallery, verify
from foliamod.analysis import mean_curvature_orthogonal, tangential_grad_log
from foliamod.geometry import densities
from foliamod.modulus import (closed_form_extremal, integral_formula_residual,
                              modulus_base_formula, modulus_direct, normalization_residual,
                              submodulus)
from foliamod.optimizer import LeafProblem, kkt_closed_leaf, solve_global, solve_leaf
from foliamod.quadrature import build_quadrature, default_counts

from conftest import ACCEPTANCE_LINES, setup_chart


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def gallery_charts():
    return {
        "ring2": setup_chart(gallery.make_ring(2, 1.0, 2.0), [64, 64]),
        "ring3": setup_chart(gallery.make_ring(3, 1.0, 2.0), [16, 16, 24]),
        "torus": setup_chart(gallery.make_torus(2.0, 1.0), [64, 64]),
        "ellipse-tube": setup_chart(gallery.make_ellipse_tube(2.0, 1.0, 0.1, 0.5), [48, 64]),
        "product": setup_chart(gallery.build_example("product", warp_amp=0.4), [32, 48]),
    }


@pytest.fixture(scope="module")
def charts():
    return gallery_charts()


def test_criterion_01_ring():
    t0 = time.perf_counter()
    chart, quad, bundle = setup_chart(gallery.make_ring(2, 1.0, 2.0), [64, 64])
    f0 = closed_form_extremal(bundle, quad, 2.0)
    routes = {
        "closed": modulus_base_formula(bundle, quad, 2.0),
        "direct": modulus_direct(f0, bundle, quad, 2.0),
        "optimizer": solve_global(bundle, quad, 2.0).modulus,
    }
    elapsed = time.perf_counter() - t0
    exact = np.sqrt(np.log(2.0) / (2 * np.pi))
    err = max(abs(m - exact) / exact for m in routes.values())
    leaf_std = float(np.max(np.std(f0, axis=1)))
    profile = f0 * quad.points[..., 0]  # C r^(1-n) with n = 2
    spread = float(np.ptp(profile) / np.mean(profile))
    ok = err <= 1e-6 and elapsed < 2.0 and leaf_std <= 1e-10 and spread <= 1e-10
    report(1, ok, f"ring p=2 rel err {err:.2e} (1e-6), {elapsed:.2f}s (<2s), "
                  f"leaf stddev {leaf_std:.1e} (1e-10), profile spread {spread:.1e}")


def test_criterion_02_torus():
    R, r, p = 2.0, 1.0, 2.0
    chart, quad, bundle = setup_chart(gallery.make_torus(R, r), [64, 64])
    f0 = closed_form_extremal(bundle, quad, p)
    exact = 3 ** 0.25
    mods = [modulus_base_formula(bundle, quad, p), modulus_direct(f0, bundle, quad, p),
            solve_global(bundle, quad, p).modulus]
    err = max(abs(m - exact) / exact for m in mods)
    profile = (R + r * np.cos(quad.points[..., 1])) ** (-1.0 / (p - 1.0))
    C = np.sum(f0 * profile) / np.sum(profile**2)
    dev = float(np.max(np.abs(f0 - C * profile)))
    report(2, err <= 1e-6 and dev <= 1e-8,
           f"torus p=2 rel err {err:.2e} (1e-6), profile deviation {dev:.1e} (1e-8)")


def test_criterion_03_ellipse_tube():
    a, b = 2.0, 1.0
    chart, quad, bundle = setup_chart(gallery.make_ellipse_tube(a, b, 0.1, 0.5),
                                      default_counts(gallery.make_ellipse_tube(a, b, 0.1, 0.5)))
    s_nodes, s_weights = quad.nodes[1], quad.weights[1]
    L0 = float(np.sum(s_weights * gallery.ellipse_speed(a, b, s_nodes)))
    worst = 0.0
    for p in (1.5, 2.0, 3.0):
        f0 = closed_form_extremal(bundle, quad, p)
        t = quad.points[..., 0]
        worst = max(worst, float(np.max(np.abs(f0 * (L0 + 2 * np.pi * t) - 1.0))))
    report(3, worst <= 1e-6, f"ellipse tube max |f0 (L0 + 2 pi t) - 1| = {worst:.1e} (1e-6)")


def test_criterion_04_integral_formula(charts):
    worst = 0.0
    for name, (chart, quad, bundle) in charts.items():
        for p in (1.5, 2.0, 3.0):
            f0 = closed_form_extremal(bundle, quad, p)
            rng = np.random.default_rng([4, int(10 * p)])
            for _ in range(10):
                phi = verify.random_trig_field(quad, rng)
                worst = max(worst, integral_formula_residual(f0, phi, bundle, quad, p))
    report(4, worst <= 1e-7, f"integral formula worst residual {worst:.1e} (1e-7)")


def test_criterion_05_normalization(charts):
    closed = opt = 0.0
    positive = True
    for name, (chart, quad, bundle) in charts.items():
        for p in (1.5, 2.0, 3.0):
            f0 = closed_form_extremal(bundle, quad, p)
            closed = max(closed, normalization_residual(f0, bundle, quad))
            fo = solve_global(bundle, quad, p).field
            opt = max(opt, normalization_residual(fo, bundle, quad))
            positive &= bool(f0.min() > 0)
    report(5, closed <= 1e-10 and opt <= 1e-6 and positive,
           f"closed {closed:.1e} (1e-10), optimizer {opt:.1e} (1e-6), min f0 > 0: {positive}")


def torus_tangential_formula(alpha, R, r):
    # (p - 1) d/dalpha ln f0 scaled by g^{alpha alpha} = 1/r^2, with f0 ~ (R + r cos)^(-1/(p-1))
    return np.sin(alpha) / (r * (R + r * np.cos(alpha)))


def test_criterion_06_mean_curvature():
    R, r, p = 2.0, 1.0, 2.0
    chart = gallery.make_torus(R, r)
    errs = []
    for m in (32, 64, 128):
        quad = build_quadrature(chart, [m, m])
        bundle = densities(chart, quad)
        f0 = closed_form_extremal(bundle, quad, p)
        T = tangential_grad_log(f0, chart, quad, p, method="fd4")
        H = mean_curvature_orthogonal(chart, quad.points)
        errs.append(H.sup_distance(T))
    factors = [errs[i] / errs[i + 1] for i in range(2)]
    # closed-form f0 differentiated analytically, against H at 20 points
    rng = np.random.default_rng(6)
    u = np.stack([rng.uniform(0, 2 * np.pi, 20), rng.uniform(0, 2 * np.pi, 20)], axis=-1)
    H = mean_curvature_orthogonal(chart, u).coeffs
    exact = np.stack([np.zeros(20), torus_tangential_formula(u[:, 1], R, r)], axis=-1)
    point_err = float(np.max(np.abs(H - exact)))
    ok = min(factors) >= 3.5 and errs[-1] <= 1e-4 and point_err <= 1e-6
    report(6, ok, "torus discrepancy " + " -> ".join(f"{e:.2e}" for e in errs)
           + f", factors {factors[0]:.1f}, {factors[1]:.1f} (>=3.5), pointwise {point_err:.1e} (1e-6)")


def test_criterion_07_harmonic(charts):
    worst = 0.0
    for name in ("torus", "ring2"):
        chart, quad, bundle = charts[name]
        for p in (1.5, 2.0, 3.0):
            ctx = verify.Context(chart, quad, bundle, p, seed=7)
            res = verify.check_harmonic(ctx, n_funcs=5)
            worst = max(worst, res.value)
    report(7, worst <= 1e-7, f"harmonic measure worst residual {worst:.1e} (1e-7)")


def test_criterion_08_extremality(charts):
    worst_drop, worst_slope = 0.0, 0.0
    for name in ("torus", "ring2", "ellipse-tube", "product"):
        chart, quad, bundle = charts[name]
        for p in (1.5, 2.0, 3.0):
            f0 = closed_form_extremal(bundle, quad, p)
            rng = np.random.default_rng([8, int(10 * p)])
            for _ in range(5):
                phi = verify.extremality_direction(f0, quad, rng)
                diffs, slopes = verify.perturbation_slopes(f0, phi, bundle, quad, p,
                                                           steps=(1e-1, 1e-2, 1e-3))
                worst_drop = max(worst_drop, float(-diffs.min()))
                worst_slope = max(worst_slope, float(np.max(np.abs(slopes - 2.0))))
    ok = worst_drop <= 1e-9 and worst_slope <= 0.1
    report(8, ok, f"largest decrease {worst_drop:.1e} (1e-9), slope deviation {worst_slope:.3f} (0.1)")


def test_criterion_09_properties(charts):
    monotone, worst = True, 0.0
    for name in ("torus", "ring2"):
        chart, quad, bundle = charts[name]
        rng = np.random.default_rng(9)
        for p in (1.5, 2.0, 3.0):
            full = modulus_base_formula(bundle, quad, p)
            for _ in range(10):
                mask = rng.random(quad.base_shape) < rng.uniform(0.1, 0.9)
                a = submodulus(bundle, quad, p, mask)
                b = submodulus(bundle, quad, p, ~mask)
                monotone &= a <= full and b <= full
                worst = max(worst, abs(a**p + b**p - full**p) / full**p)
    report(9, monotone and worst <= 1e-10,
           f"monotone: {monotone}, additivity residual {worst:.1e} (1e-10)")


def test_criterion_10_optimizer_oracle():
    rng = np.random.default_rng(10)
    worst = 0.0
    for i in range(100):
        p = (1.5, 2.0, 3.0, 4.0)[i % 4]
        n = int(rng.integers(2, 65))
        prob = LeafProblem(v=np.exp(rng.uniform(-2, 2, n)), w=np.exp(rng.uniform(-2, 2, n)), p=p)
        ref = prob.objective(kkt_closed_leaf(prob))
        worst = max(worst, abs(solve_leaf(prob).objective - ref) / ref)
    report(10, worst <= 1e-8, f"100 leaf problems, worst relative objective gap {worst:.1e} (1e-8)")


def test_criterion_11_base_metric_invariance():
    def smooth_scale(y):
        return 1.5 + 0.5 * np.sin(y[..., 0])

    worst_f, worst_m = 0.0, 0.0
    for chart in (gallery.make_torus(2.0, 1.0), gallery.make_ring(2, 1.0, 2.0)):
        quad = build_quadrature(chart, [64, 64])
        bundle = densities(chart, quad)
        for p in (1.5, 2.0, 3.0):
            f0 = closed_form_extremal(bundle, quad, p)
            mod = modulus_base_formula(bundle, quad, p)
            for scale in (2.0, smooth_scale):
                other = chart.rescale_base(scale)
                ob = densities(other, quad)
                worst_f = max(worst_f, float(np.max(np.abs(closed_form_extremal(ob, quad, p) - f0)
                                                    / f0)))
                worst_m = max(worst_m, abs(modulus_base_formula(ob, quad, p) - mod) / mod)
    report(11, worst_f <= 1e-10 and worst_m <= 1e-8,
           f"f0 change {worst_f:.1e} (1e-10), modulus change {worst_m:.1e} (1e-8)")
