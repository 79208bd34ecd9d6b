import numpy as np
import pytest

from foliamod import gallery
from foliamod.analysis import (christoffels, fornberg_weights, grid_derivative,
                               harmonic_residual, leaf_laplacian_integrals, leafwise_laplacian,
                               mean_curvature_orthogonal, nonperiodic_diff_matrix,
                               tangential_grad_log, vertical_projector)
from foliamod.errors import PreconditionError
from foliamod.modulus import closed_form_extremal

from conftest import skew_chart


def test_christoffels_polar():
    ring = gallery.make_ring(2, 1.0, 2.0)
    G = christoffels(ring, np.array([1.5, 0.4]))
    # axes (r, theta)
    assert G[0, 1, 1] == pytest.approx(-1.5, rel=1e-8)
    assert G[1, 0, 1] == pytest.approx(1 / 1.5, rel=1e-8)
    assert G[1, 1, 0] == pytest.approx(1 / 1.5, rel=1e-8)
    assert abs(G[0, 0, 0]) < 1e-12 and abs(G[1, 1, 1]) < 1e-12


@pytest.mark.parametrize("alpha", [0.3, np.pi / 2, 2.5])
def test_christoffels_torus(alpha):
    R, r = 2.0, 1.0
    torus = gallery.make_torus(R, r)
    G = christoffels(torus, np.array([1.0, alpha]))
    rho = R + r * np.cos(alpha)
    # axes (beta, alpha)
    assert G[1, 0, 0] == pytest.approx(rho * np.sin(alpha) / r, rel=1e-8)
    assert G[0, 0, 1] == pytest.approx(-r * np.sin(alpha) / rho, rel=1e-8)


def test_christoffels_symmetric_in_lower_indices():
    G = christoffels(skew_chart(), np.array([[0.3, 0.4, 1.0], [0.6, 0.2, 5.0]]))
    np.testing.assert_allclose(G, np.swapaxes(G, -1, -2), atol=1e-12)


def test_mean_curvature_torus_value():
    H = mean_curvature_orthogonal(gallery.make_torus(2.0, 1.0), np.array([0.0, np.pi / 2]))
    np.testing.assert_allclose(H.coeffs, [0.0, 0.5], atol=1e-9)


@pytest.mark.parametrize("chart", [gallery.make_ring(2, 1.0, 2.0), gallery.make_ring(3, 1.0, 2.0),
                                   gallery.make_ellipse_tube(2.0, 1.0, 0.1, 0.5)],
                         ids=["ring2", "ring3", "ellipse"])
def test_mean_curvature_vanishes_for_geodesic_normals(chart):
    rng = np.random.default_rng(0)
    lo = np.array([a for a, _ in chart.box])
    hi = np.array([b for _, b in chart.box])
    u = lo + (hi - lo) * rng.uniform(0.05, 0.95, size=(20, chart.dim_total))
    H = mean_curvature_orthogonal(chart, u)
    assert np.max(np.abs(H.coeffs)) < 1e-8


def test_mean_curvature_warped_product():
    chart = gallery.build_example("product", warp_amp=0.4)
    t = np.linspace(0.05, 0.95, 7)
    u = np.stack([np.full_like(t, 0.5), t], axis=-1)
    H = mean_curvature_orthogonal(chart, u)
    w = 1 + 0.4 * np.sin(2 * np.pi * t)
    dw = 0.8 * np.pi * np.cos(2 * np.pi * t)
    np.testing.assert_allclose(H.coeffs[:, 1], -dw / w, atol=1e-8)
    np.testing.assert_allclose(H.coeffs[:, 0], 0.0, atol=1e-12)


def test_mean_curvature_is_vertical():
    chart = skew_chart()
    u = np.array([[0.3, 0.4, 1.0], [0.6, 0.2, 5.0]])
    assert mean_curvature_orthogonal(chart, u).horizontal_residual(chart, u) < 1e-12


def test_projector_idempotent_and_self_adjoint():
    chart = skew_chart()
    u = np.random.default_rng(2).uniform([0, 0, 0], [1, 1, 6], size=(10, 3))
    P = vertical_projector(chart, u)
    g = chart.metric(u)
    np.testing.assert_allclose(P @ P, P, atol=1e-13)
    gP = g @ P
    np.testing.assert_allclose(gP, np.swapaxes(gP, -1, -2), atol=1e-13)
    # rank equals the leaf dimension
    np.testing.assert_allclose(np.trace(P, axis1=-2, axis2=-1), 1.0, atol=1e-13)


@pytest.mark.parametrize("name", ["torus64", "warped", "skew"])
def test_mean_curvature_identity_on_grid(name, request):
    chart, quad, bundle = request.getfixturevalue(name)
    for p in (1.5, 3.0):
        f0 = closed_form_extremal(bundle, quad, p)
        T = tangential_grad_log(f0, chart, quad, p)
        H = mean_curvature_orthogonal(chart, quad.points)
        assert H.sup_distance(T) < 1e-6


def test_fornberg_weights_match_textbook():
    c = fornberg_weights(0.0, np.array([-2, -1, 0, 1, 2], dtype=float), 2)
    np.testing.assert_allclose(c[:, 1], [1 / 12, -2 / 3, 0, 2 / 3, -1 / 12], atol=1e-14)
    np.testing.assert_allclose(c[:, 2], [-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12], atol=1e-13)


def test_nonperiodic_diff_exact_on_quadratics():
    x = np.polynomial.legendre.leggauss(9)[0]
    D = nonperiodic_diff_matrix(x)
    np.testing.assert_allclose(D @ (x**2 - 3 * x), 2 * x - 3, atol=1e-12)


@pytest.mark.parametrize("method, tol", [("spectral", 1e-12), ("fd4", 1e-4)])
def test_periodic_derivative(torus64, method, tol):
    chart, quad, bundle = torus64
    a = quad.points[..., 1]
    d = grid_derivative(np.sin(2 * a), quad, 1, method)
    np.testing.assert_allclose(d, 2 * np.cos(2 * a), atol=tol)


def test_unknown_derivative_method(torus64):
    _, quad, _ = torus64
    with pytest.raises(PreconditionError):
        grid_derivative(np.ones(quad.shape), quad, 0, "cubic")


def test_leafwise_laplacian_torus(torus64):
    chart, quad, bundle = torus64
    a = quad.points[..., 1]
    np.testing.assert_allclose(leafwise_laplacian(np.sin(a), chart, quad), -np.sin(a), atol=1e-12)
    np.testing.assert_allclose(leaf_laplacian_integrals(np.cos(3 * a), chart, quad, bundle), 0.0,
                               atol=1e-12)


def test_leafwise_laplacian_annulus(ring64):
    chart, quad, bundle = ring64
    r, th = quad.points[..., 0], quad.points[..., 1]
    np.testing.assert_allclose(leafwise_laplacian(np.cos(th) * r, chart, quad),
                               -np.cos(th) / r, atol=1e-12)


def test_laplacian_requires_closed_leaves(ring3d):
    chart, quad, bundle = ring3d
    with pytest.raises(PreconditionError):
        leafwise_laplacian(np.ones(quad.shape), chart, quad)


@pytest.mark.parametrize("name", ["torus64", "ring64", "warped", "skew"])
def test_harmonic_measure(name, request):
    chart, quad, bundle = request.getfixturevalue(name)
    pts = quad.points
    f = np.exp(np.sin(pts[..., -1])) * (1 + 0.3 * np.cos(pts[..., 0]))
    for p in (1.5, 2.0, 3.0):
        f0 = closed_form_extremal(bundle, quad, p)
        assert harmonic_residual(f0, f, chart, quad, bundle, p) < 1e-10


def test_harmonic_residual_detects_wrong_weight(torus64):
    chart, quad, bundle = torus64
    a = quad.points[..., 1]
    wrong = 1.0 + 0.5 * np.sin(a)
    assert harmonic_residual(wrong, np.sin(a), chart, quad, bundle, 2.0) > 1e-2


def test_harmonic_residual_zero_for_leafwise_constant(torus64):
    chart, quad, bundle = torus64
    f0 = closed_form_extremal(bundle, quad, 2.0)
    assert harmonic_residual(f0, np.cos(quad.points[..., 0]), chart, quad, bundle, 2.0) == 0.0
