"""Differential-geometric checks on a foliated chart.

* mean curvature of the horizontal distribution, from Christoffel symbols
  and finite differences of the horizontal frame;
* the leaf-tangential part of ``(p - 1) grad ln f0`` from grid derivatives;
* the leafwise Laplace-Beltrami operator and the residual of the harmonic
  measure ``f0^(p-1) dvol``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, SingularGeometryError, check_exponent
from .geometry import horizontal_frame, metric_at
from .quadrature import integrate_manifold, leaf_integrals

FD_REL_STEP = max(1e-5, np.finfo(float).eps ** (1.0 / 3.0))


def fd_step(chart, axis):
    lo, hi = chart.box[axis]
    return (hi - lo) * FD_REL_STEP


@dataclass(frozen=True, eq=False)
class TangentVectorField:
    """Coordinate components ``coeffs[..., k]`` of a vector field at sample points."""

    coeffs: np.ndarray
    vertical: bool = False

    def sup_distance(self, other):
        return float(np.max(np.abs(self.coeffs - other.coeffs)))

    def horizontal_residual(self, chart, u):
        """Largest |g(X, E_i)| over sample points and horizontal frame vectors."""
        g = metric_at(chart, u)
        frame = horizontal_frame(chart, u, g=g)
        comp = np.einsum("...ia,...ab,...b->...i", frame, g, self.coeffs)
        return float(np.max(np.abs(comp)))


def metric_derivatives(chart, u, h_fd=None):
    """Central differences ``dg[..., j, a, b] = d_j g_ab``."""
    u = np.asarray(u, dtype=float)
    n = chart.dim_total
    dg = np.empty(u.shape[:-1] + (n, n, n))
    for j in range(n):
        h = fd_step(chart, j) if h_fd is None else h_fd
        e = np.zeros(n)
        e[j] = h
        dg[..., j, :, :] = (metric_at(chart, u + e) - metric_at(chart, u - e)) / (2 * h)
    return dg


def christoffels(chart, u, h_fd=None):
    """Christoffel symbols ``gamma[..., k, i, j]`` of the chart metric."""
    u = np.asarray(u, dtype=float)
    g = metric_at(chart, u)
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise SingularGeometryError("singular metric") from exc
    dg = metric_derivatives(chart, u, h_fd)
    # lowered[..., l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    lowered = (np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg)
               - dg)
    return 0.5 * np.einsum("...kl,...lij->...kij", ginv, lowered)


def vertical_projector(chart, u):
    """Matrix of the g-orthogonal projection onto the leaf directions."""
    u = np.asarray(u, dtype=float)
    g = metric_at(chart, u)
    frame = horizontal_frame(chart, u, g=g)
    n = chart.dim_total
    # P v = v - sum_i E_i g(E_i, v)
    outer = np.einsum("...ia,...ib,...bc->...ac", frame, frame, g)
    return np.eye(n) - outer


def mean_curvature_orthogonal(chart, u):
    """Mean curvature ``sum_i (nabla_{E_i} E_i)^vertical`` of the horizontal distribution.

    ``E_i`` is the horizontal orthonormal frame; no ``1/b`` averaging.
    """
    u = np.asarray(u, dtype=float)
    n = chart.dim_total
    frame = horizontal_frame(chart, u)
    dframe = np.empty(frame.shape + (n,))  # [..., i, k, j] = d_j E_i^k
    for j in range(n):
        h = fd_step(chart, j)
        e = np.zeros(n)
        e[j] = h
        dframe[..., j] = (horizontal_frame(chart, u + e) - horizontal_frame(chart, u - e)) / (2 * h)
    gamma = christoffels(chart, u)
    acc = (np.einsum("...ij,...ikj->...ik", frame, dframe)
           + np.einsum("...kab,...ia,...ib->...ik", gamma, frame, frame))
    total = acc.sum(axis=-2)
    P = vertical_projector(chart, u)
    return TangentVectorField(np.einsum("...ab,...b->...a", P, total), vertical=True)


# -- grid derivatives ----------------------------------------------------------

def fornberg_weights(x0, xs, order):
    """Finite-difference weights at ``x0`` for derivatives up to ``order`` on nodes ``xs``."""
    xs = np.asarray(xs, dtype=float)
    m = len(xs)
    c = np.zeros((m, order + 1))
    c1, c4 = 1.0, xs[0] - x0
    c[0, 0] = 1.0
    for i in range(1, m):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def nonperiodic_diff_matrix(nodes):
    """First-derivative matrix: 5-point stencils inside, 3-point one-sided at both ends."""
    x = np.asarray(nodes, dtype=float)
    m = len(x)
    if m < 5:
        raise PreconditionError("need at least 5 nodes on a non-periodic axis")
    D = np.zeros((m, m))
    for i in range(m):
        if i == 0:
            idx = [0, 1, 2]
        elif i == m - 1:
            idx = [m - 3, m - 2, m - 1]
        else:
            start = min(max(i - 2, 0), m - 5)
            idx = list(range(start, start + 5))
        D[i, idx] = fornberg_weights(x[i], x[idx], 1)[:, 1]
    return D


def _spectral_derivative(values, axis, period, order=1):
    m = values.shape[axis]
    k = np.fft.fftfreq(m, d=1.0 / m) * (2 * np.pi / period)
    mult = (1j * k) ** order
    if m % 2 == 0 and order % 2 == 1:
        mult[m // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = m
    spec = np.fft.fft(values, axis=axis) * mult.reshape(shape)
    return np.real(np.fft.ifft(spec, axis=axis))


def _periodic_fd4(values, axis, spacing):
    r = lambda s: np.roll(values, s, axis=axis)  # noqa: E731
    return (r(2) - 8 * r(1) + 8 * r(-1) - r(-2)) / (12 * spacing)


def grid_derivative(values, quad, axis, method="spectral"):
    """Derivative of grid samples along one axis.

    Periodic axes: ``"spectral"`` (trigonometric interpolation) or ``"fd4"``
    (4th-order central differences). Non-periodic axes always use
    :func:`nonperiodic_diff_matrix`.
    """
    values = np.asarray(values, dtype=float)
    if quad.rules[axis] == "uniform-periodic":
        period = quad.axis_length(axis)
        if method == "spectral":
            return _spectral_derivative(values, axis, period)
        if method == "fd4":
            return _periodic_fd4(values, axis, period / quad.shape[axis])
        raise PreconditionError(f"unknown derivative method {method!r}")
    D = nonperiodic_diff_matrix(quad.nodes[axis])
    moved = np.moveaxis(values, axis, -1)
    return np.moveaxis(moved @ D.T, -1, axis)


def gradient_coefficients(values, quad, method="spectral"):
    return np.stack([grid_derivative(values, quad, a, method) for a in range(quad.ndim)], axis=-1)


def tangential_grad_log(f0, chart, quad, p, method="spectral"):
    """``(p - 1) (grad ln f0)^vertical`` on the grid."""
    p = check_exponent(p)
    f0 = quad.check_field(f0, "f0")
    if np.any(~(f0 > 0)):
        raise PreconditionError("f0 must be strictly positive")
    dlog = gradient_coefficients(np.log(f0), quad, method)
    pts = quad.points
    g = metric_at(chart, pts)
    grad = np.linalg.solve(g, dlog[..., None])[..., 0]
    P = vertical_projector(chart, pts)
    return TangentVectorField((p - 1.0) * np.einsum("...ab,...b->...a", P, grad), vertical=True)


def require_closed_leaves(quad):
    for axis in quad.leaf_axes:
        if quad.rules[axis] != "uniform-periodic":
            raise PreconditionError(
                f"leaf axis {axis} is not periodic; the leafwise Laplacian needs closed leaves"
            )


def leafwise_laplacian(f, chart, quad):
    """Leaf Laplace-Beltrami operator ``(1/sqrt G) d_a (sqrt G G^ab d_b f)``.

    ``G`` is the leaf block of the metric. Requires periodic leaf axes.
    """
    require_closed_leaves(quad)
    f = quad.check_field(f)
    b = quad.dim_base
    g_tt = metric_at(chart, quad.points)[..., b:, b:]
    sqrt_det = np.sqrt(np.linalg.det(g_tt))
    ginv = np.linalg.inv(g_tt)
    dfs = np.stack([grid_derivative(f, quad, a) for a in quad.leaf_axes], axis=-1)
    flux = sqrt_det[..., None] * np.einsum("...ab,...b->...a", ginv, dfs)
    div = sum(grid_derivative(flux[..., i], quad, a) for i, a in enumerate(quad.leaf_axes))
    return div / sqrt_det


def leaf_laplacian_integrals(f, chart, quad, bundle):
    """Per-leaf integrals of the leafwise Laplacian (zero on closed leaves)."""
    return leaf_integrals(leafwise_laplacian(f, chart, quad), bundle, quad)


def harmonic_residual(f0, f, chart, quad, bundle, p):
    """``|int lap_F f f0^(p-1)| / int |lap_F f| f0^(p-1)`` (0 when f is leafwise constant)."""
    p = check_exponent(p)
    lap = leafwise_laplacian(f, chart, quad)
    weight = quad.check_field(f0, "f0") ** (p - 1.0)
    num = abs(integrate_manifold(lap * weight, bundle, quad))
    den = integrate_manifold(np.abs(lap) * weight, bundle, quad)
    scale = integrate_manifold(np.abs(quad.check_field(f)) * weight, bundle, quad)
    if den <= 1e-14 * max(scale, 1e-300):
        return 0.0
    return num / den
