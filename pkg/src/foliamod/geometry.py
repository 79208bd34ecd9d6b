"""Foliated Riemannian charts and their pointwise geometry.

A chart is a box in parameters ``u = (y, t)``: the first ``dim_base``
coordinates ``y`` are the base coordinates and the submersion is the
projection ``Phi(y, t) = y``, so leaves are the slices ``y = const``.

Metric evaluators are vectorized: ``metric(u)`` takes an array of shape
``(..., n)`` and returns ``(..., n, n)``; ``base_metric(y)`` takes
``(..., b)`` and returns ``(..., b, b)``.
"""

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError, SingularGeometryError
from .quadrature import integrate_base, integrate_manifold, leaf_integrals

PERIODIC_MATCH_TOL = 1e-12
COAREA_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FoliatedChart:
    """A parametrized Riemannian manifold foliated by the fibers of ``(y, t) -> y``."""

    dim_total: int
    dim_base: int
    box: tuple
    periodic: tuple
    metric: object
    base_metric: object
    name: str = "chart"
    axis_names: tuple = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        n, b = self.dim_total, self.dim_base
        if n < 2 or not 1 <= b < n:
            raise PreconditionError(f"need n >= 2 and 1 <= b < n, got n={n}, b={b}")
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        periodic = tuple(bool(x) for x in self.periodic)
        if len(box) != n or len(periodic) != n:
            raise PreconditionError("box and periodic flags need one entry per axis")
        for lo, hi in box:
            if not lo < hi:
                raise PreconditionError(f"empty axis interval [{lo}, {hi}]")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "periodic", periodic)
        if self.axis_names is None:
            names = tuple(f"y{i}" for i in range(b)) + tuple(f"t{i}" for i in range(n - b))
            object.__setattr__(self, "axis_names", names)
        self._check_periodic_match()

    @property
    def dim_leaf(self):
        return self.dim_total - self.dim_base

    def _sample_points(self, count=5):
        fracs = (np.arange(count) + 0.5) / count
        shifts = np.arange(self.dim_total) * 0.173
        lo = np.array([a for a, _ in self.box])
        hi = np.array([c for _, c in self.box])
        frac = (fracs[:, None] + shifts[None, :]) % 1.0
        return lo + frac * (hi - lo)

    def _check_periodic_match(self):
        pts = self._sample_points()
        for axis, per in enumerate(self.periodic):
            if not per:
                continue
            lo, hi = self.box[axis]
            a, c = pts.copy(), pts.copy()
            a[:, axis] = lo
            c[:, axis] = hi
            ga, gc = metric_at(self, a), metric_at(self, c)
            scale = max(1.0, float(np.max(np.abs(ga))))
            if np.max(np.abs(ga - gc)) > PERIODIC_MATCH_TOL * scale:
                raise PreconditionError(
                    f"metric of chart {self.name!r} does not match across periodic axis {axis}"
                )

    def with_base_metric(self, base_metric):
        return dataclasses.replace(self, base_metric=base_metric)

    def rescale_base(self, scale):
        """Chart with base metric ``s(y)**2 h(y)``; ``scale`` is a number or callable of y."""
        old = self.base_metric
        if callable(scale):
            def new(y):
                s = np.asarray(scale(y), dtype=float)
                return (s**2)[..., None, None] * old(y)
        else:
            s2 = float(scale) ** 2

            def new(y):
                return s2 * old(y)
        return self.with_base_metric(new)


@dataclass(frozen=True, eq=False)
class DensityBundle:
    """Geometric densities at the nodes of a quadrature grid.

    ``man_density``, ``leaf_density`` and ``jac`` live on the full grid,
    ``base_density`` on the base grid. ``coarea_residual`` is the largest
    relative mismatch of the two evaluation orders of a manifold integral
    found by the self-check in :func:`densities`.
    """

    man_density: np.ndarray
    leaf_density: np.ndarray
    base_density: np.ndarray
    jac: np.ndarray
    coarea_residual: float = 0.0

    def __post_init__(self):
        for arr in (self.man_density, self.leaf_density, self.base_density, self.jac):
            arr.flags.writeable = False


def _symmetrize(g):
    return 0.5 * (g + np.swapaxes(g, -1, -2))


def wrap_periodic(chart, u):
    u = np.array(u, dtype=float)
    for axis, per in enumerate(chart.periodic):
        if per:
            lo, hi = chart.box[axis]
            u[..., axis] = lo + np.mod(u[..., axis] - lo, hi - lo)
    return u


def metric_at(chart, u):
    """Symmetrized metric without any domain check (used for stencils)."""
    return _symmetrize(np.asarray(chart.metric(np.asarray(u, dtype=float)), dtype=float))


def base_metric_at(chart, y):
    return _symmetrize(np.asarray(chart.base_metric(np.asarray(y, dtype=float)), dtype=float))


def check_in_box(chart, u):
    u = wrap_periodic(chart, u)
    for axis, per in enumerate(chart.periodic):
        if per:
            continue
        lo, hi = chart.box[axis]
        x = u[..., axis]
        if np.any(x < lo) or np.any(x > hi):
            raise DomainError(
                f"coordinate {chart.axis_names[axis]} outside [{lo}, {hi}] on non-periodic axis"
            )
    return u


def eval_metric(chart, u):
    """Metric matrix ``g(u)``; periodic coordinates are reduced mod the period."""
    return metric_at(chart, check_in_box(chart, u))


def _inner(g, a, b):
    return np.einsum("...i,...ij,...j->...", a, g, b)


def horizontal_frame(chart, u, order=None, g=None):
    """g-orthonormal frame of the horizontal space at ``u``.

    Returns an array of shape ``(..., b, n)``: row ``i`` is the coordinate
    vector of ``E_i``. Each base coordinate vector is first made g-orthogonal
    to the leaf directions, then the results are Gram-Schmidt orthonormalized
    in the given ``order`` (default: axis order).
    """
    u = np.asarray(u, dtype=float)
    if g is None:
        g = metric_at(chart, u)
    b, n = chart.dim_base, chart.dim_total
    g_tt = g[..., b:, b:]
    g_ty = g[..., b:, :b]
    try:
        lift_t = -np.linalg.solve(g_tt, g_ty)
    except np.linalg.LinAlgError as exc:
        raise SingularGeometryError("leaf block of the metric is singular") from exc
    basis = np.zeros(u.shape[:-1] + (b, n))
    for i in range(b):
        basis[..., i, i] = 1.0
    basis[..., :, b:] = np.swapaxes(lift_t, -1, -2)
    order = list(range(b)) if order is None else list(order)
    if sorted(order) != list(range(b)):
        raise PreconditionError(f"order must be a permutation of range({b})")
    frame = [None] * b
    done = []
    for i in order:
        v = basis[..., i, :]
        for e in done:
            v = v - _inner(g, e, v)[..., None] * e
        norm2 = _inner(g, v, v)
        if np.any(~(norm2 > 0)):
            bad = np.argwhere(~(norm2 > 0))
            raise SingularGeometryError(
                "degenerate horizontal space", node=bad[0] if bad.size else None
            )
        v = v / np.sqrt(norm2)[..., None]
        frame[i] = v
        done.append(v)
    return np.stack(frame, axis=-2)


def jacobian(chart, u, order=None):
    """Submersion Jacobian ``J(u) = sqrt(det h(Phi_* E_i, Phi_* E_j))``.

    ``E`` is the g-orthonormal horizontal frame; the pushforward keeps the
    base components of each frame vector.
    """
    u = np.asarray(u, dtype=float)
    frame = horizontal_frame(chart, u, order=order)
    b = chart.dim_base
    pushed = frame[..., :, :b]
    h = base_metric_at(chart, u[..., :b])
    gram = pushed @ h @ np.swapaxes(pushed, -1, -2)
    det = np.linalg.det(gram)
    if np.any(~(det > 0)):
        raise SingularGeometryError("non-positive Jacobian", node=np.argwhere(~(det > 0))[0])
    return np.sqrt(det)


def _min_eig_check(mat, what):
    lam = np.linalg.eigvalsh(mat)[..., 0]
    bad = ~(lam > 0)
    if np.any(bad):
        raise SingularGeometryError(f"{what} is not positive-definite", node=np.argwhere(bad)[0])


def _coarea_test_fields(quad):
    pts = quad.points
    fields = [np.ones(quad.shape)]
    for k in range(1, 4):
        s = np.zeros(quad.shape)
        for axis, (lo, hi) in enumerate(quad.box):
            theta = 2 * np.pi * (pts[..., axis] - lo) / (hi - lo)
            s += 0.3 * np.cos(k * theta + 0.7 * axis)
        fields.append(np.exp(s))
    return fields


def coarea_residual(bundle, quad, fields=None):
    """Largest relative gap between both evaluation orders of a manifold integral."""
    if fields is None:
        fields = _coarea_test_fields(quad)
    worst = 0.0
    for f in fields:
        direct = integrate_manifold(f, bundle, quad)
        iterated = integrate_base(leaf_integrals(f / bundle.jac, bundle, quad), bundle, quad)
        worst = max(worst, abs(direct - iterated) / max(abs(direct), abs(iterated), 1e-300))
    return worst


def densities(chart, quad):
    """Evaluate volume, leaf, base densities and the Jacobian on the grid."""
    pts = quad.points
    g = metric_at(chart, pts)
    _min_eig_check(g, "metric")
    b = chart.dim_base
    g_tt = g[..., b:, b:]
    _min_eig_check(g_tt, "leaf metric block")
    h = base_metric_at(chart, quad.base_points)
    _min_eig_check(h, "base metric")
    man = np.sqrt(np.linalg.det(g))
    leaf = np.sqrt(np.linalg.det(g_tt))
    base = np.sqrt(np.linalg.det(h))
    jac = jacobian(chart, pts)
    for name, arr in (("volume density", man), ("leaf density", leaf),
                      ("base density", base), ("Jacobian", jac)):
        bad = ~(np.isfinite(arr) & (arr > 0))
        if np.any(bad):
            raise SingularGeometryError(f"non-positive {name}", node=np.argwhere(bad)[0])
    bundle = DensityBundle(man, leaf, base, jac)
    return dataclasses.replace(bundle, coarea_residual=coarea_residual(bundle, quad))
