"""Tensor-product quadrature over a chart box.

Axes are ordered base-first: the first ``dim_base`` grid axes carry the base
(submersion target) coordinates, the remaining ones the leaf coordinates.
Sampled functions ("scalar fields") are plain numpy arrays whose shape is
``Quadrature.shape``.

All reductions contract one axis at a time, last axis first, with
``numpy.sum`` over a contiguous axis (pairwise summation), so results do not
depend on thread count or call site.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import PreconditionError

UNIFORM_PERIODIC = "uniform-periodic"
GAUSS_LEGENDRE = "gauss-legendre"

MIN_NODES = 4


def uniform_periodic_rule(lo, hi, m):
    """Equispaced nodes ``lo + j L / m`` with equal weights ``L / m``."""
    length = hi - lo
    nodes = lo + length * np.arange(m) / m
    weights = np.full(m, length / m)
    return nodes, weights


def gauss_legendre_rule(lo, hi, m):
    """Gauss-Legendre rule affinely mapped to ``[lo, hi]``. Nodes are interior."""
    x, w = np.polynomial.legendre.leggauss(m)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Per-axis nodes and weights of a product grid.

    Attributes
    ----------
    rules : tuple of str
        ``"uniform-periodic"`` or ``"gauss-legendre"`` for each axis.
    nodes, weights : tuple of ndarray
        One 1-D array per axis.
    dim_base : int
        Number of leading (base) axes.
    box : tuple of (float, float)
    """

    rules: tuple
    nodes: tuple
    weights: tuple
    dim_base: int
    box: tuple

    def __post_init__(self):
        if not (len(self.rules) == len(self.nodes) == len(self.weights) == len(self.box)):
            raise PreconditionError("per-axis data have inconsistent lengths")
        for arr in (*self.nodes, *self.weights):
            arr.flags.writeable = False

    @property
    def ndim(self):
        return len(self.nodes)

    @property
    def shape(self):
        return tuple(len(x) for x in self.nodes)

    @property
    def base_shape(self):
        return self.shape[: self.dim_base]

    @property
    def leaf_shape(self):
        return self.shape[self.dim_base:]

    @property
    def base_axes(self):
        return tuple(range(self.dim_base))

    @property
    def leaf_axes(self):
        return tuple(range(self.dim_base, self.ndim))

    def axis_length(self, axis):
        lo, hi = self.box[axis]
        return hi - lo

    @cached_property
    def points(self):
        """Coordinates of every node, shape ``shape + (ndim,)``."""
        grids = np.meshgrid(*self.nodes, indexing="ij")
        pts = np.stack(grids, axis=-1)
        pts.flags.writeable = False
        return pts

    @cached_property
    def base_points(self):
        grids = np.meshgrid(*self.nodes[: self.dim_base], indexing="ij")
        pts = np.stack(grids, axis=-1)
        pts.flags.writeable = False
        return pts

    def sample(self, func):
        """Evaluate a vectorized ``func(points) -> values`` on the full grid."""
        values = np.asarray(func(self.points), dtype=float)
        return np.broadcast_to(values, self.shape).copy()

    def check_field(self, f, name="field"):
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            raise PreconditionError(f"{name} has shape {f.shape}, grid is {self.shape}")
        return f

    def check_base(self, values, name="base values"):
        values = np.asarray(values, dtype=float)
        if values.shape != self.base_shape:
            raise PreconditionError(
                f"{name} has shape {values.shape}, base grid is {self.base_shape}"
            )
        return values


def build_quadrature(chart, counts):
    """Build the product rule for ``chart``.

    Periodic axes get the uniform (trapezoidal) rule, all others
    Gauss-Legendre. ``counts`` is an int or one int per axis.
    """
    n = len(chart.box)
    if np.isscalar(counts):
        counts = [int(counts)] * n
    counts = [int(c) for c in counts]
    if len(counts) != n:
        raise PreconditionError(f"need {n} node counts, got {len(counts)}")
    if min(counts) < MIN_NODES:
        raise PreconditionError(f"node counts must be >= {MIN_NODES}, got {counts}")
    rules, nodes, weights = [], [], []
    for (lo, hi), periodic, m in zip(chart.box, chart.periodic, counts):
        if periodic:
            x, w = uniform_periodic_rule(lo, hi, m)
            rules.append(UNIFORM_PERIODIC)
        else:
            x, w = gauss_legendre_rule(lo, hi, m)
            rules.append(GAUSS_LEGENDRE)
        nodes.append(x)
        weights.append(w)
    return Quadrature(
        rules=tuple(rules),
        nodes=tuple(nodes),
        weights=tuple(weights),
        dim_base=chart.dim_base,
        box=tuple(tuple(map(float, b)) for b in chart.box),
    )


def default_counts(chart):
    """64 nodes per periodic axis, 48 per non-periodic axis."""
    return [64 if per else 48 for per in chart.periodic]


def _contract(values, weights):
    """Contract the trailing ``len(weights)`` axes against 1-D weights."""
    out = values
    for w in reversed(weights):
        out = np.sum(out * w, axis=-1)
    return out


def integrate_manifold(f, bundle, quad):
    """Integral of a sampled field against the Riemannian volume of M."""
    f = quad.check_field(f)
    return float(_contract(f * bundle.man_density, quad.weights))


def leaf_integrals(f, bundle, quad):
    """Leaf integral of ``f`` for every base node, shape ``quad.base_shape``."""
    f = quad.check_field(f)
    return _contract(f * bundle.leaf_density, quad.weights[quad.dim_base:])


def integrate_leaf(f, leaf, bundle, quad):
    """Integral of ``f`` over the single leaf at base multi-index ``leaf``."""
    f = quad.check_field(f)
    leaf = tuple(int(i) for i in np.atleast_1d(leaf))
    if len(leaf) != quad.dim_base or any(
        not 0 <= i < m for i, m in zip(leaf, quad.base_shape)
    ):
        raise PreconditionError(f"leaf index {leaf} out of range for base grid {quad.base_shape}")
    vals = f[leaf] * bundle.leaf_density[leaf]
    return float(_contract(vals, quad.weights[quad.dim_base:]))


def lift(base_values, quad):
    """Extend base-indexed values to the full grid, constant along leaves."""
    base_values = quad.check_base(base_values)
    expanded = base_values.reshape(quad.base_shape + (1,) * len(quad.leaf_shape))
    return np.broadcast_to(expanded, quad.shape).copy()


def hat(f, bundle, quad):
    """The leaf-integral operator: ``hat(f)(x)`` is the integral of f over the leaf through x."""
    return lift(leaf_integrals(f, bundle, quad), quad)


def integrate_base(values, bundle, quad):
    """Integral over the base N of one value per base node."""
    values = quad.check_base(values)
    return float(_contract(values * bundle.base_density, quad.weights[: quad.dim_base]))
