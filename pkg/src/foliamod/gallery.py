"""Built-in foliated charts with known extremal functions.

===============  =================================  ===========================
name             leaves                             extremal function
===============  =================================  ===========================
``ring``         spheres ``|x| = r`` in a shell     ``C r^(1-n)``
``torus``        meridian circles of a torus        ``C (R + r cos a)^(-1/(p-1))``
``ellipse-tube`` offset curves of an ellipse        ``1 / (L0 + 2 pi t)``
``product``      flat slices of a box               ``1 / leaf volume`` (unwarped)
===============  =================================  ===========================
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import PreconditionError, SingularGeometryError, check_exponent
from .geometry import FoliatedChart

TWO_PI = 2.0 * np.pi


def _diag(*entries):
    entries = np.broadcast_arrays(*[np.asarray(e, dtype=float) for e in entries])
    n = len(entries)
    out = np.zeros(entries[0].shape + (n, n))
    for i, e in enumerate(entries):
        out[..., i, i] = e
    return out


def _unit_base(dim):
    def h(y):
        y = np.asarray(y, dtype=float)
        return np.broadcast_to(np.eye(dim), y.shape[:-1] + (dim, dim)).copy()
    return h


def make_ring(n, r1, r2):
    """Spherical shell ``r1 < |x| < r2`` in R^n (n = 2 or 3) foliated by spheres."""
    n = int(n)
    if n not in (2, 3):
        raise PreconditionError(f"ring is available for n = 2 or 3, got {n}")
    if not 0 < r1 < r2:
        raise PreconditionError(f"ring needs 0 < r1 < r2, got r1={r1}, r2={r2}")
    if n == 2:
        def metric(u):
            r = u[..., 0]
            return _diag(np.ones_like(r), r**2)
        box = ((r1, r2), (0.0, TWO_PI))
        periodic = (False, True)
        names = ("r", "theta")
    else:
        def metric(u):
            r, th = u[..., 0], u[..., 1]
            return _diag(np.ones_like(r), r**2, (r * np.sin(th)) ** 2)
        # polar angle is Gauss-Legendre: its nodes never touch the poles
        box = ((r1, r2), (0.0, np.pi), (0.0, TWO_PI))
        periodic = (False, False, True)
        names = ("r", "theta", "phi")
    return FoliatedChart(n, 1, box, periodic, metric, _unit_base(1), name="ring",
                         axis_names=names, params={"n": n, "r1": r1, "r2": r2})


def make_torus(R, r):
    """Torus of revolution in R^3 in coordinates (beta, alpha), leaves ``beta = const``."""
    if not 0 < r < R:
        raise PreconditionError(f"torus needs 0 < r < R (self-intersecting otherwise), got R={R}, r={r}")

    def metric(u):
        a = u[..., 1]
        return _diag((R + r * np.cos(a)) ** 2, np.full_like(a, r * r))

    return FoliatedChart(2, 1, ((0.0, TWO_PI), (0.0, TWO_PI)), (True, True), metric,
                         _unit_base(1), name="torus", axis_names=("beta", "alpha"),
                         params={"R": R, "r": r})


def ellipse_speed(a, b, s):
    return np.sqrt((a * np.sin(s)) ** 2 + (b * np.cos(s)) ** 2)


def ellipse_curvature(a, b, s):
    return a * b / ellipse_speed(a, b, s) ** 3


def ellipse_perimeter(a, b):
    """Exact perimeter ``4 a E(1 - b^2/a^2)`` for ``a >= b``."""
    return 4.0 * a * special.ellipe(1.0 - (b / a) ** 2)


def make_ellipse_tube(a, b, t_min, t_max, side="outward"):
    """Tube of offset curves at distance ``t`` from the ellipse with semi-axes a >= b.

    Coordinates are (t, s): distance and ellipse parameter. The metric is
    ``dt^2 + (1 +- t kappa(s))^2 |gamma'(s)|^2 ds^2``, so the distance function
    has unit gradient and the Jacobian is 1.
    """
    if not a >= b > 0:
        raise PreconditionError(f"ellipse needs a >= b > 0, got a={a}, b={b}")
    if not 0 < t_min < t_max:
        raise PreconditionError(f"tube needs 0 < t_min < t_max, got {t_min}, {t_max}")
    if side not in ("outward", "inward"):
        raise PreconditionError(f"side must be 'outward' or 'inward', got {side!r}")
    sign = 1.0 if side == "outward" else -1.0
    if side == "inward":
        focal = b * b / a
        if t_max >= focal:
            raise SingularGeometryError(
                f"t_max={t_max} reaches the focal distance {focal:.6g}; offset leaves degenerate"
            )

    def metric(u):
        t, s = u[..., 0], u[..., 1]
        stretch = (1.0 + sign * t * ellipse_curvature(a, b, s)) * ellipse_speed(a, b, s)
        return _diag(np.ones_like(t), stretch**2)

    return FoliatedChart(2, 1, ((t_min, t_max), (0.0, TWO_PI)), (False, True), metric,
                         _unit_base(1), name="ellipse-tube", axis_names=("t", "s"),
                         params={"a": a, "b": b, "t_min": t_min, "t_max": t_max, "side": side})


def make_product(base_box, leaf_box, warp=None, leaf_periodic=True):
    """Flat box ``base_box x leaf_box``.

    With ``warp`` (a positive vectorized function of the leaf coordinates)
    the base block of the metric becomes ``warp(t)^2 I``, so the Jacobian
    ``1 / warp(t)`` varies along the leaves.
    """
    base_box = tuple(tuple(map(float, iv)) for iv in base_box)
    leaf_box = tuple(tuple(map(float, iv)) for iv in leaf_box)
    b, k = len(base_box), len(leaf_box)
    n = b + k

    def metric(u):
        u = np.asarray(u, dtype=float)
        g = np.broadcast_to(np.eye(n), u.shape[:-1] + (n, n)).copy()
        if warp is not None:
            w2 = np.asarray(warp(u[..., b:]), dtype=float) ** 2
            for i in range(b):
                g[..., i, i] = w2
        return g

    periodic = (False,) * b + (bool(leaf_periodic),) * k
    return FoliatedChart(n, b, base_box + leaf_box, periodic, metric, _unit_base(b),
                         name="product",
                         params={"base_box": base_box, "leaf_box": leaf_box,
                                 "warped": warp is not None})


# -- closed forms used by tests, the CLI and the verification suites ---------

def _box_volume(box):
    return float(np.prod([hi - lo for lo, hi in box]))


def expected_f0(chart, p):
    """Vectorized closed-form extremal function of a gallery chart, or None."""
    p = check_exponent(p)
    prm = chart.params
    if chart.name == "ring":
        n = prm["n"]
        omega = TWO_PI if n == 2 else 4.0 * np.pi
        return lambda u: u[..., 0] ** (1 - n) / omega
    if chart.name == "torus":
        R, r = prm["R"], prm["r"]
        e = -1.0 / (p - 1.0)
        norm, _ = integrate.quad(lambda a: (R + r * np.cos(a)) ** e * r, 0.0, TWO_PI,
                                 epsabs=0.0, epsrel=1e-13, limit=200)
        return lambda u: (R + r * np.cos(u[..., 1])) ** e / norm
    if chart.name == "ellipse-tube":
        L0 = ellipse_perimeter(prm["a"], prm["b"])
        sign = 1.0 if prm["side"] == "outward" else -1.0
        return lambda u: 1.0 / (L0 + sign * TWO_PI * u[..., 0])
    if chart.name == "product" and not prm["warped"]:
        vol = _box_volume(prm["leaf_box"])
        return lambda u: np.full(u.shape[:-1], 1.0 / vol)
    return None


def expected_modulus(chart, p):
    """Closed-form (or 1-D quadrature) p-modulus of a gallery chart, or None."""
    p = check_exponent(p)
    prm = chart.params
    if chart.name == "ring":
        n, r1, r2 = prm["n"], prm["r1"], prm["r2"]
        omega = TWO_PI if n == 2 else 4.0 * np.pi
        e = (n - 1) * (1.0 - p)
        radial = np.log(r2 / r1) if abs(e + 1.0) < 1e-14 else (r2 ** (e + 1) - r1 ** (e + 1)) / (e + 1)
        return (omega ** (1.0 - p) * radial) ** (1.0 / p)
    if chart.name == "torus":
        R, r = prm["R"], prm["r"]
        if p == 2.0:
            return (R * R - r * r) ** 0.25 / np.sqrt(r)
        e = 1.0 / (p - 1.0)
        leaf, _ = integrate.quad(lambda a: (R + r * np.cos(a)) ** (-e) * r, 0.0, TWO_PI,
                                 epsabs=0.0, epsrel=1e-13, limit=200)
        return (TWO_PI * leaf ** (1.0 - p)) ** (1.0 / p)
    if chart.name == "ellipse-tube":
        L0 = ellipse_perimeter(prm["a"], prm["b"])
        sign = 1.0 if prm["side"] == "outward" else -1.0
        val, _ = integrate.quad(lambda t: (L0 + sign * TWO_PI * t) ** (1.0 - p),
                                prm["t_min"], prm["t_max"], epsabs=0.0, epsrel=1e-13)
        return val ** (1.0 / p)
    if chart.name == "product" and not prm["warped"]:
        return (_box_volume(prm["base_box"]) / _box_volume(prm["leaf_box"]) ** (p - 1.0)) ** (1.0 / p)
    return None


# -- registry ----------------------------------------------------------------

@dataclass(frozen=True)
class ParamSpec:
    name: str
    default: object
    description: str
    kind: type = float


@dataclass(frozen=True)
class ExampleDescriptor:
    name: str
    description: str
    params: tuple
    validity: str
    factory: object = field(repr=False)

    def build(self, **overrides):
        known = {ps.name: ps for ps in self.params}
        unknown = set(overrides) - set(known)
        if unknown:
            raise PreconditionError(f"unknown parameter(s) for {self.name}: {sorted(unknown)}")
        kwargs = {}
        for ps in self.params:
            value = overrides.get(ps.name, ps.default)
            try:
                kwargs[ps.name] = ps.kind(value)
            except (TypeError, ValueError) as exc:
                raise PreconditionError(f"bad value for {ps.name}: {value!r}") from exc
        return self.factory(**kwargs)


def _product_factory(base_len, leaf_len, warp_amp):
    if not abs(warp_amp) < 1:
        raise PreconditionError(f"warp_amp must satisfy |warp_amp| < 1, got {warp_amp}")
    if not (base_len > 0 and leaf_len > 0):
        raise PreconditionError("base_len and leaf_len must be positive")
    if not warp_amp:
        return make_product([(0.0, base_len)], [(0.0, leaf_len)])

    def warp(t):
        return 1.0 + warp_amp * np.sin(TWO_PI * t[..., 0] / leaf_len)

    return make_product([(0.0, base_len)], [(0.0, leaf_len)], warp=warp)


EXAMPLES = {
    "ring": ExampleDescriptor(
        "ring", "spherical shell in R^n foliated by concentric spheres",
        (ParamSpec("n", 2, "ambient dimension (2 or 3)", int),
         ParamSpec("r1", 1.0, "inner radius"),
         ParamSpec("r2", 2.0, "outer radius")),
        "n in {2, 3}; 0 < r1 < r2", make_ring),
    "torus": ExampleDescriptor(
        "torus", "torus of revolution foliated by meridian circles",
        (ParamSpec("R", 2.0, "distance from axis to tube centre"),
         ParamSpec("r", 1.0, "tube radius")),
        "0 < r < R", make_torus),
    "ellipse-tube": ExampleDescriptor(
        "ellipse-tube", "level sets of the distance to an ellipse",
        (ParamSpec("a", 2.0, "major semi-axis"),
         ParamSpec("b", 1.0, "minor semi-axis"),
         ParamSpec("t_min", 0.1, "smallest distance"),
         ParamSpec("t_max", 0.5, "largest distance"),
         ParamSpec("side", "outward", "outward or inward", str)),
        "a >= b > 0; 0 < t_min < t_max; inward needs t_max < b^2/a", make_ellipse_tube),
    "product": ExampleDescriptor(
        "product", "flat rectangle [0, base_len] x circle of length leaf_len",
        (ParamSpec("base_len", 1.0, "base interval length"),
         ParamSpec("leaf_len", 1.0, "leaf circle length"),
         ParamSpec("warp_amp", 0.0, "amplitude of the along-leaf warp (|amp| < 1)")),
        "base_len > 0; leaf_len > 0; |warp_amp| < 1", _product_factory),
}


def get_example(name):
    try:
        return EXAMPLES[name]
    except KeyError:
        raise PreconditionError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}") from None


def build_example(name, **params):
    return get_example(name).build(**params)
