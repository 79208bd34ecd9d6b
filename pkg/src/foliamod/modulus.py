"""Extremal function and p-modulus of a foliation given by a submersion.

With ``k = J**(1/(p-1))`` the extremal function is ``f0 = k / hat(k)`` and

    mod_p ** p = integral over the base of hat(k) ** (1 - p).

This module evaluates both, the direct norm ``||f0||_p``, and the
numerical checks built on the variational characterization: the integral
formula, the first-variation test with the perturbations
``(f0 +- t phi) / (1 +- t hat(phi))``, and monotonicity/additivity of the
modulus over subfamilies of leaves.
"""

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import PreconditionError, SingularGeometryError, check_exponent
from .quadrature import hat, integrate_base, integrate_manifold, leaf_integrals

PERTURBATION_TOL = 1e-9


def _leaf_power_integrals(bundle, quad, p):
    k = bundle.jac ** (1.0 / (p - 1.0))
    k_hat = leaf_integrals(k, bundle, quad)
    if np.any(~(k_hat > 0)):
        bad = np.argwhere(~(k_hat > 0))[0]
        raise SingularGeometryError("zero leaf integral of J^(1/(p-1))", node=bad)
    return k, k_hat


def closed_form_extremal(bundle, quad, p):
    """Extremal function ``J^(1/(p-1)) / hat(J^(1/(p-1)))`` on the grid."""
    p = check_exponent(p)
    k, k_hat = _leaf_power_integrals(bundle, quad, p)
    expanded = k_hat.reshape(quad.base_shape + (1,) * len(quad.leaf_shape))
    return k / expanded


def modulus_base_formula(bundle, quad, p, base_mask=None):
    """p-modulus as ``(integral over N of hat(J^(1/(p-1)))^(1-p))^(1/p)``."""
    p = check_exponent(p)
    _, k_hat = _leaf_power_integrals(bundle, quad, p)
    integrand = k_hat ** (1.0 - p)
    if base_mask is not None:
        integrand = np.where(base_mask, integrand, 0.0)
    return integrate_base(integrand, bundle, quad) ** (1.0 / p)


def modulus_direct(f0, bundle, quad, p):
    """``||f0||_p`` over the manifold."""
    p = check_exponent(p)
    f0 = quad.check_field(f0, "f0")
    if np.any(f0 < 0):
        raise PreconditionError("f0 must be nonnegative")
    return integrate_manifold(f0**p, bundle, quad) ** (1.0 / p)


def normalization_residual(f, bundle, quad):
    """``max over leaves |integral_L f - 1|``."""
    return float(np.max(np.abs(leaf_integrals(f, bundle, quad) - 1.0)))


def _check_bounded(phi, quad):
    phi = quad.check_field(phi, "phi")
    if not np.all(np.isfinite(phi)):
        raise PreconditionError("test function must be finite on the grid")
    return phi


def integral_formula_residual(f0, phi, bundle, quad, p):
    """Normalized residual of ``int f0^(p-1) phi = int f0^p hat(phi)``."""
    p = check_exponent(p)
    phi = _check_bounded(phi, quad)
    lhs = integrate_manifold(f0 ** (p - 1.0) * phi, bundle, quad)
    rhs = integrate_manifold(f0**p * hat(phi, bundle, quad), bundle, quad)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)


def perturbation_bound(phi, bundle, quad):
    """Largest admissible t: ``1 / (2 sup |hat(phi)|)``."""
    sup = float(np.max(np.abs(leaf_integrals(phi, bundle, quad))))
    return np.inf if sup == 0 else 0.5 / sup


def perturbed(f0, phi, bundle, quad, t, sign):
    phi_hat = hat(phi, bundle, quad)
    return (f0 + sign * t * phi) / (1.0 + sign * t * phi_hat)


def perturbation_extremality(f0, phi, bundle, quad, p, t):
    """Return ``(||f_t^+||_p - ||f0||_p, ||f_t^-||_p - ||f0||_p)``.

    ``f_t^+-`` are normalized perturbations of ``f0`` in direction ``phi``;
    both differences are nonnegative (up to quadrature error) when ``f0`` is
    extremal.
    """
    p = check_exponent(p)
    phi = _check_bounded(phi, quad)
    t = float(t)
    bound = perturbation_bound(phi, bundle, quad)
    if not 0 <= t < bound:
        raise PreconditionError(f"t={t} outside [0, {bound:.6g})")
    if t and (np.any(f0 + t * phi < 0) or np.any(f0 - t * phi < 0)):
        raise PreconditionError(f"f0 +- t phi becomes negative for t={t}")
    base = modulus_direct(f0, bundle, quad, p)
    out = []
    for sign in (1.0, -1.0):
        ft = perturbed(f0, phi, bundle, quad, t, sign)
        out.append(modulus_direct(ft, bundle, quad, p) - base)
    return tuple(out)


def submodulus(bundle, quad, p, base_mask):
    """Modulus of the subfamily of leaves over the masked base nodes (0 if empty)."""
    mask = np.asarray(base_mask, dtype=bool)
    if mask.shape != quad.base_shape:
        raise PreconditionError(f"mask shape {mask.shape} != base grid {quad.base_shape}")
    if not mask.any():
        return 0.0
    return modulus_base_formula(bundle, quad, p, base_mask=mask)


@dataclass
class ModulusReport:
    """Results of the three modulus routes and the checks run on them."""

    p: float
    q: float
    mod_closed: float
    mod_direct: float
    mod_opt: float = float("nan")
    norm_residual: float = float("nan")
    norm_residual_opt: float = float("nan")
    min_f0: float = float("nan")
    opt_field_error: float = float("nan")
    coarea_residual: float = float("nan")
    intformula_residuals: list = field(default_factory=list)
    grid: dict = field(default_factory=dict)
    example: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def cross_route_error(self):
        ref = self.mod_closed
        vals = [self.mod_direct] + ([] if np.isnan(self.mod_opt) else [self.mod_opt])
        return max(abs(v - ref) / abs(ref) for v in vals)

    def to_dict(self, timings=False):
        d = asdict(self)
        if not timings:
            d.pop("timings")
        d["cross_route_error"] = self.cross_route_error
        return d


def compute_report(chart, quad, bundle, p, solver_cfg=None, with_optimizer=True, phis=()):
    """Evaluate all modulus routes for one chart/grid/exponent."""
    from .optimizer import solve_global

    p = check_exponent(p)
    timings = {}
    t0 = time.perf_counter()
    f0 = closed_form_extremal(bundle, quad, p)
    mod_closed = modulus_base_formula(bundle, quad, p)
    mod_direct = modulus_direct(f0, bundle, quad, p)
    timings["closed_form"] = time.perf_counter() - t0
    report = ModulusReport(
        p=p, q=p / (p - 1.0), mod_closed=mod_closed, mod_direct=mod_direct,
        norm_residual=normalization_residual(f0, bundle, quad),
        min_f0=float(f0.min()), coarea_residual=bundle.coarea_residual,
        grid={"rules": list(quad.rules), "counts": list(quad.shape)},
        example={"name": chart.name, "params": {k: v for k, v in chart.params.items()
                                                 if isinstance(v, (int, float, str))}},
    )
    if with_optimizer:
        t0 = time.perf_counter()
        sol = solve_global(bundle, quad, p, solver_cfg)
        timings["optimizer"] = time.perf_counter() - t0
        report.mod_opt = sol.modulus
        report.norm_residual_opt = normalization_residual(sol.field, bundle, quad)
        report.opt_field_error = float(np.max(np.abs(sol.field - f0) / f0))
    report.intformula_residuals = [
        integral_formula_residual(f0, phi, bundle, quad, p) for phi in phis
    ]
    report.timings = timings
    return report
