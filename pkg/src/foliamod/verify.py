"""Verification suites: each check returns a residual, its tolerance and a verdict."""

from dataclasses import dataclass

import numpy as np

from . import analysis, modulus
from .errors import PreconditionError, check_exponent
from .optimizer import solve_global

COAREA_TOL = 1e-8
CROSS_ROUTE_TOL = 1e-6
NORM_TOL_CLOSED = 1e-10
NORM_TOL_OPT = 1e-6
INTFORMULA_TOL = 1e-7
EXTREMALITY_FLOOR = 1e-9
SLOPE_TOL = 0.1
MEANCURV_TOL = 1e-6
HARMONIC_TOL = 1e-7
PROPERTIES_TOL = 1e-10

EXTREMALITY_STEPS = (1e-1, 1e-2, 1e-3)

SUITES = ("coarea", "cross-route", "normalization", "integral-formula",
          "extremality", "mean-curvature", "harmonic", "properties")


@dataclass
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool
    skipped: bool = False
    reason: str = ""

    def line(self):
        if self.skipped:
            return f"{self.name:<18} SKIP  ({self.reason})"
        verdict = "PASS" if self.passed else "FAIL"
        text = f"{self.name:<18} {verdict}  value={self.value:.3e}  tol={self.tol:.1e}"
        return f"{text}  ({self.reason})" if self.reason else text


def random_trig_field(quad, rng, order=2):
    """Trigonometric polynomial of the rescaled chart coordinates.

    Every coordinate is mapped to an angle ``2 pi (u - lo) / L``; the
    coefficients and phases are drawn from ``[-1, 1]``.
    """
    pts = quad.points
    angles = np.stack([2 * np.pi * (pts[..., a] - lo) / (hi - lo)
                       for a, (lo, hi) in enumerate(quad.box)], axis=-1)
    out = np.zeros(quad.shape)
    for k in np.ndindex(*([order + 1] * quad.ndim)):
        coef, phase = rng.uniform(-1.0, 1.0, size=2)
        out += coef * np.cos(angles @ np.array(k, dtype=float) + np.pi * phase)
    return out


def extremality_direction(f0, quad, rng):
    """``f0 * psi`` with ``sup |psi| = 1``: keeps ``f0 +- t phi >= 0`` and ``|hat(phi)| <= 1``."""
    psi = random_trig_field(quad, rng)
    return f0 * psi / np.max(np.abs(psi))


@dataclass
class Context:
    chart: object
    quad: object
    bundle: object
    p: float
    seed: int = 0
    n_phi: int = 10

    def __post_init__(self):
        self.p = check_exponent(self.p)
        self.f0 = modulus.closed_form_extremal(self.bundle, self.quad, self.p)
        self._opt = None

    def rng(self, salt):
        return np.random.default_rng([self.seed, salt])

    @property
    def optimum(self):
        if self._opt is None:
            self._opt = solve_global(self.bundle, self.quad, self.p)
        return self._opt


def check_coarea(ctx):
    r = ctx.bundle.coarea_residual
    return CheckResult("coarea", r, COAREA_TOL, r <= COAREA_TOL)


def check_cross_route(ctx):
    mc = modulus.modulus_base_formula(ctx.bundle, ctx.quad, ctx.p)
    md = modulus.modulus_direct(ctx.f0, ctx.bundle, ctx.quad, ctx.p)
    mo = ctx.optimum.modulus
    err = max(abs(md - mc), abs(mo - mc)) / mc
    return CheckResult("cross-route", err, CROSS_ROUTE_TOL, err <= CROSS_ROUTE_TOL)


def check_normalization(ctx):
    closed = modulus.normalization_residual(ctx.f0, ctx.bundle, ctx.quad)
    opt = modulus.normalization_residual(ctx.optimum.field, ctx.bundle, ctx.quad)
    positive = bool(ctx.f0.min() > 0 and ctx.optimum.field.min() > 0)
    ok = closed <= NORM_TOL_CLOSED and opt <= NORM_TOL_OPT and positive
    reason = f"optimizer residual {opt:.2e} (tol {NORM_TOL_OPT:.0e})"
    if not positive:
        reason += "; non-positive extremal value"
    return CheckResult("normalization", closed, NORM_TOL_CLOSED, ok, reason=reason)


def check_integral_formula(ctx):
    rng = ctx.rng(1)
    worst = max(modulus.integral_formula_residual(ctx.f0, random_trig_field(ctx.quad, rng),
                                                  ctx.bundle, ctx.quad, ctx.p)
                for _ in range(ctx.n_phi))
    return CheckResult("integral-formula", worst, INTFORMULA_TOL, worst <= INTFORMULA_TOL)


def perturbation_slopes(f0, phi, bundle, quad, p, steps=EXTREMALITY_STEPS):
    """Differences for each step and the log-log slopes of the + and - branches."""
    diffs = np.array([modulus.perturbation_extremality(f0, phi, bundle, quad, p, t)
                      for t in steps])
    slopes = []
    for col in diffs.T:
        if np.any(col <= 0):
            slopes.append(np.nan)
        else:
            slopes.append(np.polyfit(np.log(steps), np.log(col), 1)[0])
    return diffs, np.array(slopes)


def check_extremality(ctx, n_phi=5):
    rng = ctx.rng(2)
    norm = modulus.modulus_direct(ctx.f0, ctx.bundle, ctx.quad, ctx.p)
    worst_drop, worst_slope = 0.0, 0.0
    for _ in range(n_phi):
        phi = extremality_direction(ctx.f0, ctx.quad, rng)
        diffs, slopes = perturbation_slopes(ctx.f0, phi, ctx.bundle, ctx.quad, ctx.p)
        worst_drop = max(worst_drop, float(-diffs.min()) / norm)
        dev = np.abs(slopes - 2.0)
        worst_slope = max(worst_slope, np.inf if np.any(np.isnan(dev)) else float(dev.max()))
    ok = worst_drop <= EXTREMALITY_FLOOR and worst_slope <= SLOPE_TOL
    return CheckResult("extremality", worst_slope, SLOPE_TOL, ok,
                       reason=f"largest relative decrease {worst_drop:.2e}")


def check_mean_curvature(ctx):
    H = analysis.mean_curvature_orthogonal(ctx.chart, ctx.quad.points)
    T = analysis.tangential_grad_log(ctx.f0, ctx.chart, ctx.quad, ctx.p)
    d = H.sup_distance(T)
    return CheckResult("mean-curvature", d, MEANCURV_TOL, d <= MEANCURV_TOL)


def check_harmonic(ctx, n_funcs=5):
    try:
        analysis.require_closed_leaves(ctx.quad)
    except PreconditionError as exc:
        return CheckResult("harmonic", np.nan, HARMONIC_TOL, True, skipped=True, reason=str(exc))
    rng = ctx.rng(3)
    worst = max(analysis.harmonic_residual(ctx.f0, random_trig_field(ctx.quad, rng), ctx.chart,
                                           ctx.quad, ctx.bundle, ctx.p)
                for _ in range(n_funcs))
    return CheckResult("harmonic", worst, HARMONIC_TOL, worst <= HARMONIC_TOL)


def check_properties(ctx, n_masks=8):
    full = modulus.modulus_base_formula(ctx.bundle, ctx.quad, ctx.p)
    rng = ctx.rng(4)
    monotone = True
    worst = 0.0
    for _ in range(n_masks):
        mask = rng.random(ctx.quad.base_shape) < 0.5
        sub = modulus.submodulus(ctx.bundle, ctx.quad, ctx.p, mask)
        rest = modulus.submodulus(ctx.bundle, ctx.quad, ctx.p, ~mask)
        monotone &= sub <= full * (1 + 1e-14) and rest <= full * (1 + 1e-14)
        worst = max(worst, abs(sub**ctx.p + rest**ctx.p - full**ctx.p) / full**ctx.p)
    return CheckResult("properties", worst, PROPERTIES_TOL, bool(monotone and worst <= PROPERTIES_TOL),
                       reason="" if monotone else "monotonicity violated")


CHECKS = {
    "coarea": check_coarea,
    "cross-route": check_cross_route,
    "normalization": check_normalization,
    "integral-formula": check_integral_formula,
    "extremality": check_extremality,
    "mean-curvature": check_mean_curvature,
    "harmonic": check_harmonic,
    "properties": check_properties,
}


def run_suite(ctx, suite="all"):
    if suite == "all":
        names = SUITES
    elif suite in CHECKS:
        names = (suite,)
    else:
        raise PreconditionError(f"unknown suite {suite!r}; choose 'all' or one of {SUITES}")
    return [CHECKS[name](ctx) for name in names]
