import numpy as np
import pytest

from foliamod import verify
from foliamod.errors import PreconditionError


@pytest.mark.parametrize("name", ["torus64", "ring64", "ellipse64", "warped", "skew"])
@pytest.mark.parametrize("p", [1.5, 3.0])
def test_all_checks_pass(name, p, request):
    chart, quad, bundle = request.getfixturevalue(name)
    results = verify.run_suite(verify.Context(chart, quad, bundle, p, n_phi=4))
    assert [r.name for r in results] == list(verify.SUITES)
    failed = [r.line() for r in results if not r.passed]
    assert not failed


def test_harmonic_skipped_without_closed_leaves(ring3d):
    chart, quad, bundle = ring3d
    (res,) = verify.run_suite(verify.Context(chart, quad, bundle, 2.0), "harmonic")
    assert res.skipped and res.passed and "SKIP" in res.line()


def test_unknown_suite(torus64):
    with pytest.raises(PreconditionError):
        verify.run_suite(verify.Context(*torus64, 2.0), "nope")


def test_seeded_fields_reproducible(torus64):
    _, quad, _ = torus64
    a = verify.random_trig_field(quad, np.random.default_rng([3, 1]))
    b = verify.random_trig_field(quad, np.random.default_rng([3, 1]))
    np.testing.assert_array_equal(a, b)


def test_extremality_direction_bounded(torus64):
    chart, quad, bundle = torus64
    ctx = verify.Context(chart, quad, bundle, 2.0)
    phi = verify.extremality_direction(ctx.f0, quad, ctx.rng(0))
    assert np.all(np.abs(phi) <= ctx.f0 * (1 + 1e-15))


def test_failed_check_line():
    r = verify.CheckResult("coarea", 1.0, 1e-8, False)
    assert "FAIL" in r.line()
