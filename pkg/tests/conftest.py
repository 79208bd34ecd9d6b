import numpy as np
import pytest

from foliamod import gallery
from foliamod.geometry import FoliatedChart, densities
from foliamod.quadrature import build_quadrature


def setup_chart(chart, counts):
    quad = build_quadrature(chart, counts)
    return chart, quad, densities(chart, quad)


@pytest.fixture(scope="session")
def torus64():
    return setup_chart(gallery.make_torus(2.0, 1.0), [64, 64])


@pytest.fixture(scope="session")
def ring64():
    return setup_chart(gallery.make_ring(2, 1.0, 2.0), [64, 64])


@pytest.fixture(scope="session")
def ring3d():
    return setup_chart(gallery.make_ring(3, 1.0, 2.0), [12, 12, 16])


@pytest.fixture(scope="session")
def ellipse64():
    return setup_chart(gallery.make_ellipse_tube(2.0, 1.0, 0.1, 0.5), [48, 64])


@pytest.fixture(scope="session")
def warped():
    return setup_chart(gallery.build_example("product", warp_amp=0.4), [24, 32])


def skew_chart():
    """b = 2 base axes, one periodic leaf axis, metric with base/leaf coupling."""

    def metric(u):
        y1, y2, t = u[..., 0], u[..., 1], u[..., 2]
        g = np.zeros(u.shape[:-1] + (3, 3))
        g[..., 0, 0] = 2.0 + 0.3 * np.cos(t)
        g[..., 1, 1] = 1.5 + 0.2 * y1
        g[..., 2, 2] = 1.0 + 0.25 * np.sin(t) ** 2
        g[..., 0, 1] = g[..., 1, 0] = 0.3 + 0.1 * y2
        g[..., 0, 2] = g[..., 2, 0] = 0.2 * np.sin(t)
        g[..., 1, 2] = g[..., 2, 1] = 0.1 * np.cos(t)
        return g

    def base_metric(y):
        h = np.zeros(y.shape[:-1] + (2, 2))
        h[..., 0, 0] = 1.0 + 0.5 * y[..., 0] ** 2
        h[..., 1, 1] = 2.0
        h[..., 0, 1] = h[..., 1, 0] = 0.2
        return h

    return FoliatedChart(3, 2, ((0.0, 1.0), (0.0, 1.0), (0.0, 2 * np.pi)),
                         (False, False, True), metric, base_metric, name="skew")


@pytest.fixture(scope="session")
def skew():
    return setup_chart(skew_chart(), [8, 8, 24])


GALLERY = ["torus64", "ring64", "ring3d", "ellipse64", "warped", "skew"]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
