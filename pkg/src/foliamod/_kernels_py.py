"""Pure-Python (numpy) twin of the compiled ``_kernels`` extension.

Same algorithm, same signatures; selected by :mod:`foliamod.kernels` when
the extension is unavailable or ``FOLIAMOD_PURE_PYTHON=1``.
"""

import numpy as np

ARMIJO = 1e-4
TINY = 1e-300
SCALE_FLOOR = 1e-3
MAX_HALVINGS = 60


def project_simplex(z, scale=None):
    """Projection onto the unit simplex in the norm ``sum((x - z)**2 / scale)``.

    With ``scale=None`` this is the Euclidean projection.
    """
    z = np.asarray(z, dtype=float)
    D = np.ones_like(z) if scale is None else np.asarray(scale, dtype=float)
    if D.shape != z.shape:
        raise ValueError("scale must match z")
    order = np.argsort(-(z / D), kind="stable")
    keys = (z / D)[order]
    cand = (np.cumsum(z[order]) - 1.0) / np.cumsum(D[order])
    valid = np.nonzero(keys > cand)[0]
    theta = cand[valid[-1]] if valid.size else 0.0
    return np.maximum(z - theta * D, 0.0)


def _objective(c, x, p):
    return float(np.sum(c * np.where(x > 0.0, x, 0.0) ** p))


def _scaled_gradient(c, x, p):
    g = p * c * np.maximum(x, TINY) ** (p - 1.0)
    # a component clipped to zero would never move again without a floor
    xs = np.where(x > 0.0, x, SCALE_FLOOR * np.mean(x))
    return g, xs ** (2.0 - p) / (p * (p - 1.0) * c)


def solve_simplex(c, x0, p, max_iters, ftol, gtol):
    """Diagonally scaled gradient projection with Armijo halving from step 1.

    Returns ``(x, iterations, status, history)``; status 0 means converged.
    """
    c = np.asarray(c, dtype=float)
    x = np.array(x0, dtype=float, copy=True)
    F = _objective(c, x, p)
    history = [F]
    it = 0
    status = 1
    while True:
        g, D = _scaled_gradient(c, x, p)
        d = project_simplex(x - D * g, D) - x
        if np.max(np.abs(d)) <= gtol * np.max(x):
            status = 0
            break
        if it >= max_iters:
            break
        gd = float(g @ d)
        lam = 1.0
        for _ in range(MAX_HALVINGS):
            xt = np.maximum(x + lam * d, 0.0)
            Ft = _objective(c, xt, p)
            if Ft <= F + ARMIJO * lam * gd:
                break
            lam *= 0.5
        if not Ft <= F:
            status = 0
            break
        it += 1
        history.append(Ft)
        x = xt
        if F - Ft <= ftol * abs(Ft):
            status = 0
            break
        F = Ft
    return x, it, status, np.array(history)
