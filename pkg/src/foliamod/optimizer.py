"""Direct minimization of the discretized modulus problem.

The discrete problem is

    minimize   sum_nodes f^p * volume weight
    subject to f >= 0 and  (leaf integral of f) = 1  on every grid leaf.

By the coarea factorization the volume weight of a node equals
``base weight * leaf weight / J``, so the problem splits into one small
convex problem per leaf. Each is solved by scaled gradient projection
(see :mod:`foliamod.kernels`) without any knowledge of the closed form.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NonConvergenceError, PreconditionError, check_exponent
from .quadrature import integrate_base

THREADS_ENV = "FOLIAMOD_THREADS"


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 10000
    objective_tol: float = 1e-12
    gradient_tol: float = 1e-10
    initial_step: float = 1.0
    feasibility_tol: float = 1e-14

    def __post_init__(self):
        if self.max_iters < 1:
            raise PreconditionError("max_iters must be positive")
        for name in ("objective_tol", "gradient_tol", "initial_step", "feasibility_tol"):
            if not getattr(self, name) > 0:
                raise PreconditionError(f"{name} must be positive")


@dataclass(frozen=True, eq=False)
class LeafProblem:
    """``min sum(v * f**p)`` subject to ``sum(w * f) = 1``, ``f >= 0``."""

    v: np.ndarray
    w: np.ndarray
    p: float

    def __post_init__(self):
        v = np.ascontiguousarray(self.v, dtype=float).ravel()
        w = np.ascontiguousarray(self.w, dtype=float).ravel()
        if v.shape != w.shape or v.size == 0:
            raise PreconditionError("v and w must be nonempty and of equal length")
        if np.any(~(v > 0)) or np.any(~(w > 0)):
            raise PreconditionError("leaf weights must be strictly positive")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "p", check_exponent(self.p))

    def objective(self, f):
        return float(np.sum(self.v * np.asarray(f, dtype=float) ** self.p))


@dataclass(frozen=True, eq=False)
class LeafSolution:
    f: np.ndarray
    objective: float
    iterations: int
    history: np.ndarray


def solve_leaf(prob, cfg=None):
    """Minimize one leaf problem from the uniform feasible start ``f = 1 / sum(w)``.

    The iteration runs in the variables ``x = w * f``, for which the
    constraint set is the unit simplex.
    """
    cfg = cfg or SolverConfig()
    p = prob.p
    c = prob.v / prob.w**p
    x0 = prob.w / prob.w.sum()
    x, iters, status, history = kernels.solve_simplex(
        c, x0, p, cfg.max_iters, cfg.objective_tol, cfg.gradient_tol
    )
    if status != 0:
        gap = float(history[-2] - history[-1]) / abs(history[-1]) if len(history) > 1 else np.nan
        raise NonConvergenceError(
            f"leaf solve did not converge in {cfg.max_iters} iterations", gap=gap
        )
    total = x.sum()
    if abs(total - 1.0) > cfg.feasibility_tol * x.size:
        x = x / total
    f = x / prob.w
    # history is in x-variables, which has the same objective value
    return LeafSolution(f=f, objective=prob.objective(f), iterations=iters, history=history)


def kkt_closed_leaf(prob):
    """Stationary point ``f_i = c (w_i / v_i)^(1/(p-1))`` normalized to ``sum(w f) = 1``."""
    f = (prob.w / prob.v) ** (1.0 / (prob.p - 1.0))
    return f / np.sum(prob.w * f)


def multiplier_estimate(prob, f):
    """Per-node Lagrange multiplier ``p v f^(p-1) / w``; constant at the optimum."""
    return prob.p * prob.v * np.asarray(f, dtype=float) ** (prob.p - 1.0) / prob.w


def leaf_problem(bundle, quad, p, leaf):
    """Discrete problem on the leaf over base multi-index ``leaf``."""
    leaf = tuple(leaf)
    wt = np.ones(quad.leaf_shape)
    for i, w in enumerate(quad.weights[quad.dim_base:]):
        shape = [1] * len(quad.leaf_shape)
        shape[i] = len(w)
        wt = wt * w.reshape(shape)
    w = wt * bundle.leaf_density[leaf]
    v = w / bundle.jac[leaf]
    return LeafProblem(v=v, w=w, p=p)


@dataclass(frozen=True, eq=False)
class GlobalSolution:
    field: np.ndarray
    objective: float
    modulus: float
    iterations: np.ndarray


def _thread_count(threads):
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(threads))


def solve_global(bundle, quad, p, cfg=None, threads=None):
    """Solve every leaf problem and assemble the extremal field and modulus."""
    p = check_exponent(p)
    cfg = cfg or SolverConfig()
    leaves = list(np.ndindex(*quad.base_shape))

    def run(leaf):
        prob = leaf_problem(bundle, quad, p, leaf)
        try:
            return solve_leaf(prob, cfg)
        except NonConvergenceError as exc:
            raise NonConvergenceError(f"{exc} (leaf {leaf})", gap=exc.gap, leaf=leaf) from exc

    nthreads = _thread_count(threads)
    if nthreads > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            solutions = list(pool.map(run, leaves))
    else:
        solutions = [run(leaf) for leaf in leaves]

    field = np.empty(quad.shape)
    leaf_obj = np.empty(quad.base_shape)
    iters = np.empty(quad.base_shape, dtype=int)
    for leaf, sol in zip(leaves, solutions):
        field[leaf] = sol.f.reshape(quad.leaf_shape)
        leaf_obj[leaf] = sol.objective
        iters[leaf] = sol.iterations
    objective = integrate_base(leaf_obj, bundle, quad)
    return GlobalSolution(field=field, objective=objective,
                          modulus=objective ** (1.0 / p), iterations=iters)
