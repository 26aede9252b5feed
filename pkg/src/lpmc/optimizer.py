"""Gradient descent with halving line search.

Each iteration takes the step max(2^-k, min_step) where k is the smallest
t >= 0 with f(theta - 2^-t grad) <= f(theta). With min_step = 1e-10 the
distinct candidates are t = 0..33 (2^-34 < 1e-10); if none of them gives
non-increase the clamp step min_step is taken unconditionally, which may
increase the objective.
"""

import time
from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .objective import objective_grad, objective_value
from .parameterization import x_of, y_of
from .sampling import RngState


@dataclass(frozen=True)
class SolveConfig:
    seed: object = 0          # RngState or plain int
    max_iters: int = 500
    grad_tol_sq: float = 1e-10
    min_step: float = 1e-10
    init_scale: float = 1.0

    def __post_init__(self):
        if self.max_iters < 1 or self.grad_tol_sq <= 0 or self.min_step <= 0:
            raise ValueError("bad solver configuration")


@dataclass(frozen=True)
class SolveResult:
    theta_hat: np.ndarray
    m_hat: np.ndarray
    objective_trace: np.ndarray
    grad_norm_sq_final: float
    iterations: int
    termination: str          # "grad-tol" or "iter-cap"
    clamped_steps: int
    wall_time: float


def halving_line_search(spec, theta, grad, value=None, min_step=1e-10):
    """Pick the step for one descent iteration.

    Returns (step, new_theta, new_value, clamped). value is f(theta) and is
    recomputed when not supplied.
    """
    if value is None:
        value = objective_value(spec, theta)
    t = 0
    step = 1.0
    while step > min_step:
        cand = theta - step * grad
        f_cand = objective_value(spec, cand)
        if f_cand <= value:
            return step, cand, f_cand, False
        t += 1
        step = 2.0 ** -t
    cand = theta - min_step * grad
    return min_step, cand, objective_value(spec, cand), True


def solve(spec, config):
    """Run gradient descent on the theta-level objective.

    Stops when ||grad||^2 <= grad_tol_sq or after max_iters gradient steps.
    Raises NumericError (trace attached) if the objective turns non-finite.
    """
    if isinstance(config.seed, RngState):
        rng = config.seed
    else:
        rng = RngState(int(config.seed))
    gen = rng.generator()
    theta = config.init_scale * gen.standard_normal(spec.param.d)

    started = time.perf_counter()
    value = objective_value(spec, theta)
    if not np.isfinite(value):
        raise NumericError("non-finite objective at the initial point",
                           best_estimate=[value])
    trace = [value]
    clamped = 0
    termination = "iter-cap"
    iterations = 0
    grad_sq = None
    for _ in range(config.max_iters):
        grad = objective_grad(spec, theta)
        grad_sq = float(grad @ grad)
        if grad_sq <= config.grad_tol_sq:
            termination = "grad-tol"
            break
        step, theta, value, was_clamped = halving_line_search(
            spec, theta, grad, value, config.min_step)
        if not np.isfinite(value):
            raise NumericError("objective became non-finite",
                               best_estimate=trace + [value])
        clamped += was_clamped
        iterations += 1
        trace.append(value)
    if grad_sq is None or termination == "iter-cap":
        grad = objective_grad(spec, theta)
        grad_sq = float(grad @ grad)
        if grad_sq <= config.grad_tol_sq:
            termination = "grad-tol"

    m_hat = x_of(spec.param, theta) @ y_of(spec.param, theta).T
    return SolveResult(
        theta_hat=theta, m_hat=m_hat,
        objective_trace=np.asarray(trace),
        grad_norm_sq_final=grad_sq, iterations=iterations,
        termination=termination, clamped_steps=clamped,
        wall_time=time.perf_counter() - started)
