"""Regularized completion objective and its derivatives.

On factors X (n1 x r) and Y (n2 x r) the objective is

    f(X, Y) = 1/(2 p_hat) ||P(X Y^T - M)||_F^2
            + 1/8 ||X^T X - Y^T Y||_F^2
            + lam * (G(X) + G(Y))

where P zeroes unobserved entries, M is the observed matrix, p_hat the
observed fraction, and G the row hinge penalty

    G(X) = sum_i max(||x_i|| - alpha, 0)^4.

The theta-level objective composes f with a LinearParam's factor maps. The
factor-level value/gradient/curvature live here so landscape diagnostics can
use the same closed forms; everything is exact, including the penalty terms
(G is C^2, its Hessian is continuous across the hinge).
"""

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix
from .parameterization import adjoint_x, adjoint_y, theta_blocks, x_of, y_of
from .sampling import ObservationMask, observed_fraction, project_observed


def default_tuning(n1, n2, p_hat):
    """Standard tuning: lam = 100 sqrt((n1 + n2) p_hat), alpha = 100."""
    return float(100.0 * np.sqrt((n1 + n2) * p_hat)), 100.0


@dataclass(frozen=True)
class ObjectiveSpec:
    """Frozen problem instance: parameterization, observations, tuning."""

    param: object
    observed: np.ndarray
    mask: ObservationMask
    p_hat: float
    lam: float
    alpha: float

    def __post_init__(self):
        obs = as_matrix(self.observed, "observed")
        obs = np.ascontiguousarray(obs)
        obs.setflags(write=False)
        object.__setattr__(self, "observed", obs)
        if obs.shape != (self.param.n1, self.param.n2):
            raise ValueError("observed shape does not match parameterization")
        if obs.shape != self.mask.matrix.shape:
            raise ValueError("observed shape does not match mask")
        if np.any(obs[~self.mask.matrix] != 0.0):
            raise ValueError("observed has support off the mask")
        if not 0.0 < self.p_hat <= 1.0:
            raise ValueError(f"p_hat must be in (0, 1], got {self.p_hat}")
        if self.lam < 0.0:
            raise ValueError("lam must be nonnegative")
        # alpha = 0 gives the pure fourth-power row penalty, alpha = inf
        # disables it; both are legitimate
        if np.isnan(self.alpha) or self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")


def make_spec(param, mask, observed, lam=None, alpha=None):
    """Assemble an ObjectiveSpec, filling tuning from the standard rule."""
    p_hat = observed_fraction(mask)
    if p_hat == 0.0:
        raise ValueError("empty mask")
    lam_d, alpha_d = default_tuning(param.n1, param.n2, p_hat)
    return ObjectiveSpec(param, project_observed(observed, mask), mask, p_hat,
                         lam_d if lam is None else float(lam),
                         alpha_d if alpha is None else float(alpha))


def row_hinge_penalty(x, alpha):
    """G(x) = sum_i max(||x_i|| - alpha, 0)^4."""
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    excess = norms - alpha
    excess = excess[excess > 0.0]
    return float(np.sum(excess ** 4))


def row_hinge_penalty_grad(x, alpha):
    """Row i of the gradient: 4 max(||x_i|| - alpha, 0)^3 x_i / ||x_i||."""
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    act = norms > alpha
    coef = np.zeros(x.shape[0])
    coef[act] = 4.0 * (norms[act] - alpha) ** 3 / norms[act]
    return x * coef[:, None]


def row_hinge_penalty_curvature(x, dx, alpha):
    """Hessian quadratic form of G at x along dx (exact; G is C^2)."""
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    act = norms > alpha
    if not np.any(act):
        return 0.0
    xa, da, na = x[act], dx[act], norms[act]
    s = na - alpha
    cross = np.einsum("ij,ij->i", xa, da)
    dsq = np.einsum("ij,ij->i", da, da)
    radial = cross ** 2 / na ** 2
    return float(np.sum(12.0 * s ** 2 * radial + 4.0 * s ** 3 * (dsq - radial) / na))


def _mask_mult(spec, a):
    return a * spec.mask.matrix


def factor_value(x, y, spec):
    """f(X, Y) at explicit factors."""
    resid = _mask_mult(spec, x @ y.T - spec.observed)
    fit = 0.5 / spec.p_hat * float(np.vdot(resid, resid))
    b = x.T @ x - y.T @ y
    bal = 0.125 * float(np.vdot(b, b))
    reg = 0.0
    if spec.lam:
        reg = spec.lam * (row_hinge_penalty(x, spec.alpha)
                          + row_hinge_penalty(y, spec.alpha))
    return fit + bal + reg


def factor_grad(x, y, spec):
    """Gradients of f with respect to X and Y."""
    resid = _mask_mult(spec, x @ y.T - spec.observed)
    b = x.T @ x - y.T @ y
    gx = (1.0 / spec.p_hat) * (resid @ y) + 0.5 * (x @ b)
    gy = (1.0 / spec.p_hat) * (resid.T @ x) - 0.5 * (y @ b)
    if spec.lam:
        gx = gx + spec.lam * row_hinge_penalty_grad(x, spec.alpha)
        gy = gy + spec.lam * row_hinge_penalty_grad(y, spec.alpha)
    return gx, gy


def factor_curvature(x, y, dx, dy, spec):
    """Hessian quadratic form of f at (X, Y) along (DX, DY), in closed form."""
    resid = _mask_mult(spec, x @ y.T - spec.observed)
    lin = _mask_mult(spec, dx @ y.T + x @ dy.T)
    fit = (1.0 / spec.p_hat) * (float(np.vdot(lin, lin))
                                + 2.0 * float(np.vdot(resid, dx @ dy.T)))
    b = x.T @ x - y.T @ y
    c = dx.T @ x + x.T @ dx - dy.T @ y - y.T @ dy
    e = dx.T @ dx - dy.T @ dy
    bal = 0.25 * float(np.vdot(c, c)) + 0.5 * float(np.vdot(b, e))
    reg = 0.0
    if spec.lam:
        reg = spec.lam * (row_hinge_penalty_curvature(x, dx, spec.alpha)
                          + row_hinge_penalty_curvature(y, dy, spec.alpha))
    return fit + bal + reg


def objective_value(spec, theta):
    """f composed with the parameterization's factor maps."""
    return factor_value(x_of(spec.param, theta), y_of(spec.param, theta), spec)


def objective_grad(spec, theta):
    """Gradient of the theta-level objective, via the factor adjoints."""
    gx, gy = factor_grad(x_of(spec.param, theta), y_of(spec.param, theta), spec)
    return adjoint_x(spec.param, gx) + adjoint_y(spec.param, gy)


# specialized closed forms, written directly in the parameter blocks; each
# must agree with objective_value to rounding


def subspace_objective_value(spec, theta):
    if spec.param.kind != "subspace":
        raise ValueError("spec is not a subspace instance")
    ta, tb = theta_blocks(spec.param, theta)
    bu, bv = spec.param.basis_u, spec.param.basis_v
    resid = _mask_mult(spec, bu @ (ta @ tb.T) @ bv.T - spec.observed)
    b = ta.T @ ta - tb.T @ tb
    return (0.5 / spec.p_hat * float(np.vdot(resid, resid))
            + 0.125 * float(np.vdot(b, b))
            + spec.lam * (row_hinge_penalty(bu @ ta, spec.alpha)
                          + row_hinge_penalty(bv @ tb, spec.alpha)))


def skew_objective_value(spec, theta):
    if spec.param.kind != "skew":
        raise ValueError("spec is not a skew instance")
    ta, tb = theta_blocks(spec.param, theta)
    resid = _mask_mult(spec, ta @ tb.T - tb @ ta.T - spec.observed)
    b = ta.T @ ta - tb.T @ tb
    c = ta.T @ tb + tb.T @ ta
    return (0.5 / spec.p_hat * float(np.vdot(resid, resid))
            + 0.25 * float(np.vdot(b, b)) + 0.25 * float(np.vdot(c, c))
            + 2.0 * spec.lam * row_hinge_penalty(np.hstack([tb, ta]), spec.alpha))


def psd_objective_value(spec, theta):
    if spec.param.kind != "psd":
        raise ValueError("spec is not a psd instance")
    (t,) = theta_blocks(spec.param, theta)
    resid = _mask_mult(spec, t @ t.T - spec.observed)
    return (0.5 / spec.p_hat * float(np.vdot(resid, resid))
            + 2.0 * spec.lam * row_hinge_penalty(t, spec.alpha))
