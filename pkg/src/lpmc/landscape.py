"""Landscape diagnostics for the completion objective.

The central quantity is the curvature gap

    K(theta; delta) = delta^T H(theta) delta - 4 delta^T grad(theta),

negative K certifies a descent or negative-curvature direction at theta.
param_curvature_gap evaluates it derivative-free from objective values along
theta + t delta; factor_curvature_gap evaluates the same quantity through the
closed-form Hessian quadratic form at the factor level. For linear
parameterizations the two agree identically, which makes the pair a two-route
consistency check of the whole objective stack.

curvature_gap_decomposition splits an upper bound on K(theta; theta - xi),
with xi a balanced witness, into a quartic factor term, a sampling deviation
term, a penalty term and a noise term; the bound holding is the workhorse
inequality behind the no-spurious-minima argument, and here it is checked
numerically, instance by instance.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import RankError
from .linalg import as_matrix, reduced_svd, spectral_norm, two_inf_norm
from .objective import (factor_curvature, factor_grad, objective_value,
                        row_hinge_penalty_curvature, row_hinge_penalty_grad)
from .parameterization import x_of, y_of
from .sampling import project_observed

# constant from the sampling+penalty curvature bound; exposed for reports
ANALYSIS_C0 = 5e5


@dataclass(frozen=True)
class GroundTruthProfile:
    """Rank-r spectral profile of a ground truth: extreme singular values,
    condition number, incoherence."""

    n1: int
    n2: int
    r: int
    sigma_top: float
    sigma_bottom: float
    cond: float
    incoherence: float
    u_star: np.ndarray   # (n1, r)
    v_star: np.ndarray   # (n2, r)


def ground_truth_profile(m_star, r, rank_rel_tol=1e-10):
    """Profile m_star at rank r.

    Raises RankError when the numerical rank of m_star falls below r
    (sigma_r <= rank_rel_tol * sigma_1).
    """
    m = as_matrix(m_star, "m_star")
    dec = reduced_svd(m)
    if dec.rank < r or dec.sigma[r - 1] <= rank_rel_tol * dec.sigma[0]:
        have = dec.sigma[r - 1] / dec.sigma[0] if dec.rank >= r else 0.0
        raise RankError(f"m_star has numerical rank below r={r} "
                        f"(sigma_r/sigma_1 = {have:.3e})")
    u = dec.u[:, :r]
    v = dec.v[:, :r]
    n1, n2 = m.shape
    mu = max(n1 / r * two_inf_norm(u) ** 2, n2 / r * two_inf_norm(v) ** 2)
    s1, sr = float(dec.sigma[0]), float(dec.sigma[r - 1])
    return GroundTruthProfile(n1, n2, r, s1, sr, s1 / sr, float(mu), u, v)


def factor_curvature_gap(x, y, dx, dy, spec):
    """K at the factor level, from the closed-form Hessian quadratic form."""
    gx, gy = factor_grad(x, y, spec)
    quad = factor_curvature(x, y, dx, dy, spec)
    return quad - 4.0 * (float(np.vdot(gx, dx)) + float(np.vdot(gy, dy)))


def _hinge_nearby(spec, theta, delta, reach):
    """Whether any factor row norm can come within ~1e-3*max(alpha,1) of the
    penalty hinge along the stencil segment [-reach, reach]."""
    margin = 1e-3 * max(spec.alpha, 1.0)
    for row_fn in (x_of, y_of):
        base = row_fn(spec.param, theta)
        step = row_fn(spec.param, delta)
        rn = np.sqrt(np.einsum("ij,ij->i", base, base))
        dn = np.sqrt(np.einsum("ij,ij->i", step, step))
        if np.any(np.abs(rn - spec.alpha) - reach * dn < margin):
            return True
    return False


def param_curvature_gap(spec, theta, delta, step=1e-2):
    """K at the parameter level, derivative-free.

    Both derivatives of g(t) = f(theta + t delta) come from a symmetric
    5-point stencil (exact for quartic g, which covers every configuration
    whose factor rows stay inside the alpha ball); within 1e-3*scale of a
    penalty hinge the plain central differences are used instead. Rows
    strictly outside the ball make g smooth but not quartic, leaving an
    O(step^4) truncation error.
    """
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    delta = np.asarray(delta, dtype=np.float64).reshape(-1)
    h = step

    def g(t):
        return objective_value(spec, theta + t * delta)

    g0 = g(0.0)
    if spec.lam > 0.0 and _hinge_nearby(spec, theta, delta, 2.0 * h):
        gp, gm = g(h), g(-h)
        d2 = (gp - 2.0 * g0 + gm) / h ** 2
        d1 = (gp - gm) / (2.0 * h)
    else:
        gp1, gm1, gp2, gm2 = g(h), g(-h), g(2.0 * h), g(-2.0 * h)
        d2 = (-gp2 + 16.0 * gp1 - 30.0 * g0 + 16.0 * gm1 - gm2) / (12.0 * h ** 2)
        d1 = (gm2 - 8.0 * gm1 + 8.0 * gp1 - gp2) / (12.0 * h)
    return d2 - 4.0 * d1


@dataclass(frozen=True)
class GapReport:
    """Curvature gap at theta against witness xi, with its upper bound split
    into the four terms of the decomposition. The inequality to check is
    gap_theta <= bound_total (up to tolerance); gap_theta and gap_factor
    agree up to the stencil error of the parameter-level route."""

    gap_theta: float
    gap_factor: float
    term_quartic: float
    term_sampling: float
    term_penalty: float
    term_noise: float

    @property
    def bound_total(self):
        return (self.term_quartic + self.term_sampling
                + self.term_penalty + self.term_noise)

    @property
    def scale(self):
        return 1.0 + max(abs(self.gap_factor), abs(self.term_quartic),
                         abs(self.term_sampling), abs(self.term_penalty),
                         abs(self.term_noise))

    def holds(self, tol=1e-8):
        return self.gap_theta <= self.bound_total + tol * self.scale


def curvature_gap_decomposition(spec, theta, xi, noise=None):
    """Evaluate the gap bound terms for (theta, xi) on a noisy instance.

    xi must be a balanced exact witness for the clean ground truth, and
    spec.observed must equal the masked (ground truth + noise); both are
    checked. noise=None means a clean instance (zero noise term).
    """
    x, y = x_of(spec.param, theta), y_of(spec.param, theta)
    u, v = x_of(spec.param, xi), y_of(spec.param, xi)
    m_star = u @ v.T
    scale = max(float(np.linalg.norm(m_star)), 1e-300)

    bal = np.linalg.norm(u.T @ u - v.T @ v)
    if bal > 1e-6 * scale:
        raise ValueError("xi is not balanced; curvature decomposition needs "
                         "a witness")
    expect = m_star if noise is None else m_star + noise
    drift = np.linalg.norm(project_observed(expect, spec.mask) - spec.observed)
    if drift > 1e-8 * max(1.0, float(np.linalg.norm(spec.observed))):
        raise ValueError("spec.observed is not the masked ground truth plus "
                         "the given noise")

    dx, dy = x - u, y - v
    p = spec.p_hat

    # quartic factor term, via r x r Gram identities
    zz = x.T @ x + y.T @ y
    ww = u.T @ u + v.T @ v
    zw = x.T @ u + y.T @ v
    dd = dx.T @ dx + dy.T @ dy
    norm_ddt = float(np.vdot(dd, dd))
    norm_gram_gap = (float(np.vdot(zz, zz)) + float(np.vdot(ww, ww))
                     - 2.0 * float(np.vdot(zw, zw)))
    k1 = 0.25 * (norm_ddt - 3.0 * norm_gram_gap)

    # sampling deviation term
    cross = dx @ dy.T
    fitgap = x @ y.T - m_star
    pc = project_observed(cross, spec.mask)
    pf = project_observed(fitgap, spec.mask)
    k2 = ((float(np.vdot(pc, pc)) / p - float(np.vdot(cross, cross)))
          - (3.0 * float(np.vdot(pf, pf)) / p
             - 3.0 * float(np.vdot(fitgap, fitgap))))

    # penalty term: the curvature gap of G at the factors
    k3 = 0.0
    if spec.lam:
        k3 = spec.lam * (
            row_hinge_penalty_curvature(x, dx, spec.alpha)
            - 4.0 * float(np.vdot(row_hinge_penalty_grad(x, spec.alpha), dx))
            + row_hinge_penalty_curvature(y, dy, spec.alpha)
            - 4.0 * float(np.vdot(row_hinge_penalty_grad(y, spec.alpha), dy)))

    # noise term
    k4 = 0.0
    if noise is not None:
        pn = project_observed(noise, spec.mask)
        k4 = (6.0 / p * float(np.vdot(cross, pn))
              + 4.0 / p * float(np.vdot(u @ dy.T + dx @ v.T, pn)))

    delta = np.asarray(theta, dtype=np.float64) - np.asarray(xi, dtype=np.float64)
    return GapReport(
        gap_theta=param_curvature_gap(spec, theta, delta),
        gap_factor=factor_curvature_gap(x, y, dx, dy, spec),
        term_quartic=k1, term_sampling=k2, term_penalty=k3, term_noise=k4)


@dataclass(frozen=True)
class NoiseSurrogate:
    value: float
    formula: str


def noise_spectral_surrogate(param, mask, noise):
    """Computable stand-in for the worst-case projected noise norm.

    The subspace kind projects onto its fixed bases; the other kinds report
    the unprojected masked-noise norm. Both are surrogates: the quantity in
    the theory maximizes over the factor column spans at all parameter pairs,
    which is not computable.
    """
    pn = project_observed(noise, mask)
    if param.kind == "subspace":
        core = param.basis_u.T @ pn @ param.basis_v
        return NoiseSurrogate(spectral_norm(core),
                              "||P_U P_Omega(N) P_V||")
    return NoiseSurrogate(spectral_norm(pn), "||P_Omega(N)||")


@dataclass(frozen=True)
class TuningReport:
    """Evaluated sides of the sampling-rate and tuning-window conditions.
    Reporting only; nothing here is asserted."""

    p: float
    p_floor: float
    p_binding: str        # which term of the floor's max binds
    p_ok: bool
    lam: float
    lam_lo: float
    lam_hi: float
    lam_ok: bool
    alpha: float
    alpha_lo: float
    alpha_hi: float
    alpha_ok: bool

    @property
    def all_ok(self):
        return self.p_ok and self.lam_ok and self.alpha_ok


def tuning_conditions(profile, p, lam, alpha, c1=1.0, c2=1.0):
    """Check p against its rate floor and (lam, alpha) against their windows.

    The floor is c1 * max(mu r log(n_max) / n_min,
    n_max mu^2 r^2 kappa^2 / n_min^2); the windows are
    [c2 sqrt(n_max / p), 10 c2 sqrt(n_max / p)] for lam and
    [c2 sqrt(mu r sigma_1 / n_min), 10 x] for alpha. The absolute constants
    are inputs: the theory fixes only their existence.
    """
    n_max = max(profile.n1, profile.n2)
    n_min = min(profile.n1, profile.n2)
    mu, r, kappa = profile.incoherence, profile.r, profile.cond
    floor_log = mu * r * math.log(n_max) / n_min
    floor_cond = n_max * mu ** 2 * r ** 2 * kappa ** 2 / n_min ** 2
    p_floor = c1 * max(floor_log, floor_cond)
    lam_lo = c2 * math.sqrt(n_max / p)
    alpha_lo = c2 * math.sqrt(mu * r * profile.sigma_top / n_min)
    return TuningReport(
        p=p, p_floor=p_floor,
        p_binding="incoherence-log" if floor_log >= floor_cond
        else "condition-number",
        p_ok=p >= p_floor,
        lam=lam, lam_lo=lam_lo, lam_hi=10.0 * lam_lo,
        lam_ok=lam_lo <= lam <= 10.0 * lam_lo,
        alpha=alpha, alpha_lo=alpha_lo, alpha_hi=10.0 * alpha_lo,
        alpha_ok=alpha_lo <= alpha <= 10.0 * alpha_lo)


def mask_gap_norm(mask, p=None):
    """Spectral norm of the mean-centered sampling indicator.

    Centers by the model mean: Omega - pJ for the rectangular model and
    Omega - p(J - I) for the pairwise symmetric model, whose diagonal is
    never sampled.
    """
    p = mask.nominal_p if p is None else p
    g = mask.matrix.astype(np.float64) - p
    if mask.model == "symmetric-offdiag":
        g[np.diag_indices_from(g)] += p
    return spectral_norm(g)


@dataclass(frozen=True)
class DeviationCheck:
    """One instance of the sampled-inner-product deviation inequality:
    lhs <= factor_bound <= sum_bound, all computed from the realized mask."""

    lhs: float
    factor_bound: float
    sum_bound: float
    gap_norm: float

    def holds(self, tol=1e-9):
        slack = tol * (1.0 + self.sum_bound)
        return (self.lhs <= self.factor_bound + slack
                and self.factor_bound <= self.sum_bound + slack)


def sampled_deviation_check(mask, a, b, c, d, p=None, gap_norm=None):
    """Evaluate |<P(AC^T), BD^T> - p <AC^T, BD^T>| against its two bounds.

    A, B have n1 rows, C, D have n2 rows. The mean term is taken over the
    model support (diagonal excluded for the pairwise symmetric model). The
    first bound is
    ||Omega - pJ|| sqrt(sum_i ||a_i||^2 ||b_i||^2) sqrt(sum_j ||c_j||^2 ||d_j||^2)
    with rows i, j and the centered indicator of mask_gap_norm; the second
    replaces the product of roots by half their squared sum.
    """
    p = mask.nominal_p if p is None else p
    if gap_norm is None:
        gap_norm = mask_gap_norm(mask, p)
    ac, bd = a @ c.T, b @ d.T
    pac = project_observed(ac, mask)
    mean_ip = float(np.vdot(ac, bd))
    if mask.model == "symmetric-offdiag":
        # diagonal entries are never sampled under the pairwise model
        mean_ip -= float(np.sum(np.diag(ac) * np.diag(bd)))
    lhs = abs(float(np.vdot(pac, bd)) - p * mean_ip)
    rows_ab = float(np.sum(np.einsum("ij,ij->i", a, a)
                           * np.einsum("ij,ij->i", b, b)))
    rows_cd = float(np.sum(np.einsum("ij,ij->i", c, c)
                           * np.einsum("ij,ij->i", d, d)))
    factor = gap_norm * math.sqrt(rows_ab) * math.sqrt(rows_cd)
    return DeviationCheck(lhs=lhs, factor_bound=factor,
                          sum_bound=0.5 * gap_norm * (rows_ab + rows_cd),
                          gap_norm=gap_norm)


@dataclass(frozen=True)
class MaskCountCheck:
    count: int
    expected: float
    bound: float          # four standard deviations of the draw

    @property
    def within(self):
        return abs(self.count - self.expected) <= self.bound


def mask_count_check(mask):
    """|Omega| against its mean, four standard deviations wide."""
    p = mask.nominal_p
    if mask.model == "symmetric-offdiag":
        pairs = mask.rows * (mask.rows - 1) / 2
        expected = 2.0 * p * pairs
        bound = 8.0 * math.sqrt(p * (1.0 - p) * pairs)
    else:
        cells = mask.rows * mask.cols
        expected = p * cells
        bound = 4.0 * math.sqrt(p * (1.0 - p) * cells)
    return MaskCountCheck(count=mask.count, expected=expected,
                          bound=max(bound, 1.0))


@dataclass(frozen=True)
class ConcentrationReport:
    gap_norm: float
    gap_ratio: float      # gap_norm / sqrt(n_max * p)
    count: MaskCountCheck
    checks: tuple         # DeviationCheck instances
    energy_ratios: tuple  # sampled/expected energy on tangent-space draws

    @property
    def all_hold(self):
        return all(c.holds() for c in self.checks)

    @property
    def energy_max_deviation(self):
        """Worst |ratio - 1| of the tangent-space energy spot check.

        Reported, never asserted: the uniform two-sided energy bound only
        kicks in at sampling rates far above desk scale.
        """
        if not self.energy_ratios:
            return 0.0
        return max(abs(q - 1.0) for q in self.energy_ratios)


def concentration_report(mask, rng, tuples=10, r=3, p=None):
    """Spot-check the deviation inequality on random factor tuples and
    report the mask spectral gap, count concentration, and sampled-energy
    ratios (1/p)||P_Omega(M)||^2 / ||M||^2 over random rank-2r tangent
    matrices M = U G^T + H V^T of a random rank-r frame pair."""
    p = mask.nominal_p if p is None else p
    gap = mask_gap_norm(mask, p)
    gen = rng.generator()
    checks = []
    for _ in range(tuples):
        a = gen.standard_normal((mask.rows, r))
        b = gen.standard_normal((mask.rows, r))
        c = gen.standard_normal((mask.cols, r))
        d = gen.standard_normal((mask.cols, r))
        checks.append(sampled_deviation_check(mask, a, b, c, d, p, gap))
    ratios = []
    if p > 0.0:
        uf, _ = np.linalg.qr(gen.standard_normal((mask.rows, r)))
        vf, _ = np.linalg.qr(gen.standard_normal((mask.cols, r)))
        for _ in range(tuples):
            m = (uf @ gen.standard_normal((r, mask.cols))
                 + gen.standard_normal((mask.rows, r)) @ vf.T)
            pm = project_observed(m, mask)
            ratios.append(float(np.vdot(pm, pm))
                          / (p * float(np.vdot(m, m))))
    n_max = max(mask.rows, mask.cols)
    return ConcentrationReport(
        gap_norm=gap, gap_ratio=gap / math.sqrt(n_max * p) if p > 0 else 0.0,
        count=mask_count_check(mask), checks=tuple(checks),
        energy_ratios=tuple(ratios))


@dataclass(frozen=True)
class WitnessFactorReport:
    """Spectral properties of witness factors against the profile of the
    ground truth they reproduce: extreme singular values should match
    (sqrt(sigma_1), sqrt(sigma_r)), column spans should match the truth's
    singular spans, and squared row norms should respect the incoherence
    bounds mu r sigma_1 / n."""

    sigma_top: float
    sigma_bottom: float
    expected_top: float
    expected_bottom: float
    span_gap_x: float
    span_gap_y: float
    two_inf_sq_x: float
    two_inf_sq_y: float
    row_bound_x: float
    row_bound_y: float


def witness_factor_properties(param, xi, m_star):
    """Measure the witness-factor properties for a rank-r exact witness."""
    prof = ground_truth_profile(m_star, param.r)
    xw, yw = x_of(param, xi), y_of(param, xi)
    sing = np.linalg.svd(xw, compute_uv=False)

    def span_gap(factor, basis):
        q, _ = np.linalg.qr(factor)
        s = np.linalg.svd(basis.T @ q, compute_uv=False)
        smin = min(1.0, float(s[-1])) if s.size else 0.0
        return math.sqrt(max(0.0, 1.0 - smin ** 2))

    return WitnessFactorReport(
        sigma_top=float(sing[0]), sigma_bottom=float(sing[-1]),
        expected_top=math.sqrt(prof.sigma_top),
        expected_bottom=math.sqrt(prof.sigma_bottom),
        span_gap_x=span_gap(xw, prof.u_star),
        span_gap_y=span_gap(yw, prof.v_star),
        two_inf_sq_x=two_inf_norm(xw) ** 2,
        two_inf_sq_y=two_inf_norm(yw) ** 2,
        row_bound_x=prof.incoherence * param.r * prof.sigma_top / param.n1,
        row_bound_y=prof.incoherence * param.r * prof.sigma_top / param.n2)
