"""Experiment sweeps, CSV emission, and the diagnostics battery.

Every sweep is reproducible from its master seed: trial t of a cell draws
from the stream derived as (master_seed, experiment, "p", p, "t", t), with
the sweep value (subspace width or skew rank) kept out of the derivation so
cells at the same (p, t) share masks and noise and comparisons are paired.
Ground truths come from their own derived stream and are fixed across the
sweep. Reruns with the same master seed write byte-identical CSV; per-trial
wall times therefore stay off the CSV (they live on the in-memory records
and in the run log).

CSV layout: one header line naming the serialized TrialRecord fields, one
row per trial, then a summary section whose lines are prefixed '#summary'
(first such line is the summary header). Floats are written with repr, so
parsing them back is lossless.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .instances import (assemble, psd_instance, rectangular_instance,
                        skew_instance, subspace_instance)
from .landscape import (concentration_report, curvature_gap_decomposition,
                        factor_curvature_gap, ground_truth_profile,
                        noise_spectral_surrogate, param_curvature_gap,
                        tuning_conditions)
from .objective import make_spec
from .optimizer import SolveConfig, solve
from .parameterization import balanced_witness, rectangular_param, x_of, y_of
from .sampling import (RngState, bernoulli_mask, gaussian_noise,
                       skew_gaussian_noise, symmetric_offdiag_mask)

EXPERIMENTS = ("subspace-noisy", "subspace-phase", "skew-compare",
               "single-solve", "diagnostics")

SUCCESS_REL_ERR = 1e-3     # unsquared relative Frobenius error


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n1: int
    n2: int
    r: int
    sweep: tuple            # subspace widths s, or skew-compare ranks r
    p_grid: tuple
    sigma: float
    trials: int
    master_seed: int = 0
    kind: str = "subspace"  # single-solve only
    lam: float = None       # None = standard tuning rule
    alpha: float = None
    max_iters: int = 500
    out: str = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not self.p_grid or not all(0.0 < p <= 1.0 for p in self.p_grid):
            raise ValueError("p_grid values must lie in (0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not self.sweep:
            raise ValueError("sweep must be nonempty")


def default_config(experiment, **overrides):
    """Full-scale defaults for each sweep; overrides replace fields."""
    if experiment == "subspace-noisy":
        base = ExperimentConfig(
            experiment, 500, 500, 2, sweep=(10, 20, 30, 40),
            p_grid=tuple(k * 0.005 for k in range(1, 21)),
            sigma=1.0 / 500.0, trials=10)
    elif experiment == "subspace-phase":
        base = ExperimentConfig(
            experiment, 500, 500, 2, sweep=(10, 20, 30, 40),
            p_grid=tuple(k * 1e-4 for k in range(1, 21)),
            sigma=0.0, trials=10)
    elif experiment == "skew-compare":
        base = ExperimentConfig(
            experiment, 500, 500, 4, sweep=(4, 10, 20),
            p_grid=tuple(k * 0.01 for k in range(1, 21)),
            sigma=0.0, trials=10)
    elif experiment == "single-solve":
        base = ExperimentConfig(
            experiment, 60, 60, 2, sweep=(6,), p_grid=(0.3,),
            sigma=0.0, trials=1)
    elif experiment == "diagnostics":
        base = ExperimentConfig(
            experiment, 24, 24, 2, sweep=(8,), p_grid=(0.6,),
            sigma=0.02, trials=1)
    else:
        raise ValueError(f"unknown experiment {experiment!r}")
    return replace(base, **overrides) if overrides else base


@dataclass(frozen=True)
class TrialRecord:
    experiment: str
    trial: int
    p: float
    s_or_r: int
    solver: str
    seed: str               # stream token of the trial
    relative_error: float   # squared relative Frobenius error
    success: int
    iterations: int
    termination: str
    wall_time: float        # in-memory only, see module docstring


@dataclass(frozen=True)
class CellSummary:
    experiment: str
    p: float
    s_or_r: int
    solver: str
    trials: int
    mean_log10_err: float
    median_log10_err: float
    success_rate: float


RECORD_COLUMNS = ("experiment", "trial", "p", "s_or_r", "solver", "seed",
                  "relative_error", "success", "iterations", "termination")
SUMMARY_COLUMNS = ("experiment", "p", "s_or_r", "solver", "trials",
                   "mean_log10_err", "median_log10_err", "success_rate")


def _fmt(v):
    return repr(v) if isinstance(v, float) else str(v)


def _monotone_fit(values):
    """Least-squares nondecreasing fit by pooling adjacent violators."""
    blocks = []                      # [mean, weight, count]
    for v in values:
        cur = [float(v), 1.0, 1]
        while blocks and blocks[-1][0] > cur[0]:
            m, w, c = blocks.pop()
            tot = w + cur[1]
            cur = [(m * w + cur[0] * cur[1]) / tot, tot, c + cur[2]]
        blocks.append(cur)
    fit = []
    for m, _, c in blocks:
        fit.extend([m] * c)
    return fit


def _trend_lines(summaries):
    """Monotone-regression residual of success rate against p, one line per
    (s, solver) group of a phase sweep. Reported, never asserted."""
    groups = {}
    for s in summaries:
        if s.experiment != "subspace-phase":
            continue
        groups.setdefault((s.s_or_r, s.solver), []).append(s)
    if not groups:
        return []
    lines = ["#trend,experiment,s_or_r,solver,monotone_residual"]
    for (sr, solver), cells in sorted(groups.items()):
        cells.sort(key=lambda c: c.p)
        rates = [c.success_rate for c in cells]
        fit = _monotone_fit(rates)
        resid = math.sqrt(sum((a - b) ** 2 for a, b in zip(fit, rates)))
        lines.append(f"#trend,subspace-phase,{sr},{solver},{resid!r}")
    return lines


def render_csv(records, summaries):
    lines = [",".join(RECORD_COLUMNS)]
    for rec in records:
        lines.append(",".join(_fmt(getattr(rec, c)) for c in RECORD_COLUMNS))
    lines.append("#summary," + ",".join(SUMMARY_COLUMNS))
    for s in summaries:
        lines.append("#summary," + ",".join(_fmt(getattr(s, c))
                                            for c in SUMMARY_COLUMNS))
    lines.extend(_trend_lines(summaries))
    return "\n".join(lines) + "\n"


def write_csv(path, records, summaries):
    with open(path, "w", newline="\n") as fh:
        fh.write(render_csv(records, summaries))


def _log10_err(err):
    return math.log10(max(err, 1e-32))


def summarize(records):
    """One CellSummary per (experiment, p, s_or_r, solver) cell, in record
    order."""
    cells = {}
    for rec in records:
        key = (rec.experiment, rec.p, rec.s_or_r, rec.solver)
        cells.setdefault(key, []).append(rec)
    out = []
    for (exp, p, sr, solver), recs in cells.items():
        logs = [_log10_err(r.relative_error) for r in recs]
        out.append(CellSummary(
            experiment=exp, p=p, s_or_r=sr, solver=solver, trials=len(recs),
            mean_log10_err=float(np.mean(logs)),
            median_log10_err=float(np.median(logs)),
            success_rate=float(np.mean([r.success for r in recs]))))
    return out


def _solve_trial(experiment, trial, p, s_or_r, solver, spec, m_star,
                 init_rng, max_iters):
    config = SolveConfig(seed=init_rng, max_iters=max_iters)
    result = solve(spec, config)
    num = float(np.linalg.norm(result.m_hat - m_star)) ** 2
    den = float(np.linalg.norm(m_star)) ** 2
    err = num / den
    return TrialRecord(
        experiment=experiment, trial=trial, p=p, s_or_r=s_or_r,
        solver=solver, seed=init_rng.token, relative_error=err,
        success=int(math.sqrt(err) <= SUCCESS_REL_ERR),
        iterations=result.iterations, termination=result.termination,
        wall_time=result.wall_time), result


def _empty_trial(experiment, trial, p, s_or_r, solver, init_rng):
    # nothing observed: the objective is undefined, the estimate is 0,
    # and the trial counts as a failure at full relative error
    return TrialRecord(
        experiment=experiment, trial=trial, p=p, s_or_r=s_or_r,
        solver=solver, seed=init_rng.token, relative_error=1.0,
        success=0, iterations=0, termination="empty-mask", wall_time=0.0)


def run_subspace_sweep(config):
    """Shared body of the noisy error sweep and the noiseless phase sweep:
    solve the subspace formulation over (s, p) cells."""
    master = RngState(config.master_seed)
    exp = config.experiment
    truth_rng = master.derive(exp, "truth")
    # bases for different s nest (same seeded matrix), so the truth built
    # from the first r basis vectors is the same matrix for every s
    per_s = {s: subspace_instance(config.n1, config.n2, config.r, s, s,
                                  truth_rng) for s in config.sweep}
    records = []
    for p in config.p_grid:
        for t in range(config.trials):
            cell = master.derive(exp, "p", repr(p), "t", t)
            mask = bernoulli_mask(config.n1, config.n2, p,
                                  cell.derive("mask"))
            noise = None
            if config.sigma > 0.0:
                noise = gaussian_noise(config.n1, config.n2, config.sigma,
                                       cell.derive("noise"))
            for s in config.sweep:
                param, m_star = per_s[s]
                init = cell.derive("init", s)
                if mask.count == 0:
                    records.append(_empty_trial(exp, t, p, s, "subspace",
                                                init))
                    continue
                spec = assemble(param, m_star, mask, noise,
                                config.lam, config.alpha)
                rec, _ = _solve_trial(exp, t, p, s, "subspace", spec, m_star,
                                      init, config.max_iters)
                records.append(rec)
    return records, summarize(records)


def run_skew_compare(config):
    """Skew-aware solver against the free-factor solver on identical
    symmetric-model observations of skew truths, over (r, p) cells."""
    master = RngState(config.master_seed)
    exp = config.experiment
    per_r = {r: skew_instance(config.n1, r, master.derive(exp, "truth", r),
                              unit_blocks=True) for r in config.sweep}
    records = []
    for p in config.p_grid:
        for t in range(config.trials):
            cell = master.derive(exp, "p", repr(p), "t", t)
            mask = symmetric_offdiag_mask(config.n1, p, cell.derive("mask"))
            noise = None
            if config.sigma > 0.0:
                noise = skew_gaussian_noise(config.n1, config.sigma,
                                            cell.derive("noise"))
            for r in config.sweep:
                param, m_star = per_r[r]
                init_s = cell.derive("init", "skew", r)
                init_r = cell.derive("init", "rect", r)
                if mask.count == 0:
                    records.append(_empty_trial(exp, t, p, r, "skew", init_s))
                    records.append(_empty_trial(exp, t, p, r, "rectangular",
                                                init_r))
                    continue
                spec = assemble(param, m_star, mask, noise,
                                config.lam, config.alpha)
                rec, _ = _solve_trial(exp, t, p, r, "skew", spec, m_star,
                                      init_s, config.max_iters)
                records.append(rec)
                flat = rectangular_param(config.n1, config.n2, r)
                spec_rect = make_spec(flat, mask, spec.observed,
                                      config.lam, config.alpha)
                rec, _ = _solve_trial(exp, t, p, r, "rectangular", spec_rect,
                                      m_star, init_r, config.max_iters)
                records.append(rec)
    return records, summarize(records)


def _single_instance(config, rng):
    kind = config.kind
    if kind == "subspace":
        s = config.sweep[0]
        return subspace_instance(config.n1, config.n2, config.r, s, s, rng)
    if kind == "rectangular":
        return rectangular_instance(config.n1, config.n2, config.r, rng)
    if kind == "psd":
        return psd_instance(config.n1, config.r, rng)
    if kind == "skew":
        return skew_instance(config.n1, config.r, rng)
    raise ValueError(f"unknown kind {kind!r}")


def run_single_solve(config):
    """One end-to-end solve of a fresh instance of the configured kind."""
    master = RngState(config.master_seed)
    exp = config.experiment
    param, m_star = _single_instance(config, master.derive(exp, "truth"))
    p = config.p_grid[0]
    records = []
    for t in range(config.trials):
        cell = master.derive(exp, "p", repr(p), "t", t)
        if config.kind == "skew":
            mask = symmetric_offdiag_mask(config.n1, p, cell.derive("mask"))
            noise = (skew_gaussian_noise(config.n1, config.sigma,
                                         cell.derive("noise"))
                     if config.sigma > 0.0 else None)
        else:
            mask = bernoulli_mask(config.n1, config.n2, p,
                                  cell.derive("mask"))
            noise = (gaussian_noise(config.n1, config.n2, config.sigma,
                                    cell.derive("noise"))
                     if config.sigma > 0.0 else None)
        init = cell.derive("init", config.kind)
        if mask.count == 0:
            records.append(_empty_trial(exp, t, p, config.sweep[0],
                                        config.kind, init))
            continue
        spec = assemble(param, m_star, mask, noise, config.lam, config.alpha)
        rec, _ = _solve_trial(exp, t, p, config.sweep[0], config.kind, spec,
                              m_star, init, config.max_iters)
        records.append(rec)
    return records, summarize(records)


def run_experiment(config):
    if config.experiment in ("subspace-noisy", "subspace-phase"):
        return run_subspace_sweep(config)
    if config.experiment == "skew-compare":
        return run_skew_compare(config)
    if config.experiment == "single-solve":
        return run_single_solve(config)
    raise ValueError(f"{config.experiment!r} does not produce trial records")


# ---------------------------------------------------------------------------
# diagnostics battery


def _diag_instances(config, master):
    rng = RngState(config.master_seed).derive("diagnostics", "instances")
    n = config.n1
    s = config.sweep[0]
    out = []
    out.append(subspace_instance(n, n, config.r, s, s, rng.derive("sub")))
    out.append(rectangular_instance(n, n, config.r, rng.derive("rect")))
    out.append(psd_instance(max(n // 2, config.r + 2), config.r,
                            rng.derive("psd")))
    r_skew = config.r + (config.r % 2)
    out.append(skew_instance(max(n // 2, r_skew + 2), max(r_skew, 2),
                             rng.derive("skew")))
    return out


def run_diagnostics(config, stream=None):
    """Run the invariant battery at desk scale and emit a key: value report.

    Returns (report text, ok flag); ok is False when a hard invariant
    (witness certificate, two-route curvature agreement, gap inequality,
    deviation inequality) fails. The text is also written to stream when one
    is given.
    """
    master = RngState(config.master_seed)
    lines = []
    ok = True

    def emit(key, value):
        lines.append(f"{key}: {value}")

    emit("report", "landscape diagnostics")
    emit("master_seed", config.master_seed)

    instances = _diag_instances(config, master)
    p = config.p_grid[0]

    # witness certificates and two-route curvature agreement
    for param, m_star in instances:
        tag = param.kind
        gen = master.derive("diagnostics", "theta", tag).generator()
        worst_fit = worst_bal = worst_corr = 0.0
        worst_id = 0.0
        passes = 0
        draws = 10
        if param.kind == "skew":
            mask = symmetric_offdiag_mask(param.n1, p, master.derive(
                "diagnostics", "mask", tag))
        else:
            mask = bernoulli_mask(param.n1, param.n2, p, master.derive(
                "diagnostics", "mask", tag))
        spec = assemble(param, m_star, mask)
        for _ in range(draws):
            theta = gen.standard_normal(param.d)
            cert = balanced_witness(param, theta, m_star)
            passes += cert.passes
            worst_fit = max(worst_fit, cert.residual_fit)
            worst_bal = max(worst_bal, cert.residual_balance)
            worst_corr = min(worst_corr, cert.min_corr_eig)
            delta = gen.standard_normal(param.d)
            kp = param_curvature_gap(spec, theta, delta)
            kf = factor_curvature_gap(x_of(param, theta), y_of(param, theta),
                                      x_of(param, delta), y_of(param, delta),
                                      spec)
            worst_id = max(worst_id, abs(kp - kf) / (1.0 + abs(kf)))
        emit(f"witness.{tag}.passes", f"{passes}/{draws}")
        emit(f"witness.{tag}.worst_fit", f"{worst_fit:.3e}")
        emit(f"witness.{tag}.worst_balance", f"{worst_bal:.3e}")
        emit(f"witness.{tag}.worst_corr_eig", f"{worst_corr:.3e}")
        emit(f"curvature.{tag}.two_route_residual", f"{worst_id:.3e}")
        if passes < draws or worst_id > 1e-8:
            ok = False

    # gap decomposition on noisy subspace instances
    param, m_star = instances[0]
    holds = 0
    margin = float("inf")
    noise_terms = []
    trials = 5
    for t in range(trials):
        cell = master.derive("diagnostics", "gap", t)
        mask = bernoulli_mask(param.n1, param.n2, p, cell.derive("mask"))
        noise = gaussian_noise(param.n1, param.n2, config.sigma,
                               cell.derive("noise"))
        spec = assemble(param, m_star, mask, noise)
        theta = cell.generator().standard_normal(param.d)
        cert = balanced_witness(param, theta, m_star)
        report = curvature_gap_decomposition(spec, theta, cert.xi, noise)
        holds += report.holds()
        margin = min(margin, (report.bound_total - report.gap_theta)
                     / report.scale)
        noise_terms.append(report.term_noise)
    emit("gap.instances", trials)
    emit("gap.holds", f"{holds}/{trials}")
    emit("gap.min_margin", f"{margin:.3e}")
    emit("gap.noise_terms", " ".join(f"{v:.3e}" for v in noise_terms))
    if holds < trials:
        ok = False

    # profile, tuning windows, noise surrogate on the subspace instance
    prof = ground_truth_profile(m_star, param.r)
    emit("profile.sigma_top", f"{prof.sigma_top:.6e}")
    emit("profile.sigma_bottom", f"{prof.sigma_bottom:.6e}")
    emit("profile.cond", f"{prof.cond:.6e}")
    emit("profile.incoherence", f"{prof.incoherence:.6e}")
    spec = assemble(param, m_star, mask, noise)
    tuning = tuning_conditions(prof, p, spec.lam, spec.alpha)
    emit("tuning.p", f"{tuning.p!r} floor {tuning.p_floor:.3e} "
                     f"binding {tuning.p_binding} ok {tuning.p_ok}")
    emit("tuning.lam", f"{tuning.lam!r} window [{tuning.lam_lo:.3e}, "
                       f"{tuning.lam_hi:.3e}] ok {tuning.lam_ok}")
    emit("tuning.alpha", f"{tuning.alpha!r} window [{tuning.alpha_lo:.3e}, "
                         f"{tuning.alpha_hi:.3e}] ok {tuning.alpha_ok}")
    surro = noise_spectral_surrogate(param, mask, noise)
    emit("noise.surrogate", f"{surro.value:.6e} ({surro.formula})")

    # mask concentration
    conc = concentration_report(mask, master.derive("diagnostics", "conc"))
    emit("concentration.gap_norm", f"{conc.gap_norm:.6e}")
    emit("concentration.gap_ratio", f"{conc.gap_ratio:.6e}")
    emit("concentration.count",
         f"{conc.count.count} expected {conc.count.expected:.1f} "
         f"within {conc.count.within}")
    emit("concentration.checks",
         f"{sum(c.holds() for c in conc.checks)}/{len(conc.checks)}")
    emit("concentration.energy_max_deviation",
         f"{conc.energy_max_deviation:.3e}")
    if not conc.all_hold:
        ok = False

    emit("result", "PASS" if ok else "FAIL")
    text = "\n".join(lines) + "\n"
    if stream is not None:
        stream.write(text)
    return text, ok
