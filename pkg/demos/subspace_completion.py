"""Complete a low-rank matrix from sparse noisy entries, with and without
side information.

The ground truth is rank 2 with factors lying in known column subspaces.
Solving inside those subspaces (a handful of coefficients) is compared
against solving over free factors (thousands of entries) on the same
observations; the subspace solver needs fewer samples and absorbs less
noise. Runs in a few seconds at n = 120.
"""

import numpy as np

from lpmc.instances import assemble, subspace_instance
from lpmc.objective import make_spec
from lpmc.optimizer import SolveConfig, solve
from lpmc.parameterization import rectangular_param
from lpmc.sampling import RngState, bernoulli_mask, gaussian_noise

N, R, S, P, SIGMA = 120, 2, 8, 0.25, 0.01


def rel_err(m_hat, m_star):
    return np.linalg.norm(m_hat - m_star) / np.linalg.norm(m_star)


def main():
    rng = RngState(7).derive("demo", "subspace")
    param, m_star = subspace_instance(N, N, R, S, S, rng.derive("truth"))
    mask = bernoulli_mask(N, N, P, rng.derive("mask"))
    noise = gaussian_noise(N, N, SIGMA, rng.derive("noise"))

    print(f"truth: {N} x {N}, rank {R}, factors inside {S}-dimensional "
          f"known subspaces")
    print(f"observed: {mask.count} of {N * N} entries "
          f"({mask.count / N ** 2:.1%}), noise level {SIGMA}")

    spec = assemble(param, m_star, mask, noise)
    print(f"tuning: lam = {spec.lam:.1f}, alpha = {spec.alpha:.0f} "
          f"(standard rule)")
    result = solve(spec, SolveConfig(seed=rng.derive("init", "sub")))
    print(f"\nsubspace solver ({param.d} parameters):")
    print(f"  {result.iterations} iterations, stopped at {result.termination}")
    print(f"  relative error {rel_err(result.m_hat, m_star):.2e}")

    free = rectangular_param(N, N, R)
    spec_free = make_spec(free, mask, spec.observed)
    result_free = solve(spec_free, SolveConfig(seed=rng.derive("init", "rect")))
    print(f"\nfree-factor solver ({free.d} parameters), same observations:")
    print(f"  {result_free.iterations} iterations, stopped at "
          f"{result_free.termination}")
    print(f"  relative error {rel_err(result_free.m_hat, m_star):.2e}")

    print("\nthe side information pays for itself: same data, far fewer "
          "parameters, smaller error.")


if __name__ == "__main__":
    main()
