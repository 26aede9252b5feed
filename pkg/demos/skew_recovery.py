"""Recover a skew-symmetric comparison matrix from sampled pairs.

Pairwise preference scores form a skew-symmetric matrix: entry (i, j) is
how strongly i beats j, and (j, i) is its negation. Sampling draws
unordered pairs (both orientations observed, diagonal never). The
skew-aware factorization keeps every iterate exactly skew-symmetric, so
the estimate is a consistent set of comparisons by construction; a free
factorization fits the same numbers but has no such guarantee baked in.
"""

import numpy as np

from lpmc.instances import assemble, skew_instance
from lpmc.objective import make_spec
from lpmc.optimizer import SolveConfig, solve
from lpmc.parameterization import rectangular_param
from lpmc.sampling import RngState, symmetric_offdiag_mask

N, R, P = 80, 4, 0.3


def main():
    rng = RngState(11).derive("demo", "skew")
    param, m_star = skew_instance(N, R, rng.derive("truth"))
    mask = symmetric_offdiag_mask(N, P, rng.derive("mask"))

    print(f"truth: {N} x {N} skew-symmetric, rank {R} "
          f"({R // 2} weighted comparison planes)")
    print(f"observed: {mask.count // 2} unordered pairs "
          f"({mask.count} oriented entries)")

    spec = assemble(param, m_star, mask)
    result = solve(spec, SolveConfig(seed=rng.derive("init", "skew")))
    m_hat = result.m_hat
    err = np.linalg.norm(m_hat - m_star) / np.linalg.norm(m_star)
    sym = np.linalg.norm(m_hat + m_hat.T) / np.linalg.norm(m_hat)
    print(f"\nskew-aware solver: relative error {err:.2e}")
    print(f"  consistency residual ||M + M^T|| / ||M|| = {sym:.1e} "
          f"(skew by construction)")

    free = rectangular_param(N, N, R)
    spec_free = make_spec(free, mask, spec.observed)
    result_free = solve(spec_free, SolveConfig(seed=rng.derive("init", "rect")))
    m_free = result_free.m_hat
    err_free = np.linalg.norm(m_free - m_star) / np.linalg.norm(m_star)
    sym_free = np.linalg.norm(m_free + m_free.T) / np.linalg.norm(m_free)
    print(f"\nfree-factor solver, same observations: relative error "
          f"{err_free:.2e}")
    print(f"  consistency residual {sym_free:.1e} (only as good as the fit)")

    # a cheap read of the recovered scores: row sums rank the items
    scores = m_hat.sum(axis=1)
    truth_scores = m_star.sum(axis=1)
    agree = np.corrcoef(scores, truth_scores)[0, 1]
    print(f"\nrow-sum ranking correlation with the truth: {agree:.4f}")


if __name__ == "__main__":
    main()
