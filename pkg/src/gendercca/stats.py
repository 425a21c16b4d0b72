"""Permutation significance for held-out CCA correlations, and Bonferroni
correction."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cca import DEFAULT_RIDGE, CcaProblem, project_and_correlate
from .errors import DegenerateInput


@dataclass(frozen=True)
class PermutationOutcome:
    rho_observed: float
    p_raw: float
    B: int
    exceed_count: int
    seed: int
    degenerate_count: int = 0


def replicate_stream(seed, b):
    """Philox stream for permutation replicate ``b``, independent of every
    other replicate so execution order cannot affect the draws."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(1, b))))


def permutation_p_value(exceed_count, B):
    return (1 + exceed_count) / (B + 1)


def _count_exceedances(problem, G_test, E_test, rho_observed, seed, replicates):
    exceed = degenerate = 0
    for b in replicates:
        order = replicate_stream(seed, b).permutation(problem.n)
        try:
            rho_b = project_and_correlate(problem.solve(order), G_test, E_test).r
        except DegenerateInput:
            degenerate += 1
            continue
        if rho_b >= rho_observed:
            exceed += 1
    return exceed, degenerate


def permutation_test(
    G_train, E_train, G_test, E_test, B=100_000, seed=0, ridge=DEFAULT_RIDGE, workers=1
):
    """Permutation test of the held-out CCA correlation.

    Each replicate shuffles the training gender columns, refits, and
    scores the refit on the untouched test set. Replicates whose
    correlation is undefined never count as exceeding the observation
    and are reported in ``degenerate_count``.

    ``workers`` splits the replicates across threads; the outcome is the
    same for every value.
    """
    if B < 0:
        raise ValueError("B must be nonnegative")
    problem = CcaProblem(G_train, E_train, ridge)
    rho_observed = project_and_correlate(problem.solve(), G_test, E_test).r

    workers = max(1, min(int(workers), B or 1))
    chunks = [range(start, B + 1, workers) for start in range(1, workers + 1)]
    if workers == 1:
        counts = [_count_exceedances(problem, G_test, E_test, rho_observed, seed, chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(
                pool.map(
                    lambda replicates: _count_exceedances(
                        problem, G_test, E_test, rho_observed, seed, replicates
                    ),
                    chunks,
                )
            )
    exceed = sum(c[0] for c in counts)
    degenerate = sum(c[1] for c in counts)
    return PermutationOutcome(
        rho_observed=rho_observed,
        p_raw=permutation_p_value(exceed, B),
        B=int(B),
        exceed_count=exceed,
        seed=seed,
        degenerate_count=degenerate,
    )


def bonferroni(p_raw, m):
    """Bonferroni-corrected p-value, clamped at 1."""
    if not 0 < p_raw <= 1:
        raise ValueError(f"p-value must lie in (0, 1], got {p_raw}")
    if m < 1:
        raise ValueError(f"number of hypotheses must be >= 1, got {m}")
    return min(1.0, p_raw * m)
