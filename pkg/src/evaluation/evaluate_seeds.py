import pandas as pd

from bowditch.bq import bq_test, fibonacci_growth_floor, fibonacci_growth_profile
from markoff.algebra import MuParams, derived_constants
from realcase.real_characters import construct_real_seed
from render.slices import PIXEL_KINDS

DEFAULT_SEED_MUS = (
    MuParams(0, -1, -1, 4),
    MuParams(0, -1, 0, 20),
    MuParams(3, -2, -2, -5),
)


def mu_label(mu):
    return "(" + ", ".join(f"{v.real:g}" if v.imag == 0 else f"{v:g}" for v in mu.as_tuple()) + ")"


def evaluate_seeds(
        mus=DEFAULT_SEED_MUS,
        y_factors=(1, 2, 4, 10),
        growth_depth=5,
        tol=None,
        budget=None
):
    """
    Builds the real seed of each mu at several multiples of its default y
    and decides each with the certified search.

    Args:
        mus: real parameter sets with (p, q, r) != 0
        y_factors: multiples of the default seed value y_min
        growth_depth: Farey depth of the Fibonacci growth profile
        tol: Tolerances for the search
        budget: SearchBudget for the search
    """
    rows = []
    for mu in mus:
        constants = derived_constants(mu)
        y_min = construct_real_seed(mu).y
        for factor in y_factors:
            seed = construct_real_seed(mu, y_min * factor)
            verdict = bq_test(seed.triple, mu, tol, budget)
            profile = fibonacci_growth_profile(seed.triple, mu, growth_depth)
            small = [v for _, v in verdict.explored_regions if abs(v) <= 2 + constants.alpha]
            rows.append({
                'mu': mu_label(mu),
                'y_factor': factor,
                'y': seed.y,
                'epsilon': seed.epsilon,
                'role_color': seed.role_color,
                'mirrored': seed.mirrored,
                'verdict': verdict.kind.value,
                'accepted': 1 if verdict.accepted else 0,
                'omega_2alpha': len(small) if verdict.accepted else None,
                'omega_l': len(verdict.omega_l) if verdict.accepted else None,
                'vertices_used': verdict.vertices_used,
                'fork_bound_violations': verdict.fork_bound_violations,
                'growth_floor': fibonacci_growth_floor(profile),
                'big_l': constants.big_l,
            })

    return pd.DataFrame(rows)


def summarize_results(results):
    """
    Summarizes seed survey results per mu
    """
    summary = results.groupby('mu').agg(
        runs=('verdict', 'size'),
        acceptance_rate=('accepted', 'mean'),
        mean_vertices=('vertices_used', 'mean'),
        min_growth_floor=('growth_floor', 'min'),
        fork_bound_violations=('fork_bound_violations', 'sum'),
        big_l=('big_l', 'first'),
    ).reset_index()
    summary['all_accepted'] = summary['acceptance_rate'] == 1

    return summary


def summarize_slice(grid):
    """
    Count and share of each pixel kind in a rendered slice
    """
    counts = pd.Series(grid.kinds.ravel()).value_counts()
    summary = pd.DataFrame({
        'kind': [kind.value for kind in PIXEL_KINDS],
        'pixels': [int(counts.get(code, 0)) for code in range(len(PIXEL_KINDS))],
    })
    summary['share'] = summary['pixels'] / summary['pixels'].sum()
    summary['kind'] = pd.Categorical(summary['kind'], categories=[k.value for k in PIXEL_KINDS], ordered=True)

    return summary
