import logging
import math

import numpy as np
import pytest

from conftest import SEED_MUS, on_variety, random_complex, solve_z
from bowditch.bq import (
    RejectReason,
    Rejected,
    SearchBudget,
    Sink,
    Tolerances,
    VerdictKind,
    bq_test,
    certify_escape,
    check_quasi_convexity,
    descend,
    fibonacci_growth_floor,
    fibonacci_growth_profile,
    omega_k,
    series_diagnostic,
)
from markoff.algebra import COLORS, MarkoffTriple, MuParams, derived_constants
from markoff.errors import InvalidInput, NotBqAccepted, ResidualTooLarge
from markoff.tree import BASE_SLOPES, INFINITY, ZERO, Slope, base_state, directed_edge, step
from realcase.real_characters import construct_real_seed

MARKOFF_OMEGA_SLOPES = {ZERO, INFINITY, Slope(-1, 1), Slope(-2, 1), Slope(1, 1), Slope(-1, 2)}


def test_budget_and_tolerance_validation():
    with pytest.raises(InvalidInput):
        Tolerances(eps_segment=-1)
    with pytest.raises(InvalidInput):
        SearchBudget(max_vertices=0)


def test_markoff_map_is_accepted(markoff_triple, markoff_mu):
    verdict = bq_test(markoff_triple, markoff_mu)
    assert verdict.accepted
    assert verdict.big_l == 12
    assert {s for s, _ in verdict.omega_l} == MARKOFF_OMEGA_SLOPES
    assert sorted(abs(v) for _, v in verdict.omega_l) == [3, 3, 3, 6, 6, 6]
    assert verdict.stats.sink_slopes == BASE_SLOPES
    assert verdict.stats.regions_le_2alpha == ()
    assert verdict.stats.arrows_inward
    assert verdict.fork_bound_violations == 0
    assert not verdict.near_degenerate
    assert check_quasi_convexity(verdict.omega_l)


def test_descent_reaches_the_same_regions(markoff_mu):
    # three moves away from the sink (-3, -3, -3)
    verdict = bq_test(MarkoffTriple(-6, -15, -87), markoff_mu)
    assert verdict.accepted
    assert verdict.vertices_used > 3
    assert sorted(abs(v) for _, v in verdict.omega_l) == [3, 3, 3, 6, 6, 6]


def test_descent_budget_gives_undetermined(markoff_mu):
    verdict = bq_test(MarkoffTriple(-6, -15, -87), markoff_mu, budget=SearchBudget(max_descent_steps=1))
    assert verdict.kind is VerdictKind.UNDETERMINED
    assert verdict.vertices_used == 1
    assert verdict.frontier_size == 1


def test_vertex_budget_gives_undetermined(markoff_triple, markoff_mu):
    verdict = bq_test(markoff_triple, markoff_mu, budget=SearchBudget(max_vertices=1))
    assert verdict.undetermined
    assert verdict.frontier_size == 3
    assert verdict.vertices_used == 4


def test_segment_hit_rejects():
    verdict = bq_test(MarkoffTriple(0, 0, 2), MuParams(0, 0, 0, 4))
    assert verdict.rejected
    assert verdict.reason is RejectReason.SEGMENT_HIT
    assert verdict.witness == (ZERO, 0)
    assert verdict.vertices_used == 0


def test_degenerate_hit_rejects():
    mu = MuParams(0, 0, 1, 20)
    x = -math.sqrt(12 - 3 * math.sqrt(7))
    w = complex(np.roots([2 + x, -1, x * x - 20])[0])
    verdict = bq_test(MarkoffTriple(x, w, w), mu)
    assert verdict.rejected
    assert verdict.reason is RejectReason.DEGENERATE_HIT
    assert verdict.witness[0] == ZERO


def test_off_variety_triple_raises(markoff_mu):
    with pytest.raises(ResidualTooLarge):
        bq_test(MarkoffTriple(1, 1, 1), markoff_mu)


def test_omega_k(markoff_triple, markoff_mu):
    assert len(omega_k(markoff_triple, markoff_mu, 5)) == 3
    assert len(omega_k(markoff_triple, markoff_mu, 6)) == 6
    assert len(omega_k(markoff_triple, markoff_mu, 12)) == 6


def test_omega_k_errors(markoff_triple, markoff_mu):
    with pytest.raises(InvalidInput):
        omega_k(markoff_triple, markoff_mu, 1.5)
    with pytest.raises(NotBqAccepted):
        omega_k(MarkoffTriple(0, 0, 2), MuParams(0, 0, 0, 4), 5)


def test_quasi_convexity():
    assert check_quasi_convexity([])
    assert not check_quasi_convexity([(ZERO, 1), (Slope(2, 1), 1)])
    assert check_quasi_convexity([(ZERO, 1), (Slope(2, 1), 1), (INFINITY, 1)])


@pytest.mark.parametrize("mu", SEED_MUS)
def test_real_seeds_are_accepted(mu):
    seed = construct_real_seed(mu)
    verdict = bq_test(seed.triple, mu)
    assert verdict.accepted
    assert check_quasi_convexity(verdict.omega_l)


def test_growth_profile_counts(markoff_triple, markoff_mu):
    profile = fibonacci_growth_profile(markoff_triple, markoff_mu, max_depth=4)
    assert len(profile) == 3 + 3 + 6 + 12 + 24
    assert [s.value for s in profile if s.depth == 0] == [-3, -3, -3]
    assert fibonacci_growth_floor(profile) > 0


def test_growth_floor_vanishes_without_growth():
    profile = fibonacci_growth_profile(MarkoffTriple(0, 0, 2), MuParams(0, 0, 0, 4), max_depth=4)
    assert fibonacci_growth_floor(profile) == 0
    assert fibonacci_growth_floor(profile, min_depth=10) == math.inf


def test_series_diagnostic(markoff_triple, markoff_mu):
    sums = series_diagnostic(markoff_triple, markoff_mu, max_depth=4)
    assert [depth for depth, _ in sums] == [0, 1, 2, 3, 4]
    assert sums[0][1] == pytest.approx(1.0)
    totals = [total for _, total in sums]
    assert totals == sorted(totals)


def test_segment_values_always_reject(rng):
    tol = Tolerances()
    for _ in range(100):
        mu = MuParams(*(random_complex(rng) for _ in range(4)))
        t = on_variety(rng, mu, x=complex(rng.uniform(-2, 2)))
        verdict = bq_test(t, mu, tol)
        assert verdict.rejected
        assert verdict.reason is RejectReason.SEGMENT_HIT
        _, value = verdict.witness
        assert abs(value.imag) <= tol.eps_segment
        assert -2 - tol.eps_segment <= value.real <= 2 + tol.eps_segment


@pytest.mark.parametrize("mu", SEED_MUS)
def test_seed_sublevel_sets_are_connected(mu):
    seed = construct_real_seed(mu)
    constants = derived_constants(mu)
    verdict = bq_test(seed.triple, mu)
    assert verdict.fork_bound_violations == 0
    small = omega_k(seed.triple, mu, 2 + constants.alpha)
    assert len(small) == 1
    for k in (2 + constants.alpha, constants.big_l, 2 * constants.big_l):
        assert check_quasi_convexity(omega_k(seed.triple, mu, k))


@pytest.mark.parametrize("mu", SEED_MUS)
def test_doubling_the_vertex_budget_keeps_omega(mu):
    seed = construct_real_seed(mu)
    first = bq_test(seed.triple, mu)
    tight = bq_test(seed.triple, mu, budget=SearchBudget(max_vertices=first.vertices_used))
    doubled = bq_test(seed.triple, mu, budget=SearchBudget(max_vertices=2 * first.vertices_used))
    assert tight.accepted and doubled.accepted
    assert tight.omega_l == doubled.omega_l == first.omega_l


def test_descents_share_one_sink(rng, markoff_triple, markoff_mu):
    # no region of the Markoff map has modulus <= 2
    starts = {}
    while len(starts) < 10:
        state = base_state(markoff_triple, markoff_mu)
        for color in rng.integers(1, 4, size=int(rng.integers(2, 8))):
            state = step(state, int(color))
        starts[state.slopes] = state
    for state in starts.values():
        outcome = descend(state)
        assert isinstance(outcome, Sink)
        assert outcome.state.slopes == BASE_SLOPES
        assert outcome.fork_bound_violations == 0


def test_fork_checks_cover_the_descent(monkeypatch, markoff_mu):
    monkeypatch.setattr("bowditch.bq.fork_bound_holds", lambda *args, **kwargs: False)
    outcome = descend(base_state(MarkoffTriple(-6, -15, -87), markoff_mu))
    assert isinstance(outcome, Sink)
    assert outcome.steps > 0
    assert outcome.fork_bound_violations == outcome.steps
    verdict = bq_test(MarkoffTriple(-6, -15, -87), markoff_mu)
    assert verdict.fork_bound_violations > outcome.steps


def _regions_beyond(state, color, depth):
    # values of every region on the far side of the edge, to the given depth
    far = step(state, color)
    values = [far.coord(color)]
    if depth > 1:
        for other in COLORS:
            if other != color:
                values += _regions_beyond(far, other, depth - 1)
    return values


@pytest.mark.parametrize("mu, t", [
    (MuParams(0, 0, 0, 0), MarkoffTriple(-3, -3, -3)),
    *((mu, construct_real_seed(mu).triple) for mu in SEED_MUS),
])
def test_certified_edges_hide_no_small_region(mu, t):
    level = derived_constants(mu).big_l
    frontier = [base_state(t, mu)]
    certified = 0
    for _ in range(4):
        following = []
        for state in frontier:
            for color in COLORS:
                edge = directed_edge(state, color)
                if certify_escape(edge, level):
                    certified += 1
                    assert all(abs(v) > level for v in _regions_beyond(state, color, 4))
                following.append(step(state, color))
        frontier = following
    assert certified > 0


def test_certify_escape_needs_large_faces_and_an_inward_arrow(markoff_mu):
    state = base_state(MarkoffTriple(-6, -15, -87), markoff_mu)
    assert certify_escape(directed_edge(state, 1), 12)
    # a face of modulus 6
    assert not certify_escape(directed_edge(state, 2), 12)
    # the arrow points out toward -3
    assert not certify_escape(directed_edge(state, 3), 12)


def test_small_ray_rejection():
    mu = MuParams(0, 0, 0, 0)
    start = base_state(MarkoffTriple(1.5j, 3, solve_z(mu, 1.5j, 3, plus=False)), mu)
    # walk outward along the region of value 1.5i
    for color in (2, 3, 2, 3, 2, 3):
        start = step(start, color)
    assert abs(start.coord(1) - 1.5j) < 1e-12

    budget = SearchBudget(max_descent_steps=1)
    outcome = descend(start, budget=budget)
    assert isinstance(outcome, Rejected)
    assert outcome.reason is RejectReason.SMALL_RAY
    assert outcome.witness == (ZERO, start.coord(1))

    verdict = bq_test(start.triple, mu, budget=budget)
    assert verdict.rejected
    assert verdict.reason is RejectReason.SMALL_RAY


def test_near_degenerate_caveat_is_logged(caplog, markoff_triple, markoff_mu):
    # -3 lies at distance 1 from the degenerate root -2
    with caplog.at_level(logging.WARNING, logger="bowditch.bq"):
        verdict = bq_test(markoff_triple, markoff_mu, Tolerances(eps_degenerate=2e-3))
    assert verdict.accepted
    assert verdict.near_degenerate
    assert "degenerate locus" in caplog.text
