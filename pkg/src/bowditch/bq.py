"""
Deciding the Q-conditions for a mu-Markoff map.

The search runs in two phases. Descent follows arrows (toward smaller values)
from the given vertex until it reaches a sink. Expansion then explores the
tree breadth-first from the sink and stops at edges beyond which no region
can have modulus <= L:

  - an edge whose two faces both exceed L and whose arrow points back toward
    the explored part (certify_escape);
  - an edge running along the boundary of a single small region X once the
    neighbors of X are certified to grow past L for good (escape_index).

Any value on the real segment [-2, 2] or on the degenerate locus rejects.
When nothing is left to explore the map is accepted and the collected small
regions form Omega(L).
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from markoff.algebra import (
    COLORS,
    derived_constants,
    distance_to_degenerate,
    residual_scale,
    successor_colors,
    vertex_residual,
)
from markoff.dynamics import OrbitKind, escape_index, orbit_kind, recurrence_step, recurrence_step_back
from markoff.errors import InvalidInput, NotBqAccepted, ResidualTooLarge
from markoff.tree import (
    base_state,
    directed_edge,
    farey_determinant,
    fibonacci_weight,
    fork_bound_holds,
    points_away,
    reflect_slopes,
    step,
)

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-6
NEAR_DEGENERATE_FACTOR = 1e3
MAX_BOUNDARY_WALK = 10000


@dataclass(frozen=True)
class Tolerances:
    eps_segment: float = 1e-8
    eps_degenerate: float = 1e-8
    eps_tie: float = 0.0

    def __post_init__(self):
        if min(self.eps_segment, self.eps_degenerate, self.eps_tie) < 0:
            raise InvalidInput("tolerances must be non-negative")


@dataclass(frozen=True)
class SearchBudget:
    max_descent_steps: int = 10000
    max_vertices: int = 20000

    def __post_init__(self):
        if self.max_descent_steps <= 0 or self.max_vertices <= 0:
            raise InvalidInput("search budgets must be positive")


class VerdictKind(Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    UNDETERMINED = "undetermined"


class RejectReason(Enum):
    SEGMENT_HIT = "segment_hit"
    DEGENERATE_HIT = "degenerate_hit"
    SMALL_RAY = "small_ray"


@dataclass(frozen=True)
class AttractingTreeStats:
    sink_slopes: tuple = ()
    edges_in_t0: int = 0
    regions_le_2alpha: tuple = ()
    arrows_inward: bool = True


@dataclass(frozen=True)
class BqVerdict:
    kind: VerdictKind
    big_l: float
    omega_l: tuple = ()
    reason: RejectReason | None = None
    witness: tuple | None = None
    vertices_used: int = 0
    frontier_size: int = 0
    stats: AttractingTreeStats = field(default_factory=AttractingTreeStats)
    explored_regions: tuple = ()
    fork_bound_violations: int = 0
    near_degenerate: bool = False

    @property
    def accepted(self):
        return self.kind is VerdictKind.ACCEPTED

    @property
    def rejected(self):
        return self.kind is VerdictKind.REJECTED

    @property
    def undetermined(self):
        return self.kind is VerdictKind.UNDETERMINED


@dataclass(frozen=True)
class Sink:
    state: object
    steps: int
    stats: AttractingTreeStats
    fork_bound_violations: int = 0


@dataclass(frozen=True)
class Rejected:
    reason: RejectReason
    witness: tuple
    steps: int = 0


@dataclass(frozen=True)
class BudgetExceeded:
    steps: int
    running_min: tuple


def segment_hit(value, tol):
    """True if value lies within eps_segment of the real segment [-2, 2]."""
    eps = tol.eps_segment
    return abs(value.imag) <= eps and -2 - eps <= value.real <= 2 + eps


def degenerate_hit(value, mu, color, tol):
    return distance_to_degenerate(value, mu, color) <= tol.eps_degenerate


def _check_region(color, slope, value, mu, tol):
    if segment_hit(value, tol):
        return Rejected(RejectReason.SEGMENT_HIT, (slope, value))
    if degenerate_hit(value, mu, color, tol):
        return Rejected(RejectReason.DEGENERATE_HIT, (slope, value))
    return None


def _check_state(state, tol):
    # segment hits take precedence over degenerate hits
    for color in COLORS:
        if segment_hit(state.coord(color), tol):
            return Rejected(RejectReason.SEGMENT_HIT, (state.slope(color), state.coord(color)))
    for color in COLORS:
        if degenerate_hit(state.coord(color), state.mu, color, tol):
            return Rejected(RejectReason.DEGENERATE_HIT, (state.slope(color), state.coord(color)))
    return None


def _log_plus(value):
    return max(math.log(abs(value)), 0.0) if value else 0.0


def _fork_violation(state, alpha, tol):
    if fork_bound_holds(state, alpha, tol.eps_tie):
        return 0
    logger.warning("fork bound violated at %s", [str(s) for s in state.slopes])
    return 1


def descend(start, tol=None, budget=None):
    """
    Follows arrows from `start` to a sink.

    At each vertex the move is taken along an outgoing arrow; among several,
    the one leaving the smallest maximum of log+ moduli wins, then the lower
    color. The fork inequalities are checked at every vertex passed.

    Returns:
        Sink, Rejected or BudgetExceeded
    """
    tol = tol or Tolerances()
    budget = budget or SearchBudget()
    state = start
    hit = _check_state(state, tol)
    if hit is not None:
        return hit

    alpha = derived_constants(state.mu).alpha
    running_min = min(state.regions(), key=lambda region: abs(region[1]))
    steps = 0
    violations = 0
    while True:
        edges = [directed_edge(state, color) for color in COLORS]
        moves = [edge for edge in edges if points_away(edge, tol.eps_tie)]
        if not moves:
            logger.debug("sink %s reached after %d steps", [str(s) for s in state.slopes], steps)
            return Sink(state, steps, AttractingTreeStats(sink_slopes=state.slopes), violations)
        violations += _fork_violation(state, alpha, tol)
        if steps >= budget.max_descent_steps:
            if abs(running_min[1]) < 2:
                return Rejected(RejectReason.SMALL_RAY, running_min, steps)
            return BudgetExceeded(steps, running_min)

        def landing(edge):
            kept = [_log_plus(f.value) for f in edge.faces]
            return (max(kept + [_log_plus(edge.far_value)]), edge.color)

        edge = min(moves, key=landing)
        state = step(state, edge.color)
        steps += 1
        value = state.coord(edge.color)
        hit = _check_region(edge.color, state.slope(edge.color), value, state.mu, tol)
        if hit is not None:
            return Rejected(hit.reason, hit.witness, steps)
        if abs(value) < abs(running_min[1]):
            running_min = (state.slope(edge.color), value)


def certify_escape(edge, level):
    """
    True if nothing beyond the edge can have modulus <= level: both faces
    exceed level and the arrow points back toward the near end.
    """
    return all(abs(face.value) > level for face in edge.faces) and abs(edge.far_value) >= abs(edge.near_value)


def boundary_escape(state, edge, level, max_walk=MAX_BOUNDARY_WALK):
    """
    True if the edge runs along the boundary of exactly one small region X
    and every neighbor of X from the far end onward has modulus > level.

    Past the certified escape index the closed-form lower bound covers all
    neighbors; the indices before it are checked by walking.
    """
    small = [face for face in edge.faces if abs(face.value) <= level]
    if len(small) != 1:
        return False
    color = small[0].color
    x = small[0].value
    if orbit_kind(x) is not OrbitKind.LOXODROMIC:
        return False

    j, k = successor_colors(color)
    far = step(state, edge.color)
    u, w = far.coord(j), far.coord(k)
    # crossing color j again from the far end walks back toward `state`
    direction = -1 if edge.color == j else 1
    try:
        certified = escape_index(x, u, w, state.mu, color, level, direction, max_walk)
    except ArithmeticError:
        return False
    if certified is None:
        return False

    advance = recurrence_step if direction > 0 else recurrence_step_back
    for _ in range(certified):
        if abs(u) <= level or abs(w) <= level:
            return False
        u, w = advance(x, u, w, state.mu, color)
    return True


def _undetermined(level, used, frontier, stats=None):
    logger.debug("budget exhausted after %d vertices with %d open", used, frontier)
    return BqVerdict(
        kind=VerdictKind.UNDETERMINED,
        big_l=level,
        vertices_used=used,
        frontier_size=frontier,
        stats=stats or AttractingTreeStats(),
    )


def _expand(sink, level, big_l, alpha, tol, budget, descent_steps, descent_violations=0):
    mu = sink.mu
    visited = {sink.slopes}
    queue = deque([sink])
    regions = {}
    colors = {}
    traversed = []
    arrows_inward = True
    violations = descent_violations
    # vertices whose coordinates were computed: the sink and the far end of
    # every examined edge
    touched = 1

    while queue:
        state = queue.popleft()

        for color in COLORS:
            slope, value = state.slope(color), state.coord(color)
            if slope in regions:
                continue
            hit = _check_region(color, slope, value, mu, tol)
            if hit is not None:
                return BqVerdict(
                    kind=VerdictKind.REJECTED,
                    big_l=big_l,
                    reason=hit.reason,
                    witness=hit.witness,
                    vertices_used=descent_steps + touched,
                    stats=AttractingTreeStats(sink_slopes=sink.slopes),
                )
            regions[slope] = value
            colors[slope] = color

        violations += _fork_violation(state, alpha, tol)

        for color in COLORS:
            if reflect_slopes(state.slopes, color) in visited:
                continue
            edge = directed_edge(state, color)
            touched += 1
            if certify_escape(edge, level) or boundary_escape(state, edge, level):
                arrows_inward = arrows_inward and not points_away(edge, tol.eps_tie)
                continue
            nxt = step(state, color)
            visited.add(nxt.slopes)
            queue.append(nxt)
            traversed.append(edge)

        if touched > budget.max_vertices:
            stats = AttractingTreeStats(sink_slopes=sink.slopes)
            return _undetermined(big_l, descent_steps + touched, len(queue), stats)

    small = 2 + alpha
    regions_small = tuple(sorted(((s, v) for s, v in regions.items() if abs(v) <= small), key=lambda r: r[0]))
    small_slopes = {s for s, _ in regions_small}
    stats = AttractingTreeStats(
        sink_slopes=sink.slopes,
        edges_in_t0=sum(1 for e in traversed if any(f.slope in small_slopes for f in e.faces)),
        regions_le_2alpha=regions_small,
        arrows_inward=arrows_inward,
    )
    nearest = min(distance_to_degenerate(v, mu, colors[s]) for s, v in regions.items())
    near_degenerate = nearest <= NEAR_DEGENERATE_FACTOR * tol.eps_degenerate
    if near_degenerate:
        logger.warning("accepted map has a region %.3g from the degenerate locus of %s", nearest, mu)
    explored = tuple(sorted(regions.items(), key=lambda r: r[0]))
    verdict = BqVerdict(
        kind=VerdictKind.ACCEPTED,
        big_l=big_l,
        omega_l=tuple((s, v) for s, v in explored if abs(v) <= big_l),
        vertices_used=descent_steps + touched,
        stats=stats,
        explored_regions=explored,
        fork_bound_violations=violations,
        near_degenerate=near_degenerate,
    )
    logger.debug("accepted after %d vertices, |Omega(L)| = %d", verdict.vertices_used, len(verdict.omega_l))
    return verdict


def bq_test(t, mu, tol=None, budget=None, level=None):
    """
    Decides the Q-conditions for the map generated by triple t.

    Args:
        t: MarkoffTriple at the base vertex
        mu: MuParams
        tol: Tolerances
        budget: SearchBudget
        level: pruning level, raised to L(mu) if smaller

    Returns:
        BqVerdict
    """
    tol = tol or Tolerances()
    budget = budget or SearchBudget()
    residual = abs(vertex_residual(t, mu))
    if residual >= RESIDUAL_TOL * residual_scale(t, mu):
        raise ResidualTooLarge(f"vertex residual {residual:.3g} is too large for {t}")

    constants = derived_constants(mu)
    level = constants.big_l if level is None else max(level, constants.big_l)

    outcome = descend(base_state(t, mu), tol, budget)
    if isinstance(outcome, Rejected):
        return BqVerdict(
            kind=VerdictKind.REJECTED,
            big_l=constants.big_l,
            reason=outcome.reason,
            witness=outcome.witness,
            vertices_used=outcome.steps,
        )
    if isinstance(outcome, BudgetExceeded):
        return _undetermined(constants.big_l, outcome.steps, 1)
    return _expand(
        outcome.state, level, constants.big_l, constants.alpha, tol, budget,
        outcome.steps, outcome.fork_bound_violations,
    )


def omega_k(t, mu, k, tol=None, budget=None):
    """
    Regions whose value has modulus <= k, for an accepted map.
    """
    alpha = derived_constants(mu).alpha
    if k < (2 + alpha) * (1 - 1e-12):
        raise InvalidInput(f"k = {k} is below 2 + alpha = {2 + alpha}")
    verdict = bq_test(t, mu, tol, budget, level=k)
    if not verdict.accepted:
        raise NotBqAccepted(f"map is {verdict.kind.value}; Omega({k}) is not available")
    return [(s, v) for s, v in verdict.explored_regions if abs(v) <= k]


def check_quasi_convexity(regions):
    """
    True if the regions form a connected set; two regions share an edge of
    the tree exactly when their slopes are Farey neighbors.
    """
    slopes = [s for s, _ in regions]
    if not slopes:
        return True
    seen = {slopes[0]}
    stack = [slopes[0]]
    while stack:
        current = stack.pop()
        for other in slopes:
            if other not in seen and abs(farey_determinant(current, other)) == 1:
                seen.add(other)
                stack.append(other)
    return len(seen) == len(set(slopes))


@dataclass(frozen=True)
class GrowthSample:
    slope: object
    depth: int
    value: complex
    log_plus: float
    weight: int


def fibonacci_growth_profile(t, mu, max_depth=6):
    """
    Values of every region up to the given Farey depth, with log+|value| and
    the Fibonacci weight of the slope.
    """
    start = base_state(t, mu)
    samples = {}
    frontier = [(start, None)]
    for depth in range(max_depth + 1):
        following = []
        for state, came_by in frontier:
            for slope, value in state.regions():
                if slope not in samples and math.isfinite(abs(value)):
                    samples[slope] = GrowthSample(slope, depth, value, _log_plus(value), fibonacci_weight(slope))
            for color in COLORS:
                if color == came_by:
                    continue
                try:
                    following.append((step(state, color), color))
                except InvalidInput:
                    # value overflowed; nothing further down this branch
                    continue
        frontier = following
    return sorted(samples.values(), key=lambda sample: (sample.depth, sample.slope))


def fibonacci_growth_floor(samples, min_depth=3):
    """Minimum of log+|value| / weight over regions of depth >= min_depth."""
    ratios = [s.log_plus / s.weight for s in samples if s.depth >= min_depth]
    return min(ratios) if ratios else math.inf


def series_diagnostic(t, mu, exponent=1.0, max_depth=6):
    """
    Partial sums of |value|^(-exponent) over all regions up to each depth.
    """
    sums = []
    total = 0.0
    samples = fibonacci_growth_profile(t, mu, max_depth)
    for depth in range(max_depth + 1):
        total += sum(abs(s.value) ** -exponent for s in samples if s.depth == depth and s.value != 0)
        sums.append((depth, total))
    return sums
