"""
The trivalent tree of mu-Markoff triples.

Vertices are triples; the three complementary regions around a vertex carry
colors 1, 2, 3 and are labelled by slopes in Q u {oo}. The base vertex has
slopes 0, oo and -1. Crossing the edge of color i replaces the color-i
coordinate by its theta-conjugate and the color-i slope by the other Farey
completion of the two slopes that are kept. No tree is ever stored: regions
are addressed by slope and reached by walking.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd

from markoff.algebra import COLORS, apply_theta, check_color, successor_colors
from markoff.errors import InvalidInput, StepBudgetExceeded

logger = logging.getLogger(__name__)

MAX_PATH_STEPS = 10**6


@dataclass(frozen=True, order=True)
class Slope:
    num: int
    den: int

    def __post_init__(self):
        if self.den < 0 or (self.den == 0 and self.num != 1) or gcd(abs(self.num), self.den) != 1:
            raise InvalidInput(f"slope {self.num}/{self.den} is not normalized")

    @classmethod
    def of(cls, num, den=1):
        """Builds a normalized slope from any integer pair other than (0, 0)."""
        num, den = int(num), int(den)
        if num == 0 and den == 0:
            raise InvalidInput("0/0 is not a slope")
        if den == 0:
            return cls(1, 0)
        if den < 0:
            num, den = -num, -den
        g = gcd(abs(num), den)
        return cls(num // g, den // g)

    @classmethod
    def parse(cls, text):
        """Parses 'p/q', 'p', 'inf' or '1/0'."""
        text = text.strip().lower()
        if text in ("inf", "oo", "infinity", "∞"):
            return cls(1, 0)
        try:
            if "/" in text:
                num, den = text.split("/")
                return cls.of(int(num), int(den))
            return cls.of(int(text))
        except ValueError as exc:
            raise InvalidInput(f"cannot parse slope {text!r}") from exc

    @property
    def is_infinite(self):
        return self.den == 0

    def extended(self):
        """Position on the extended real line, oo mapped to math.inf."""
        return math.inf if self.is_infinite else Fraction(self.num, self.den)

    def __str__(self):
        if self.is_infinite:
            return "inf"
        return str(self.num) if self.den == 1 else f"{self.num}/{self.den}"


ZERO = Slope(0, 1)
INFINITY = Slope(1, 0)
MINUS_ONE = Slope(-1, 1)
BASE_SLOPES = (ZERO, INFINITY, MINUS_ONE)


def farey_determinant(a, b):
    return a.num * b.den - b.num * a.den


def is_farey_triangle(slopes):
    a, b, c = slopes
    return all(abs(farey_determinant(u, v)) == 1 for u, v in ((a, b), (a, c), (b, c)))


def reflect_slopes(slopes, color):
    """
    Replaces the slope of `color` by the other Farey completion of the edge
    spanned by the two remaining slopes.
    """
    j, k = successor_colors(color)
    a, b = slopes[j - 1], slopes[k - 1]
    old = slopes[color - 1]
    plus = Slope.of(a.num + b.num, a.den + b.den)
    minus = Slope.of(a.num - b.num, a.den - b.den)
    new = minus if plus == old else plus
    result = list(slopes)
    result[color - 1] = new
    return tuple(result)


@dataclass(frozen=True)
class VertexState:
    triple: object
    slopes: tuple
    mu: object

    def coord(self, color):
        return self.triple.coord(color)

    def slope(self, color):
        return self.slopes[check_color(color) - 1]

    def color_of(self, slope):
        """Color of the region with the given slope, or None if not adjacent."""
        for color, label in zip(COLORS, self.slopes):
            if label == slope:
                return color
        return None

    def regions(self):
        return tuple((self.slopes[c - 1], self.coord(c)) for c in COLORS)


@dataclass(frozen=True)
class Face:
    color: int
    value: complex
    slope: Slope


@dataclass(frozen=True)
class DirectedEdgeInfo:
    color: int
    near_value: complex
    far_value: complex
    near_slope: Slope
    far_slope: Slope
    faces: tuple


class VertexKind(Enum):
    SINK = "sink"
    MERGE = "merge"
    FORK = "fork"
    SOURCE = "source"


def base_state(t, mu):
    return VertexState(triple=t, slopes=BASE_SLOPES, mu=mu)


def step(s, color):
    """
    Crosses the edge of `color` at s.
    """
    check_color(color)
    return VertexState(
        triple=apply_theta(s.triple, s.mu, color),
        slopes=reflect_slopes(s.slopes, color),
        mu=s.mu,
    )


def _arc_contains(slopes, color, target):
    # arc cut off by the edge opposite `color`: between the two other
    # slopes, on the side not containing slopes[color]
    j, k = successor_colors(color)
    lo, hi = sorted((slopes[j - 1].extended(), slopes[k - 1].extended()))
    own = slopes[color - 1].extended()
    t = target.extended()
    if lo < own < hi:
        return t < lo or t > hi
    return lo < t < hi


def farey_path(slopes, target, max_steps=MAX_PATH_STEPS):
    """
    Colors of the moves leading from the triangle `slopes` to a triangle
    containing `target`.
    """
    path = []
    while target not in slopes:
        if len(path) >= max_steps:
            raise StepBudgetExceeded(f"no vertex adjacent to slope {target} within {max_steps} steps")
        color = next(c for c in COLORS if _arc_contains(slopes, c, target))
        slopes = reflect_slopes(slopes, color)
        path.append(color)
    return path


def navigate_to_slope(s, target, max_steps=MAX_PATH_STEPS):
    """
    Walks from s to the nearest vertex adjacent to the region of slope `target`.
    """
    for color in farey_path(s.slopes, target, max_steps):
        s = step(s, color)
    return s


def trace_at_slope(t, mu, target, max_steps=MAX_PATH_STEPS):
    """
    Trace of the curve of slope `target` for the character with base triple t.

    Args:
        t: triple at the base vertex
        mu: parameters of the vertex equation
        target: Slope of the region to evaluate
        max_steps: path length budget

    Returns:
        the complex value of the region
    """
    s = navigate_to_slope(base_state(t, mu), target, max_steps)
    return s.coord(s.color_of(target))


def farey_depth(target):
    """Number of moves from the base vertex to a vertex adjacent to `target`."""
    return len(farey_path(BASE_SLOPES, target))


def fibonacci_weight(target):
    """Fibonacci function of the base edge between 0 and oo: |p| + |q|."""
    return abs(target.num) + target.den


def directed_edge(s, color):
    """
    Data of the edge of `color` at s, oriented away from s.
    """
    j, k = successor_colors(color)
    far = s.mu.param(color) - s.coord(j) * s.coord(k) - s.coord(color)
    return DirectedEdgeInfo(
        color=color,
        near_value=s.coord(color),
        far_value=far,
        near_slope=s.slope(color),
        far_slope=reflect_slopes(s.slopes, color)[color - 1],
        faces=tuple(Face(c, s.coord(c), s.slope(c)) for c in (j, k)),
    )


def points_away(edge, eps_tie=0.0):
    """
    True if the arrow on the edge points away from the near end, i.e. toward
    the smaller of the two end values. Ties go to the smaller slope.
    """
    near, far = abs(edge.near_value), abs(edge.far_value)
    if abs(far - near) <= eps_tie * max(near, far):
        return (edge.far_slope.num, edge.far_slope.den) < (edge.near_slope.num, edge.near_slope.den)
    return far < near


def classify_vertex(s, eps_tie=0.0):
    away = sum(points_away(directed_edge(s, c), eps_tie) for c in COLORS)
    return (VertexKind.SINK, VertexKind.MERGE, VertexKind.FORK, VertexKind.SOURCE)[away]


def fork_bound_holds(s, alpha, eps_tie=0.0):
    """
    Checks the fork inequalities at s.

    At a fork or source the smallest modulus is at most 2 + alpha, and for a
    region X whose two boundary edges at s both point away,
    |x| <= 2 + (|q| + |r|)/4 (parameters of the other two colors) unless one
    of the other two moduli is below 2. Vertices with at most one outgoing
    arrow always pass.
    """
    away = {c: points_away(directed_edge(s, c), eps_tie) for c in COLORS}
    if sum(away.values()) < 2:
        return True
    slack = 1 + 1e-9
    moduli = [abs(s.coord(c)) for c in COLORS]
    if min(moduli) > (2 + alpha) * slack:
        return False
    for color in COLORS:
        j, k = successor_colors(color)
        if away[j] and away[k]:
            bound = 2 + (abs(s.mu.param(j)) + abs(s.mu.param(k))) / 4
            others_small = abs(s.coord(j)) < 2 * slack or abs(s.coord(k)) < 2 * slack
            if abs(s.coord(color)) > bound * slack and not others_small:
                return False
    return True
