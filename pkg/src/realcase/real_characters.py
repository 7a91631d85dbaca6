"""
Real characters of the four-holed sphere.

For real boundary traces tau = (a, b, c, d) the real relative character
variety splits according to how many traces lie in [-2, 2] and to the sign
of abcd. When (p, q, r) = (0, 0, 0) the slice is a one-holed torus slice and
the classical regimes in s apply; otherwise a domain of discontinuity exists
and an explicit BQ character can be written down.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

from markoff.algebra import COLORS, MarkoffTriple, MuParams, gt_map, successor_colors, vertex_residual
from markoff.errors import NonRealInput, SeedNotAvailable

logger = logging.getLogger(__name__)

REAL_TOL = 1e-12
ZERO_TOL = 1e-12
ERGODIC_S_RANGE = (4.0, 20.0)
SEED_Y_FLOOR = 33.0
MAX_DOUBLINGS = 60


class TopologyCase(Enum):
    QUADRUPLY_PUNCTURED_SPHERE = "QuadruplyPuncturedSphere"
    TRIPLY_PUNCTURED_TORUS_PLUS_DISC = "TriplyPuncturedTorusPlusDisc"
    TRIPLY_PUNCTURED_SPHERE_PLUS_DISC = "TriplyPuncturedSpherePlusDisc"
    ANNULUS_PLUS_TWO_DISCS = "AnnulusPlusTwoDiscs"
    FOUR_DISCS = "FourDiscs"
    FOUR_DISCS_PLUS_SPHERE = "FourDiscsPlusSphere"


class ErgodicityVerdict(Enum):
    ERGODIC_WHOLE_SLICE = "ErgodicWholeSlice"
    HAS_DOMAIN_OF_DISCONTINUITY = "HasDomainOfDiscontinuity"


class TorusRegime(Enum):
    """Dynamics on the real slice when p = q = r = 0, by the value of s."""

    FOUR_PROPER_COMPONENTS = "four_proper_components"
    FOUR_PROPER_PLUS_COMPACT_ERGODIC = "four_proper_plus_compact_ergodic"
    ERGODIC = "ergodic"
    DOMAIN_PLUS_ERGODIC_COMPLEMENT = "domain_plus_ergodic_complement"


EULER_NOTES = {
    TopologyCase.QUADRUPLY_PUNCTURED_SPHERE: ("relative Euler class +-1",),
    TopologyCase.TRIPLY_PUNCTURED_TORUS_PLUS_DISC: (
        "triply punctured torus: relative Euler class 0",
        "disc: maximal relative Euler class +-2 (hyperbolic structures with geodesic boundary)",
    ),
}

_CASE_BY_COUNT = {
    1: TopologyCase.TRIPLY_PUNCTURED_SPHERE_PLUS_DISC,
    2: TopologyCase.ANNULUS_PLUS_TWO_DISCS,
    3: TopologyCase.FOUR_DISCS,
    4: TopologyCase.FOUR_DISCS_PLUS_SPHERE,
}


@dataclass(frozen=True)
class RealTopology:
    n_in_segment: int
    case: TopologyCase
    euler_note: tuple
    abcd: float


@dataclass(frozen=True)
class ErgodicityDecision:
    verdict: ErgodicityVerdict
    p: complex
    q: complex
    r: complex
    s: complex
    rationale: str
    regime: TorusRegime | None = None

    @property
    def ergodic(self):
        return self.verdict is ErgodicityVerdict.ERGODIC_WHOLE_SLICE


@dataclass(frozen=True)
class RealSeed:
    """
    A real BQ seed. `role_color` is the color carrying the value -2 - epsilon;
    `mirrored` means the two other coordinates were negated.
    """

    triple: MarkoffTriple
    role_color: int
    mirrored: bool
    y: float
    epsilon: float


def _real_values(values, name):
    reals = []
    for value in values:
        value = complex(value)
        if abs(value.imag) > REAL_TOL * (1 + abs(value.real)) or not math.isfinite(value.real):
            raise NonRealInput(f"{name} must be real, got {value}")
        reals.append(value.real)
    return reals


def classify_real(tau):
    """
    Topology of the real relative character variety for boundary traces tau.

    Entries equal to +-2 count as lying in the segment.
    """
    a, b, c, d = _real_values(tau.as_tuple(), "boundary traces")
    n = sum(1 for v in (a, b, c, d) if -2 <= v <= 2)
    abcd = a * b * c * d
    if n == 0:
        case = TopologyCase.QUADRUPLY_PUNCTURED_SPHERE if abcd < 0 else TopologyCase.TRIPLY_PUNCTURED_TORUS_PLUS_DISC
    else:
        case = _CASE_BY_COUNT[n]
    return RealTopology(n_in_segment=n, case=case, euler_note=EULER_NOTES.get(case, ()), abcd=abcd)


def _torus_regime(s):
    lo, hi = ERGODIC_S_RANGE
    slack = ZERO_TOL * (1 + abs(s))
    if s < 0:
        return TorusRegime.FOUR_PROPER_COMPONENTS
    if s < lo - slack:
        return TorusRegime.FOUR_PROPER_PLUS_COMPACT_ERGODIC
    if s <= hi + slack:
        return TorusRegime.ERGODIC
    return TorusRegime.DOMAIN_PLUS_ERGODIC_COMPLEMENT


def _equal_moduli_or_three_zeros(values):
    moduli = [abs(v) for v in values]
    tol = 1e-6 * (1 + max(moduli))
    equal = max(moduli) - min(moduli) <= tol and math.prod(values) <= tol
    three_zeros = sum(1 for m in moduli if m <= tol) >= 3
    return equal or three_zeros


def ergodicity_decision(tau):
    """
    Decides whether the mapping class group acts ergodically on the whole
    real slice for boundary traces tau.

    The criterion is (p, q, r) = 0 and s in [4, 20], bounds included.
    """
    values = _real_values(tau.as_tuple(), "boundary traces")
    mu = gt_map(tau)
    p, q, r, s = mu.as_tuple()
    scale = 1 + max(abs(v) for v in values) ** 2
    if max(abs(p), abs(q), abs(r)) > ZERO_TOL * scale:
        return ErgodicityDecision(
            verdict=ErgodicityVerdict.HAS_DOMAIN_OF_DISCONTINUITY,
            p=p, q=q, r=r, s=s,
            rationale="(p, q, r) != 0: real BQ characters exist and form an open domain of discontinuity",
        )

    regime = _torus_regime(s.real)
    if regime is not TorusRegime.ERGODIC:
        return ErgodicityDecision(
            verdict=ErgodicityVerdict.HAS_DOMAIN_OF_DISCONTINUITY,
            p=p, q=q, r=r, s=s,
            rationale=f"p = q = r = 0 with s = {s.real:g} outside [4, 20]",
            regime=regime,
        )

    assert _equal_moduli_or_three_zeros(values), f"p = q = r = 0 but {values} is not of the expected form"
    return ErgodicityDecision(
        verdict=ErgodicityVerdict.ERGODIC_WHOLE_SLICE,
        p=p, q=q, r=r, s=s,
        rationale=(
            f"p = q = r = 0 with s = {s.real:g} in [4, 20]; bounds taken inclusive, "
            "i.e. 2 <= |a| <= sqrt(2(1 + sqrt 5)) or a = 0"
        ),
        regime=regime,
    )


def default_seed_y(mu):
    return max(SEED_Y_FLOOR, 10 * (1 + sum(abs(v) for v in mu.as_tuple())))


def seed_epsilon(mu, y):
    """
    The small root epsilon of the vertex equation at (-2 - epsilon, y, y),
    for real parameters in the frame where q, r <= 0; None when the root is
    not real or not positive.
    """
    p, q, r, s = (v.real for v in mu.as_tuple())
    lead = y * y - p - 4
    disc = y**4 - 8 * y * y - 2 * p * y * y + 4 * (q + r) * y + p * p + 4 * s
    const = 4 + 2 * p - (q + r) * y - s
    if disc < 0 or lead <= 0 or const <= 0:
        return None
    # product of roots over the larger root avoids cancellation
    return 2 * const / (lead + math.sqrt(disc))


def _role_color(mu):
    for color in COLORS:
        j, k = successor_colors(color)
        pair = (mu.param(j).real, mu.param(k).real)
        if pair == (0.0, 0.0):
            continue
        if all(v <= 0 for v in pair):
            return color, False
        if all(v >= 0 for v in pair):
            return color, True
    raise SeedNotAvailable(f"no two of (p, q, r) share a sign for {mu}")


def construct_real_seed(mu, y=None):
    """
    Builds a real BQ character (-2 - epsilon, y, y) in a suitable color frame.

    Args:
        mu: real MuParams with (p, q, r) != 0
        y: neighbor value; when omitted a default is doubled until the
            construction applies

    Returns:
        RealSeed with the triple in the original color order
    """
    p, q, r, s = _real_values(mu.as_tuple(), "mu")
    if max(abs(p), abs(q), abs(r)) == 0:
        raise SeedNotAvailable("(p, q, r) = 0: no real BQ seed is available")
    mu = MuParams(p, q, r, s)

    color, mirrored = _role_color(mu)
    j, k = successor_colors(color)
    sign = -1 if mirrored else 1
    frame = MuParams(mu.param(color), sign * mu.param(j), sign * mu.param(k), s)

    if y is not None:
        candidates = [float(y)]
    else:
        start = default_seed_y(mu)
        candidates = [start * 2**i for i in range(MAX_DOUBLINGS + 1)]

    for value in candidates:
        if value <= 0 or not math.isfinite(value):
            continue
        epsilon = seed_epsilon(frame, value)
        if epsilon is None:
            continue
        coords = {color: -2 - epsilon, j: sign * value, k: sign * value}
        triple = MarkoffTriple(*(coords[c] for c in COLORS))
        residual = abs(vertex_residual(triple, mu))
        if residual >= 1e-9 * value * value:
            logger.warning("seed residual %.3g too large at y=%g", residual, value)
            continue
        logger.debug("real seed for %s: color %d, y=%g, epsilon=%.6g", mu, color, value, epsilon)
        return RealSeed(triple=triple, role_color=color, mirrored=mirrored, y=value, epsilon=epsilon)

    raise SeedNotAvailable(f"seed construction does not apply for {mu} at y in {candidates[0]:g}..{candidates[-1]:g}")
