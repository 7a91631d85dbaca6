"""
Trace algebra of the four-holed sphere.

A character is encoded by a triple (x, y, z) of traces of three simple closed
curves together with the parameters mu = (p, q, r, s) computed from the four
boundary traces. The triple satisfies the vertex equation

    x^2 + y^2 + z^2 + xyz = px + qy + rz + s

and every coordinate carries a color (1, 2, 3 for x, y, z).
"""
import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import linalg

from markoff.errors import DegenerateRootFailure, InvalidInput

logger = logging.getLogger(__name__)

COLORS = (1, 2, 3)

# exclusion radius around +-2 for M(mu)
PLUS_MINUS_TWO_TOL = 1e-8


def check_color(color):
    if color not in COLORS:
        raise InvalidInput(f"color must be 1, 2 or 3, got {color!r}")
    return color


def successor_colors(color):
    """
    Returns the two colors following `color` cyclically.

    For color 1 this is (2, 3); the neighbor recurrence around a region of
    color i alternates moves of the first and second returned colors.
    """
    check_color(color)
    return (color % 3 + 1, (color + 1) % 3 + 1)


def as_complex(value, name="value"):
    """
    Coerces a number to a finite Python complex.
    """
    try:
        z = complex(value)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{name} is not a number: {value!r}") from exc
    if not cmath.isfinite(z):
        raise InvalidInput(f"{name} must be finite, got {value!r}")
    return z


def _coerce_fields(instance, names):
    for name in names:
        object.__setattr__(instance, name, as_complex(getattr(instance, name), name))


@dataclass(frozen=True)
class MuParams:
    p: complex
    q: complex
    r: complex
    s: complex

    def __post_init__(self):
        _coerce_fields(self, ("p", "q", "r", "s"))

    def param(self, color):
        """Linear coefficient attached to the coordinate of `color`."""
        return (self.p, self.q, self.r)[check_color(color) - 1]

    def rotated(self, color):
        """
        Parameters seen from a region of `color`: the fixed parameter first,
        then the pair belonging to the successor colors.
        """
        j, k = successor_colors(color)
        return MuParams(self.param(color), self.param(j), self.param(k), self.s)

    def is_real(self, tol=0.0):
        return all(abs(v.imag) <= tol for v in (self.p, self.q, self.r, self.s))

    def as_tuple(self):
        return (self.p, self.q, self.r, self.s)


@dataclass(frozen=True)
class BoundaryTraces:
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        _coerce_fields(self, ("a", "b", "c", "d"))

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)


@dataclass(frozen=True)
class MarkoffTriple:
    x: complex
    y: complex
    z: complex

    def __post_init__(self):
        _coerce_fields(self, ("x", "y", "z"))

    def coord(self, color):
        return (self.x, self.y, self.z)[check_color(color) - 1]

    def replace(self, color, value):
        values = list(self.as_tuple())
        values[check_color(color) - 1] = value
        return MarkoffTriple(*values)

    def as_tuple(self):
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class DegenerateData:
    color: int
    quartic: tuple
    roots: tuple
    exclusions: tuple


@dataclass(frozen=True)
class DerivedConstants:
    alpha: float
    m: float
    big_m: float
    big_l: float


class Twist(Enum):
    """Dehn twists as products of two theta moves, named in composition order."""

    THETA23 = (2, 3)
    THETA31 = (3, 1)
    THETA12 = (1, 2)


def gt_map(tau):
    """
    Maps boundary traces (a, b, c, d) to the parameters of the vertex equation.
    """
    a, b, c, d = tau.as_tuple()
    return MuParams(
        a * b + c * d,
        a * d + b * c,
        a * c + b * d,
        4 - a * a - b * b - c * c - d * d - a * b * c * d,
    )


def vertex_residual(t, mu):
    """
    Returns LHS - RHS of the vertex equation; zero iff t is a mu-Markoff triple.
    """
    x, y, z = t.as_tuple()
    return x * x + y * y + z * z + x * y * z - (mu.p * x + mu.q * y + mu.r * z + mu.s)


def residual_scale(t, mu):
    """
    Sum of the moduli of all terms of the vertex equation, plus one.
    """
    x, y, z = t.as_tuple()
    terms = (x * x, y * y, z * z, x * y * z, mu.p * x, mu.q * y, mu.r * z, mu.s)
    return 1.0 + sum(abs(v) for v in terms)


def apply_theta(t, mu, color):
    """
    Replaces the coordinate of `color` by the other root of the vertex
    quadratic in that coordinate, e.g. x -> p - yz - x.
    """
    j, k = successor_colors(color)
    value = mu.param(color) - t.coord(j) * t.coord(k) - t.coord(color)
    return t.replace(color, value)


def apply_twist(t, mu, twist, power=1):
    """
    Applies a Dehn twist `power` times.

    Args:
        t: starting triple
        mu: parameters of the vertex equation
        twist: member of Twist; THETA23 applies theta_3 then theta_2
        power: integer, negative powers apply the inverse composition

    Returns:
        the twisted triple
    """
    outer, inner = Twist(twist).value
    order = (inner, outer) if power >= 0 else (outer, inner)
    for _ in range(abs(int(power))):
        for color in order:
            t = apply_theta(t, mu, color)
    return t


def quartic_coefficients(mu, color=1):
    """
    Coefficients, highest degree first, of the degenerate quartic of `color`.

    For color 1 this is
        -x^4 + p x^3 + (4+s) x^2 + (qr - 4p) x - (q^2 + r^2 + 4s);
    colors 2 and 3 use the cyclic substitutions of (p, q, r).
    """
    p, q, r, s = mu.rotated(color).as_tuple()
    return (-1 + 0j, p, 4 + s, q * r - 4 * p, -(q * q + r * r + 4 * s))


def kappa_coefficients(u, v):
    """Coefficients of x^2 - uvx + u^2 + v^2 - 4."""
    return (1 + 0j, -u * v, u * u + v * v - 4)


def _polish(coefs, roots):
    deriv = np.polyder(coefs)
    fx = np.polyval(coefs, roots)
    dfx = np.polyval(deriv, roots)
    step = np.divide(fx, dfx, out=np.zeros_like(fx), where=dfx != 0)
    polished = roots - step
    better = np.abs(np.polyval(coefs, polished)) <= np.abs(fx)
    return np.where(better, polished, roots)


def _snap_radius(coefs, point):
    # multiple roots at +-2 come out of the eigen solver smeared by ~eps^(1/k)
    scale = 1.0 + float(np.max(np.abs(coefs)))
    if abs(np.polyval(coefs, point)) > 1e-12 * scale:
        return 0.0
    if abs(np.polyval(np.polyder(coefs), point)) > 1e-9 * scale:
        return PLUS_MINUS_TWO_TOL
    return 1e-3


@lru_cache(maxsize=1024)
def degenerate_data(mu, color=1):
    """
    Computes the degenerate quartic of `color` and its roots.

    Roots come from the eigenvalues of the companion matrix, followed by one
    Newton step each. When +-2 is a root, computed roots within tolerance of
    it are snapped onto it; roots at +-2 are reported as exclusions.
    """
    check_color(color)
    quartic = quartic_coefficients(mu, color)
    coefs = np.array(quartic, dtype=complex)
    try:
        roots = linalg.eigvals(linalg.companion(coefs / coefs[0]))
    except (linalg.LinAlgError, ValueError) as exc:
        raise DegenerateRootFailure(f"eigen solver failed for {mu} color {color}") from exc
    if not np.all(np.isfinite(roots)):
        raise DegenerateRootFailure(f"non-finite roots for {mu} color {color}")
    roots = np.sort_complex(_polish(coefs, roots))

    exclusions = []
    for point in (2.0, -2.0):
        radius = _snap_radius(coefs, point)
        near = np.abs(roots - point) <= max(radius, PLUS_MINUS_TWO_TOL)
        moved = near & (roots != point)
        if radius > 0 and np.any(moved):
            logger.warning("snapping %d root(s) to %+g for %s color %d", int(moved.sum()), point, mu, color)
            roots = np.where(near, point + 0j, roots)
        exclusions.extend(complex(v) for v in roots[near])

    limit = 1e-9 * (1.0 + float(np.max(np.abs(coefs))))
    worst = float(np.max(np.abs(np.polyval(coefs, roots))))
    if worst >= limit:
        raise DegenerateRootFailure(f"root residual {worst:.3g} exceeds {limit:.3g} for {mu} color {color}")

    return DegenerateData(
        color=color,
        quartic=quartic,
        roots=tuple(complex(v) for v in roots),
        exclusions=tuple(exclusions),
    )


def degenerate_locus(mu):
    """
    S_mu as a mapping color -> roots of that color's quartic.
    """
    return {color: degenerate_data(mu, color).roots for color in COLORS}


def distance_to_degenerate(value, mu, color):
    """Distance from `value` to the nearest degenerate root of `color`."""
    return min(abs(value - root) for root in degenerate_data(mu, color).roots)


def _non_excluded(data):
    pool = list(data.exclusions)
    kept = []
    for root in data.roots:
        if root in pool:
            pool.remove(root)
        else:
            kept.append(root)
    return kept


@lru_cache(maxsize=1024)
def derived_constants(mu):
    """
    Computes alpha, the sink bound m, the center bound M and the search level L.

    Returns:
        DerivedConstants with big_l = max(2 + alpha, m, big_m + 1)
    """
    params = (mu.p, mu.q, mu.r)
    biggest = max(abs(v) for v in params)
    alpha = biggest / 2
    m = max(12.0, biggest, math.sqrt(12 * biggest), (12 * abs(mu.s)) ** (1 / 3))

    big_m = 0.0
    for color in COLORS:
        for x in _non_excluded(degenerate_data(mu, color)):
            denom = abs(4 - x * x)
            if denom == 0:
                continue
            for i in range(3):
                for j in range(3):
                    if i != j:
                        big_m = max(big_m, abs(2 * params[i] - x * params[j]) / denom)

    big_l = max(2 + alpha, m, big_m + 1)
    logger.debug("derived constants for %s: alpha=%g m=%g M=%g L=%g", mu, alpha, m, big_m, big_l)
    return DerivedConstants(alpha=alpha, m=m, big_m=big_m, big_l=big_l)
