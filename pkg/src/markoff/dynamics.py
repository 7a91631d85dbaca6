"""
Neighbor sequences around a fixed region.

Fix a region X of color i with value x. Walking along its boundary alternates
moves of the two successor colors (j, k) and produces the bi-infinite
sequences u_n (color j) and w_n (color k):

    u_{n+1} = p_j - x w_n - u_n
    w_{n+1} = p_k - x u_{n+1} - w_n

For color 1 these are the classical y_n, z_n. The linear part has trace
x^2 - 2, so the orbit is elliptic, parabolic or loxodromic according to x.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum

from markoff.algebra import as_complex, derived_constants, successor_colors
from markoff.errors import InvalidInput, NotLoxodromic, ParabolicCenterUndefined

logger = logging.getLogger(__name__)

KIND_TOL = 1e-12
MAX_ESCAPE_INDEX = 10**6


class OrbitKind(Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    LOXODROMIC = "loxodromic"


class WindowKind(Enum):
    FINITE = "finite"
    EMPTY = "empty"
    CONSTANT = "constant"
    UNBOUNDED_BOTH = "unbounded_both"
    UNBOUNDED_PLUS = "unbounded_plus"
    UNBOUNDED_MINUS = "unbounded_minus"


@dataclass(frozen=True)
class TwistSpectrum:
    x: complex
    delta: complex
    lam: complex
    lam_inv: complex
    cap_lam: complex
    cap_lam_inv: complex
    kind: OrbitKind


@dataclass(frozen=True)
class ConicCenter:
    frak_y: complex
    frak_z: complex


@dataclass(frozen=True)
class OrbitCoefficients:
    a_coef: complex
    b_coef: complex


@dataclass(frozen=True)
class BoundedWindow:
    """
    Index set {n : |u_n| <= r and |w_n| <= r}.

    n1 and n2 are the extreme members; UNBOUNDED_PLUS only has n1 and
    UNBOUNDED_MINUS only has n2.
    """

    kind: WindowKind
    n1: int | None = None
    n2: int | None = None


def orbit_kind(x):
    if abs(x - 2) <= KIND_TOL or abs(x + 2) <= KIND_TOL:
        return OrbitKind.PARABOLIC
    if abs(x.imag) <= KIND_TOL * (1 + abs(x.real)) and -2 < x.real < 2:
        return OrbitKind.ELLIPTIC
    return OrbitKind.LOXODROMIC


def twist_spectrum(x):
    """
    Eigen-data of the twist around a region of value x.

    delta is the principal square root of x^2 - 4, cap_lam = (x + delta)/2 and
    lam = cap_lam^2. The reciprocal of whichever of (x +- delta)/2 is larger
    is used for the other one.
    """
    x = as_complex(x, "x")
    delta = cmath.sqrt(x * x - 4)
    plus, minus = (x + delta) / 2, (x - delta) / 2
    if abs(plus) >= abs(minus):
        cap, cap_inv = plus, 1 / plus
    else:
        cap, cap_inv = 1 / minus, minus
    return TwistSpectrum(
        x=x,
        delta=delta,
        lam=cap * cap,
        lam_inv=cap_inv * cap_inv,
        cap_lam=cap,
        cap_lam_inv=cap_inv,
        kind=orbit_kind(x),
    )


def _pair(mu, color):
    j, k = successor_colors(color)
    return mu.param(j), mu.param(k)


def conic_center(x, mu, color=1):
    """
    Fixed point of the affine twist acting on the neighbors of a region of `color`.
    """
    x = as_complex(x, "x")
    if orbit_kind(x) is OrbitKind.PARABOLIC:
        raise ParabolicCenterUndefined(f"conic center undefined at x = {x}")
    pj, pk = _pair(mu, color)
    denom = 4 - x * x
    return ConicCenter(frak_y=(2 * pj - x * pk) / denom, frak_z=(2 * pk - x * pj) / denom)


def recurrence_step(x, u, w, mu, color=1):
    """One step n -> n+1 of the neighbor recurrence."""
    pj, pk = _pair(mu, color)
    u = pj - x * w - u
    return u, pk - x * u - w


def recurrence_step_back(x, u, w, mu, color=1):
    """One step n -> n-1 of the neighbor recurrence."""
    pj, pk = _pair(mu, color)
    w = pk - x * u - w
    return pj - x * w - u, w


def orbit_coefficients(x, y0, z0, mu, color=1):
    """
    Coefficients A, B of the closed form

        u_n = A cap_lam^(2n) + B cap_lam^(-2n) + frak_y
        w_n = -(A cap_lam^(2n+1) + B cap_lam^(-2n-1)) + frak_z
    """
    spec = twist_spectrum(x)
    if spec.kind is not OrbitKind.LOXODROMIC:
        raise NotLoxodromic(f"x = {x} is {spec.kind.value}")
    center = conic_center(x, mu, color)
    dy = as_complex(y0, "y0") - center.frak_y
    dz = as_complex(z0, "z0") - center.frak_z
    gap = spec.cap_lam - spec.cap_lam_inv
    return OrbitCoefficients(
        a_coef=-(spec.cap_lam_inv * dy + dz) / gap,
        b_coef=(spec.cap_lam * dy + dz) / gap,
    )


def ab_product_formula(x, mu, color=1):
    """
    The product AB as a function of x alone (independent of the seed).
    """
    x = as_complex(x, "x")
    own = mu.param(color)
    pj, pk = _pair(mu, color)
    denom = 4 - x * x
    return (own * x + mu.s - x * x + (pj * pj + pk * pk - x * pj * pk) / denom) / denom


def _cap_power(spec, e):
    if e >= 0:
        return spec.cap_lam**e
    return spec.cap_lam_inv ** (-e)


def _term(coef, spec, e):
    return 0j if coef == 0 else coef * _cap_power(spec, e)


def closed_form_point(x, coefs, mu, color=1, n=0):
    """
    (u_n, w_n) from given closed-form coefficients, e.g. with a coefficient
    known to vanish set to exactly zero.
    """
    spec = twist_spectrum(x)
    if spec.kind is not OrbitKind.LOXODROMIC:
        raise NotLoxodromic(f"x = {x} is {spec.kind.value}")
    center = conic_center(x, mu, color)
    n = int(n)
    u = _term(coefs.a_coef, spec, 2 * n) + _term(coefs.b_coef, spec, -2 * n) + center.frak_y
    w = -(_term(coefs.a_coef, spec, 2 * n + 1) + _term(coefs.b_coef, spec, -2 * n - 1)) + center.frak_z
    return u, w


def neighbor_sequence(x, y0, z0, mu, color=1, n=0):
    """
    Returns (u_n, w_n) of the neighbor sequence through (y0, z0).

    Loxodromic x uses the closed form; elliptic and parabolic x iterate the
    recurrence |n| times.
    """
    x = as_complex(x, "x")
    y0, z0 = as_complex(y0, "y0"), as_complex(z0, "z0")
    n = int(n)
    if n == 0:
        return y0, z0

    spec = twist_spectrum(x)
    if spec.kind is OrbitKind.LOXODROMIC:
        return closed_form_point(x, orbit_coefficients(x, y0, z0, mu, color), mu, color, n)

    advance = recurrence_step if n > 0 else recurrence_step_back
    u, w = y0, z0
    for _ in range(abs(n)):
        u, w = advance(x, u, w, mu, color)
    return u, w


def _log_modulus(value):
    return -math.inf if value == 0 else math.log(abs(value))


def _exp(value):
    return 0.0 if value == -math.inf else math.exp(min(value, 700.0))


def _term_logs(log_a, log_b, log_g, n):
    # log-moduli of the A and B terms of u_n and of w_n
    return [(log_a + e * log_g, log_b - e * log_g) for e in (2 * n, 2 * n + 1)]


def _escapes_at(log_a, log_b, log_g, grows_a, center, r, n):
    offsets = (abs(center.frak_y), abs(center.frak_z))
    for (ta, tb), offset in zip(_term_logs(log_a, log_b, log_g, n), offsets):
        grow, decay = (ta, tb) if grows_a else (tb, ta)
        if _exp(grow) - _exp(decay) - offset <= r:
            return False
    return True


def _escape_from(spec, coefs, center, r, direction, max_index):
    log_g = math.log(abs(spec.cap_lam))
    if log_g == 0:
        return None
    log_a, log_b = _log_modulus(coefs.a_coef), _log_modulus(coefs.b_coef)
    grows_a = (direction > 0) == (log_g > 0)
    log_grow = log_a if grows_a else log_b
    if log_grow == -math.inf:
        return None

    rate = 2 * abs(log_g)
    k = max(0, math.floor((math.log(r) - log_grow - abs(log_g)) / rate) - 1)
    while k <= max_index:
        if _escapes_at(log_a, log_b, log_g, grows_a, center, r, direction * k):
            return k
        k += 1
    logger.debug("no escape index below %d for x=%s", max_index, spec.x)
    return None


def escape_index(x, y0, z0, mu, color, r, direction, max_index=MAX_ESCAPE_INDEX):
    """
    Certified escape along the boundary of a loxodromic region.

    The bound |u_n| >= |growing term| - |decaying term| - |center| increases
    monotonically in the given direction, so once it exceeds r it does so
    for good.

    Args:
        x, y0, z0: region value and the neighbor pair at index 0
        mu: parameters of the vertex equation
        color: color of the region
        r: threshold
        direction: +1 for n -> +oo, -1 for n -> -oo
        max_index: give up beyond this index

    Returns:
        smallest k >= 0 such that both neighbors have modulus > r at every
        index n with direction * n >= k, or None when the growing coefficient
        vanishes or k exceeds max_index
    """
    spec = twist_spectrum(x)
    coefs = orbit_coefficients(x, y0, z0, mu, color)
    center = conic_center(x, mu, color)
    return _escape_from(spec, coefs, center, r, direction, max_index)


def _decaying_tail(spec, coefs, center, r, direction, max_index):
    # growing coefficient is zero: the tail converges to the center and ends
    # up either entirely outside (False) or entirely inside (True) radius r
    log_g = math.log(abs(spec.cap_lam))
    log_a, log_b = _log_modulus(coefs.a_coef), _log_modulus(coefs.b_coef)
    grows_a = (direction > 0) == (log_g > 0)
    for k in range(max_index + 1):
        sizes = [_exp(tb if grows_a else ta) for ta, tb in _term_logs(log_a, log_b, log_g, direction * k)]
        moduli = (abs(center.frak_y), abs(center.frak_z))
        if any(c - size > r for c, size in zip(moduli, sizes)):
            return k, False
        if all(c + size <= r for c, size in zip(moduli, sizes)):
            return k, True
    return None, None


def _members(x, y0, z0, mu, color, r, lo, hi):
    return [
        n for n in range(lo, hi + 1)
        if all(abs(v) <= r for v in neighbor_sequence(x, y0, z0, mu, color, n))
    ]


def _finite_or_empty(members):
    if not members:
        return BoundedWindow(WindowKind.EMPTY)
    return BoundedWindow(WindowKind.FINITE, members[0], members[-1])


def _parabolic_window(x, y0, z0, mu, color, r):
    # the unipotent recurrence makes u_n and w_n quadratic polynomials in n
    samples = [(y0, z0)]
    for _ in range(2):
        samples.append(recurrence_step(x, *samples[-1], mu, color))
    scale = 1e-12 * (1 + abs(y0) + abs(z0))
    bound = None
    for idx in (0, 1):
        c0, c1, c2 = (sample[idx] for sample in samples)
        a = (c2 - 2 * c1 + c0) / 2
        b = c1 - c0 - a
        if abs(a) > scale:
            n_max = (abs(b) + math.sqrt(abs(b) ** 2 + 4 * abs(a) * (abs(c0) + r))) / (2 * abs(a))
        elif abs(b) > scale:
            n_max = (abs(c0) + r) / abs(b)
        elif abs(c0) > r:
            return BoundedWindow(WindowKind.EMPTY)
        else:
            continue
        bound = n_max if bound is None else min(bound, n_max)
    if bound is None:
        return BoundedWindow(WindowKind.CONSTANT)
    n_max = math.ceil(bound)
    return _finite_or_empty(_members(x, y0, z0, mu, color, r, -n_max, n_max))


def bounded_window(x, y0, z0, mu, color=1, r=None, max_index=MAX_ESCAPE_INDEX):
    """
    Finds the indices at which both neighbors of the region have modulus <= r.

    Args:
        x, y0, z0: region value and neighbor pair at index 0
        mu: parameters of the vertex equation
        color: color of the region
        r: radius, at least 2 + alpha (defaults to 2 + alpha)
        max_index: scan cap for slowly growing orbits

    Returns:
        BoundedWindow
    """
    x, y0, z0 = as_complex(x, "x"), as_complex(y0, "y0"), as_complex(z0, "z0")
    alpha = derived_constants(mu).alpha
    if r is None:
        r = 2 + alpha
    if r < (2 + alpha) * (1 - 1e-12):
        raise InvalidInput(f"radius {r} is below 2 + alpha = {2 + alpha}")

    spec = twist_spectrum(x)
    if spec.kind is OrbitKind.ELLIPTIC:
        return BoundedWindow(WindowKind.UNBOUNDED_BOTH)
    if spec.kind is OrbitKind.PARABOLIC:
        return _parabolic_window(x, y0, z0, mu, color, r)

    coefs = orbit_coefficients(x, y0, z0, mu, color)
    center = conic_center(x, mu, color)
    tiny = 1e-12 * (1 + abs(y0) + abs(z0) + abs(center.frak_y) + abs(center.frak_z))
    a_coef = 0j if abs(coefs.a_coef) <= tiny else coefs.a_coef
    b_coef = 0j if abs(coefs.b_coef) <= tiny else coefs.b_coef
    if not a_coef and not b_coef:
        inside = abs(center.frak_y) <= r and abs(center.frak_z) <= r
        return BoundedWindow(WindowKind.CONSTANT if inside else WindowKind.EMPTY)
    coefs = OrbitCoefficients(a_coef, b_coef)

    # A drives n -> +oo when |cap_lam| > 1, B drives n -> -oo, and vice versa
    expanding = abs(spec.cap_lam) > 1
    growing = {1: a_coef if expanding else b_coef, -1: b_coef if expanding else a_coef}
    tails = {}
    for direction in (1, -1):
        if growing[direction]:
            tail = (_escape_from(spec, coefs, center, r, direction, max_index), False)
        else:
            tail = _decaying_tail(spec, coefs, center, r, direction, max_index)
        if tail[0] is None:
            raise InvalidInput(f"window for x = {x} extends beyond {max_index} indices")
        tails[direction] = tail

    (k_plus, in_plus), (k_minus, in_minus) = tails[1], tails[-1]
    members = _members(x, y0, z0, mu, color, r, -k_minus, k_plus)
    if in_plus:
        return BoundedWindow(WindowKind.UNBOUNDED_PLUS, n1=members[0] if members else k_plus)
    if in_minus:
        return BoundedWindow(WindowKind.UNBOUNDED_MINUS, n2=members[-1] if members else -k_minus)
    return _finite_or_empty(members)
