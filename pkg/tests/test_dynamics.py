import math

import numpy as np
import pytest

from conftest import random_complex, solve_z
from markoff.algebra import MuParams
from markoff.dynamics import (
    OrbitCoefficients,
    OrbitKind,
    WindowKind,
    ab_product_formula,
    bounded_window,
    closed_form_point,
    conic_center,
    escape_index,
    neighbor_sequence,
    orbit_coefficients,
    recurrence_step,
    recurrence_step_back,
    twist_spectrum,
)
from markoff.errors import InvalidInput, NotLoxodromic, ParabolicCenterUndefined

EXAMPLE_MU = MuParams(0, 0, 1, 20)
# a color-1 degenerate root
EXAMPLE_X = -math.sqrt(12 - 3 * math.sqrt(7))
EXAMPLE_FRAK_Y = (8 + 3 * math.sqrt(7)) * math.sqrt(12 - 3 * math.sqrt(7))
EXAMPLE_FRAK_Z = 16 + 6 * math.sqrt(7)


def random_loxodromic(rng):
    # imaginary part bounded away from zero keeps |cap_lam| away from 1
    return complex(rng.uniform(-4, 4), rng.uniform(0.5, 2) * rng.choice([-1, 1]))


def example_seed():
    # y = z on the conic: (2 + x) w^2 - w + (x^2 - 20) = 0
    roots = [complex(w) for w in np.roots([2 + EXAMPLE_X, -1, EXAMPLE_X**2 - 20])]
    return max(roots, key=abs)


@pytest.mark.parametrize("x, kind", [
    (1, OrbitKind.ELLIPTIC),
    (0, OrbitKind.ELLIPTIC),
    (2, OrbitKind.PARABOLIC),
    (-2, OrbitKind.PARABOLIC),
    (3, OrbitKind.LOXODROMIC),
    (1 + 1j, OrbitKind.LOXODROMIC),
])
def test_orbit_kinds(x, kind):
    assert twist_spectrum(x).kind is kind


def test_twist_spectrum_values():
    spec = twist_spectrum(3)
    assert spec.cap_lam == pytest.approx((3 + math.sqrt(5)) / 2)
    assert spec.lam == pytest.approx((7 + 3 * math.sqrt(5)) / 2)
    assert spec.lam * spec.lam_inv == pytest.approx(1)
    assert spec.cap_lam + spec.cap_lam_inv == pytest.approx(3)


def test_recurrence_steps_are_inverse(rng):
    mu = MuParams(*(random_complex(rng) for _ in range(4)))
    for color in (1, 2, 3):
        x, u, w = (random_complex(rng) for _ in range(3))
        back = recurrence_step_back(x, *recurrence_step(x, u, w, mu, color), mu, color)
        assert back == pytest.approx((u, w), abs=1e-12)


def test_closed_form_matches_recurrence(rng):
    for _ in range(200):
        mu = MuParams(*(random_complex(rng, 2) for _ in range(4)))
        color = int(rng.integers(1, 4))
        x, y0, z0 = random_loxodromic(rng), random_complex(rng), random_complex(rng)
        for advance, sign in ((recurrence_step, 1), (recurrence_step_back, -1)):
            u, w = y0, z0
            for n in range(1, 51):
                u, w = advance(x, u, w, mu, color)
                expected = pytest.approx((u, w), rel=1e-8, abs=1e-8)
                assert neighbor_sequence(x, y0, z0, mu, color, sign * n) == expected


def test_elliptic_orbits_stay_bounded(rng):
    mu = MuParams(0, 0, 0, 0)
    for _ in range(10):
        x = complex(rng.uniform(-1.6, 1.6))
        u, w = random_complex(rng), random_complex(rng)
        start = max(abs(u), abs(w))
        peak = start
        for _ in range(10**4):
            u, w = recurrence_step(x, u, w, mu, 1)
            peak = max(peak, abs(u), abs(w))
        assert peak < 10 * start


def test_coefficient_product_depends_on_x_only(rng):
    for _ in range(50):
        mu = MuParams(*rng.uniform(-3, 3, 4))
        x = complex(rng.uniform(2.5, 5) * rng.choice([-1, 1]), rng.uniform(-1, 1))
        y = random_complex(rng)
        z = solve_z(mu, x, y)
        coefs = orbit_coefficients(x, y, z, mu, 1)
        expected = ab_product_formula(x, mu, 1)
        assert coefs.a_coef * coefs.b_coef == pytest.approx(expected, rel=1e-7, abs=1e-9)


@pytest.mark.parametrize("s", [4, 20, -7 + 3j])
def test_product_without_linear_terms(rng, s):
    mu = MuParams(0, 0, 0, s)
    for _ in range(100):
        x = random_loxodromic(rng)
        y = random_complex(rng)
        z = solve_z(mu, x, y)
        coefs = orbit_coefficients(x, y, z, mu, 1)
        expected = (x * x - s) / (x * x - 4)
        roundoff = 1e-12 * (abs(y) ** 2 + abs(z) ** 2 + abs(x * y * z)) / abs(x * x - 4)
        assert abs(coefs.a_coef * coefs.b_coef - expected) <= 1e-9 * abs(expected) + roundoff
        assert ab_product_formula(x, mu, 1) == pytest.approx(expected, rel=1e-12)


def test_center_and_coefficient_errors():
    with pytest.raises(ParabolicCenterUndefined):
        conic_center(2, MuParams(0, 0, 0, 0))
    with pytest.raises(NotLoxodromic):
        orbit_coefficients(1, 0, 0, MuParams(0, 0, 0, 0))
    with pytest.raises(NotLoxodromic):
        closed_form_point(1, OrbitCoefficients(1, 1), MuParams(0, 0, 0, 0), 1, 3)


def test_example_center():
    center = conic_center(EXAMPLE_X, EXAMPLE_MU, 1)
    assert center.frak_y == pytest.approx(-EXAMPLE_FRAK_Y, rel=0, abs=1e-9)
    assert center.frak_z == pytest.approx(-EXAMPLE_FRAK_Z, rel=0, abs=1e-9)


def test_degenerate_x_orbit_converges_to_the_center():
    assert abs(ab_product_formula(EXAMPLE_X, EXAMPLE_MU, 1)) < 1e-9
    w0 = example_seed()
    assert abs(w0) > 33

    coefs = orbit_coefficients(EXAMPLE_X, w0, w0, EXAMPLE_MU, 1)
    small, large = sorted((abs(coefs.a_coef), abs(coefs.b_coef)))
    assert small <= 1e-9 * large
    keep_a = abs(coefs.a_coef) > abs(coefs.b_coef)
    snapped = OrbitCoefficients(coefs.a_coef, 0j) if keep_a else OrbitCoefficients(0j, coefs.b_coef)
    # the surviving term decays in this direction
    contracting = abs(twist_spectrum(EXAMPLE_X).cap_lam) < 1
    direction = 1 if keep_a == contracting else -1

    advance = recurrence_step if direction > 0 else recurrence_step_back
    u, w = w0, w0
    for n in range(1, 21):
        u, w = advance(EXAMPLE_X, u, w, EXAMPLE_MU, 1)
        expected = pytest.approx((u, w), rel=1e-8)
        assert closed_form_point(EXAMPLE_X, snapped, EXAMPLE_MU, 1, direction * n) == expected

    center = conic_center(EXAMPLE_X, EXAMPLE_MU, 1)
    u, w = closed_form_point(EXAMPLE_X, snapped, EXAMPLE_MU, 1, direction * 200)
    assert abs(u - center.frak_y) < 1e-9
    assert abs(w - center.frak_z) < 1e-9
    assert abs(abs(u) - EXAMPLE_FRAK_Y) < 1e-9
    assert abs(abs(w) - EXAMPLE_FRAK_Z) < 1e-9

    small_neighbors = [
        n for n in range(201)
        if min(abs(v) for v in closed_form_point(EXAMPLE_X, snapped, EXAMPLE_MU, 1, direction * n)) <= 2.5
    ]
    assert len(small_neighbors) <= 1


def test_markoff_window(markoff_mu):
    window = bounded_window(-3, -3, -3, markoff_mu, 1, r=50)
    assert (window.kind, window.n1, window.n2) == (WindowKind.FINITE, -1, 1)
    window = bounded_window(-3, -3, -3, markoff_mu, 1, r=10)
    assert (window.kind, window.n1, window.n2) == (WindowKind.FINITE, 0, 0)


def test_markoff_escape_index(markoff_mu):
    assert escape_index(-3, -3, -3, markoff_mu, 1, 50, 1) == 3
    assert escape_index(-3, -3, -3, markoff_mu, 1, 50, -1) == 3


def test_one_sided_windows():
    mu = MuParams(0, 0, 0, 9)
    spec = twist_spectrum(3)
    window = bounded_window(3, 1, -spec.cap_lam_inv, mu, 1, r=5)
    assert window.kind is WindowKind.UNBOUNDED_PLUS
    assert window.n1 == 0 and window.n2 is None

    spec = twist_spectrum(-3)
    window = bounded_window(-3, 1, -spec.cap_lam_inv, mu, 1, r=5)
    assert window.kind is WindowKind.UNBOUNDED_MINUS
    assert window.n2 == 0 and window.n1 is None


def test_parabolic_window():
    window = bounded_window(2, 1, 0, MuParams(0, 1, 0, 4), 1, r=3)
    assert (window.kind, window.n1, window.n2) == (WindowKind.FINITE, 0, 2)


def test_parabolic_constant_orbit():
    mu = MuParams(0, 0, 0, 4)
    assert bounded_window(2, 1, -1, mu, 1).kind is WindowKind.CONSTANT
    assert neighbor_sequence(2, 1, -1, mu, 1, 10000) == (1, -1)


def test_elliptic_window_is_unbounded():
    assert bounded_window(1, 0.5, 0.5, MuParams(0, 0, 0, 0), 1).kind is WindowKind.UNBOUNDED_BOTH


def test_window_radius_must_reach_two_plus_alpha():
    with pytest.raises(InvalidInput):
        bounded_window(-3, -3, -3, MuParams(2, 0, 0, 0), 1, r=2.5)
