import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from univeig.exact_spectra import (
    ModelSpectrum,
    gap_index,
    saturation_sides,
    saturation_sum,
    saturation_summand,
    spectrum_prefix,
    sphere_eigenvalue,
    sphere_multiplicity,
    verify_sphere_saturation,
    yang_sides,
)


def monomial_count(variables, degree):
    """Monomials of a given degree, counted by brute-force enumeration."""
    if degree < 0:
        return 0
    return sum(1 for _ in itertools.combinations_with_replacement(range(variables), degree))


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("level", range(0, 7))
def test_multiplicity_matches_harmonic_polynomial_count(n, level):
    # harmonic polynomials of degree l in n+1 variables: P_l minus r^2 P_{l-2}
    expected = monomial_count(n + 1, level) - monomial_count(n + 1, level - 2)
    assert sphere_multiplicity(n, level) == expected


def test_two_sphere_levels_are_odd_numbers():
    assert [sphere_multiplicity(2, l) for l in range(6)] == [1, 3, 5, 7, 9, 11]
    assert [sphere_eigenvalue(2, l) for l in range(4)] == [0, 2, 6, 12]


def test_circle_levels():
    assert [sphere_multiplicity(1, l) for l in range(4)] == [1, 2, 2, 2]


@pytest.mark.parametrize("n", range(1, 9))
def test_gap_index_is_cumulative_count(n):
    for m in range(0, 13):
        assert gap_index(n, m) == sum(sphere_multiplicity(n, l) for l in range(m + 1))


def test_gap_index_small_values():
    assert [gap_index(2, m) for m in range(4)] == [1, 4, 9, 16]
    assert gap_index(3, 1) == 5


def test_prefix_of_sphere_spectrum():
    assert spectrum_prefix(ModelSpectrum.sphere(2), 10) == [0, 2, 2, 2, 6, 6, 6, 6, 6, 12]
    assert all(isinstance(x, Fraction) for x in spectrum_prefix(ModelSpectrum.sphere(3), 6))


def brute_torus(periods, count):
    values = []
    bound = 12
    for m in itertools.product(range(-bound, bound + 1), repeat=len(periods)):
        values.append(sum(Fraction(x) ** 2 / Fraction(p) ** 2 for x, p in zip(m, periods)))
    return sorted(values)[:count]


@pytest.mark.parametrize("periods", [(1, 1), (1, 2), (Fraction(1, 2), Fraction(3, 2)), (1, 1, 1)])
def test_flat_torus_matches_lattice_enumeration(periods):
    count = 30 if len(periods) == 2 else 20
    assert spectrum_prefix(ModelSpectrum.flat_torus(periods), count) == brute_torus(periods, count)


def test_square_torus_multiplicities():
    assert spectrum_prefix(ModelSpectrum.flat_torus([1, 1]), 13) == [0] + [1] * 4 + [2] * 4 + [4] * 4


def test_invalid_arguments():
    with pytest.raises(ValueError):
        sphere_multiplicity(0, 1)
    with pytest.raises(ValueError):
        gap_index(2, -1)
    with pytest.raises(ValueError):
        ModelSpectrum.flat_torus([1, 0])
    with pytest.raises(ValueError):
        spectrum_prefix(ModelSpectrum.sphere(2), 0)
    with pytest.raises(ValueError):
        saturation_sides(2, 0)


def test_two_sphere_first_gap_sides():
    assert saturation_sides(2, 1, 0) == (168, 168)


def test_grouped_sides_match_direct_summation():
    for n, m in [(1, 3), (2, 2), (3, 2), (4, 1)]:
        for g in (0, Fraction(1, 4), -3, Fraction(17, 5)):
            k = gap_index(n, m)
            shift = g * n * n
            lams = [x + shift for x in spectrum_prefix(ModelSpectrum.sphere(n), k + 1)]
            deltas = [Fraction(n * n, 4) - shift] * k
            assert saturation_sides(n, m, g) == yang_sides(lams, deltas, n, k)


@given(
    n=st.integers(1, 6),
    m=st.integers(1, 8),
    g=st.fractions(min_value=-10, max_value=10, max_denominator=50),
)
def test_saturation_is_exactly_zero_for_any_rational_shift(n, m, g):
    assert verify_sphere_saturation(n, m, g) == 0


@given(n=st.integers(1, 7), m=st.integers(1, 9))
def test_level_summands_add_to_zero_from_level_zero(n, m):
    assert saturation_sum(n, m, start=0) == 0


@pytest.mark.parametrize("n,m,expected", [(2, 1, 48), (2, 3, 720), (4, 5, 64800)])
def test_sum_from_level_one_equals_minus_level_zero(n, m, expected):
    # dropping level 0 leaves exactly the negated level-0 summand
    assert saturation_sum(n, m, start=1) == expected
    assert saturation_summand(n, m, 0) == -expected


@given(n=st.integers(2, 6), m=st.integers(1, 6), data=st.data())
def test_summand_closed_form_matches_grouped_difference(n, m, data):
    level = data.draw(st.integers(0, m))
    top = sphere_eigenvalue(n, m + 1)
    lam = sphere_eigenvalue(n, level)
    mult = sphere_multiplicity(n, level)
    gap = top - lam
    per_level = 4 * mult * gap * (lam + Fraction(n * n, 4)) - n * mult * gap * gap
    assert saturation_summand(n, m, level) == math.factorial(n - 1) * per_level
