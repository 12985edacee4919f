import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from univeig.exact_spectra import ModelSpectrum, spectrum_prefix
from univeig.inequalities import (
    CSV_COLUMNS,
    AmbientContext,
    ConfigurationError,
    SpectrumSample,
    ambient_constant,
    build_report,
    eigenmap_margin,
    eigenmap_quadratic_upper,
    immersibility_bound,
    kohn_bounds,
    kohn_margin,
    quadratic_bounds,
    reilly_chain,
    reilly_constant,
    reilly_lambda2,
    simple_upper_bound,
    yang_margin,
)


def sphere_sample(n, count, g=Fraction(0)):
    shift = g * n * n
    lams = [x + shift for x in spectrum_prefix(ModelSpectrum.sphere(n), count)]
    delta = Fraction(n * n, 4) - shift
    return SpectrumSample(n, lams, [delta] * count, delta, q_integrals=[shift] * count)


rational_spectra = st.lists(
    st.fractions(min_value=0, max_value=50, max_denominator=20), min_size=3, max_size=12
).map(sorted)


def test_two_sphere_first_bound_is_zero_to_two():
    b = quadratic_bounds(sphere_sample(2, 5), 1)
    assert (b.lower, b.upper, b.discriminant) == (0, 2, 1)
    assert b.contains(Fraction(2))


@pytest.mark.parametrize("n", range(2, 7))
def test_sphere_yang_margins_vanish(n):
    s = sphere_sample(n, 12)
    assert [yang_margin(s, k) for k in range(1, 10)] == [0] * 9


def test_bounds_match_numpy_roots():
    s = SpectrumSample(3, [1.0, 2.5, 2.7, 4.0, 5.5], [0.3, 0.1, 0.2, 0.4, 0.0])
    for k in range(1, 4):
        lams, d = np.array(s.eigenvalues[:k]), np.array(s.deltas(k))
        # n * sum (x - l)^2 - 4 sum (x - l)(l + d) = 0 as a polynomial in x
        coeffs = [3 * k, -6 * lams.sum() - 4 * (lams + d).sum(), 3 * (lams**2).sum() + 4 * (lams * (lams + d)).sum()]
        roots = np.sort(np.roots(coeffs).real)
        b = quadratic_bounds(s, k)
        assert b.lower == pytest.approx(roots[0], rel=1e-12)
        assert b.upper == pytest.approx(roots[1], rel=1e-12)
        center = (1 + 2 / 3) * lams.mean() + (2 / 3) * d.mean()
        assert b.center == pytest.approx(center, rel=1e-12)


@given(lams=rational_spectra, n=st.integers(1, 6), delta=st.fractions(0, 10, max_denominator=8))
def test_containment_is_equivalent_to_nonnegative_margin(lams, n, delta):
    s = SpectrumSample(n, lams, [delta] * len(lams), delta)
    for k in range(1, len(lams)):
        b = quadratic_bounds(s, k)
        assert b.contains(lams[k]) == (yang_margin(s, k) >= 0)


@given(lams=st.lists(st.fractions(Fraction(1, 10), 80, max_denominator=30), min_size=2, max_size=14).map(sorted),
       n=st.integers(1, 5))
def test_kohn_root_never_exceeds_root_free_bound(lams, n):
    for k in range(1, len(lams)):
        b = kohn_bounds(n, lams, k)
        margin = kohn_margin(n, lams, k)
        if b.discriminant >= 0:
            # sqrt(D) <= mean/n reduces to Cauchy-Schwarz on l_1..l_k
            assert b.upper_at_most(b.simple)
        else:
            assert margin < 0
        assert b.contains(lams[k]) == (margin >= 0)


@given(x=st.floats(0.1, 1e3), count=st.integers(2, 10), n=st.integers(1, 4))
def test_equal_kohn_spectrum_has_zero_margin(x, count, n):
    lams = [x] * count
    assert all(kohn_margin(n, lams, k) == 0 for k in range(1, count))


@given(lams=rational_spectra, shift=st.fractions(-5, 5, max_denominator=10))
def test_yang_margin_with_matching_delta_shift_is_invariant(lams, shift):
    # raising every eigenvalue by s while lowering delta by s leaves the margin unchanged
    assume(all(l + shift >= 0 for l in lams))
    base = SpectrumSample(2, lams, [Fraction(1)] * len(lams))
    moved = SpectrumSample(2, [l + shift for l in lams], [1 - shift] * len(lams))
    for k in range(1, len(lams)):
        assert yang_margin(base, k) == yang_margin(moved, k)


def test_simple_bound_on_sphere_is_attained_at_first_gap():
    s = sphere_sample(2, 10)
    assert simple_upper_bound(s, 1) == 2
    assert simple_upper_bound(s, 4) == 3 * Fraction(3, 2) + 2


@pytest.mark.parametrize("n", range(2, 7))
def test_immersibility_bound_on_round_sphere_equals_n_squared(n):
    assert immersibility_bound(sphere_sample(n, 40), 30) == n * n


def test_reilly_constants():
    assert reilly_constant(2, 2) == Fraction(1, 2)
    assert reilly_constant(2, 3) == 2
    assert reilly_chain(2, 2, 0, 4) == 2
    assert reilly_lambda2(2, Fraction(4)) == 2
    with pytest.raises(ValueError):
        reilly_constant(2, 1)


@given(n=st.integers(1, 8), k=st.integers(2, 12))
def test_chain_constant_telescopes(n, k):
    # C_R(n, k+1) = (4/n + 1) C_R(n, k) + 1/n
    assert reilly_constant(n, k + 1) == (Fraction(4, n) + 1) * reilly_constant(n, k) + Fraction(1, n)


def test_ambient_constants():
    assert ambient_constant("euclidean", 3) == 0
    assert ambient_constant("sphere", 3) == 9
    assert ambient_constant("projective_r", 2) == 12
    assert ambient_constant("projective_c", 2) == 16
    assert ambient_constant("projective_q", 2) == 24
    assert ambient_constant("projective_c_odd_dim", 3) == 2 * 3 * (5 - Fraction(1, 3))
    assert ambient_constant("projective_c_totally_real", 2) == 12
    with pytest.raises(ValueError):
        ambient_constant("projective_c_odd_dim", 2)
    with pytest.raises(ValueError):
        ambient_constant("hyperbolic", 2)


def test_sphere_ambient_adds_quarter_constant_to_deltas():
    s = SpectrumSample(2, [0, 1, 2], [0, 0, 0], ambient=AmbientContext("sphere", 2))
    assert s.deltas(2) == [1, 1]
    assert s.delta_bound() == 1


@pytest.mark.parametrize("n", range(2, 6))
def test_identity_map_of_sphere_satisfies_eigenmap_inequality(n):
    s = sphere_sample(n, 25)
    margins = [eigenmap_margin(n, s, k) for k in range(1, 21)]
    assert margins[0] == 0
    assert all(m >= 0 for m in margins)
    assert all(eigenmap_quadratic_upper(n, s, k).contains(s.eigenvalues[k]) for k in range(1, 21))


def test_missing_data_and_bad_inputs():
    with pytest.raises(ValueError):
        SpectrumSample(2, [1.0])
    with pytest.raises(ValueError):
        SpectrumSample(2, [2.0, 1.0])
    with pytest.raises(ConfigurationError):
        yang_margin(SpectrumSample(2, [0, 2, 2]), 1)
    with pytest.raises(ValueError):
        yang_margin(sphere_sample(2, 4), 4)
    with pytest.raises(ValueError):
        kohn_margin(1, [0.0, 1.0], 1)
    with pytest.raises(ValueError):
        eigenmap_margin(0, sphere_sample(2, 4), 1)
    with pytest.raises(ValueError):
        build_report("no-such", {"sample": sphere_sample(2, 4)}, [1])


def test_report_rows_are_sorted_and_verdicts_use_relative_slack():
    s = SpectrumSample(2, [0.0, 2.0, 2.0, 2.0, 6.0001], [1.0] * 5)
    rep = build_report("yang", {"sample": s}, [4, 1, 3, 2])
    assert [r.k for r in rep.rows] == [1, 2, 3, 4]
    assert not rep.rows[3].satisfied
    loose = build_report("yang", {"sample": s}, [4], tolerance=1e-3)
    assert loose.satisfied
    assert rep.min_margin < 0
    assert len(CSV_COLUMNS) == 9


def test_reilly_report_is_single_row_at_k_two():
    s = sphere_sample(2, 5)
    rep = build_report("reilly", {"sample": s, "mean_h_sq": Fraction(4)}, range(1, 9))
    assert [(r.k, r.lhs, r.rhs, r.margin) for r in rep.rows] == [(2, 2, 2, 0)]


def test_invalid_discriminant_gives_unsatisfied_bounds_row():
    # zero weights and a wide spread of l_1, l_2 leave no real root
    s = SpectrumSample(1, [0.0, 10.0, 11.0], [0.0, -10.0, 0.0])
    b = quadratic_bounds(s, 2)
    assert b.discriminant == pytest.approx(-25.0)
    assert not b.valid and math.isnan(b.upper)
    rep = build_report("yang-bounds", {"sample": s}, [2])
    assert not rep.satisfied
