from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dworkcoh.frobenius_gm import (CoefficientNotTeichmuller, PrecMatrix, TruncationInsufficient,
                                   charpoly, check_gm_frobenius_compat, default_truncation,
                                   frobenius_matrix, gm_matrix, newton_slopes, picard_fuchs,
                                   recover_trace)
from dworkcoh.griffiths_dwork import BadReduction
from dworkcoh.oracle import count_points
from dworkcoh.padic import PadicScalar, exact
from dworkcoh.polyalg import evaluate_param, parse_homogeneous
from oracles import charpoly_by_interpolation, naive_count, period_coefficients


def test_default_truncation_values():
    assert default_truncation(5, 6) == 46
    assert default_truncation(7, 6) == 68


def test_fermat_p5_is_supersingular(fermat_frob):
    F = fermat_frob.normalized
    assert recover_trace(F) == 0
    assert F.det().agrees(exact(5, 5), F.certificate)
    assert "agree" in fermat_frob.stability


def test_fermat_p7_matches_point_count(fermat3):
    res = frobenius_matrix(fermat3, 7, 4)
    a = 7 + 1 - naive_count({(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1}, 3, 7)
    assert recover_trace(res.normalized) == a == -1


def test_family_fiber_matches_point_count(family, family_frob_teich2):
    f0 = evaluate_param(family.poly, 2)
    a = 7 + 1 - count_points(f0, 7)
    assert recover_trace(family_frob_teich2.normalized) == a == -1


def test_raw_is_p_squared_times_normalized(family_frob_teich2):
    raw, F = family_frob_teich2.raw, family_frob_teich2.normalized
    for i in range(F.size):
        for j in range(F.size):
            assert raw[i, j].agrees(F[i, j] * 49, F.certificate + 2)


def test_bad_reduction_refused(family):
    with pytest.raises(BadReduction):
        frobenius_matrix(family.poly, 7, 3, lam_k=1, check_stability=False)


def test_non_teichmuller_coefficient_refused():
    f = parse_homogeneous("2*x^3 + y^3 + z^3")
    with pytest.raises(CoefficientNotTeichmuller):
        frobenius_matrix(f, 5, 3)


def test_short_explicit_truncation_detected(family):
    with pytest.raises(TruncationInsufficient):
        frobenius_matrix(family.poly, 7, 6, M=20, lam_k=2)


def test_parallel_columns_identical(family, family_frob_teich2):
    res = frobenius_matrix(family.poly, 7, 6, lam_k=2, jobs=3, check_stability=False)
    assert res.normalized.entries == family_frob_teich2.normalized.entries


def test_gm_matrix_at_one_fifth(family):
    G = gm_matrix(family.poly, Fraction(1, 5))
    assert G == [[0, Fraction(-15, 16)], [Fraction(1, 5), Fraction(-59, 32)]]


def test_gm_matrix_zero_without_parameter(fermat3):
    assert gm_matrix(fermat3, 0) == [[0, 0], [0, 0]]


def test_gm_matrix_consistent_with_operator(family):
    # theta w = G e_0 and theta^2 w = (theta G + G^2) e_0; theta G by a central difference
    L = picard_fuchs(family.poly)
    assert L.order == 2
    lam = Fraction(1, 5)
    G = gm_matrix(family.poly, lam)
    h = Fraction(1, 10 ** 6)
    Gp = gm_matrix(family.poly, lam + h)
    Gm = gm_matrix(family.poly, lam - h)
    # theta G ~ lam (Gp - Gm)/(2h); the exact operator makes the residual O(h^2)
    v1 = [G[0][0], G[1][0]]
    thG = [[lam * (Gp[i][j] - Gm[i][j]) / (2 * h) for j in range(2)] for i in range(2)]
    v2 = [thG[i][0] + sum(G[i][k] * v1[k] for k in range(2)) for i in range(2)]
    c0 = sum(c * lam ** q for q, c in enumerate(L.coeffs[0]))
    c1 = sum(c * lam ** q for q, c in enumerate(L.coeffs[1]))
    c2 = sum(c * lam ** q for q, c in enumerate(L.coeffs[2]))
    e0 = [1, 0]
    resid = [c0 * e0[i] + c1 * v1[i] + c2 * v2[i] for i in range(2)]
    assert all(abs(float(r)) < 1e-6 for r in resid)


def test_picard_fuchs_annihilates_periods(family):
    L = picard_fuchs(family.poly)
    assert all(r == 0 for r in L.apply_to_series(period_coefficients(20)))
    assert L.coeffs == [[0, 6], [0, 27], [1, 27]]


def test_compat_and_negative_control(family):
    good = check_gm_frobenius_compat(family.poly, 7, 6, lam_k=2)
    assert good.ok
    bad = check_gm_frobenius_compat(family.poly, 7, 6, lam_k=2, perturb=(0, 1))
    assert not bad.ok


def test_newton_slopes_simple():
    p = 5
    cp = [exact(125, p), exact(0, p), exact(5, p), exact(1, p)]
    assert newton_slopes(cp) == [1, 1, 1]
    assert newton_slopes([exact(7, 7), exact(1, 7), exact(1, 7)]) == [0, 1]
    assert newton_slopes([exact(5, 5), exact(0, 5), exact(1, 5)]) == [Fraction(1, 2)] * 2


small = st.integers(-20, 20)


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3))
@settings(max_examples=40)
def test_charpoly_against_interpolation(rows):
    p = 5
    M = [[exact(x, p) for x in r] for r in rows]
    got = [c.to_fraction() for c in charpoly(M, p)]
    assert got == charpoly_by_interpolation([[Fraction(x) for x in r] for r in rows])


def test_precmatrix_scaled_moves_certificate():
    p = 5
    M = PrecMatrix.from_rows(p, [[PadicScalar.from_rational(1, p, 4)]])
    assert M.scaled(25).certificate == M.certificate + 2
