import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dworkcoh.keylemma import (TruncationOverflow, PushforwardElem, chain_sum, fr_pushforward, phi,
                               reduce_monomial, t_dt, verify_phi_intertwine, weight_spectrum)
from dworkcoh.padic import PiScalar, exact


def test_intertwining_p3_p5():
    for p in (3, 5):
        r = verify_phi_intertwine(p, 4)
        assert r.ok, r.failures()


def test_perturbed_series_fails():
    for p in (3, 5):
        assert not verify_phi_intertwine(p, 4, perturb=(1, p)).ok


def test_chain_sums_match_closed_form():
    for p in (3, 5, 7):
        for b in (1, 2, 3):
            want = (-1) ** b * p ** (b - 1) * math.factorial(b - 1)
            assert chain_sum(p, 5, b).agrees(exact(want, p), 5)


def test_phi_dictionary():
    assert phi("z", 0) == ("t", 1)
    assert phi("z", 4) == ("t", 5)
    assert phi("z", -1) == ("b", 0)
    assert phi("z", -3) == ("b", 2)
    with pytest.raises(ValueError):
        phi("t", 1)


def test_reduce_monomial_small_cases():
    p = 5
    # x y t^2 -> (-1/pi) t
    kind, idx, c = reduce_monomial(1, 2, p)
    assert (kind, idx) == ("t", 1)
    assert c.coeffs == (PiScalar.pi_power(-1, p) * exact(-1, p)).coeffs
    # (xy)^0 t^0 = dxdy = b_0
    kind, idx, c = reduce_monomial(0, 0, p)
    assert (kind, idx) == ("b", 0) and c.rational_part() == exact(1, p)


def test_window_overflow():
    e = PushforwardElem(5, 2, 1)
    with pytest.raises(TruncationOverflow):
        e.add("t", 3, PiScalar.scalar(exact(1, 5)))


def test_frobenius_on_low_t_powers():
    # t = phi(1) goes to p t; t^2 = phi(z) goes to p t^(p+1)
    p = 3
    one = PiScalar.scalar(exact(p, p))
    assert (fr_pushforward("t", 1, p, 4).coefficient("t", 1) - one).valuation() >= 4
    out = fr_pushforward("t", 2, p, 4)
    assert (out.coefficient("t", p + 1) - one).valuation() >= 4
    assert out.coefficient("t", 1).valuation() >= 4


def test_weight_spectrum_closed_forms():
    for i in range(51):
        assert weight_spectrum("x_power", i) == -Fraction(i + 1, 2)
    for i in range(1, 51):
        assert weight_spectrum("t_power", i) == i - Fraction(1, 2)


def test_t_dt_on_x():
    # t d/dt x = t x^3 = -x t^0 ... reduced: x^3 t -> -(2/2) x = -x
    assert t_dt(1, 0) == {(1, 0): Fraction(-1)}


@given(st.integers(0, 30), st.integers(0, 30))
def test_reduce_monomial_respects_relation(a, c):
    # (xy)^(a+1) t^(c+1) = -((a+1)/pi) (xy)^a t^c
    p = 5
    k1, i1, c1 = reduce_monomial(a + 1, c + 1, p)
    k0, i0, c0 = reduce_monomial(a, c, p)
    assert (k1, i1) == (k0, i0)
    rhs = c0 * PiScalar.pi_power(-1, p) * exact(-(a + 1), p)
    assert c1.coeffs == rhs.coeffs
