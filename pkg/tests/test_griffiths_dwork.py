import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dworkcoh.griffiths_dwork import (QQ, ResidueRing, SingularHypersurface, cohomology_basis,
                                      hilbert_dims, jacobian_decompose, jacobian_ring_dims,
                                      monomials, reduce, relation_form, RationalForm, solver_for)
from dworkcoh.polyalg import evaluate_param
from oracles import jacobian_hilbert, primitive_dim


def random_relation_forms(f, count, seed):
    rng = random.Random(seed)
    for _ in range(count):
        k = rng.randint(1, f.nvars - 1)
        j = rng.randrange(f.nvars)
        mono = rng.choice(monomials(f.nvars, k * f.degree - f.nvars + 1))
        c = Fraction(rng.randint(-9, 9) or 1, rng.randint(1, 5))
        yield relation_form(f, mono, j, k, c)


def test_hilbert_series_oracle():
    for nv, d in [(3, 3), (4, 4), (5, 5)]:
        assert hilbert_dims(nv, d) == jacobian_hilbert(nv, d)


def test_jacobian_ring_dims_match_hilbert(quartic3, fermat3):
    assert jacobian_ring_dims(fermat3) == [1, 3, 3, 1]
    assert jacobian_ring_dims(quartic3) == jacobian_hilbert(4, 4)


def test_basis_sizes(fermat3, quartic3, quintic4):
    assert len(cohomology_basis(fermat3)) == primitive_dim(3, 3) == 2
    assert len(cohomology_basis(quartic3)) == primitive_dim(4, 4) == 21
    assert len(cohomology_basis(quintic4)) == primitive_dim(5, 5) == 204


def test_fermat_basis_is_reduced_monomials(quintic4):
    B = cohomology_basis(quintic4)
    for m, k in B.elements:
        assert max(m) <= 3
        assert sum(m) == 5 * (k + 1) - 5
    assert [k for _, k in B.elements].count(1) == 101


def test_singular_member_rejected(family):
    with pytest.raises(SingularHypersurface):
        cohomology_basis(evaluate_param(family.poly, Fraction(-1, 27)))


def test_hand_reduction_fermat_cubic(fermat3):
    # [x^3, 1] = -(1/3)[1, 0] from [d_x x, 0] = -[x * 3x^2, 1]
    B = cohomology_basis(fermat3)
    form = RationalForm(3, 3, {1: {(3, 0, 0): Fraction(1)}})
    assert reduce(form, B, fermat3).coords == (Fraction(-1, 3), 0)


def test_basis_elements_reduce_to_unit_vectors(quartic3):
    B = cohomology_basis(quartic3)
    for i, (m, k) in enumerate(B.elements):
        c = reduce(RationalForm(4, 4, {k: {m: Fraction(1)}}), B, quartic3).coords
        assert c == tuple(Fraction(int(i == j)) for j in range(len(B)))


@pytest.mark.parametrize("name", ["fermat3", "quartic3", "quintic4"])
def test_relation_forms_vanish(name, request):
    f = request.getfixturevalue(name)
    B = cohomology_basis(f)
    for form in random_relation_forms(f, 100, 7):
        assert reduce(form, B, f).is_zero()


def test_relation_forms_vanish_on_family(family):
    for lam in (Fraction(1, 5), Fraction(-2, 3)):
        f = evaluate_param(family.poly, lam)
        B = cohomology_basis(f)
        for form in random_relation_forms(f, 100, 11):
            assert reduce(form, B, f).is_zero()


def test_decompose_reconstructs(quartic3):
    s = solver_for(quartic3)
    rng = random.Random(3)
    e = 8
    mons = monomials(4, e)
    g = {m: Fraction(rng.randint(-3, 3)) for m in rng.sample(mons, 6)}
    h, rem = jacobian_decompose(g, quartic3)
    back = s.combine(h)
    for m in set(g) | set(back) | set(rem):
        assert g.get(m, 0) == back.get(m, 0) + rem.get(m, 0)


def test_modular_ring_inverse():
    R = ResidueRing(7, 4)
    assert R.mod == 7 ** 4
    assert R.inv(3) * 3 % R.mod == 1
    assert QQ.inv(Fraction(2, 3)) == Fraction(3, 2)


coef = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@given(st.lists(coef, min_size=10, max_size=10), st.lists(coef, min_size=10, max_size=10), coef)
@settings(max_examples=40, deadline=None)
def test_reduction_is_linear(xs, ys, c):
    from dworkcoh.polyalg import parse_homogeneous
    f = parse_homogeneous("x^3 + y^3 + z^3 + x*y*z")
    B = cohomology_basis(f)
    mons = monomials(3, 6)
    F1 = RationalForm(3, 3, {2: dict(zip(mons, xs))})
    F2 = RationalForm(3, 3, {2: dict(zip(mons, ys))})
    r1, r2 = reduce(F1, B, f).coords, reduce(F2, B, f).coords
    r = reduce(F1 + F2.scaled(c), B, f).coords
    assert r == tuple(a + c * b for a, b in zip(r1, r2))
