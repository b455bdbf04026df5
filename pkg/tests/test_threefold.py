from fractions import Fraction

from dworkcoh.padic import exact
from dworkcoh.threefold import assemble, integral_frobenius_omega, newton_slopes, verify_scaling


def test_fermat_slopes(fermat_frob):
    tf = assemble(fermat_frob.normalized, 5)
    assert newton_slopes(tf) == [Fraction(3, 2), Fraction(3, 2), 3]


def test_ordinary_fiber_slopes(family_frob_teich2):
    tf = assemble(family_frob_teich2.normalized, 7)
    assert newton_slopes(tf) == [1, 2, 3]


def test_scaling_and_line(family_frob_teich2):
    curve = family_frob_teich2.normalized
    tf = assemble(curve, 7)
    assert verify_scaling(tf, curve, 7).ok
    assert integral_frobenius_omega(tf) == exact(7 ** 3, 7)
    assert tf.dim == 3


def test_scaling_detects_tampering(family_frob_teich2):
    curve = family_frob_teich2.normalized
    tf = assemble(curve, 7)
    bad_curve = curve.perturbed(0, 1, exact(7, 7))
    rep = verify_scaling(tf, bad_curve, 7)
    assert not rep.ok and rep.location == (0, 1)


def test_charpoly_factors(family_frob_teich2):
    tf = assemble(family_frob_teich2.normalized, 7)
    cp = tf.charpoly()
    # (T^2 + 7 T + 343)(T - 343) for the scaled block of T^2 + T + 7
    want = [-343 * 343, 343 - 7 * 343, 7 - 343, 1]
    for c, w in zip(cp, want):
        assert c.agrees(exact(w, 7), 7)
