"""Independent reference computations used by the tests.

Nothing here imports the library; each routine recomputes a quantity by a
different route than the code under test.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product


def ext_euclid_inverse(a: int, m: int) -> int:
    r0, r1, s0, s1 = m, a % m, 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if r0 != 1:
        raise ValueError("not invertible")
    return s0 % m


def vp(x, p: int):
    """p-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        return math.inf
    v, num, den = 0, x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def dwork_ratios(p: int, M: int) -> list[Fraction]:
    """a_n with A_n = a_n pi^n, from the ODE A' = pi (p z^(p-1) - 1) A.

    Comparing coefficients and using pi^(p-1) = -p gives n a_n = -a_(n-1) - a_(n-p).
    """
    a = [Fraction(1)]
    for n in range(1, M + 1):
        prev = a[n - 1]
        back = a[n - p] if n >= p else Fraction(0)
        a.append((-prev - back) / n)
    return a


def factorial_identity_partial(p: int, b: int, M: int) -> Fraction:
    """sum_{n<=M} (-1)^n a_n (pb+n-1)! with exact rationals."""
    a = dwork_ratios(p, M)
    return sum(((-1) ** n * a[n] * math.factorial(p * b + n - 1) for n in range(M + 1)), Fraction(0))


def jacobian_hilbert(nvars: int, d: int) -> list[int]:
    """Coefficients of ((1 - t^(d-1)) / (1 - t))^nvars by repeated convolution."""
    base = [1] * (d - 1)
    out = [1]
    for _ in range(nvars):
        new = [0] * (len(out) + len(base) - 1)
        for i, x in enumerate(out):
            for j, y in enumerate(base):
                new[i + j] += x * y
        out = new
    return out


def primitive_dim(nvars: int, d: int) -> int:
    h = jacobian_hilbert(nvars, d)
    total = 0
    for k in range(nvars):
        e = (k + 1) * d - nvars
        if 0 <= e < len(h):
            total += h[e]
    return total


class Fp2:
    """F_p[s]/(s^2 - r) for a non-square r, as pairs."""

    def __init__(self, p: int):
        self.p = p
        self.r = next(x for x in range(2, p) if pow(x, (p - 1) // 2, p) == p - 1)

    def elements(self):
        return [(a, b) for a in range(self.p) for b in range(self.p)]

    def mul(self, x, y):
        p = self.p
        return ((x[0] * y[0] + self.r * x[1] * y[1]) % p, (x[0] * y[1] + x[1] * y[0]) % p)

    def add(self, x, y):
        return ((x[0] + y[0]) % self.p, (x[1] + y[1]) % self.p)

    def power(self, x, k):
        out = (1, 0)
        for _ in range(k):
            out = self.mul(out, x)
        return out


def naive_count(coeffs: dict, nvars: int, p: int, e: int = 1) -> int:
    """Projective points of sum c * x^m = 0 over F_(p^e), counted as (affine - 1)/(q - 1)."""
    if e == 1:
        elems = [(a, 0) for a in range(p)]
    else:
        elems = Fp2(p).elements()
    F = Fp2(p) if e == 2 else None

    def mul(x, y):
        return F.mul(x, y) if F else ((x[0] * y[0]) % p, 0)

    def add(x, y):
        return ((x[0] + y[0]) % p, (x[1] + y[1]) % p)

    zeros = 0
    for pt in product(elems, repeat=nvars):
        acc = (0, 0)
        for mono, c in coeffs.items():
            t = (c % p, 0)
            for x, k in zip(pt, mono):
                for _ in range(k):
                    t = mul(t, x)
            acc = add(acc, t)
        if acc == (0, 0):
            zeros += 1
    q = p ** e
    return (zeros - 1) // (q - 1)


def det(M: list[list[Fraction]]) -> Fraction:
    """Determinant by Gaussian elimination over Q."""
    A = [[Fraction(x) for x in r] for r in M]
    n = len(A)
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            out = -out
        out *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return out


def charpoly_by_interpolation(M: list[list[Fraction]]) -> list[Fraction]:
    """det(T - M) sampled at n+1 points and interpolated; constant term first."""
    n = len(M)
    xs = list(range(n + 1))
    ys = [det([[(x if i == j else 0) - M[i][j] for j in range(n)] for i in range(n)]) for x in xs]
    coeffs = [Fraction(0)] * (n + 1)
    for i, xi in enumerate(xs):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, xj in enumerate(xs):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for k in range(len(basis) - 1):
                basis[k] -= xj * basis[k + 1]
            denom *= xi - xj
        for k in range(n + 1):
            coeffs[k] += ys[i] * basis[k] / denom
    return coeffs


def period_coefficients(C: int) -> list[int]:
    """(3c)!/(c!)^3 (-1)^c, the closed form of the period series."""
    return [(-1) ** c * math.factorial(3 * c) // math.factorial(c) ** 3 for c in range(C + 1)]
