"""Brute-force ground truth: point counts, genus-1 zeta data, period series."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .polyalg import HomoPoly, LaurentPoly

MAX_PRIME = 31
MAX_POINTS = 2_500_000


class BudgetExceeded(ValueError):
    pass


class NotGenus1(ValueError):
    """Raised as "not-genus-1-or-count-bug" when N_1 and N_2 are inconsistent."""


def least_nonresidue(p: int) -> int:
    for r in range(2, p):
        if pow(r, (p - 1) // 2, p) == p - 1:
            return r
    raise ValueError("p must be an odd prime")


class _Field:
    """F_p, or F_p[s]/(s^2 - r) with elements as pairs of int arrays."""

    def __init__(self, p: int, e: int):
        self.p, self.e = p, e
        self.q = p ** e
        self.r = least_nonresidue(p) if e == 2 else None

    def elements(self, idx: np.ndarray):
        if self.e == 1:
            return idx % self.p
        return (idx % self.p, idx // self.p)

    def const(self, c: int, shape):
        c %= self.p
        if self.e == 1:
            return np.full(shape, c, dtype=np.int64)
        return (np.full(shape, c, dtype=np.int64), np.zeros(shape, dtype=np.int64))

    def mul(self, x, y):
        p = self.p
        if self.e == 1:
            return x * y % p
        a, b = x
        c, d = y
        return ((a * c + self.r * b * d) % p, (a * d + b * c) % p)

    def add(self, x, y):
        if self.e == 1:
            return (x + y) % self.p
        return ((x[0] + y[0]) % self.p, (x[1] + y[1]) % self.p)

    def is_zero(self, x):
        if self.e == 1:
            return x == 0
        return (x[0] == 0) & (x[1] == 0)

    def one_like(self, shape):
        return self.const(1, shape)


def _int_coeffs(F: HomoPoly, p: int) -> dict:
    out = {}
    for e, c in F.constant_terms().items():
        c = Fraction(c)
        if c.denominator % p == 0:
            raise ValueError(f"coefficient {c} is not reducible mod {p}")
        out[e] = c.numerator * pow(c.denominator, -1, p) % p
    return out


def count_points(F: HomoPoly, p: int, e: int = 1) -> int:
    """#{F = 0} in P^n(F_{p^e}) by exhaustive enumeration."""
    if p < 3 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
        raise ValueError("p must be an odd prime")
    if e not in (1, 2):
        raise ValueError("only e = 1, 2 are supported")
    if p > MAX_PRIME:
        raise BudgetExceeded(f"p = {p} exceeds the enumeration cap {MAX_PRIME}")
    K = _Field(p, e)
    q = K.q
    nv = F.nvars
    total_pts = sum(q ** k for k in range(nv))
    if total_pts > MAX_POINTS:
        raise BudgetExceeded(f"{total_pts} points exceed the budget {MAX_POINTS}")
    coeffs = _int_coeffs(F, p)
    count = 0
    # representatives (0,..,0,1,*,..,*)
    for lead in range(nv):
        free = nv - lead - 1
        n_pts = q ** free
        idx = np.arange(n_pts, dtype=np.int64)
        coords = []
        for i in range(nv):
            if i < lead:
                coords.append(K.const(0, n_pts))
            elif i == lead:
                coords.append(K.const(1, n_pts))
            else:
                digit = (idx // q ** (i - lead - 1)) % q
                coords.append(K.elements(digit))
        maxdeg = F.degree
        powers = []
        for x in coords:
            pw = [K.one_like(n_pts), x]
            for _ in range(maxdeg - 1):
                pw.append(K.mul(pw[-1], x))
            powers.append(pw)
        val = K.const(0, n_pts)
        for mono, c in coeffs.items():
            term = K.const(c, n_pts)
            for i, k in enumerate(mono):
                if k:
                    term = K.mul(term, powers[i][k])
            val = K.add(val, term)
        count += int(np.count_nonzero(K.is_zero(val)))
    return count


@dataclass(frozen=True)
class ZetaData:
    p: int
    N1: int
    N2: int
    a: int
    charpoly: tuple[int, int, int]  # constant term first: p - a T + T^2

    def __str__(self) -> str:
        return numerator_text(self.a, self.p)


def numerator_text(a: int, p: int) -> str:
    """T^2 - a T + p, written without zero or unit coefficients."""
    if a == 0:
        return f"T^2 + {p}"
    coef = "" if abs(a) == 1 else f"{abs(a)}*"
    return f"T^2 {'-' if a > 0 else '+'} {coef}T + {p}"


def zeta_genus1(N1: int, N2: int, p: int) -> ZetaData:
    a = p + 1 - N1
    if N2 != p * p + 1 - (a * a - 2 * p):
        raise NotGenus1(f"not-genus-1-or-count-bug: N1={N1} gives N2={p * p + 1 - (a * a - 2 * p)}, "
                        f"counted {N2}")
    if a * a > 4 * p:
        raise NotGenus1(f"not-genus-1-or-count-bug: |a|={abs(a)} violates the Hasse bound")
    return ZetaData(p, N1, N2, a, (p, -a, 1))


def zeta_from_curve(F: HomoPoly, p: int) -> ZetaData:
    return zeta_genus1(count_points(F, p, 1), count_points(F, p, 2), p)


# ---------------------------------------------------------------------------
# period series
# ---------------------------------------------------------------------------

def _laurent_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            k = tuple(x + y for x, y in zip(ea, eb))
            out[k] = out.get(k, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


def constant_term_series(P: LaurentPoly, C: int, max_power: int | None = None) -> list[Fraction]:
    """Coefficients c_0..c_C of the l-expansion of the constant term of 1/P.

    P = c0 + X with c0 the parameter-free constant term; 1/P = sum_N (-X)^N / c0^(N+1)
    and the constant term of each power X^N is read off exhaustively.  Powers
    N <= max_power (default 3C) are expanded.
    """
    zero = (0,) * P.nvars
    c0 = P.terms.get(zero, {}).get(0, 0)
    if c0 == 0:
        raise ValueError("P needs a nonzero constant term")
    X = {}
    for e, c in P.terms.items():
        for m, v in c.items():
            if e == zero and m == 0:
                continue
            X[e + (m,)] = Fraction(v)
    max_power = 3 * C if max_power is None else max_power
    out = [Fraction(0)] * (C + 1)
    power = {zero + (0,): Fraction(1)}
    for N in range(max_power + 1):
        for e, v in power.items():
            if e[:-1] == zero and e[-1] <= C:
                out[e[-1]] += v * Fraction(-1) ** N / Fraction(c0) ** (N + 1)
        power = _laurent_mul(power, X)
        power = {e: v for e, v in power.items() if e[-1] <= C}
    return out


def period_series(C: int) -> list[int]:
    """Constant-term series of 1/(u + v + l/(u v) + 1), coefficients of l^0..l^C."""
    from .polyalg import parse_laurent
    P = parse_laurent("u + v + l*u^-1*v^-1 + 1", ["u", "v"])
    vals = constant_term_series(P, C)
    if any(v.denominator != 1 for v in vals):
        raise ArithmeticError("period coefficients are not integral")
    return [int(v) for v in vals]
