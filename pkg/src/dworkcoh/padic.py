"""Fixed-precision p-adic scalars, the ring Q_p[pi]/(pi^(p-1) + p), and Dwork's
splitting series.

Every scalar carries its own precision window; arithmetic propagates it
conservatively and never claims more digits than the inputs justify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

INF = math.inf


class PrecisionExhausted(ArithmeticError):
    """Raised when a value is indistinguishable from zero but must be inverted."""


class TailNotDominated(ArithmeticError):
    """Raised when a truncated series leaves terms above the requested precision."""


def valuation(n: int, p: int) -> int | float:
    if n == 0:
        return INF
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def legendre(n: int, p: int) -> int:
    """ord_p(n!) by Legendre's formula."""
    v = 0
    while n:
        n //= p
        v += n
    return v


def factorial_unit(n: int, p: int, prec: int) -> int:
    """Unit part n!/p^ord_p(n!) modulo p^prec."""
    mod = p ** prec
    u = 1
    for k in range(2, n + 1):
        while k % p == 0:
            k //= p
        u = (u * k) % mod
    return u


def teichmuller(k: int, p: int, prec: int) -> int:
    """The (p-1)-th root of unity congruent to k mod p, as a residue mod p^prec."""
    if k % p == 0:
        return 0
    mod = p ** prec
    x = k % p
    # each application of x -> x^p gains one digit
    for _ in range(prec):
        x = pow(x, p, mod)
    return x


@dataclass(frozen=True)
class PadicScalar:
    """unit * p^valuation, known modulo p^(valuation + precision).

    A zero carries ``valuation = inf`` and ``precision`` is then the absolute
    precision to which it is known to vanish (``inf`` for an exact zero).
    Exact nonzero values have ``precision = inf`` and keep their unit as an
    int or Fraction prime to p.
    """

    p: int
    valuation: int | float
    unit: int | Fraction
    precision: int | float

    # -- construction -------------------------------------------------
    @classmethod
    def zero(cls, p: int, absprec: int | float = INF) -> "PadicScalar":
        return cls(p, INF, 0, absprec)

    @classmethod
    def from_rational(cls, x, p: int, absprec: int | float = INF) -> "PadicScalar":
        """Convert an int or Fraction, keeping digits below p^absprec."""
        x = Fraction(x)
        if x == 0:
            return cls.zero(p, absprec)
        num, den = x.numerator, x.denominator
        vn, vd = valuation(num, p), valuation(den, p)
        v = vn - vd
        un, ud = num // p ** vn, den // p ** vd
        if absprec == INF:
            u = Fraction(un, ud)
            return cls(p, v, u.numerator if u.denominator == 1 else u, INF)
        if v >= absprec:
            return cls.zero(p, absprec)
        rel = int(absprec - v)
        mod = p ** rel
        return cls(p, v, (un * pow(ud, -1, mod)) % mod, rel)

    @classmethod
    def from_residue(cls, r: int, p: int, absprec: int, shift: int = 0) -> "PadicScalar":
        """Value r * p^shift where r is an integer known modulo p^absprec."""
        r %= p ** absprec
        if r == 0:
            return cls.zero(p, absprec + shift)
        v = valuation(r, p)
        rel = absprec - v
        return cls(p, v + shift, (r // p ** v) % p ** rel, rel)

    # -- queries --------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.valuation == INF

    @property
    def is_exact(self) -> bool:
        return self.precision == INF

    @property
    def absprec(self) -> int | float:
        if self.is_zero:
            return self.precision
        return self.valuation + self.precision

    def unit_residue(self, rel: int) -> int:
        """The unit modulo p^rel (rel may not exceed the relative precision)."""
        mod = self.p ** rel
        u = self.unit
        if isinstance(u, Fraction):
            return (u.numerator * pow(u.denominator, -1, mod)) % mod
        return u % mod

    def residue(self, absprec: int) -> int:
        """Integer representative modulo p^absprec (requires valuation >= 0)."""
        if absprec > self.absprec:
            raise PrecisionExhausted(f"requested p^{absprec}, known to p^{self.absprec}")
        if self.is_zero or self.valuation >= absprec:
            return 0
        if self.valuation < 0:
            raise ValueError("value is not p-integral")
        rel = int(absprec - self.valuation)
        return (self.unit_residue(rel) * self.p ** self.valuation) % self.p ** absprec

    def to_fraction(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.valuation

    def signed_lift(self) -> Fraction:
        """Representative with the balanced unit, used to read off small integers."""
        if self.is_zero:
            return Fraction(0)
        if self.is_exact:
            return self.to_fraction()
        mod = self.p ** self.precision
        u = self.unit if self.unit <= mod // 2 else self.unit - mod
        return Fraction(u) * Fraction(self.p) ** self.valuation

    def with_absprec(self, absprec: int | float) -> "PadicScalar":
        """Forget digits beyond p^absprec."""
        if absprec >= self.absprec:
            return self
        if self.is_zero or self.valuation >= absprec:
            return PadicScalar.zero(self.p, absprec)
        rel = int(absprec - self.valuation)
        return PadicScalar(self.p, self.valuation, self.unit_residue(rel), rel)

    def agrees(self, other: "PadicScalar", absprec: int | float) -> bool:
        d = self - other
        return d.is_zero or d.valuation >= absprec

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> "PadicScalar":
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise ValueError("mixed primes")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicScalar.from_rational(other, self.p)
        return NotImplemented

    def __neg__(self) -> "PadicScalar":
        if self.is_zero:
            return self
        if self.is_exact:
            return PadicScalar(self.p, self.valuation, -self.unit, INF)
        mod = self.p ** self.precision
        return PadicScalar(self.p, self.valuation, (-self.unit) % mod, self.precision)

    def __add__(self, other) -> "PadicScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        absprec = min(self.absprec, other.absprec)
        if self.is_zero and other.is_zero:
            return PadicScalar.zero(p, absprec)
        if absprec == INF:
            return PadicScalar.from_rational(self.to_fraction() + other.to_fraction(), p)
        v = min(self.valuation, other.valuation)
        if v >= absprec:
            return PadicScalar.zero(p, absprec)
        width = int(absprec - v)
        total = 0
        for x in (self, other):
            if not x.is_zero and x.valuation - v < width:
                shift = int(x.valuation - v)
                total += x.unit_residue(width - shift) * p ** shift
        return PadicScalar.from_residue(total, p, width, int(v))

    __radd__ = __add__

    def __sub__(self, other) -> "PadicScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "PadicScalar":
        return (-self) + other

    def __mul__(self, other) -> "PadicScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        if self.is_zero or other.is_zero:
            # a zero known to p^a times u p^v is known to p^(a+v)
            a = self.precision if self.is_zero else INF
            b = other.precision if other.is_zero else INF
            bound_a = a + (other.valuation if not other.is_zero else b)
            bound_b = b + (self.valuation if not self.is_zero else a)
            return PadicScalar.zero(p, min(bound_a, bound_b))
        v = self.valuation + other.valuation
        rel = min(self.precision, other.precision)
        if rel == INF:
            u = Fraction(self.unit) * Fraction(other.unit)
            return PadicScalar(p, v, u.numerator if u.denominator == 1 else u, INF)
        rel = int(rel)
        return PadicScalar(p, v, (self.unit_residue(rel) * other.unit_residue(rel)) % p ** rel, rel)

    __rmul__ = __mul__

    def inverse(self) -> "PadicScalar":
        if self.is_zero:
            raise PrecisionExhausted(
                f"cannot invert a value that vanishes modulo p^{self.precision}")
        if self.is_exact:
            u = 1 / Fraction(self.unit)
            return PadicScalar(self.p, -self.valuation,
                               u.numerator if u.denominator == 1 else u, INF)
        mod = self.p ** int(self.precision)
        return PadicScalar(self.p, -self.valuation, pow(self.unit, -1, mod), self.precision)

    def __truediv__(self, other) -> "PadicScalar":
        other = self._coerce(other)
        return self * other.inverse()

    def __pow__(self, n: int) -> "PadicScalar":
        if n < 0:
            return self.inverse() ** (-n)
        out = PadicScalar(self.p, 0, 1, INF)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __repr__(self) -> str:
        return render(self)


def render(x: PadicScalar) -> str:
    """Text form ``p^v * u`` with u a decimal residue, or ``O(p^a)`` for zero."""
    if x.is_zero:
        return "0" if x.precision == INF else f"O({x.p}^{x.precision})"
    if x.is_exact:
        return f"{x.p}^{x.valuation} * {x.unit}"
    return f"{x.p}^{x.valuation} * {x.unit} + O({x.p}^{x.absprec})"


def exact(x, p: int) -> PadicScalar:
    return PadicScalar.from_rational(x, p)


def pfactorial(n: int, p: int, relprec: int) -> PadicScalar:
    """n! with its valuation from Legendre's formula and unit part mod p^relprec."""
    return PadicScalar(p, legendre(n, p), factorial_unit(n, p, relprec), relprec)


# ---------------------------------------------------------------------------
# Q_p[pi] with pi^(p-1) = -p
# ---------------------------------------------------------------------------

class PiScalar:
    """sum_{i=0}^{p-2} a_i pi^i with PadicScalar coefficients."""

    __slots__ = ("p", "coeffs")

    def __init__(self, p: int, coeffs: Sequence[PadicScalar]):
        if len(coeffs) != p - 1:
            raise ValueError("need exactly p-1 coefficients")
        self.p = p
        self.coeffs = tuple(coeffs)

    @classmethod
    def scalar(cls, x: PadicScalar) -> "PiScalar":
        p = x.p
        return cls(p, [x] + [PadicScalar.zero(p)] * (p - 2))

    @classmethod
    def pi_power(cls, n: int, p: int) -> "PiScalar":
        """pi^n for any integer n, rewritten as (-p)^q pi^r with 0 <= r < p-1."""
        q, r = divmod(n, p - 1)
        coeffs = [PadicScalar.zero(p)] * (p - 1)
        coeffs[r] = PadicScalar(p, q, -1 if q % 2 else 1, INF)
        return cls(p, coeffs)

    def __add__(self, other: "PiScalar") -> "PiScalar":
        return PiScalar(self.p, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "PiScalar":
        return PiScalar(self.p, [-a for a in self.coeffs])

    def __sub__(self, other: "PiScalar") -> "PiScalar":
        return self + (-other)

    def __mul__(self, other) -> "PiScalar":
        p = self.p
        if isinstance(other, PadicScalar):
            return PiScalar(p, [a * other for a in self.coeffs])
        out = [PadicScalar.zero(p)] * (p - 1)
        minus_p = exact(-p, p)
        for i, a in enumerate(self.coeffs):
            if a.is_zero and a.precision == INF:
                continue
            for j, b in enumerate(other.coeffs):
                if b.is_zero and b.precision == INF:
                    continue
                term = a * b
                k = i + j
                if k >= p - 1:
                    k -= p - 1
                    term = term * minus_p
                out[k] = out[k] + term
        return PiScalar(p, out)

    __rmul__ = __mul__

    def support(self) -> list[int]:
        return [i for i, a in enumerate(self.coeffs) if not a.is_zero]

    def pi_degree(self) -> int | None:
        """Degree mod (p-1) if exactly one pi-power carries a nonzero coefficient."""
        s = self.support()
        if len(s) == 1:
            return s[0]
        return None

    def valuation(self) -> Fraction | float:
        """ord_p, using ord_p(pi) = 1/(p-1); distinct pi-powers cannot cancel."""
        best: Fraction | float = INF
        for i, a in enumerate(self.coeffs):
            if not a.is_zero:
                best = min(best, a.valuation + Fraction(i, self.p - 1))
        return best

    def rational_part(self) -> PadicScalar:
        """The coefficient of pi^0; raises if other pi-powers are nonzero."""
        if any(not a.is_zero for a in self.coeffs[1:]):
            raise ValueError("element is not pi-homogeneous of degree 0")
        return self.coeffs[0]

    def __repr__(self) -> str:
        terms = [f"({render(a)})*pi^{i}" for i, a in enumerate(self.coeffs) if not a.is_zero]
        return " + ".join(terms) or "0"


# ---------------------------------------------------------------------------
# Splitting series A(z) = exp(pi (z^p - z))
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def splitting_rational(n: int, p: int) -> Fraction:
    """The rational a_n with A_n = a_n * pi^n.

    The coefficient of z^n in exp(pi z^p) exp(-pi z) is the sum over
    p*i + j = n of pi^(i+j) (-1)^j / (i! j!); since pi^(i+j) = pi^n (-p)^(-i)
    every summand is a rational multiple of pi^n.
    """
    total = Fraction(0)
    for i in range(n // p + 1):
        j = n - p * i
        total += Fraction((-1) ** j, math.factorial(i) * math.factorial(j)) / Fraction(-p) ** i
    return total


@dataclass(frozen=True)
class SplittingSeries:
    p: int
    precision: int
    truncation: int
    coeffs: tuple[PiScalar, ...]

    def __getitem__(self, n: int) -> PiScalar:
        return self.coeffs[n]

    def __len__(self) -> int:
        return len(self.coeffs)


def splitting_coeffs(p: int, N: int, M: int) -> SplittingSeries:
    """A_0..A_M of exp(pi(theta^p - theta)), each known to absolute precision p^N.

    Built term by term from the product of the two exponential series; each
    summand pi^(i+j) (-1)^j/(i! j!) is reduced into the pi-ring before summing.
    """
    if p < 3 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
        raise ValueError("p must be an odd prime")
    if M < 0:
        raise ValueError("M must be non-negative")
    coeffs = []
    for n in range(M + 1):
        acc = PiScalar(p, [PadicScalar.zero(p, N)] * (p - 1))
        for i in range(n // p + 1):
            j = n - p * i
            c = PadicScalar.from_rational(
                Fraction((-1) ** j, math.factorial(i) * math.factorial(j)), p, N + i + 1)
            # pi^(i+j) = (-p)^q pi^r; keep absolute precision N on the pi^r coefficient
            term = PiScalar.pi_power(i + j, p) * c
            acc = acc + PiScalar(p, [a.with_absprec(N) for a in term.coeffs])
        coeffs.append(acc)
    return SplittingSeries(p, N, M, tuple(coeffs))


def overconvergence_bound(n: int, p: int) -> Fraction:
    return Fraction(n * (p - 1), p * p)


# ---------------------------------------------------------------------------
# Identity sum_n A_n (-1)^n pi^(-n) (pb+n-1)! = (-1)^b p^(b-1) (b-1)!
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Formula3Result:
    p: int
    b: int
    precision: int
    truncation: int
    total: PadicScalar
    expected: PadicScalar
    residual: PadicScalar

    @property
    def ok(self) -> bool:
        r = self.residual
        return r.is_zero and r.precision >= self.precision or (
            not r.is_zero and r.valuation >= self.precision)


def _formula3_terms(p: int, N: int, b: int, M: int) -> list[PadicScalar]:
    # Work with a_n = A_n / pi^n directly: A_n (-1)^n pi^(-n) = (-1)^n a_n.
    guard = b + 4 + math.ceil(math.log(M + p * b + 2, p))
    terms = []
    for n in range(M + 1):
        a = splitting_rational(n, p)
        if a == 0:
            terms.append(PadicScalar.zero(p))
            continue
        fact = pfactorial(p * b + n - 1, p, N + guard + legendre(M, p) + 2)
        x = PadicScalar.from_rational((-1) ** n * a, p, N + guard + M) * fact
        terms.append(x.with_absprec(N + guard))
    return terms


def _pi_route_term(series: SplittingSeries, n: int, b: int, absprec: int) -> PadicScalar:
    """One summand through genuine pi-ring arithmetic (used for cross-checks)."""
    p = series.p
    t = series[n] * PiScalar.pi_power(-n, p)
    t = t * exact((-1) ** n, p)
    fact = pfactorial(p * b + n - 1, p, absprec + 8)
    return (t.rational_part() * fact).with_absprec(absprec)


def tail_window(p: int, N: int) -> int:
    return math.ceil(p * N / (p - 1))


def verify_formula3(p: int, N: int, b: int, M: int | None = None,
                    via_pi_ring: bool = False) -> Formula3Result:
    """Residual of the factorial identity at absolute precision p^N.

    With ``M=None`` the truncation doubles until the last ceil(pN/(p-1)) terms
    all have valuation >= N. An explicit M that fails this test raises
    TailNotDominated.
    """
    if b < 1:
        raise ValueError("b must be >= 1")
    auto = M is None
    M = M if M is not None else max(2 * p, 8)
    window = tail_window(p, N)
    while True:
        if via_pi_ring:
            series = splitting_coeffs(p, N + b + 8, M)
            terms = [_pi_route_term(series, n, b, N + 4) for n in range(M + 1)]
        else:
            terms = _formula3_terms(p, N, b, M)
        tail = terms[max(0, M + 1 - window):]
        dominated = M + 1 > window and all(t.is_zero or t.valuation >= N for t in tail)
        if dominated:
            break
        if not auto:
            raise TailNotDominated(f"M={M} leaves tail terms below p^{N}")
        M *= 2
    total = PadicScalar.zero(p)
    for t in terms:
        total = total + t
    total = total.with_absprec(N)
    expected = exact((-1) ** b * p ** (b - 1) * math.factorial(b - 1), p).with_absprec(N)
    return Formula3Result(p, b, N, M, total, expected, (total - expected).with_absprec(N))


def padic_arith(a: PadicScalar, b: PadicScalar | None, op: str) -> PadicScalar:
    """Dispatch helper mirroring the CLI vocabulary: add, mul, inv, neg."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    if op == "neg":
        return -a
    raise ValueError(f"unknown op {op!r}")


def sum_padic(xs: Iterable[PadicScalar], p: int) -> PadicScalar:
    total = PadicScalar.zero(p)
    for x in xs:
        total = total + x
    return total
