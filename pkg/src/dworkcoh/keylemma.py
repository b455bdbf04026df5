"""Finite model of the pushforward of e^{pi t x y} along (x, y, t) -> t.

The degree-2 cokernel has basis t^a dxdy (a >= 1) and b_i = (-pi x y)^i / i! dxdy
(i >= 0).  phi sends z^alpha to t^(alpha+1) and z^(-i-1) to b_i.  Frobenius is
computed by expanding with the splitting coefficients A_n and reducing with

    (xy)^(a+1) t^(c+1) = -((a+1)/pi) (xy)^a t^c,

which comes from d_y + pi t x = 0 applied to x^(a+1) y^a t^c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .padic import (PadicScalar, PiScalar, SplittingSeries, exact, splitting_coeffs,
                    verify_formula3)


class TruncationOverflow(IndexError):
    pass


@dataclass
class PushforwardElem:
    """Coordinates on t^a (1 <= a <= a_max) and b_i (0 <= i <= i_max)."""

    p: int
    a_max: int
    i_max: int
    t: dict[int, PiScalar] = field(default_factory=dict)
    b: dict[int, PiScalar] = field(default_factory=dict)

    def add(self, kind: str, idx: int, c: PiScalar) -> None:
        if kind == "t":
            if not 1 <= idx <= self.a_max:
                raise TruncationOverflow(f"t^{idx} outside window 1..{self.a_max}")
            slot = self.t
        else:
            if not 0 <= idx <= self.i_max:
                raise TruncationOverflow(f"b_{idx} outside window 0..{self.i_max}")
            slot = self.b
        slot[idx] = slot[idx] + c if idx in slot else c

    def items(self):
        for a in sorted(self.t):
            yield ("t", a), self.t[a]
        for i in sorted(self.b):
            yield ("b", i), self.b[i]

    def coefficient(self, kind: str, idx: int) -> PiScalar:
        src = self.t if kind == "t" else self.b
        return src.get(idx, _pi_zero(self.p))


def _pi_zero(p: int) -> PiScalar:
    return PiScalar(p, [PadicScalar.zero(p)] * (p - 1))


def _pi_exact(x, p: int) -> PiScalar:
    return PiScalar.scalar(exact(x, p))


def reduce_monomial(a: int, c: int, p: int) -> tuple[str, int, PiScalar]:
    """(xy)^a t^c dxdy as (kind, index, coefficient) in the cokernel basis."""
    if a < 0 or c < 0:
        raise ValueError("exponents must be non-negative")
    if c > a:
        # (-1/pi)^a a! t^(c-a)
        coef = PiScalar.pi_power(-a, p) * exact((-1) ** a * math.factorial(a), p)
        return "t", c - a, coef
    if c == a:
        coef = PiScalar.pi_power(-a, p) * exact((-1) ** a * math.factorial(a), p)
        return "b", 0, coef
    # (-1/pi)^c a!/(a-c)! (xy)^(a-c), then (xy)^i = (-pi)^(-i) i! b_i
    i = a - c
    coef = PiScalar.pi_power(-c, p) * exact((-1) ** c * math.factorial(a) // math.factorial(i), p)
    coef = coef * PiScalar.pi_power(-i, p) * exact((-1) ** i * math.factorial(i), p)
    return "b", i, coef


def reduce_y_power(m: int, s: int, p: int, a_max: int = 10 ** 6, i_max: int = 10 ** 6) -> PushforwardElem:
    """(t x y)^m t^s dxdy in the cokernel basis."""
    kind, idx, coef = reduce_monomial(m, m + s, p)
    out = PushforwardElem(p, a_max, i_max)
    out.add(kind, idx, coef)
    return out


def phi(kind: str, k: int) -> tuple[str, int]:
    """phi(z^k): z^alpha -> t^(alpha+1), z^(-i-1) -> b_i."""
    if kind != "z":
        raise ValueError("phi acts on powers of z")
    return ("t", k + 1) if k >= 0 else ("b", -k - 1)


def _series(p: int, N: int, M: int, perturb: tuple[int, int] | None) -> SplittingSeries:
    # pi^-n costs n/(p-1) digits on each coefficient
    work = N + M // (p - 1) + 6
    s = splitting_coeffs(p, work, M)
    if perturb is None:
        return s
    n, delta = perturb
    coeffs = list(s.coeffs)
    coeffs[n] = coeffs[n] + _pi_exact(delta, p)
    return SplittingSeries(p, s.precision, s.truncation, tuple(coeffs))


def truncation_for(p: int, N: int, b: int = 1) -> int:
    """A depth at which the factorial series is dominated past p^N, as for the factorial identity."""
    return verify_formula3(p, N + 2, b).truncation


def fr_pushforward(kind: str, idx: int, p: int, N: int, M: int | None = None,
                   a_max: int | None = None, i_max: int | None = None,
                   series: SplittingSeries | None = None) -> PushforwardElem:
    """Fr of t^idx dxdy (kind 't') or b_idx (kind 'b'), to absolute precision p^N.

    Fr(w(x, y, t)) = w(x^p, y^p, t^p) d(x^p) d(y^p) sum_n A_n (t x y)^n.
    """
    if p < 3:
        raise ValueError("p must be odd")
    if kind == "t" and idx < 1:
        raise ValueError("t-powers start at 1")
    b = 1 if kind == "t" else idx + 1
    if M is None:
        M = truncation_for(p, N, b)
    if series is None:
        series = _series(p, N, M, None)
    a_max = a_max if a_max is not None else (idx - 1) * p + 1 if kind == "t" else 1
    i_max = i_max if i_max is not None else (idx + 1) * p - 1 if kind == "b" else 0
    out = PushforwardElem(p, max(a_max, 1), i_max)
    p2 = exact(p * p, p)
    for n in range(M + 1):
        An = series[n]
        if all(c.is_zero for c in An.coeffs):
            continue
        if kind == "t":
            # t^(idx p) (xy)^(p-1) (txy)^n
            a, c = p - 1 + n, idx * p + n
            pref = _pi_exact(1, p)
        else:
            # (-pi)^i/i! (xy)^(p i) (xy)^(p-1) (txy)^n
            a, c = p * idx + p - 1 + n, n
            pref = PiScalar.pi_power(idx, p) * exact(Fraction((-1) ** idx, math.factorial(idx)), p)
        k2, j, coef = reduce_monomial(a, c, p)
        term = An * pref * coef * p2
        out.add(k2, j, PiScalar(p, [x.with_absprec(N) for x in term.coeffs]))
    return out


def _residual_valuation(x: PiScalar, N: int) -> Fraction | float:
    """Valuation of x, capped at N when x vanishes to the tracked precision."""
    v = x.valuation()
    return N if v == math.inf or v >= N else v


@dataclass
class IntertwineReport:
    p: int
    N: int
    checks: list[tuple[str, int, Fraction | float, bool]]

    @property
    def ok(self) -> bool:
        return all(c[3] for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c[3]]


def verify_phi_intertwine(p: int, N: int, M: int | None = None, A_max: int = 5, I_max: int = 3,
                          perturb: tuple[int, int] | None = None) -> IntertwineReport:
    """Check Fr(phi(z^alpha)) = phi(p z^(p alpha)) and Fr(phi(z^(-i-1))) = phi(p z^(-(i+1)p)).

    ``perturb=(n, delta)`` adds delta to A_n first (negative control).
    """
    if M is None:
        M = truncation_for(p, N, I_max + 1)
    series = _series(p, N, M, perturb)
    a_win = A_max * p + 1
    i_win = (I_max + 1) * p - 1
    checks = []
    for alpha in range(A_max + 1):
        kind, idx = phi("z", alpha)
        got = fr_pushforward(kind, idx, p, N, M, a_win, i_win, series)
        want_kind, want_idx = phi("z", p * alpha)
        checks.append(("alpha", alpha) + _compare(got, want_kind, want_idx, p, N))
    for i in range(I_max + 1):
        kind, idx = phi("z", -i - 1)
        got = fr_pushforward(kind, idx, p, N, M, a_win, i_win, series)
        want_kind, want_idx = phi("z", -(i + 1) * p)
        checks.append(("i", i) + _compare(got, want_kind, want_idx, p, N))
    return IntertwineReport(p, N, checks)


def _compare(got: PushforwardElem, kind: str, idx: int, p: int, N: int):
    worst: Fraction | float = N
    target = _pi_exact(p, p)
    seen = False
    for (k2, j), c in got.items():
        diff = c - target if (k2, j) == (kind, idx) else c
        seen = seen or (k2, j) == (kind, idx)
        worst = min(worst, _residual_valuation(diff, N))
    if not seen:
        worst = min(worst, 1)
    return worst, worst >= N


def chain_sum(p: int, N: int, b: int, M: int | None = None) -> PadicScalar:
    """The factorial series the b-chain reduces to, rebuilt from reduce_monomial.

    For b = 1 this is the t-chain; for b = i+1 it is the b_i chain.  Must equal
    (-1)^b p^(b-1) (b-1)!.
    """
    if M is None:
        M = truncation_for(p, N, b)
    s = _series(p, N, M, None)
    total = _pi_zero(p)
    for n in range(M + 1):
        # coefficient of (xy)^(p b + n - 1) t^n reduced to (xy)^(pb-1): (-1/pi)^n (pb+n-1)!/(pb-1)!
        _, _, coef = reduce_monomial(p * b + n - 1, n, p)
        back = PiScalar.pi_power(p * b - 1, p) * exact(Fraction((-1) ** (p * b - 1), math.factorial(p * b - 1)), p)
        term = s[n] * coef * back * exact(math.factorial(p * b - 1), p)
        total = total + PiScalar(p, [x.with_absprec(N) for x in term.coeffs])
    return total.rational_part().with_absprec(N)


# ---------------------------------------------------------------------------
# t d/dt on C[x, t] / (d_x + 2 x t)
# ---------------------------------------------------------------------------

def _normal_form(a: int, c: int) -> dict[tuple[int, int], Fraction]:
    """x^a t^c reduced with x^(a+1) t^(c+1) = -(a/2) x^(a-1) t^c."""
    coef = Fraction(1)
    while a >= 1 and c >= 1:
        if a == 1:
            return {}
        coef *= -Fraction(a - 1, 2)
        a, c = a - 2, c - 1
    return {(a, c): coef}


def t_dt(a: int, c: int) -> dict[tuple[int, int], Fraction]:
    """t d/dt of the twisted class x^a t^c: (t d/dt + t x^2) x^a t^c, reduced."""
    out: dict[tuple[int, int], Fraction] = {}
    if c:
        for k, v in _normal_form(a, c).items():
            out[k] = out.get(k, 0) + c * v
    for k, v in _normal_form(a + 2, c + 1).items():
        out[k] = out.get(k, 0) + v
    return {k: v for k, v in out.items() if v}


def weight_spectrum(kind: str, i: int) -> Fraction:
    """Eigenvalue of t d/dt on x^i (kind 'x_power') or t^i (kind 't_power')."""
    if kind == "x_power" or (kind == "t_power" and i == 0):
        if i < 0:
            raise ValueError("i must be >= 0")
        key = (i, 0)
    elif kind == "t_power":
        if i < 1:
            raise ValueError("i must be >= 1")
        key = (0, i)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    img = t_dt(*key)
    if set(img) - {key}:
        raise ArithmeticError(f"{key} is not an eigenvector: {img}")
    return img.get(key, Fraction(0))
