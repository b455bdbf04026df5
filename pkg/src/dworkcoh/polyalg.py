"""Exponent-vector polynomials with an optional single parameter.

Coefficients are stored as ``{parameter power: Fraction}`` maps so that a
one-parameter family like ``u^2*v + u*v^2 + l*w^3 + u*v*w`` is a single object.
Specialization turns the parameter into a number (rational or p-adic).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

Exps = tuple[int, ...]
Coeff = dict[int, Fraction]  # parameter power -> rational

PARAM = "l"


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 1, col: int = 1):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


class UnsupportedShape(ValueError):
    pass


def _clean(terms: Mapping[Exps, Mapping[int, object]]) -> dict[Exps, dict]:
    out: dict[Exps, dict] = {}
    for e, c in terms.items():
        cc = {m: v for m, v in c.items() if not _is_zero(v)}
        if cc:
            out[tuple(e)] = cc
    return out


def _is_zero(v) -> bool:
    if hasattr(v, "is_zero"):
        z = v.is_zero
        return z() if callable(z) else z
    return v == 0


def _add_into(acc: dict, e: Exps, c: Mapping[int, object]) -> None:
    slot = acc.setdefault(e, {})
    for m, v in c.items():
        slot[m] = slot.get(m, 0) + v


@dataclass(frozen=True)
class LaurentPoly:
    """Finite Laurent polynomial; exponents may be negative."""

    variables: tuple[str, ...]
    terms: dict[Exps, Coeff] = field(default_factory=dict)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def is_polynomial(self) -> bool:
        return all(min(e, default=0) >= 0 for e in self.terms)

    def __eq__(self, other) -> bool:
        return (isinstance(other, LaurentPoly) and self.variables == other.variables
                and _clean(self.terms) == _clean(other.terms))

    def __str__(self) -> str:
        return format_terms(self.terms, self.variables)


@dataclass(frozen=True)
class HomoPoly:
    """Homogeneous polynomial of degree d in n+1 variables."""

    variables: tuple[str, ...]
    degree: int
    terms: dict[Exps, Coeff] = field(default_factory=dict)

    def __post_init__(self):
        for e in self.terms:
            if len(e) != len(self.variables):
                raise ValueError(f"exponent {e} has wrong length")
            if min(e, default=0) < 0:
                raise ValueError(f"negative exponent in {e}")
            if sum(e) != self.degree:
                raise ValueError(f"term {e} is not of degree {self.degree}")

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def n(self) -> int:
        """Projective dimension."""
        return len(self.variables) - 1

    def has_parameter(self) -> bool:
        return any(m != 0 for c in self.terms.values() for m in c)

    def param_degree(self) -> int:
        return max((m for c in self.terms.values() for m in c), default=0)

    def constant_terms(self) -> dict[Exps, object]:
        """Coefficients of a parameter-free polynomial."""
        if self.has_parameter():
            raise ValueError("polynomial still depends on the parameter")
        return {e: c.get(0, 0) for e, c in self.terms.items() if not _is_zero(c.get(0, 0))}

    def __eq__(self, other) -> bool:
        return (isinstance(other, HomoPoly) and self.variables == other.variables
                and self.degree == other.degree and _clean(self.terms) == _clean(other.terms))

    def __hash__(self):
        return hash((self.variables, self.degree, tuple(sorted(
            (e, tuple(sorted(c.items()))) for e, c in _clean(self.terms).items()))))

    def __str__(self) -> str:
        return format_terms(self.terms, self.variables)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def partials(f: HomoPoly) -> list[HomoPoly]:
    """The n+1 partial derivatives, each homogeneous of degree d-1."""
    out = []
    for j in range(f.nvars):
        acc: dict[Exps, Coeff] = {}
        for e, c in f.terms.items():
            if e[j] == 0:
                continue
            e2 = e[:j] + (e[j] - 1,) + e[j + 1:]
            _add_into(acc, e2, {m: v * e[j] for m, v in c.items()})
        out.append(HomoPoly(f.variables, f.degree - 1, _clean(acc)))
    return out


def param_derivative(f: HomoPoly, log: bool = False) -> HomoPoly:
    """d/dl, or l*d/dl when ``log`` is set."""
    acc: dict[Exps, Coeff] = {}
    for e, c in f.terms.items():
        for m, v in c.items():
            if m == 0:
                continue
            key = m if log else m - 1
            acc.setdefault(e, {})[key] = acc.get(e, {}).get(key, 0) + m * v
    return HomoPoly(f.variables, f.degree, _clean(acc))


def evaluate_param(f: HomoPoly, value) -> HomoPoly:
    """Specialize the parameter; ``value`` may be a rational or a PadicScalar."""
    if not f.has_parameter():
        return f
    acc: dict[Exps, dict] = {}
    for e, c in f.terms.items():
        s = 0
        for m, v in c.items():
            s = s + (value ** m) * v if m else s + v
        acc[e] = {0: s}
    return HomoPoly(f.variables, f.degree, _clean(acc))


def euler_check(f: HomoPoly) -> bool:
    """sum_j x_j d_j f == d f."""
    acc: dict[Exps, Coeff] = {}
    for j, g in enumerate(partials(f)):
        for e, c in g.terms.items():
            e2 = e[:j] + (e[j] + 1,) + e[j + 1:]
            _add_into(acc, e2, c)
    target = {e: {m: v * f.degree for m, v in c.items()} for e, c in f.terms.items()}
    return _clean(acc) == _clean(target)


def clearing_monomial(P: LaurentPoly) -> Exps:
    return tuple(max(0, -min(e[i] for e in P.terms)) for i in range(P.nvars))


def homogenize_laurent(P: LaurentPoly, new_var: str = "w") -> HomoPoly:
    """Clear denominators by the minimal monomial, then homogenize with one new variable."""
    if not P.terms:
        raise UnsupportedShape("zero Laurent polynomial has no closure")
    if new_var in P.variables:
        raise UnsupportedShape(f"variable name {new_var!r} already in use")
    shift = clearing_monomial(P)
    cleared = {tuple(a + b for a, b in zip(e, shift)): c for e, c in P.terms.items()}
    d = max(sum(e) for e in cleared)
    if d <= 0:
        raise UnsupportedShape("clearing produces a constant")
    terms = {e + (d - sum(e),): dict(c) for e, c in cleared.items()}
    return HomoPoly(P.variables + (new_var,), d, _clean(terms))


def dehomogenize(F: HomoPoly, shift: Exps | None = None) -> LaurentPoly:
    """Set the last variable to 1 and divide by the monomial ``shift``."""
    shift = shift or (0,) * (F.nvars - 1)
    acc: dict[Exps, Coeff] = {}
    for e, c in F.terms.items():
        _add_into(acc, tuple(a - b for a, b in zip(e[:-1], shift)), c)
    return LaurentPoly(F.variables[:-1], _clean(acc))


def teichmuller_monomials(f: HomoPoly) -> list[tuple[Exps, int, int]]:
    """Write each term as sign * l^m; returns (exponents, sign, m).

    Raises ValueError when some coefficient is not of that shape.
    """
    out = []
    for e, c in sorted(f.terms.items()):
        if len(c) != 1:
            raise ValueError(f"coefficient of {e} is not a single parameter power")
        (m, v), = c.items()
        if v not in (1, -1):
            raise ValueError(f"coefficient of {e} is not +-l^m")
        out.append((e, int(v), m))
    return out


# ---------------------------------------------------------------------------
# text syntax
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\^)|(\*)|([+-])|(\S))")


def _tokens(text: str, line: int):
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        col = m.start(m.lastindex) + 1
        kind = ("num", "ident", "caret", "star", "sign", "bad")[m.lastindex - 1]
        if kind == "bad":
            raise ParseError(f"unexpected character {m.group(m.lastindex)!r}", line, col)
        yield kind, m.group(m.lastindex), col
        pos = m.end()
    yield "end", "", len(text) + 1


def parse_laurent(text: str, variables: Iterable[str] | None = None,
                  param: str = PARAM, line: int = 1) -> LaurentPoly:
    """Parse ``u + v + l*u^-1*v^-1 + 1``. Variables default to order of appearance."""
    fixed = list(variables) if variables is not None else None
    order: list[str] = list(fixed or [])
    raw: list[tuple[dict[str, int], int, Fraction, int]] = []
    toks = list(_tokens(text, line))
    i = 0

    def peek():
        return toks[i]

    sign = 1
    expect_term = True
    coeff, pw, mono = Fraction(1), 0, {}
    if peek()[0] == "end":
        raise ParseError("empty polynomial", line, 1)
    while True:
        kind, val, col = peek()
        if expect_term:
            if kind == "sign":
                sign = -sign if val == "-" else sign
                i += 1
                continue
            if kind == "num":
                coeff *= Fraction(val)
            elif kind == "ident":
                i += 1
                e = 1
                if peek()[0] == "caret":
                    i += 1
                    k2, v2, c2 = peek()
                    neg = False
                    if k2 == "sign":
                        neg = v2 == "-"
                        i += 1
                        k2, v2, c2 = peek()
                    if k2 != "num" or "/" in v2:
                        raise ParseError("expected integer exponent", line, c2)
                    e = -int(v2) if neg else int(v2)
                    i += 1
                if val == param:
                    if e < 0:
                        raise ParseError("negative parameter power", line, col)
                    pw += e
                else:
                    if fixed is not None and val not in fixed:
                        raise ParseError(f"unknown variable {val!r}", line, col)
                    if val not in order:
                        order.append(val)
                    mono[val] = mono.get(val, 0) + e
                expect_term = False
                continue
            else:
                raise ParseError(f"expected a term, found {val or 'end of input'!r}", line, col)
            i += 1
            expect_term = False
            continue
        if kind == "star":
            expect_term = True
            i += 1
            continue
        if kind in ("sign", "end"):
            raw.append((mono, pw, coeff * sign, col))
            if kind == "end":
                break
            sign = -1 if val == "-" else 1
            coeff, pw, mono = Fraction(1), 0, {}
            expect_term = True
            i += 1
            continue
        raise ParseError(f"unexpected {val!r}", line, col)
    acc: dict[Exps, Coeff] = {}
    for mono, pw, c, _ in raw:
        e = tuple(mono.get(v, 0) for v in order)
        _add_into(acc, e, {pw: c})
    return LaurentPoly(tuple(order), _clean(acc))


def parse_homogeneous(text: str, variables: Iterable[str] | None = None,
                      param: str = PARAM) -> HomoPoly:
    P = parse_laurent(text, variables, param)
    if not P.is_polynomial():
        raise ParseError("negative exponent in a projective polynomial")
    degs = {sum(e) for e in P.terms}
    if len(degs) != 1:
        raise ParseError(f"polynomial is not homogeneous (degrees {sorted(degs)})")
    return HomoPoly(P.variables, degs.pop(), P.terms)


def _fmt_coeff(c: Coeff) -> str:
    parts = []
    for m in sorted(c):
        v = c[m]
        s = str(v)
        if m == 0:
            parts.append(s)
        else:
            p = PARAM if m == 1 else f"{PARAM}^{m}"
            parts.append(p if v == 1 else (f"-{p}" if v == -1 else f"{s}*{p}"))
    return parts[0] if len(parts) == 1 else "(" + " + ".join(parts) + ")"


def format_terms(terms: Mapping[Exps, Coeff], variables: tuple[str, ...]) -> str:
    if not terms:
        return "0"
    out = []
    for e in sorted(terms, reverse=True):
        c = terms[e]
        mono = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(variables, e) if k)
        cs = _fmt_coeff(c)
        if not mono:
            out.append(cs)
        elif cs == "1":
            out.append(mono)
        elif cs == "-1":
            out.append("-" + mono)
        else:
            out.append(f"{cs}*{mono}")
    return " + ".join(out).replace("+ -", "- ")
