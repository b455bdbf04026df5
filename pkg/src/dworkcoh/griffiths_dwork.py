"""Jacobian-ring linear algebra and pole-order reduction on H^n(P^n - V).

A form sum_k A_k Omega/f^(k+1) is stored as ``{k: {exponents: coeff}}``.  We
use the signed symbol [A, k] for the class of A Omega/f^(k+1) under which the
pole relation reads

    [d_j h, k-1] = -k [h d_j f, k],

so a top part sum_j h_j d_j f at pole k is traded for -(1/k) sum_j d_j h_j at
pole k-1.  The same relation without the 1/k is used in the integral
"Dwork" normalisation e_{A,k} = k! [A, k], which is what p-adic callers use.
"""

from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Mapping, Sequence

from .padic import PadicScalar, PrecisionExhausted, legendre
from .polyalg import Exps, HomoPoly, partials

Poly = dict  # exponents -> ring element


class SingularHypersurface(ValueError):
    pass


class BadReduction(ValueError):
    pass


# ---------------------------------------------------------------------------
# coefficient rings
# ---------------------------------------------------------------------------

class RationalField:
    """Exact rationals."""

    name = "QQ"
    zero = Fraction(0)
    one = Fraction(1)

    def __call__(self, x) -> Fraction:
        if isinstance(x, PadicScalar):
            raise TypeError("p-adic value in rational mode")
        return Fraction(x)

    def norm(self, x):
        return x

    def is_unit(self, x) -> bool:
        return x != 0

    def inv(self, x):
        return 1 / x

    def key(self):
        return ("QQ",)


QQ = RationalField()


class ResidueRing:
    """Z / p^K Z with elements stored as ints in [0, p^K)."""

    def __init__(self, p: int, K: int):
        self.p = p
        self.K = K
        self.mod = p ** K
        self.name = f"Z/{p}^{K}"
        self.zero = 0
        self.one = 1

    def __call__(self, x) -> int:
        if isinstance(x, PadicScalar):
            return x.residue(self.K)
        x = Fraction(x)
        if x.denominator % self.p == 0:
            raise PrecisionExhausted(f"{x} is not {self.p}-integral")
        return x.numerator * pow(x.denominator, -1, self.mod) % self.mod

    def norm(self, x: int) -> int:
        return x % self.mod

    def is_unit(self, x: int) -> bool:
        return x % self.p != 0

    def inv(self, x: int) -> int:
        return pow(x, -1, self.mod)

    def key(self):
        return ("Zmod", self.p, self.K)


# ---------------------------------------------------------------------------
# monomials
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def monomials(nvars: int, e: int) -> tuple[Exps, ...]:
    """All exponent vectors of total degree e, in decreasing lex order."""
    if e < 0:
        return ()
    if nvars == 1:
        return ((e,),)
    out = []
    for a in range(e, -1, -1):
        for rest in monomials(nvars - 1, e - a):
            out.append((a,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(nvars: int, e: int) -> dict[Exps, int]:
    return {m: i for i, m in enumerate(monomials(nvars, e))}


def hilbert_dims(nvars: int, d: int) -> list[int]:
    """Coefficients of ((1 - t^(d-1)) / (1 - t))^nvars, the Jacobian-ring Hilbert series
    of a smooth degree-d hypersurface."""
    poly = [1]
    for _ in range(nvars):
        new = [0] * (len(poly) + d - 2)
        for i, c in enumerate(poly):
            for k in range(d - 1):
                new[i + k] += c
        poly = new
    return poly


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

@dataclass
class _Echelon:
    degree: int
    pivots: dict[int, tuple[dict, dict]]   # column -> (row, combination)
    basis: list[Exps]


class JacobianSolver:
    """Row-reduced multiplication maps (h_0..h_n) -> sum h_j d_j f, one per degree.

    Columns are monomials in decreasing lex order; pivots need a unit entry.
    Non-pivot columns are the standard (basis) monomials.  Built lazily and
    cached; after :meth:`prepare` the solver is read-only and safe to share.
    """

    def __init__(self, coeffs: Mapping[Exps, object], nvars: int, degree: int, ring=QQ):
        self.ring = ring
        self.nvars = nvars
        self.n = nvars - 1
        self.d = degree
        self.sigma = nvars * (degree - 2)
        self.f = {e: ring.norm(ring(c)) for e, c in coeffs.items()}
        self.f = {e: c for e, c in self.f.items() if c != ring.zero}
        self.df: list[dict] = []
        for j in range(nvars):
            dj: dict = {}
            for e, c in self.f.items():
                if e[j]:
                    e2 = e[:j] + (e[j] - 1,) + e[j + 1:]
                    dj[e2] = ring.norm(dj.get(e2, ring.zero) + c * e[j])
            self.df.append({e: c for e, c in dj.items() if c != ring.zero})
        self._ech: dict[int, _Echelon] = {}
        self._table: dict[Exps, list[dict]] | None = None
        self._lock = threading.RLock()

    @classmethod
    def for_poly(cls, f: HomoPoly, ring=QQ) -> "JacobianSolver":
        return cls(f.constant_terms(), f.nvars, f.degree, ring)

    # -- echelon construction --------------------------------------------
    def echelon(self, e: int) -> _Echelon:
        ech = self._ech.get(e)
        if ech is not None:
            return ech
        with self._lock:
            if e not in self._ech:
                self._ech[e] = self._build(e)
            return self._ech[e]

    def _build(self, e: int) -> _Echelon:
        ring = self.ring
        cols = monomial_index(self.nvars, e)
        src = monomials(self.nvars, e - self.d + 1)
        rows: list[dict] = []
        combos: list[dict] = []
        for j in range(self.nvars):
            for mi, m in enumerate(src):
                row = {}
                for g, c in self.df[j].items():
                    row[cols[tuple(a + b for a, b in zip(m, g))]] = c
                if row:
                    rows.append(row)
                    combos.append({(j, m): ring.one})
        col_rows: dict[int, set[int]] = {}
        for r, row in enumerate(rows):
            for c in row:
                col_rows.setdefault(c, set()).add(r)
        pivots: dict[int, tuple[dict, dict]] = {}
        basis: list[Exps] = []
        monos = monomials(self.nvars, e)
        used: set[int] = set()
        for c in range(len(monos)):
            cand = [r for r in col_rows.get(c, ()) if r not in used]
            units = [r for r in cand if ring.is_unit(rows[r][c])]
            if not units:
                basis.append(monos[c])
                continue
            piv = min(units, key=lambda r: (len(rows[r]), r))
            used.add(piv)
            prow, pcombo = rows[piv], combos[piv]
            pinv = ring.inv(prow[c])
            for r in cand:
                if r == piv:
                    continue
                row, combo = rows[r], combos[r]
                fac = ring.norm(row[c] * pinv)
                for cc, v in prow.items():
                    nv = ring.norm(row.get(cc, ring.zero) - fac * v)
                    if nv == ring.zero:
                        if cc in row:
                            del row[cc]
                            col_rows[cc].discard(r)
                    else:
                        if cc not in row:
                            col_rows.setdefault(cc, set()).add(r)
                        row[cc] = nv
                for k, v in pcombo.items():
                    nv = ring.norm(combo.get(k, ring.zero) - fac * v)
                    if nv == ring.zero:
                        combo.pop(k, None)
                    else:
                        combo[k] = nv
            pivots[c] = (prow, pcombo)
        for r, row in enumerate(rows):
            if r not in used and row:
                raise BadReduction(
                    f"Jacobian map in degree {e} has non-unit pivots over {ring.name}")
        return _Echelon(e, pivots, basis)

    # -- queries -----------------------------------------------------------
    def check_smooth(self) -> None:
        try:
            top = self.echelon(self.sigma + 1)
        except BadReduction:
            raise
        if top.basis:
            if self.ring is QQ:
                raise SingularHypersurface(
                    f"Jacobian ring is nonzero in degree {self.sigma + 1}")
            raise BadReduction(f"reduction over {self.ring.name} is singular")

    def dims(self) -> list[int]:
        self.check_smooth()
        return [len(self.echelon(e).basis) for e in range(self.sigma + 1)]

    def basis_degrees(self) -> list[tuple[int, int]]:
        """(pole order k, numerator degree) for k = 0..n-1."""
        return [(k, (k + 1) * self.d - self.nvars) for k in range(self.n)]

    def prepare(self, max_degree: int | None = None) -> None:
        """Build every cache needed for reductions up to ``max_degree``."""
        self.check_smooth()
        self.table()
        for _, e in self.basis_degrees():
            if e >= 0:
                self.echelon(e)
        top = self.sigma + 1 if max_degree is None else min(max_degree, self.sigma + 1)
        for e in range(self.d - 1, top + 1):
            self.echelon(e)

    # -- decomposition -------------------------------------------------------
    def table(self) -> dict[Exps, list[dict]]:
        """x^K = sum_j g_{K,j} d_j f for every monomial K of degree sigma+1."""
        if self._table is not None:
            return self._table
        with self._lock:
            if self._table is None:
                e = self.sigma + 1
                self.check_smooth()
                tab = {}
                for m in monomials(self.nvars, e):
                    h, rem = self._decompose_echelon({m: self.ring.one}, e)
                    assert not rem
                    tab[m] = h
                self._table = tab
        return self._table

    def _decompose_echelon(self, g: Mapping[Exps, object], e: int):
        ring = self.ring
        ech = self.echelon(e)
        idx = monomial_index(self.nvars, e)
        monos = monomials(self.nvars, e)
        vec = {idx[m]: ring.norm(c) for m, c in g.items()}
        vec = {c: v for c, v in vec.items() if v != ring.zero}
        heap = list(vec)
        heapq.heapify(heap)
        h = [dict() for _ in range(self.nvars)]
        rem = {}
        seen = set()
        while heap:
            c = heapq.heappop(heap)
            if c in seen:
                continue
            seen.add(c)
            v = vec.pop(c, ring.zero)
            if v == ring.zero:
                continue
            piv = ech.pivots.get(c)
            if piv is None:
                rem[monos[c]] = v
                continue
            prow, pcombo = piv
            fac = ring.norm(v * ring.inv(prow[c]))
            for cc, pv in prow.items():
                if cc == c:
                    continue
                vec[cc] = ring.norm(vec.get(cc, ring.zero) - fac * pv)
                heapq.heappush(heap, cc)
            for (j, m), cv in pcombo.items():
                h[j][m] = ring.norm(h[j].get(m, ring.zero) + fac * cv)
        h = [{m: c for m, c in hj.items() if c != ring.zero} for hj in h]
        return h, rem

    def split_monomial(self, J: Exps) -> Exps:
        """Greedy divisor of x^J of degree sigma+1, filling x0 first."""
        need = self.sigma + 1
        out = []
        for a in J:
            take = min(a, need)
            out.append(take)
            need -= take
        return tuple(out)

    def decompose(self, g: Mapping[Exps, object], e: int | None = None):
        """g = sum_j h_j d_j f + remainder on standard monomials."""
        ring = self.ring
        if not g:
            return [dict() for _ in range(self.nvars)], {}
        degs = {sum(m) for m in g}
        if len(degs) != 1 or (e is not None and degs != {e}):
            raise ValueError(f"inconsistent degree: {sorted(degs)}")
        e = degs.pop()
        if e < self.d - 1:
            return [dict() for _ in range(self.nvars)], {m: ring.norm(c) for m, c in g.items()
                                                          if ring.norm(c) != ring.zero}
        if e <= self.sigma + 1:
            return self._decompose_echelon(g, e)
        tab = self.table()
        h = [dict() for _ in range(self.nvars)]
        for J, c in g.items():
            K = self.split_monomial(J)
            shift = tuple(a - b for a, b in zip(J, K))
            for j, gj in enumerate(tab[K]):
                hj = h[j]
                for G, v in gj.items():
                    m = tuple(a + b for a, b in zip(shift, G))
                    hj[m] = ring.norm(hj.get(m, ring.zero) + c * v)
        h = [{m: c for m, c in hj.items() if c != ring.zero} for hj in h]
        return h, {}

    def divergence(self, h: Sequence[Mapping[Exps, object]]) -> dict:
        """sum_j d_j h_j."""
        ring = self.ring
        out: dict = {}
        for j, hj in enumerate(h):
            for m, c in hj.items():
                if m[j]:
                    m2 = m[:j] + (m[j] - 1,) + m[j + 1:]
                    out[m2] = ring.norm(out.get(m2, ring.zero) + c * m[j])
        return {m: c for m, c in out.items() if c != ring.zero}

    def combine(self, h: Sequence[Mapping[Exps, object]]) -> dict:
        """sum_j h_j d_j f."""
        ring = self.ring
        out: dict = {}
        for j, hj in enumerate(h):
            for m, c in hj.items():
                for g, v in self.df[j].items():
                    k = tuple(a + b for a, b in zip(m, g))
                    out[k] = ring.norm(out.get(k, ring.zero) + c * v)
        return {m: c for m, c in out.items() if c != ring.zero}


# ---------------------------------------------------------------------------
# forms and classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CohomBasis:
    """Ordered basis [(monomial, pole order k)] of primitive H^n."""

    nvars: int
    degree: int
    elements: tuple[tuple[Exps, int], ...]
    by_degree: dict[int, tuple[Exps, ...]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, mono: Exps, k: int) -> int:
        return self._index[(mono, k)]

    @property
    def _index(self) -> dict:
        cache = self.__dict__.get("_idx")
        if cache is None:
            cache = {(m, k): i for i, (m, k) in enumerate(self.elements)}
            object.__setattr__(self, "_idx", cache)
        return cache

    def pole_orders(self) -> list[int]:
        return [k for _, k in self.elements]


@dataclass
class RationalForm:
    """sum_k [A_k, k], keyed by pole order k; [A, k] = (-1)^k A Omega / f^(k+1)."""

    nvars: int
    degree: int
    parts: dict[int, dict] = field(default_factory=dict)

    def __post_init__(self):
        for k, A in self.parts.items():
            want = (k + 1) * self.degree - self.nvars
            for m in A:
                if len(m) != self.nvars or sum(m) != want:
                    raise ValueError(
                        f"numerator {m} at pole order {k} must have degree {want}")

    def add_term(self, k: int, mono: Exps, c) -> None:
        want = (k + 1) * self.degree - self.nvars
        if sum(mono) != want:
            raise ValueError(f"numerator {mono} at pole order {k} must have degree {want}")
        A = self.parts.setdefault(k, {})
        A[mono] = A.get(mono, 0) + c

    def scaled(self, c) -> "RationalForm":
        return RationalForm(self.nvars, self.degree,
                            {k: {m: v * c for m, v in A.items()} for k, A in self.parts.items()})

    def __add__(self, other: "RationalForm") -> "RationalForm":
        out = RationalForm(self.nvars, self.degree, {k: dict(A) for k, A in self.parts.items()})
        for k, A in other.parts.items():
            for m, v in A.items():
                out.add_term(k, m, v)
        return out


@dataclass(frozen=True)
class CohomClass:
    basis: CohomBasis
    coords: tuple
    precision: int | float = float("inf")

    def __post_init__(self):
        if len(self.coords) != len(self.basis):
            raise ValueError("coordinate vector does not match the basis")

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

_SOLVERS: dict = {}
_SOLVERS_LOCK = threading.Lock()


def solver_for(f: HomoPoly, ring=QQ) -> JacobianSolver:
    key = (f, ring.key())
    with _SOLVERS_LOCK:
        s = _SOLVERS.get(key)
        if s is None:
            s = JacobianSolver.for_poly(f, ring)
            _SOLVERS[key] = s
    return s


def jacobian_ring_dims(f: HomoPoly) -> list[int]:
    """dim R_e for e = 0..(n+1)(d-2); raises SingularHypersurface otherwise."""
    return solver_for(f).dims()


def cohomology_basis(f: HomoPoly, ring=QQ) -> CohomBasis:
    s = solver_for(f, ring)
    return basis_from_solver(s)


def basis_from_solver(s: JacobianSolver) -> CohomBasis:
    s.check_smooth()
    elems = []
    by_deg = {}
    for k, e in s.basis_degrees():
        if e < 0:
            continue
        ms = tuple(s.echelon(e).basis)
        by_deg[e] = ms
        elems.extend((m, k) for m in ms)
    return CohomBasis(s.nvars, s.d, tuple(elems), by_deg)


def jacobian_decompose(g: HomoPoly | Mapping[Exps, object], f: HomoPoly, ring=QQ):
    """(h_0..h_n, remainder) with g = sum h_j d_j f + remainder."""
    s = solver_for(f, ring)
    s.check_smooth()
    terms = g.constant_terms() if isinstance(g, HomoPoly) else g
    return s.decompose(terms)


def reduce(form: RationalForm, basis: CohomBasis, f: HomoPoly | None = None,
           solver: JacobianSolver | None = None) -> CohomClass:
    """Coordinates of ``form`` in ``basis``.

    Over the rationals this is exact.  Over Z/p^K the reduction runs in the
    integral normalisation and the final division by (max pole)! is charged
    against the precision; PrecisionExhausted is raised when nothing is left.
    """
    if solver is None:
        if f is None:
            raise ValueError("need f or a solver")
        solver = solver_for(f)
    ring = solver.ring
    if ring is QQ:
        return _reduce_rational(form, basis, solver)
    return _reduce_integral(form, basis, solver)


def _reduce_rational(form: RationalForm, basis: CohomBasis, s: JacobianSolver) -> CohomClass:
    parts = {k: {m: Fraction(c) for m, c in A.items()} for k, A in form.parts.items() if A}
    coords = [Fraction(0)] * len(basis)
    if not parts:
        return CohomClass(basis, tuple(coords))
    for k in range(max(parts), -1, -1):
        A = {m: c for m, c in parts.pop(k, {}).items() if c != 0}
        if not A:
            continue
        if k == 0:
            rem, h = A, None
        else:
            h, rem = s.decompose(A)
            div = s.divergence(h)
            low = parts.setdefault(k - 1, {})
            for m, c in div.items():
                low[m] = low.get(m, 0) - c / k
        for m, c in rem.items():
            coords[basis.index(m, k)] += c
    return CohomClass(basis, tuple(coords))


def _reduce_integral(form: RationalForm, basis: CohomBasis, s: JacobianSolver) -> CohomClass:
    ring = s.ring
    p = ring.p
    top = max((k for k, A in form.parts.items() if A), default=0)
    loss = legendre(top, p)
    # [A,k] = e_{A,k}/k!, so top! * form has integral e-coordinates
    parts = {}
    for k, A in form.parts.items():
        scale = factorial(top) // factorial(k)
        parts[k] = {m: ring.norm(ring(c) * scale) for m, c in A.items()}
    e_coords = reduce_dwork(parts, s)
    coords = []
    for (m, k), c in zip(basis.elements, _basis_vector(e_coords, basis, ring)):
        coords.append(c * factorial(k))
    prec = ring.K - loss
    if prec <= 0:
        raise PrecisionExhausted(f"dividing by {top}! uses all {ring.K} digits")
    out = []
    for c in coords:
        x = PadicScalar.from_residue(c, p, ring.K)
        out.append((x * PadicScalar.from_rational(Fraction(1, factorial(top)), p)).with_absprec(prec))
    return CohomClass(basis, tuple(out), prec)


def _basis_vector(e_coords: Mapping[tuple[Exps, int], object], basis: CohomBasis, ring):
    vec = [ring.zero] * len(basis)
    for (m, k), c in e_coords.items():
        vec[basis.index(m, k)] = ring.norm(vec[basis.index(m, k)] + c)
    return vec


def reduce_dwork(parts: Mapping[int, Mapping[Exps, object]], s: JacobianSolver) -> dict:
    """Reduce sum_k e_{A_k, k} with e_{sum h_j d_j f, k} = -e_{sum d_j h_j, k-1}.

    Integral: no division by pole orders.  Returns {(monomial, k): coeff}.
    """
    ring = s.ring
    work = {k: {m: ring.norm(c) for m, c in A.items()} for k, A in parts.items() if A}
    out: dict = {}
    if not work:
        return out
    for k in range(max(work), -1, -1):
        A = {m: c for m, c in work.pop(k, {}).items() if c != ring.zero}
        if not A:
            continue
        if k == 0:
            rem = A
        else:
            h, rem = s.decompose(A)
            div = s.divergence(h)
            low = work.setdefault(k - 1, {})
            for m, c in div.items():
                low[m] = ring.norm(low.get(m, ring.zero) - c)
        for m, c in rem.items():
            if c != ring.zero:
                out[(m, k)] = ring.norm(out.get((m, k), ring.zero) + c)
    return out


def relation_form(f: HomoPoly, mono: Exps, j: int, k: int, coeff=1) -> RationalForm:
    """(d_j x^I) Omega/f^k + k x^I (d_j f) Omega/f^(k+1), which must reduce to zero."""
    nv = f.nvars
    form = RationalForm(nv, f.degree)
    if mono[j]:
        dm = mono[:j] + (mono[j] - 1,) + mono[j + 1:]
        form.add_term(k - 1, dm, Fraction(coeff) * mono[j])
    dfj = partials(f)[j].constant_terms()
    for g, c in dfj.items():
        form.add_term(k, tuple(a + b for a, b in zip(mono, g)), Fraction(coeff) * k * c)
    return form


def basis_form(basis: CohomBasis, i: int) -> RationalForm:
    m, k = basis.elements[i]
    return RationalForm(basis.nvars, basis.degree, {k: {m: Fraction(1)}})
