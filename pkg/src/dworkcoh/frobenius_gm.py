"""Frobenius and Gauss-Manin on primitive middle cohomology of a hypersurface.

Work happens in the twisted complex with the integral symbols
e_{A,m} = pi^m A t^m, which correspond to m! [A, m] in the Griffiths-Dwork
picture.  In these symbols

    e_{sum h_j d_j f, m} = -e_{sum d_j h_j, m-1},
    nabla_theta e_{A,m}  = e_{theta(A), m} + e_{theta(f) A, m+1},
    Fr(e_{I,k}) = p^(n+2) (-p)^-(k+1) sum_nu prod_j a_{nu_j} c_j^{nu_j}
                  e_{pI + (p-1) + sum nu_j I_j, pk + p - 1 + |nu|},

where f = sum_j c_j x^{I_j} with Teichmueller c_j and a_r = A_r / pi^r.
Matrices are reported in the [A, k] basis; ``normalized`` means divided by p^2.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .griffiths_dwork import (BadReduction, CohomBasis, JacobianSolver, RationalForm,
                              ResidueRing, basis_from_solver, reduce, reduce_dwork)
from .padic import (INF, PadicScalar, PrecisionExhausted, legendre, splitting_rational,
                    teichmuller, valuation)
from .polyalg import Exps, HomoPoly, evaluate_param, param_derivative, teichmuller_monomials


class CoefficientNotTeichmuller(ValueError):
    pass


class TruncationInsufficient(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# matrices with a precision certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrecMatrix:
    p: int
    entries: tuple[tuple[PadicScalar, ...], ...]
    certificate: int | float
    truncation: int | None = None
    normalized: bool = True
    basis: CohomBasis | None = None

    @classmethod
    def from_rows(cls, p, rows, **kw) -> "PrecMatrix":
        rows = tuple(tuple(r) for r in rows)
        cert = kw.pop("certificate", None)
        if cert is None:
            cert = min((x.absprec for r in rows for x in r), default=INF)
        return cls(p, rows, cert, **kw)

    @property
    def size(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def rows(self):
        return [list(r) for r in self.entries]

    def scaled(self, c) -> "PrecMatrix":
        """Entrywise product with an exact scalar; the certificate moves by val(c)."""
        c = c if isinstance(c, PadicScalar) else PadicScalar.from_rational(c, self.p)
        rows = [[x * c for x in r] for r in self.entries]
        return replace(self, entries=tuple(tuple(r) for r in rows),
                       certificate=self.certificate + c.valuation)

    def perturbed(self, i: int, j: int, delta) -> "PrecMatrix":
        rows = self.rows()
        rows[i][j] = rows[i][j] + delta
        return replace(self, entries=tuple(tuple(r) for r in rows))

    def trace(self) -> PadicScalar:
        out = PadicScalar.zero(self.p)
        for i in range(self.size):
            out = out + self.entries[i][i]
        return out.with_absprec(self.certificate)

    def charpoly(self) -> list[PadicScalar]:
        """Coefficients of det(T - M), constant term first."""
        return [c.with_absprec(self.certificate * 1) if not c.is_exact else c
                for c in charpoly(self.rows(), self.p)]

    def det(self) -> PadicScalar:
        cp = charpoly(self.rows(), self.p)
        return cp[0] * (-1) ** self.size

    def agrees(self, other: "PrecMatrix", absprec) -> bool:
        return all(a.agrees(b, absprec) for ra, rb in zip(self.entries, other.entries)
                   for a, b in zip(ra, rb))

    def min_valuation(self) -> int | float:
        return min((x.valuation if not x.is_zero else x.precision)
                   for r in self.entries for x in r)


def matmul(A, B, p):
    n, m, k = len(A), len(B), len(B[0]) if B else 0
    out = []
    for i in range(n):
        row = []
        for j in range(k):
            s = PadicScalar.zero(p)
            for t in range(m):
                s = s + A[i][t] * B[t][j]
            row.append(s)
        out.append(row)
    return out


def charpoly(M, p) -> list:
    """Berkowitz: division-free characteristic polynomial det(T - M), low degree first."""
    n = len(M)
    if n == 0:
        return [PadicScalar.from_rational(1, p)]
    one = PadicScalar.from_rational(1, p)
    zero = PadicScalar.zero(p)
    # poly as list high degree first
    poly = [one, -M[0][0]]
    for r in range(1, n):
        a = M[r][r]
        R = M[r][:r]
        C = [M[i][r] for i in range(r)]
        sub = [row[:r] for row in M[:r]]
        t = [one, -a]
        vec = C
        for _ in range(r):
            s = zero
            for x, y in zip(R, vec):
                s = s + x * y
            t.append(-s)
            vec = [sum((sub[i][k] * vec[k] for k in range(r)), zero) for i in range(r)]
        new = []
        for i in range(r + 2):
            s = zero
            for k in range(r + 1):
                if 0 <= i - k < len(t):
                    s = s + t[i - k] * poly[k]
            new.append(s)
        poly = new
    return poly[::-1]


def newton_slopes(coeffs: Sequence[PadicScalar]) -> list[Fraction]:
    """Valuations of the roots of sum coeffs[i] T^i (lower convex hull)."""
    pts = []
    for i, c in enumerate(coeffs):
        if not c.is_zero:
            pts.append((i, Fraction(c.valuation)))
    if not pts or pts[0][0] != 0:
        raise PrecisionExhausted("constant term indistinguishable from zero")
    if pts[-1][0] != len(coeffs) - 1:
        raise PrecisionExhausted("leading coefficient indistinguishable from zero")
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    # zero coefficients are only known to be >= their absolute precision
    for i, c in enumerate(coeffs):
        if c.is_zero:
            for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
                if x1 < i < x2:
                    line = y1 + (y2 - y1) * Fraction(i - x1, x2 - x1)
                    if c.precision <= line:
                        raise PrecisionExhausted(
                            f"coefficient {i} is too imprecise to fix the Newton polygon")
    out = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        s = -(y2 - y1) / (x2 - x1)
        out.extend([s] * (x2 - x1))
    return sorted(out)


def recover_trace(F: PrecMatrix, genus: int = 1) -> int:
    """The integer trace a, read off within the Weil bound |a| <= 2 g sqrt(p)."""
    tr = F.trace()
    bound = 2 * genus * math.sqrt(F.p)
    if F.p ** min(F.certificate, 60) <= 2 * bound + 1:
        raise PrecisionExhausted("certificate too small to pin down the trace")
    lift = tr.signed_lift() if not tr.is_zero else Fraction(0)
    if lift.denominator != 1 or abs(lift) > bound:
        raise ValueError(f"trace {tr} is not an integer within the Weil bound")
    return int(lift)


# ---------------------------------------------------------------------------
# modular array helpers
# ---------------------------------------------------------------------------

_SPLIT = 20
_MASK = (1 << _SPLIT) - 1


class _ModArith:
    """Elementwise arithmetic mod m on int64 arrays (m < 2^40) or object arrays."""

    def __init__(self, mod: int):
        self.mod = mod
        if mod < 2 ** 31:
            self.kind = "small"
            self.dtype = np.int64
        elif mod < 2 ** 40:
            self.kind = "split"
            self.dtype = np.int64
        else:
            self.kind = "object"
            self.dtype = object

    def zeros(self, shape):
        if self.dtype is object:
            return np.zeros(shape, dtype=object) * 0
        return np.zeros(shape, dtype=np.int64)

    def mul(self, a, b):
        """a * b mod m; a and b already reduced (scalars or arrays)."""
        mod = self.mod
        if self.kind == "small" or self.kind == "object":
            return (a * b) % mod
        b = np.asarray(b, dtype=np.int64)
        hi = b >> _SPLIT
        lo = b & _MASK
        return ((a * hi) % mod * (1 << _SPLIT) + a * lo) % mod

    def scalar(self, x: int):
        x %= self.mod
        return x if self.dtype is object else np.int64(x)


# ---------------------------------------------------------------------------
# splitting coefficients, scaled to be integral
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _a_data(p: int, T: int) -> tuple[tuple[int, Fraction], ...]:
    """(L_r, a_r p^L_r) for r <= T with L_r = max(0, -ord_p a_r)."""
    out = []
    for r in range(T + 1):
        a = splitting_rational(r, p)
        if a == 0:
            out.append((0, Fraction(0)))
            continue
        v = valuation(a.numerator, p) - valuation(a.denominator, p)
        L = max(0, -v)
        out.append((L, a * Fraction(p) ** L))
    return tuple(out)


def scale_profile(p: int, T: int, nterms: int) -> list[int]:
    """Lambda(s) = max over |nu| = s of sum_j L_{nu_j}: the denominator exponent at t^s."""
    L = [l for l, _ in _a_data(p, T)]
    lam = [0] + [-10 ** 9] * T
    for _ in range(nterms):
        new = [-10 ** 9] * (T + 1)
        for s in range(T + 1):
            best = -10 ** 9
            for r in range(s + 1):
                if lam[s - r] > -10 ** 8:
                    best = max(best, lam[s - r] + L[r])
            new[s] = best
        lam = new
    return lam


# ---------------------------------------------------------------------------
# the Frobenius setup: teichmueller coefficients, solver, pole polynomials
# ---------------------------------------------------------------------------

def _dense_shape(n: int, e: int):
    return (e + 1,) * n


class FrobeniusSetup:
    """Shared, read-only data for all columns of one Frobenius computation."""

    def __init__(self, family: HomoPoly, p: int, N: int, T: int, lam_k: int | None = None,
                 lam_residue: Callable[[int], int] | None = None):
        if p < 3 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
            raise ValueError("p must be an odd prime")
        self.family = family
        self.p, self.N, self.T = p, N, T
        self.nvars = family.nvars
        self.n = family.nvars - 1
        self.d = family.degree
        try:
            mons = teichmuller_monomials(family)
        except ValueError as exc:
            raise CoefficientNotTeichmuller(str(exc)) from None
        if family.has_parameter() and lam_k is None and lam_residue is None:
            raise ValueError("family needs a parameter value")
        self.lam_k = lam_k
        self.Lam = max(scale_profile(p, T, len(mons)))
        # guard digits: the e -> [.] conversion divides by (n-1)!
        self.K = N + self.Lam + legendre(max(self.n - 1, 0), p) + 2
        self.ring = ResidueRing(p, self.K)
        self.mod = self.ring.mod
        self.ar = _ModArith(self.mod)
        lam = 0
        if lam_residue is not None:
            lam = lam_residue(self.K) % self.mod
        elif lam_k is not None:
            lam = teichmuller(lam_k, p, self.K)
        self.lam = lam
        self.terms = [(e, (s * pow(lam, m, self.mod)) % self.mod, m, s) for e, s, m in mons]
        for e, c, m, s in self.terms:
            if c % p == 0:
                raise CoefficientNotTeichmuller(f"coefficient of {e} vanishes mod p")
        coeffs: dict[Exps, int] = {}
        for e, c, _, _ in self.terms:
            coeffs[e] = (coeffs.get(e, 0) + c) % self.mod
        self.solver = JacobianSolver(coeffs, self.nvars, self.d, self.ring)
        try:
            self.solver.prepare()
        except BadReduction as exc:
            raise BadReduction(f"bad-reduction: the hypersurface is singular mod {p} ({exc})") from None
        self.basis = basis_from_solver(self.solver)
        self.sigma = self.solver.sigma
        self._poles = None
        self._lock = threading.Lock()
        self.reducer = _DenseReducer(self.solver, self.ar)

    # -- pole polynomials P_s, scaled by p^Lam ------------------------------
    def pole_polys(self) -> list[np.ndarray]:
        with self._lock:
            if self._poles is None:
                self._poles = self._build_poles()
        return self._poles

    def _build_poles(self) -> list[np.ndarray]:
        p, T, n, d = self.p, self.T, self.n, self.d
        ar, mod = self.ar, self.mod
        adata = _a_data(p, T)
        arow = [(L, self.ring(x) if x else 0) for L, x in adata]
        # cur[s] represents (partial product at t^s) * p^cur_scale[s]
        cur = [ar.zeros(_dense_shape(n, 0)) + 1] + [None] * T
        cur_scale = [0] + [None] * T
        deg_so_far = 0
        for e, c, _, _ in self.terms:
            emax = e[:n]
            new = [None] * (T + 1)
            new_scale = [None] * (T + 1)
            for s in range(T + 1):
                best = None
                for r in range(s + 1):
                    if cur[s - r] is None or arow[r][1] == 0:
                        continue
                    sc = cur_scale[s - r] + arow[r][0]
                    best = sc if best is None else max(best, sc)
                new_scale[s] = best
            for s in range(T + 1):
                if new_scale[s] is None:
                    continue
                acc = ar.zeros(_dense_shape(n, d * s))
                for r in range(s + 1):
                    src = cur[s - r]
                    if src is None or arow[r][1] == 0:
                        continue
                    mult = arow[r][1] * pow(c, r, mod) % mod
                    mult = mult * pow(p, new_scale[s] - cur_scale[s - r] - arow[r][0], mod) % mod
                    if mult == 0:
                        continue
                    sl = tuple(slice(r * emax[i], r * emax[i] + src.shape[i]) for i in range(n))
                    acc[sl] = (acc[sl] + ar.mul(ar.scalar(mult), src)) % mod
                new[s] = acc
            cur, cur_scale = new, new_scale
            deg_so_far += 1
        top = self.Lam
        out = []
        for s in range(T + 1):
            if cur[s] is None:
                out.append(ar.zeros(_dense_shape(n, d * s)))
                continue
            k = top - cur_scale[s]
            if k < 0:
                raise AssertionError("scale profile is not monotone")
            out.append(ar.mul(ar.scalar(pow(p, k, mod)), cur[s]) if k else cur[s])
        return out

    def level_degree(self, m: int) -> int:
        return (m + 1) * self.d - self.nvars

    # -- one column ----------------------------------------------------------
    def column_e(self, idx: int, gm_twist: bool = False) -> dict:
        """Reduced e-coordinates (times p^Lam) of Fr(e_{I,k}) for basis element idx.

        With ``gm_twist`` the image of nabla_theta o Fr is produced instead:
        each input is multiplied by -sum_j m_j c_j x^{p I_j} and moved up p pole orders.
        """
        I, k = self.basis.elements[idx]
        p, T = self.p, self.T
        shift = tuple(p * a + p - 1 for a in I)
        base = p * k + p - 1
        poles = self.pole_polys()
        inputs: dict[int, list[tuple[tuple[int, ...], int, np.ndarray]]] = {}
        if gm_twist:
            mults = [(tuple(p * a for a in e), (-m * c) % self.mod)
                     for e, c, m, _ in self.terms if m]
            for s in range(T + 1):
                for off, c in mults:
                    sh = tuple(a + b for a, b in zip(shift, off))
                    inputs.setdefault(base + s + p, []).append((sh, c, poles[s]))
        else:
            for s in range(T + 1):
                inputs.setdefault(base + s, []).append((shift, 1, poles[s]))
        if not inputs:
            return {}
        return self.reducer.run(inputs, self.level_degree)


class _DenseReducer:
    """Pole reduction for levels above the socle degree on dense arrays.

    A level of numerator degree e is an array over the first n exponents; the
    last exponent is implied.  x^J = x^(J-K) sum_j g_{K,j} d_j f with K the
    greedy divisor of degree sigma+1, and e_{x^J} -> -sum_j d_j(x^(J-K) g_{K,j}).
    """

    def __init__(self, solver: JacobianSolver, ar: _ModArith):
        self.s = solver
        self.ar = ar
        self.n = solver.n
        self.sigma = solver.sigma
        self.d = solver.d
        tab = solver.table()
        n, sig = self.n, self.sigma
        self.groups = []
        for i in range(n + 1):
            for prefix in _prefixes(i, sig):
                need = sig + 1 - sum(prefix)
                K = prefix + (need,) + (0,) * (n - i)
                entries = []
                for j, gj in enumerate(tab[K]):
                    for G, v in sorted(gj.items()):
                        entries.append((j, G, (-v) % ar.mod))
                self.groups.append((i, prefix, need, entries))

    def step(self, Q: np.ndarray, e: int) -> np.ndarray:
        ar, mod, n, d = self.ar, self.ar.mod, self.n, self.d
        e2 = e - d
        out = ar.zeros(_dense_shape(n, e2))
        for i, prefix, need, entries in self.groups:
            if i == n:
                val = Q[prefix] if n else Q[()]
                if val == 0:
                    continue
                top = e - self.sigma - 1
                for j, G, v in entries:
                    coef = G[j] + (top if j == n else 0)
                    if coef == 0:
                        continue
                    tgt = tuple(G[c] - (c == j) for c in range(n))
                    if min(tgt, default=0) < 0:
                        continue
                    out[tgt] = (out[tgt] + ar.mul(ar.scalar(v * coef % mod), val)) % mod
                continue
            for j, G, v in entries:
                src_sl, tgt_sl, axes = [], [], []
                ok = True
                for c in range(n):
                    dj = 1 if c == j else 0
                    if c < i:
                        t = G[c] - dj
                        if t < 0 or t > e2:
                            ok = False
                            break
                        src_sl.append(prefix[c])
                        tgt_sl.append(t)
                        continue
                    lo = need if c == i else 0
                    off = (G[c] - dj) - (need if c == i else 0)
                    a = max(lo, -off)
                    b = min(e, e2 - off)
                    if a > b:
                        ok = False
                        break
                    src_sl.append(slice(a, b + 1))
                    tgt_sl.append(slice(a + off, b + off + 1))
                    axes.append((c, a, b))
                if not ok:
                    continue
                block = Q[tuple(src_sl)]
                if not block.any():
                    continue
                coef = self._coef_grid(i, j, G, prefix, need, e, axes)
                if coef is None:
                    continue
                if isinstance(coef, int):
                    term = ar.mul(ar.scalar(v * coef % mod), block)
                else:
                    cg = (coef % mod) * v % mod if ar.dtype is not object else (coef.astype(object) * v) % mod
                    term = ar.mul(cg, block)
                sl = tuple(tgt_sl)
                out[sl] = (out[sl] + term) % mod
        return out

    def _coef_grid(self, i, j, G, prefix, need, e, axes):
        """(J - K + G)_j over the source block."""
        n = self.n
        if j < i:
            return G[j] or None
        shape = [b - a + 1 for _, a, b in axes]
        grids = []
        for pos, (c, a, b) in enumerate(axes):
            sh = [1] * len(axes)
            sh[pos] = b - a + 1
            grids.append(np.arange(a, b + 1, dtype=np.int64).reshape(sh))
        if j < n:
            pos = [c for c, _, _ in axes].index(j)
            g = grids[pos] + (G[j] - (need if j == i else 0))
            return np.broadcast_to(g, shape)
        # implicit last exponent: J_n = e - sum(prefix) - sum over free axes
        total = np.zeros(shape, dtype=np.int64) + (e - sum(prefix) + G[n])
        for g in grids:
            total = total - g
        return total

    def run(self, inputs, level_degree) -> dict:
        ar, mod, n = self.ar, self.ar.mod, self.n
        top = max(inputs)
        m = top
        Q = None
        parts: dict[int, dict] = {}
        while m >= 0:
            e = level_degree(m)
            if e < 0:
                break
            if Q is None:
                Q = ar.zeros(_dense_shape(n, e))
            for sh, c, P in inputs.get(m, ()):
                sl = tuple(slice(sh[i], sh[i] + P.shape[i]) for i in range(n))
                add = P if c == 1 else ar.mul(ar.scalar(c), P)
                Q[sl] = (Q[sl] + add) % mod
            if e > self.sigma + 1:
                Q = self.step(Q, e)
                m -= 1
                continue
            # hand the remaining levels to the sparse reducer
            parts[m] = _dense_to_dict(Q, e, n)
            for mm in range(m - 1, -1, -1):
                ee = level_degree(mm)
                if ee < 0:
                    break
                for sh, c, P in inputs.get(mm, ()):
                    d = parts.setdefault(mm, {})
                    Z = ar.zeros(_dense_shape(n, ee))
                    sl = tuple(slice(sh[i], sh[i] + P.shape[i]) for i in range(n))
                    Z[sl] = P if c == 1 else ar.mul(ar.scalar(c), P)
                    for mono, v in _dense_to_dict(Z, ee, n).items():
                        d[mono] = (d.get(mono, 0) + v) % mod
            break
        return reduce_dwork(parts, self.s)


def _prefixes(length: int, maxsum: int):
    if length == 0:
        yield ()
        return
    for a in range(maxsum + 1):
        for rest in _prefixes(length - 1, maxsum - a):
            yield (a,) + rest


def _dense_to_dict(Q: np.ndarray, e: int, n: int) -> dict:
    out = {}
    if n == 0:
        v = int(Q[()])
        return {(e,): v} if v else {}
    for idx in zip(*np.nonzero(Q)):
        idx = tuple(int(x) for x in idx)
        out[idx + (e - sum(idx),)] = int(Q[idx])
    return out


# ---------------------------------------------------------------------------
# Frobenius matrix
# ---------------------------------------------------------------------------

@dataclass
class FrobeniusResult:
    raw: PrecMatrix
    normalized: PrecMatrix
    basis: CohomBasis
    truncation: int
    working_precision: int
    stability: str = "unchecked"


def default_truncation(p: int, N: int) -> int:
    """Heuristic t-degree so that discarded terms fall below p^N.

    Reduced contributions of the t^s piece were observed to gain at least one
    digit every p - 1 steps, with a fixed offset; the stability check backs this up.
    """
    return (p - 1) * (N + 3) + 2 * p


def _assemble(setup: FrobeniusSetup, cols_e: list[dict], extra_shift: int = 0) -> tuple[PrecMatrix, PrecMatrix]:
    p, n, B = setup.p, setup.n, setup.basis
    size = len(B)
    mod = setup.mod
    rows = [[None] * size for _ in range(size)]
    for jcol, col in enumerate(cols_e):
        _, k = B.elements[jcol]
        # p^(n+2) (-p)^-(k+1) p^-Lam, then [.]-coordinates: times k_i!/k!
        v0 = n + 2 - (k + 1) - setup.Lam + extra_shift
        sign = -1 if (k + 1) % 2 else 1
        for irow, (J, kk) in enumerate(B.elements):
            x = col.get((J, kk), 0) % mod
            val = PadicScalar.from_residue(sign * x, p, setup.K, v0)
            conv = PadicScalar.from_rational(Fraction(math.factorial(kk), math.factorial(k)), p)
            rows[irow][jcol] = val * conv
    raw = PrecMatrix.from_rows(p, rows, truncation=setup.T, normalized=False, basis=B)
    normal = raw.scaled(Fraction(1, p * p))
    normal = replace(normal, normalized=True)
    return raw, normal


def _columns(setup: FrobeniusSetup, jobs: int, gm_twist: bool = False) -> list[dict]:
    idx = list(range(len(setup.basis)))
    setup.pole_polys()
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(lambda i: setup.column_e(i, gm_twist), idx))
    return [setup.column_e(i, gm_twist) for i in idx]


def frobenius_matrix(f: HomoPoly, p: int, N: int, M: int | None = None, lam_k: int | None = None,
                     jobs: int = 1, check_stability: bool = True,
                     lam_residue=None) -> FrobeniusResult:
    """Frobenius on primitive H^n of f = 0 at the Teichmueller point teich(lam_k).

    ``M`` is the t-degree truncation (default: heuristic).  With
    ``check_stability`` the computation is repeated at M+5 and must agree to
    p^N; in automatic mode M then grows until it does.
    """
    auto = M is None
    T = default_truncation(p, N) if auto else M
    while True:
        setup = FrobeniusSetup(f, p, N, T, lam_k, lam_residue)
        raw, normal = _assemble(setup, _columns(setup, jobs))
        result = FrobeniusResult(raw, normal, setup.basis, T, setup.K)
        if not check_stability:
            return result
        setup2 = FrobeniusSetup(f, p, N, T + 5, lam_k, lam_residue)
        raw2, normal2 = _assemble(setup2, _columns(setup2, jobs))
        if normal.agrees(normal2, N):
            result.stability = f"M={T} and M={T + 5} agree to {p}^{N}"
            return result
        if not auto:
            raise TruncationInsufficient(f"M={T} and M={T + 5} differ below {p}^{N}")
        T = int(T * 1.5) + 1


# ---------------------------------------------------------------------------
# Gauss-Manin
# ---------------------------------------------------------------------------

def _theta_f(family: HomoPoly) -> HomoPoly:
    return param_derivative(family, log=True)


def gm_matrix(family: HomoPoly, lam0, basis: CohomBasis | None = None,
              theta: bool = True) -> list[list[Fraction]]:
    """Matrix of nabla (theta = l d/dl by default, or d/dl) at l = lam0, over Q.

    Column i holds the coordinates of nabla [x^I, k] = (k+1) [D(f) x^I, k+1].
    """
    from .griffiths_dwork import cohomology_basis
    f0 = evaluate_param(family, Fraction(lam0))
    basis = basis or cohomology_basis(f0)
    size = len(basis)
    if not family.has_parameter():
        return [[Fraction(0)] * size for _ in range(size)]
    df = param_derivative(family, log=theta)
    df0 = evaluate_param(df, Fraction(lam0)).constant_terms() if df.has_parameter() else \
        {e: c.get(0, 0) for e, c in df.terms.items()}
    cols = []
    for I, k in basis.elements:
        form = RationalForm(basis.nvars, basis.degree)
        for g, c in df0.items():
            form.add_term(k + 1, tuple(a + b for a, b in zip(I, g)), Fraction(c) * (k + 1))
        cols.append(reduce(form, basis, f0).coords)
    return [[cols[j][i] for j in range(size)] for i in range(size)]


def gm_matrix_padic(setup: FrobeniusSetup) -> PrecMatrix:
    """nabla_theta on the Frobenius basis at a Teichmueller point, over Z/p^K.

    In e-symbols nabla_theta e_{I,k} = e_{theta(f) x^I, k+1}: integral.
    """
    p, B = setup.p, setup.basis
    mod = setup.mod
    cols = []
    for I, k in B.elements:
        A = {}
        for e, c, m, _ in setup.terms:
            if m == 0:
                continue
            mono = tuple(a + b for a, b in zip(I, e))
            A[mono] = (A.get(mono, 0) + m * c) % mod
        cols.append(reduce_dwork({k + 1: A} if A else {}, setup.solver))
    size = len(B)
    rows = [[None] * size for _ in range(size)]
    for j, col in enumerate(cols):
        _, k = B.elements[j]
        for i, (J, kk) in enumerate(B.elements):
            x = PadicScalar.from_residue(col.get((J, kk), 0), p, setup.K)
            rows[i][j] = x * PadicScalar.from_rational(
                Fraction(math.factorial(kk), math.factorial(k)), p)
    return PrecMatrix.from_rows(p, rows, basis=B)


@dataclass
class CompatResult:
    residual_valuation: int | float
    certificate: int | float
    lhs: PrecMatrix
    rhs: list
    frobenius: PrecMatrix
    gm: PrecMatrix

    @property
    def ok(self) -> bool:
        return self.residual_valuation >= self.certificate


def check_gm_frobenius_compat(family: HomoPoly, p: int, N: int, M: int | None = None,
                              lam_k: int | None = None, jobs: int = 1,
                              perturb: tuple[int, int] | None = None) -> CompatResult:
    """min valuation of nabla_theta(Fr) - p Fr nabla_theta on the basis.

    The left side is computed at form level: nabla_theta of the unreduced
    Frobenius image, then reduced.  ``perturb`` adds p to one entry of Fr on
    the right side (negative control).
    """
    T = default_truncation(p, N) if M is None else M
    setup = FrobeniusSetup(family, p, N, T, lam_k)
    raw, F = _assemble(setup, _columns(setup, jobs))
    _, lhs = _assemble(setup, _columns(setup, jobs, gm_twist=True))
    G = gm_matrix_padic(setup)
    Fr = F if perturb is None else F.perturbed(*perturb, PadicScalar.from_rational(p, p))
    prod = matmul(Fr.rows(), G.rows(), p)
    rhs = [[x * p for x in row] for row in prod]
    cert = min(lhs.certificate, F.certificate + 1 + max(0, G.min_valuation()), N)
    resid = INF
    for i in range(len(rhs)):
        for j in range(len(rhs)):
            d = (lhs[i, j] - rhs[i][j])
            v = d.valuation if not d.is_zero else d.precision
            resid = min(resid, v)
    if not family.has_parameter():
        resid = INF
    return CompatResult(resid, cert, lhs, rhs, F, G)


# ---------------------------------------------------------------------------
# Picard-Fuchs
# ---------------------------------------------------------------------------

LForm = dict  # pole k -> {monomial: {l-power: Fraction}}


def _nabla_theta_form(form: LForm, family: HomoPoly) -> LForm:
    tf = _theta_f(family)
    out: LForm = {}

    def add(k, mono, pw, c):
        slot = out.setdefault(k, {}).setdefault(mono, {})
        slot[pw] = slot.get(pw, 0) + c

    for k, A in form.items():
        for mono, coeff in A.items():
            for pw, c in coeff.items():
                if pw:
                    add(k, mono, pw, c * pw)
                for g, gc in tf.terms.items():
                    m2 = tuple(a + b for a, b in zip(mono, g))
                    for gp, gv in gc.items():
                        add(k + 1, m2, pw + gp, c * gv * (k + 1))
    return out


def _specialize_form(form: LForm, lam0: Fraction, nvars: int, d: int) -> RationalForm:
    parts = {}
    for k, A in form.items():
        B = {}
        for mono, coeff in A.items():
            v = sum((c * lam0 ** pw for pw, c in coeff.items()), Fraction(0))
            if v:
                B[mono] = v
        if B:
            parts[k] = B
    return RationalForm(nvars, d, parts)


@dataclass
class PicardFuchs:
    order: int
    coeffs: list[list[Fraction]]   # coeffs[i][q]: coefficient of l^q theta^i

    def __str__(self) -> str:
        out = []
        for i, c in enumerate(self.coeffs):
            poly = " + ".join(f"{v}" if q == 0 else (f"{v}*l" if q == 1 else f"{v}*l^{q}")
                              for q, v in enumerate(c) if v)
            if poly:
                out.append(f"({poly})*theta^{i}")
        return " + ".join(out) or "0"

    def apply_to_series(self, b: Sequence) -> list:
        """Coefficients of L(sum b_c l^c), for the first len(b) powers of l."""
        res = []
        for Nn in range(len(b)):
            s = Fraction(0)
            for i, c in enumerate(self.coeffs):
                for q, v in enumerate(c):
                    if v and Nn - q >= 0:
                        s += v * Fraction(Nn - q) ** i * b[Nn - q]
            res.append(s)
        return res


class NoDependency(ValueError):
    pass


def _nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    rows = [list(r) for r in rows]
    piv_cols = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                fac = rows[i][c]
                rows[i] = [a - fac * b for a, b in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(ncols) if c not in piv_cols]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(piv_cols):
            v[pc] = -rows[i][fc]
        basis.append(v)
    return basis


def _sample_points(count: int, bad: Callable[[Fraction], bool]) -> list[Fraction]:
    out = []
    k = 1
    while len(out) < count:
        for cand in (Fraction(k, 7 + k), Fraction(-k, 11 + 2 * k)):
            if cand != 0 and not bad(cand) and cand not in out:
                out.append(cand)
        k += 1
    return out[:count]


def picard_fuchs(family: HomoPoly, max_order: int = 4, max_degree: int = 6,
                 start: int = 0) -> PicardFuchs:
    """Smallest-order relation sum_i c_i(l) nabla_theta^i omega = 0, omega the class of
    basis element ``start`` (default: the holomorphic form), with polynomial c_i."""
    from .griffiths_dwork import SingularHypersurface, basis_from_solver, solver_for
    nv, d = family.nvars, family.degree

    def is_bad(l0):
        try:
            solver_for(evaluate_param(family, l0)).check_smooth()
            return False
        except SingularHypersurface:
            return True

    ref = _sample_points(1, is_bad)[0]
    basis0 = basis_from_solver(solver_for(evaluate_param(family, ref)))
    I, k = basis0.elements[start]
    forms = [{k: {I: {0: Fraction(1)}}}]
    for _ in range(max_order):
        forms.append(_nabla_theta_form(forms[-1], family))
    if not family.has_parameter():
        return PicardFuchs(1, [[Fraction(0)], [Fraction(1)]])
    cache: dict[Fraction, list] = {}

    def vectors(l0):
        if l0 not in cache:
            f0 = evaluate_param(family, l0)
            s = solver_for(f0)
            B = basis_from_solver(s)
            if B.elements != basis0.elements:
                raise ValueError("basis monomials change between sample points")
            cache[l0] = [reduce(_specialize_form(fm, l0, nv, d), B, solver=s).coords
                         for fm in forms]
        return cache[l0]

    dim = len(basis0)
    for r in range(1, max_order + 1):
        for D in range(0, max_degree + 1):
            nunk = (r + 1) * (D + 1)
            pts = _sample_points(nunk // dim + 4, is_bad)
            rows = []
            for l0 in pts:
                vs = vectors(l0)
                for comp in range(dim):
                    rows.append([vs[i][comp] * l0 ** q for i in range(r + 1) for q in range(D + 1)])
            ker = _nullspace(rows, nunk)
            if not ker:
                continue
            v = ker[0]
            coeffs = [[v[i * (D + 1) + q] for q in range(D + 1)] for i in range(r + 1)]
            if all(x == 0 for x in coeffs[r]):
                continue
            coeffs = _normalize_operator(coeffs)
            check = _sample_points(nunk // dim + 8, is_bad)[-3:]
            for l0 in check:
                vs = vectors(l0)
                for comp in range(dim):
                    tot = sum(coeffs[i][q] * l0 ** q * vs[i][comp]
                              for i in range(r + 1) for q in range(D + 1))
                    if tot != 0:
                        raise NoDependency("relation does not persist at a check point")
            return PicardFuchs(r, coeffs)
    raise NoDependency(f"no relation up to order {max_order}")


def _normalize_operator(coeffs):
    flat = [x for c in coeffs for x in c if x]
    den = math.lcm(*[x.denominator for x in flat])
    ints = [[x * den for x in c] for c in coeffs]
    g = 0
    for c in ints:
        for x in c:
            g = math.gcd(g, int(x))
    lead0 = next((x for x in ints[-1] if x), 1)
    sign = -1 if lead0 < 0 else 1
    return [[Fraction(int(x) // g) * sign for x in c] for c in ints]
