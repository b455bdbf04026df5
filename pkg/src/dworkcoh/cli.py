"""Command-line front end: ``dworkcoh <command> [options]``.

Every command writes a key/value text report (stdout, or ``--out PATH``) and a
JSON mirror next to it (``PATH.json``).  Exit codes: 0 ok, 1 a verification
failed, 2 the input was rejected.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import oracle
from .frobenius_gm import (CoefficientNotTeichmuller, NoDependency, TruncationInsufficient,
                           check_gm_frobenius_compat, frobenius_matrix, gm_matrix, picard_fuchs,
                           recover_trace)
from .griffiths_dwork import (BadReduction, SingularHypersurface, cohomology_basis,
                              hilbert_dims)
from .keylemma import verify_phi_intertwine, weight_spectrum
from .padic import INF, PadicScalar, overconvergence_bound, splitting_coeffs, verify_formula3
from .polyalg import (HomoPoly, LaurentPoly, ParseError, UnsupportedShape, evaluate_param,
                      format_terms, homogenize_laurent, parse_laurent)
from .threefold import assemble, newton_slopes, verify_scaling

OK, FAILED, BAD_INPUT = 0, 1, 2

FIXTURE_ALIASES = {
    "fermat": "fermat3", "cubic": "fermat3",
    "quartic": "quartic3",
    "quintic": "quintic4",
    "localp2": "local-p2", "local_p2": "local-p2", "family": "local-p2",
}


class InputError(ValueError):
    pass


class VerificationFailed(Exception):
    pass


# ---------------------------------------------------------------------------
# inputs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Source:
    name: str
    poly: HomoPoly
    laurent: LaurentPoly | None = None


def _fixture_text(name: str) -> str | None:
    key = name.split("/")[-1]
    key = key[:-5] if key.endswith(".poly") else key
    key = FIXTURE_ALIASES.get(key, key)
    res = resources.files("dworkcoh") / "fixtures" / f"{key}.poly"
    return res.read_text() if res.is_file() else None


def _parse_fixture(text: str) -> Source:
    fields: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError("expected key = value", lineno, 1)
        k, v = body.split("=", 1)
        fields[k.strip()] = (v.strip(), lineno)
    names = None
    if "vars" in fields:
        names = [x.strip() for x in fields["vars"][0].split(",") if x.strip()]
    if "laurent" in fields:
        src, lineno = fields["laurent"]
        P = parse_laurent(src, names, line=lineno)
        return Source(src, homogenize_laurent(P), P)
    if "poly" in fields:
        src, lineno = fields["poly"]
        return Source(src, _homogeneous(parse_laurent(src, names, line=lineno), lineno))
    raise ParseError("fixture needs a 'poly' or 'laurent' entry", 1, 1)


def _homogeneous(P: LaurentPoly, lineno: int = 1) -> HomoPoly:
    if not P.is_polynomial():
        raise ParseError("negative exponent in a projective polynomial", lineno, 1)
    degs = {sum(e) for e in P.terms}
    if len(degs) != 1:
        raise ParseError(f"polynomial is not homogeneous (degrees {sorted(degs)})", lineno, 1)
    return HomoPoly(P.variables, degs.pop(), P.terms)


def load_source(spec: str) -> Source:
    """A fixture name, a path to a fixture file, or inline polynomial text."""
    path = Path(spec)
    if path.is_file():
        return _parse_fixture(path.read_text())
    text = _fixture_text(spec)
    if text is not None:
        return _parse_fixture(text)
    if spec.startswith("fixtures/"):
        raise InputError(f"unknown fixture {spec!r}")
    P = parse_laurent(spec)
    if P.is_polynomial() and len({sum(e) for e in P.terms}) == 1:
        return Source(spec, _homogeneous(P))
    return Source(spec, homogenize_laurent(P), P)


@dataclass(frozen=True)
class Param:
    text: str
    value: Fraction | None = None
    teich: int | None = None

    def residue(self, p: int) -> int:
        if self.teich is not None:
            return self.teich % p
        v = self.value
        if v.denominator % p == 0:
            raise InputError(f"parameter {v} is not p-integral")
        return v.numerator * pow(v.denominator, -1, p) % p


def parse_param(text: str | None) -> Param | None:
    if text is None:
        return None
    m = re.fullmatch(r"\s*teich:\s*(-?\d+)\s*", text)
    if m:
        return Param(text, teich=int(m.group(1)))
    try:
        return Param(text, value=Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise InputError(f"parameter {text!r} is neither a rational nor teich:k") from None


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, int(p ** 0.5) + 1))


def parse_range(text: str) -> list[int]:
    m = re.fullmatch(r"\s*(\d+)\s*(?:\.\.\s*(\d+))?\s*", text)
    if not m:
        raise InputError(f"bad range {text!r}; use a or a..b")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) else lo
    if hi < lo:
        raise InputError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def _need_family_param(src: Source, param: Param | None, p: int | None = None) -> None:
    if not src.poly.has_parameter():
        return
    if param is None:
        raise InputError("this polynomial depends on l; pass --param")
    if param.value == 0 or (param.teich is not None and p and param.teich % p == 0):
        raise InputError("the parameter must be non-zero")


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def fmt_scalar(x: PadicScalar, N: int) -> str:
    """``p^v * u`` with u a residue; finite values carry their O-term."""
    p = x.p
    if x.is_zero:
        return "0" if x.precision == INF else f"O({p}^{x.precision})"
    rel = x.precision if not x.is_exact else max(N - x.valuation, 1)
    u = x.unit_residue(rel)
    s = f"{p}^{x.valuation} * {u}"
    return s if x.is_exact else f"{s} + O({p}^{x.absprec})"


class Report:
    def __init__(self, command: str):
        self.items: list[tuple[str, object]] = [("command", command)]

    def add(self, key: str, value) -> None:
        self.items.append((key, value))

    def matrix(self, key: str, rows) -> None:
        self.items.append((key, [[str(x) for x in r] for r in rows]))

    def text(self) -> str:
        out = []
        for k, v in self.items:
            if isinstance(v, list) and v and isinstance(v[0], list):
                out.append(f"{k}:")
                width = max(len(x) for r in v for x in r)
                out.extend("  [ " + "  ".join(x.rjust(width) for x in r) + " ]" for r in v)
            elif isinstance(v, list):
                out.append(f"{k}:")
                out.extend(f"  {x}" for x in v)
            else:
                out.append(f"{k}: {_plain(v)}")
        return "\n".join(out) + "\n"

    def json(self) -> str:
        return json.dumps({k: v for k, v in self.items}, indent=2, default=str) + "\n"


def _plain(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_splitting(a, rep: Report) -> None:
    p, N = a.prime, a.prec
    M = a.M if a.M is not None else 4 * p
    s = splitting_coeffs(p, N, M)
    rep.add("prime", p)
    rep.add("precision", N)
    rep.add("truncation", M)
    lines, ok = [], True
    for n in range(M + 1):
        An = s[n]
        supp = An.support()
        r = n % (p - 1)
        if supp and supp != [r]:
            ok = False
        v = An.valuation()
        if v != INF and n and v < overconvergence_bound(n, p):
            ok = False
        coef = fmt_scalar(An.coeffs[r], N)
        lines.append(f"A_{n} = ({coef}) * pi^{r}")
    rep.add("coefficients", lines)
    rep.add("homogeneous_and_overconvergent", ok)
    if not ok:
        raise VerificationFailed("splitting coefficients break homogeneity or the growth bound")


def cmd_formula3(a, rep: Report) -> None:
    p, N = a.prime, a.prec
    rep.add("prime", p)
    rep.add("precision", N)
    bad = []
    for b in parse_range(a.b):
        r = verify_formula3(p, N, b, a.M)
        rv = r.residual.precision if r.residual.is_zero else r.residual.valuation
        rep.add(f"b={b}", f"total {fmt_scalar(r.total, N)}; expected {fmt_scalar(r.expected, N)}; "
                          f"residual valuation >= {rv}; M={r.truncation}; ok={_plain(r.ok)}")
        if not r.ok:
            bad.append(f"b={b} residual valuation {rv}")
    if bad:
        raise VerificationFailed("; ".join(bad))


def cmd_basis(a, rep: Report) -> None:
    src = load_source(a.poly)
    f = src.poly
    if f.has_parameter():
        _need_family_param(src, a.param_obj)
        if a.param_obj.teich is not None:
            raise InputError("basis needs a rational parameter value")
        f = evaluate_param(f, a.param_obj.value)
    rep.add("polynomial", str(f))
    B = cohomology_basis(f)
    hil = hilbert_dims(f.nvars, f.degree)
    expected = sum(hil[k * f.degree + f.degree - f.nvars] for k in range(f.nvars)
                   if 0 <= k * f.degree + f.degree - f.nvars < len(hil))
    rep.add("dimension", len(B))
    rep.add("hilbert_series_dimension", expected)
    rep.add("elements", [f"[{format_terms({m: {0: 1}}, f.variables)}, {k}]" for m, k in B.elements])
    if len(B) != expected:
        raise VerificationFailed(f"basis has {len(B)} elements, Hilbert series gives {expected}")


def _teich_arg(src: Source, param: Param | None, p: int) -> int | None:
    if not src.poly.has_parameter():
        return None
    _need_family_param(src, param, p)
    if param.teich is not None:
        return param.teich
    if param.value in (1, -1):
        return int(param.value)
    raise InputError(f"parameter {param.text} is not a Teichmueller point; use teich:k")


def _oracle_block(rep: Report, f0: HomoPoly, p: int, trace_a: int | None, det_ok: bool) -> bool:
    if f0.nvars != 3 or f0.degree != 3:
        rep.add("oracle_match", "n/a")
        return True
    try:
        z = oracle.zeta_from_curve(f0, p)
    except oracle.NotGenus1 as exc:
        rep.add("oracle", str(exc))
        rep.add("oracle_match", False)
        return False
    rep.add("oracle_N1", z.N1)
    rep.add("oracle_N2", z.N2)
    rep.add("oracle_a", z.a)
    match = trace_a == z.a and det_ok
    rep.add("oracle_match", match)
    return match


def _frobenius(a, src: Source):
    p, N = a.prime, a.prec
    lam_k = _teich_arg(src, a.param_obj, p)
    res = frobenius_matrix(src.poly, p, N, a.M, lam_k=lam_k, jobs=a.jobs)
    f0 = src.poly if lam_k is None else evaluate_param(src.poly, lam_k % p)
    return res, f0


def _matrix_rows(M, N):
    return [[fmt_scalar(x, N) for x in r] for r in M.entries]


def cmd_frobenius(a, rep: Report) -> None:
    src = load_source(a.poly)
    p, N = a.prime, a.prec
    rep.add("polynomial", str(src.poly))
    rep.add("prime", p)
    rep.add("precision", N)
    if a.param_obj is not None:
        rep.add("parameter", a.param_obj.text)
    res, f0 = _frobenius(a, src)
    F = res.normalized
    rep.add("truncation", res.truncation)
    rep.add("working_precision", res.working_precision)
    rep.add("certificate", F.certificate)
    rep.add("stability", res.stability)
    rep.add("basis", [f"[{format_terms({m: {0: 1}}, f0.variables)}, {k}]" for m, k in res.basis.elements])
    rep.matrix("raw", _matrix_rows(res.raw, N + 2))
    rep.matrix("normalized", _matrix_rows(F, N))
    cp = F.charpoly()
    rep.add("charpoly", [f"T^{i}: {fmt_scalar(c, N)}" for i, c in enumerate(cp)])
    det = F.det()
    det_ok = det.agrees(PadicScalar.from_rational(p ** (F.size // 2), p), min(F.certificate, N))
    rep.add("det", fmt_scalar(det, N))
    trace_a = None
    if F.size == 2:
        try:
            trace_a = recover_trace(F)
            rep.add("trace", trace_a)
            rep.add("zeta_numerator", oracle.numerator_text(trace_a, p))
        except (ValueError, ArithmeticError) as exc:
            rep.add("trace", f"unrecovered: {exc}")
    if not _oracle_block(rep, f0, p, trace_a, det_ok):
        raise VerificationFailed("Frobenius trace or determinant disagrees with point counts")


def cmd_gm(a, rep: Report) -> None:
    src = load_source(a.poly)
    param = a.param_obj
    _need_family_param(src, param)
    if param is None:
        raise InputError("gm needs --param")
    rep.add("polynomial", str(src.poly))
    rep.add("parameter", param.text)
    if param.teich is not None:
        _gm_compat(a, src, rep)
        return
    f0 = evaluate_param(src.poly, param.value)
    B = cohomology_basis(f0)
    rep.add("basis", [f"[{format_terms({m: {0: 1}}, f0.variables)}, {k}]" for m, k in B.elements])
    rep.matrix("gauss_manin_theta", gm_matrix(src.poly, param.value, B))


def _gm_compat(a, src: Source, rep: Report) -> None:
    """At a Teichmueller point: the GM matrix mod p^K and the check nabla Fr = p Fr nabla."""
    p, N = a.prime, a.prec
    rep.add("prime", p)
    rep.add("precision", N)
    r = check_gm_frobenius_compat(src.poly, p, N, a.M, lam_k=_teich_arg(src, a.param_obj, p),
                                  jobs=a.jobs)
    rep.matrix("gauss_manin_theta", _matrix_rows(r.gm, N))
    rep.matrix("frobenius", _matrix_rows(r.frobenius, N))
    rep.add("residual_valuation", r.residual_valuation)
    rep.add("certificate", r.certificate)
    rep.add("compatible", r.ok)
    if not r.ok:
        raise VerificationFailed(f"residual valuation {r.residual_valuation} < {r.certificate}")


def cmd_pf(a, rep: Report) -> None:
    src = load_source(a.poly)
    if not src.poly.has_parameter():
        raise InputError("pf needs a one-parameter family")
    rep.add("polynomial", str(src.poly))
    L = picard_fuchs(src.poly, max_order=a.max_order)
    rep.add("order", L.order)
    rep.add("operator", str(L))
    if src.laurent is None:
        rep.add("period_check", "n/a")
        return
    C = a.terms
    series = oracle.constant_term_series(src.laurent, C)
    resid = L.apply_to_series(series)
    bad = [i for i, r in enumerate(resid) if r != 0]
    rep.add("period_series", [str(x) for x in series])
    rep.add("period_check", f"residual zero through l^{C}" if not bad else
            f"residual {resid[bad[0]]} at l^{bad[0]}")
    if bad:
        raise VerificationFailed(f"operator does not annihilate the period at l^{bad[0]}")


def cmd_keylemma(a, rep: Report) -> None:
    p, N = a.prime, a.prec
    perturb = None
    if a.perturb:
        m = re.fullmatch(r"(\d+):(-?\d+)", a.perturb)
        if not m:
            raise InputError("--perturb expects n:delta")
        perturb = (int(m.group(1)), int(m.group(2)))
    r = verify_phi_intertwine(p, N, a.M, a.alpha_max, a.i_max, perturb)
    rep.add("prime", p)
    rep.add("precision", N)
    for kind, idx, v, ok in r.checks:
        lhs, rhs = (f"z^{idx}", f"z^{p * idx}") if kind == "alpha" else \
            (f"z^-{idx + 1}", f"z^-{(idx + 1) * p}")
        rep.add(f"{kind}={idx}", f"Fr(phi({lhs})) - phi({p} {rhs}): valuation >= {v}; ok={_plain(ok)}")
    rep.add("intertwines", r.ok)
    if not r.ok:
        kind, idx, v, _ = r.failures()[0]
        raise VerificationFailed(f"{kind}={idx}: residual valuation {v} < {N}")


def cmd_spectrum(a, rep: Report) -> None:
    bad = []
    for i in range(a.max_i + 1):
        ex = weight_spectrum("x_power", i)
        want_x = -Fraction(i + 1, 2)
        rep.add(f"x^{i}", str(ex))
        if ex != want_x:
            bad.append(f"x^{i}")
        if i >= 1:
            et = weight_spectrum("t_power", i)
            rep.add(f"t^{i}", str(et))
            if et != i - Fraction(1, 2):
                bad.append(f"t^{i}")
    rep.add("closed_forms_hold", not bad)
    if bad:
        raise VerificationFailed("eigenvalue mismatch at " + ", ".join(bad))


def cmd_threefold(a, rep: Report) -> None:
    src = load_source(a.poly)
    p, N = a.prime, a.prec
    if src.poly.nvars != 3:
        raise InputError("threefold assembly needs a plane curve")
    rep.add("polynomial", str(src.poly))
    rep.add("prime", p)
    rep.add("precision", N)
    if a.param_obj is not None:
        rep.add("parameter", a.param_obj.text)
    res, _ = _frobenius(a, src)
    tf = assemble(res.normalized, p)
    rep.matrix("graded_frobenius", [[fmt_scalar(x, N + 1) for x in r] for r in tf.graded_rows()])
    rep.add("extension_entries", "unknown (not determined by the graded pieces)")
    rep.add("integral_of_frobenius_omega", fmt_scalar(tf.line, N))
    slopes = newton_slopes(tf)
    rep.add("newton_slopes", [str(s) for s in slopes])
    sc = verify_scaling(tf, res.normalized, p)
    rep.add("scaling", sc.message)
    if not sc.ok:
        raise VerificationFailed(sc.message)


def cmd_zeta(a, rep: Report) -> None:
    src = load_source(a.poly)
    p = a.prime
    f = src.poly
    if f.has_parameter():
        _need_family_param(src, a.param_obj, p)
        f = evaluate_param(f, a.param_obj.residue(p))
    rep.add("polynomial", str(f))
    rep.add("prime", p)
    N1 = oracle.count_points(f, p, 1)
    N2 = oracle.count_points(f, p, 2)
    rep.add("N1", N1)
    rep.add("N2", N2)
    if f.nvars == 3 and f.degree == 3:
        z = oracle.zeta_genus1(N1, N2, p)
        rep.add("a", z.a)
        rep.add("zeta_numerator", str(z))


COMMANDS = {
    "splitting": (cmd_splitting, "emit A_0..A_M of the splitting series"),
    "formula3": (cmd_formula3, "residuals of the factorial identity over a range of b"),
    "basis": (cmd_basis, "Griffiths-Dwork basis of primitive cohomology"),
    "frobenius": (cmd_frobenius, "Frobenius matrix, char poly and point-count cross-check"),
    "gm": (cmd_gm, "Gauss-Manin matrix of theta = l d/dl; at teich:k also the Frobenius compatibility"),
    "pf": (cmd_pf, "Picard-Fuchs operator and period-series check"),
    "keylemma": (cmd_keylemma, "pushforward intertwining report"),
    "spectrum": (cmd_spectrum, "weight eigenvalues of t d/dt"),
    "threefold": (cmd_threefold, "graded Frobenius of the local threefold"),
    "zeta": (cmd_zeta, "brute-force point counts"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prime", "-p", type=int, default=5)
    common.add_argument("--prec", "-N", type=int, default=6)
    common.add_argument("--M", default="auto", help="truncation depth or 'auto'")
    common.add_argument("--poly", help="fixture name, fixture file, or inline polynomial")
    common.add_argument("--param", help="rational value or teich:k")
    common.add_argument("--out", help="report path; the JSON mirror goes to PATH.json")
    common.add_argument("--json", action="store_true", help="print the JSON mirror to stdout")
    common.add_argument("--jobs", type=int, default=1, help="threads for Frobenius columns")

    ap = argparse.ArgumentParser(prog="dworkcoh", description="p-adic cohomology toolkit")
    sub = ap.add_subparsers(dest="command", required=True)
    parsers = {}
    for name, (_, helptext) in COMMANDS.items():
        parsers[name] = sub.add_parser(name, parents=[common], help=helptext)
    parsers["formula3"].add_argument("--b", default="1..3")
    parsers["pf"].add_argument("--max-order", type=int, default=4)
    parsers["pf"].add_argument("--terms", type=int, default=20)
    parsers["keylemma"].add_argument("--alpha-max", type=int, default=5)
    parsers["keylemma"].add_argument("--i-max", type=int, default=3)
    parsers["keylemma"].add_argument("--perturb", help="n:delta, add delta to A_n")
    parsers["spectrum"].add_argument("--max-i", type=int, default=50)
    return ap


def _validate(a) -> None:
    if a.prime < 3 or not _is_prime(a.prime):
        raise InputError(f"--prime must be an odd prime, got {a.prime}")
    if a.prec < 1:
        raise InputError("--prec must be >= 1")
    if a.M == "auto":
        a.M = None
    else:
        try:
            a.M = int(a.M)
        except ValueError:
            raise InputError(f"--M must be an integer or 'auto', got {a.M!r}") from None
        if a.M < 0:
            raise InputError("--M must be non-negative")
    if a.jobs < 1:
        raise InputError("--jobs must be >= 1")
    a.param_obj = parse_param(a.param)
    needs_poly = {"basis", "frobenius", "gm", "pf", "threefold", "zeta"}
    if a.command in needs_poly and not a.poly:
        raise InputError(f"{a.command} needs --poly")


def run(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    rep = Report(a.command)
    code = OK
    try:
        _validate(a)
        COMMANDS[a.command][0](a, rep)
        rep.add("verdict", "ok")
    except VerificationFailed as exc:
        rep.add("verdict", f"verification-failed: {exc}")
        code = FAILED
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except (InputError, UnsupportedShape, SingularHypersurface, BadReduction,
            CoefficientNotTeichmuller, oracle.BudgetExceeded) as exc:
        print(f"input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return BAD_INPUT
    except oracle.NotGenus1 as exc:
        rep.add("verdict", f"verification-failed: {exc}")
        code = FAILED
    except (TruncationInsufficient, NoDependency) as exc:
        rep.add("verdict", f"verification-failed: {type(exc).__name__}: {exc}")
        code = FAILED
    text, js = rep.text(), rep.json()
    if a.out:
        Path(a.out).write_text(text)
        Path(a.out + ".json").write_text(js)
    sys.stdout.write(js if a.json else text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
