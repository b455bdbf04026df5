"""Graded Frobenius on H^3 of the local threefold x y + P(u, v) = 0.

H^3 sits in 0 -> H^1(C) -> H^3 -> (line spanned by omega) -> 0.  On the H^1(C)
block Frobenius is p times the curve Frobenius; on the line it is p^3.  The
extension entry is not determined here and is reported as unknown.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .frobenius_gm import PrecMatrix, charpoly, newton_slopes as _slopes
from .padic import PadicScalar, exact


@dataclass(frozen=True)
class ThreefoldFrobenius:
    p: int
    curve: PrecMatrix
    block: PrecMatrix
    line: PadicScalar
    scaling: int
    extension_known: bool = False

    @property
    def dim(self) -> int:
        return self.block.size + 1

    def graded_rows(self) -> list[list[PadicScalar]]:
        """Block-diagonal matrix; the off-diagonal extension slots are placeholders."""
        n = self.block.size
        zero = PadicScalar.zero(self.p)
        rows = [list(r) + [zero] for r in self.block.entries]
        rows.append([zero] * n + [self.line])
        return rows

    def charpoly(self) -> list[PadicScalar]:
        """det(T - block) (T - p^3), constant term first."""
        cb = charpoly(self.block.rows(), self.p)
        lin = [-self.line, exact(1, self.p)]
        out = [PadicScalar.zero(self.p)] * (len(cb) + 1)
        for i, a in enumerate(cb):
            for j, b in enumerate(lin):
                out[i + j] = out[i + j] + a * b
        cert = self.block.certificate
        return [c if c.is_exact else c.with_absprec(max(cert, 1) + 3) for c in out]


def assemble(curve: PrecMatrix, p: int) -> ThreefoldFrobenius:
    if curve.p != p:
        raise ValueError("prime mismatch")
    block = curve.scaled(p)
    return ThreefoldFrobenius(p, curve, block, exact(p ** 3, p), p)


def integral_frobenius_omega(tf: ThreefoldFrobenius) -> PadicScalar:
    """The value of the integration map on Fr(omega)."""
    return tf.line


def newton_slopes(tf: ThreefoldFrobenius) -> list[Fraction]:
    return _slopes(tf.charpoly())


@dataclass
class ScalingReport:
    ok: bool
    message: str
    location: tuple[int, int] | None = None


def verify_scaling(tf: ThreefoldFrobenius, curve: PrecMatrix, p: int) -> ScalingReport:
    """block == p * curve entrywise (as represented values), and dimension bookkeeping."""
    if tf.block.size != curve.size:
        return ScalingReport(False, f"block has size {tf.block.size}, curve H^1 has {curve.size}")
    if tf.dim != curve.size + 1:
        return ScalingReport(False, "graded H^3 dimension is not dim H^1 + 1")
    if tf.line != exact(p ** 3, p):
        return ScalingReport(False, f"line entry is {tf.line}, expected p^3")
    pp = exact(p, p)
    for i in range(curve.size):
        for j in range(curve.size):
            want = curve[i, j] * pp
            got = tf.block[i, j]
            if got != want:
                d = got - want
                v = d.valuation if not d.is_zero else d.precision
                return ScalingReport(False, f"entry ({i},{j}) differs, residual valuation {v}", (i, j))
    return ScalingReport(True, f"block = {p} * curve Frobenius, graded dim {tf.dim}")
