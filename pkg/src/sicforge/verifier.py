"""High-precision ETF / SIC certification."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .etf_search import EtfSpec
from .heisenberg import FiducialVector, apply_displacement, overlap_table
from .hpnum import ComplexVector, fmt, workdps

GUARD_DIGITS = 20


@dataclass
class SicCertificate:
    d: int
    N: int
    max_equiangular_deviation: mpmath.mpf
    tightness_deviation: mpmath.mpf
    precision: int
    tol_digits: int
    symmetry: object = None
    fingerprint: object = None
    notes: list[str] = field(default_factory=list)

    @property
    def c1(self) -> Fraction:
        return Fraction(self.N, self.d)

    @property
    def c2(self) -> Fraction:
        return EtfSpec(self.d, self.N).c2

    @property
    def passed(self) -> bool:
        tol = mpmath.mpf(10) ** (-self.tol_digits)
        return self.max_equiangular_deviation < tol and self.tightness_deviation < tol

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    @property
    def max_deviation(self) -> mpmath.mpf:
        return max(self.max_equiangular_deviation, self.tightness_deviation)

    def fields(self) -> dict:
        out = {
            "d": self.d,
            "N": self.N,
            "c1": str(self.c1),
            "c2": str(self.c2),
            "max_equiangular_deviation": fmt(self.max_equiangular_deviation),
            "tightness_deviation": fmt(self.tightness_deviation),
            "precision": self.precision,
            "tol_digits": self.tol_digits,
            "verdict": self.verdict,
        }
        if self.symmetry is not None:
            out.update(self.symmetry.summary())
        if self.fingerprint is not None:
            out.update(self.fingerprint.summary())
        for k, note in enumerate(self.notes):
            out[f"note_{k}"] = note
        return out

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.fields().items())


def _default_tol(digits: int, tol_digits: int | None) -> int:
    return digits - GUARD_DIGITS if tol_digits is None else int(tol_digits)


def verify_etf(vectors, spec: EtfSpec, tol_digits: int | None = None) -> SicCertificate:
    """Check Gram-matrix equiangularity and tightness of an explicit vector list.

    The equiangular deviation also covers the diagonal, |<psi_i|psi_i>|^2 - 1, so
    unnormalized input cannot pass.
    """
    vectors = list(vectors)
    if len(vectors) != spec.N:
        raise ValueError(f"expected {spec.N} vectors, got {len(vectors)}")
    if any(v.dim != spec.d for v in vectors):
        raise ValueError(f"all vectors must have dimension {spec.d}")
    digits = min(v.digits for v in vectors)
    with workdps(digits):
        c1 = mpmath.mpf(spec.c1.numerator) / spec.c1.denominator
        c2 = mpmath.mpf(spec.c2.numerator) / spec.c2.denominator
        worst = mpmath.mpf(0)
        for i, u in enumerate(vectors):
            for j in range(i, len(vectors)):
                target = 1 if i == j else c2
                worst = max(worst, abs(abs(u.inner(vectors[j])) ** 2 - target))
        tight = mpmath.mpf(0)
        for a in range(spec.d):
            for b in range(spec.d):
                s = mpmath.fsum(v[a] * mpmath.conj(v[b]) for v in vectors)
                tight = max(tight, abs(s - (c1 if a == b else 0)))
    return SicCertificate(spec.d, spec.N, worst, tight, digits, _default_tol(digits, tol_digits))


def verify_sic(fid: FiducialVector, tol_digits: int | None = None) -> SicCertificate:
    """SIC test from the d^2 overlaps <psi|D_p psi>.

    Tightness of a Weyl-Heisenberg orbit is automatic for any vector:
    sum_p D_p|psi><psi|D_p^dagger = d |psi|^2 1, so its deviation is d * ||psi|^2 - 1|.
    """
    if not fid.normalized:
        raise ValueError("fiducial must be normalized")
    fid = fid.to_standard()
    d, digits = fid.dim, fid.digits
    table = overlap_table(fid.vector)
    with workdps(digits):
        c = mpmath.mpf(1) / (d + 1)
        worst = max(abs(abs(table[i][j]) ** 2 - c) for i in range(d) for j in range(d) if i or j)
        n2 = mpmath.fsum(abs(x) ** 2 for x in fid.vector)
        tight = d * abs(n2 - 1)
    return SicCertificate(d, d * d, worst, tight, digits, _default_tol(digits, tol_digits))


def orbit_vectors(fid: FiducialVector) -> list[ComplexVector]:
    fid = fid.to_standard()
    d = fid.dim
    return [apply_displacement((i, j), fid.vector) for i in range(d) for j in range(d)]
