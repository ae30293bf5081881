"""Weyl-Heisenberg displacement operators, fiducial orbits and overlaps.

Conventions: X|k> = |k+1>, Z|k> = w^k |k> with w = e(1/d), and

    D_{i,j} = tau^{ij} X^i Z^j,   tau = -e^{i pi/d}.

High-precision routines work on :class:`~sicforge.hpnum.ComplexVector`; the
``*_numpy`` helpers are complex128 fast paths used by the optimizers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .hpnum import DEFAULT_DIGITS, ComplexVector, dft, roots_table, workdps

DENSE_LIMIT = 256
BASES = ("standard", "fourier")


@dataclass(frozen=True, order=True)
class DisplacementIndex:
    i: int
    j: int
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")
        object.__setattr__(self, "i", self.i % self.d)
        object.__setattr__(self, "j", self.j % self.d)

    def __add__(self, other: "DisplacementIndex") -> "DisplacementIndex":
        return DisplacementIndex(self.i + other.i, self.j + other.j, self.d)

    def __neg__(self) -> "DisplacementIndex":
        return DisplacementIndex(-self.i, -self.j, self.d)

    @property
    def is_zero(self) -> bool:
        return self.i == 0 and self.j == 0

    def astuple(self) -> tuple[int, int]:
        return (self.i, self.j)


def all_indices(d: int) -> list[DisplacementIndex]:
    return [DisplacementIndex(i, j, d) for i in range(d) for j in range(d)]


@dataclass(frozen=True)
class FiducialVector:
    vector: ComplexVector
    basis: str = "standard"
    normalized: bool = False

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}, got {self.basis!r}")
        if self.normalized:
            with workdps(self.digits):
                err = abs(self.vector.norm() - 1)
                if err > mpmath.mpf(10) ** (10 - self.digits):
                    raise ValueError(f"vector flagged normalized but |norm - 1| = {mpmath.nstr(err, 3)}")

    @classmethod
    def from_entries(cls, entries, digits: int = DEFAULT_DIGITS, basis: str = "standard",
                     normalize: bool = True) -> "FiducialVector":
        v = ComplexVector(tuple(entries), digits)
        if normalize:
            v = v.normalized()
        return cls(v, basis, normalize)

    @property
    def dim(self) -> int:
        return self.vector.dim

    @property
    def digits(self) -> int:
        return self.vector.digits

    def normalize(self) -> "FiducialVector":
        return FiducialVector(self.vector.normalized(), self.basis, True)

    def to_standard(self) -> "FiducialVector":
        if self.basis == "standard":
            return self
        return FiducialVector(dft(self.vector, inverse=True), "standard", self.normalized)

    def to_fourier(self) -> "FiducialVector":
        if self.basis == "fourier":
            return self
        return FiducialVector(dft(self.vector), "fourier", self.normalized)

    def with_digits(self, digits: int) -> "FiducialVector":
        return FiducialVector(self.vector.with_digits(digits), self.basis, self.normalized)

    def to_numpy(self) -> np.ndarray:
        return self.vector.to_numpy()


def _require_normalized(fid: FiducialVector) -> None:
    if not fid.normalized:
        raise ValueError("fiducial must be normalized")


def tau_table(d: int, digits: int) -> list:
    """tau^e for e = 0..2d-1, using tau = e((d+1)/(2d))."""
    roots = roots_table(2 * d, digits)
    return [roots[(e * (d + 1)) % (2 * d)] for e in range(2 * d)]


def displacement(d: int, p: DisplacementIndex | tuple, digits: int = DEFAULT_DIGITS) -> list:
    """Dense D_p as a list of rows of ``mpc``."""
    if d < 2:
        raise ValueError("displacement operators need d >= 2")
    if d > DENSE_LIMIT:
        raise ValueError(f"dense operators only for d <= {DENSE_LIMIT}; use apply_displacement")
    p = _index(p, d)
    with workdps(digits):
        w = roots_table(d, digits)
        t = tau_table(d, digits)[(p.i * p.j) % (2 * d)]
        zero = mpmath.mpc(0)
        rows = [[zero] * d for _ in range(d)]
        for k in range(d):
            rows[(k + p.i) % d][k] = t * w[(p.j * k) % d]
        return rows


def _index(p, d: int) -> DisplacementIndex:
    if isinstance(p, DisplacementIndex):
        if p.d != d:
            raise ValueError(f"index is for dimension {p.d}, not {d}")
        return p
    return DisplacementIndex(p[0], p[1], d)


class _Tables:
    """Root-of-unity tables shared by the index-shift actions at one precision."""

    def __init__(self, d: int, digits: int):
        self.w = roots_table(d, digits)
        self.t = tau_table(d, digits)


@lru_cache(maxsize=64)
def _tables(d: int, digits: int) -> _Tables:
    return _Tables(d, digits)


def apply_displacement(p: DisplacementIndex | tuple, v: ComplexVector) -> ComplexVector:
    """D_p v by index shifts, (D_p v)_k = tau^{ij} w^{j(k-i)} v_{k-i}."""
    d = v.dim
    p = _index(p, d)
    tb = _tables(d, v.digits)
    with workdps(v.digits):
        t = tb.t[(p.i * p.j) % (2 * d)]
        out = [t * tb.w[(p.j * (k - p.i)) % d] * v[(k - p.i) % d] for k in range(d)]
    return ComplexVector(tuple(out), v.digits)


def apply_displacement_adjoint(p: DisplacementIndex | tuple, v: ComplexVector) -> ComplexVector:
    """D_p^dagger v, (D_p^dagger v)_k = tau^{-ij} w^{-jk} v_{k+i}."""
    d = v.dim
    p = _index(p, d)
    tb = _tables(d, v.digits)
    with workdps(v.digits):
        t = tb.t[(-p.i * p.j) % (2 * d)]
        out = [t * tb.w[(-p.j * k) % d] * v[(k + p.i) % d] for k in range(d)]
    return ComplexVector(tuple(out), v.digits)


def orbit(fid: FiducialVector) -> list[ComplexVector]:
    """The d^2 vectors D_{i,j} psi, ordered with i major."""
    _require_normalized(fid)
    return [apply_displacement(p, fid.vector) for p in all_indices(fid.dim)]


def overlap_table(v: ComplexVector) -> list[list]:
    """o[i][j] = <v|D_{i,j} v> as nested lists (no normalization check)."""
    d = v.dim
    tb = _tables(d, v.digits)
    out = [[None] * d for _ in range(d)]
    with workdps(v.digits + 3):
        conj_v = [mpmath.conj(x) for x in v]
        for i in range(d):
            c = [conj_v[k] * v[(k - i) % d] for k in range(d)]
            for j in range(d):
                s = mpmath.fsum(c[k] * tb.w[(j * (k - i)) % d] for k in range(d))
                out[i][j] = tb.t[(i * j) % (2 * d)] * s
    return out


def overlaps(fid: FiducialVector) -> dict[DisplacementIndex, mpmath.mpc]:
    """Map p -> <psi|D_p psi> for all d^2 indices."""
    _require_normalized(fid)
    table = overlap_table(fid.vector)
    d = fid.dim
    return {DisplacementIndex(i, j, d): table[i][j] for i in range(d) for j in range(d)}


# complex128 fast paths ------------------------------------------------------

@lru_cache(maxsize=64)
def numpy_tables(d: int) -> tuple[np.ndarray, np.ndarray]:
    """(phase, shift) with (D_{i,j} v)_k = phase[i,j,k] * v[shift[i,k]]."""
    i, j, k = np.meshgrid(np.arange(d), np.arange(d), np.arange(d), indexing="ij")
    tau_exp = (i * j * (d + 1)) % (2 * d)
    phase = np.exp(1j * np.pi * tau_exp / d) * np.exp(2j * np.pi * ((j * (k - i)) % d) / d)
    shift = (np.arange(d)[None, :] - np.arange(d)[:, None]) % d
    phase.setflags(write=False)
    shift.setflags(write=False)
    return phase, shift


def orbit_numpy(psi: np.ndarray) -> np.ndarray:
    """Array of shape (d, d, d) holding D_{i,j} psi."""
    d = psi.shape[0]
    phase, shift = numpy_tables(d)
    return phase * psi[shift][:, None, :]


def overlaps_numpy(psi: np.ndarray) -> np.ndarray:
    """o[i, j] = <psi|D_{i,j} psi> in complex128."""
    return np.einsum("k,ijk->ij", psi.conj(), orbit_numpy(psi))
