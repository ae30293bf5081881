"""Arbitrary-precision substrate: complex vectors, roots of unity and the unitary DFT.

Scalars are plain ``mpmath`` numbers. Precision is carried in decimal digits on
containers (``ComplexVector.digits``) and applied with :func:`workdps`, so values
never depend on the ambient ``mpmath.mp.dps`` setting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath
import numpy as np
from mpmath import mp
from mpmath.libmp import repr_dps

DEFAULT_DIGITS = 60
MIN_DIGITS = 30
# digits lost by an O(d^2) transform at desk-scale d
DFT_GUARD_DIGITS = 6


class PrecisionError(ArithmeticError):
    """Requested tolerance is finer than the working precision can deliver."""


def workdps(digits: int):
    return mp.workdps(digits)


def check_digits(digits: int) -> int:
    digits = int(digits)
    if digits < MIN_DIGITS:
        raise ValueError(f"working precision must be at least {MIN_DIGITS} digits, got {digits}")
    return digits


def require_tolerance(tol_digits: int, digits: int, guard: int = DFT_GUARD_DIGITS) -> None:
    if tol_digits > digits - guard:
        raise PrecisionError(
            f"tolerance 1e-{tol_digits} is not reachable at {digits} digits "
            f"(at most 1e-{digits - guard}); raise the precision"
        )


def tolerance(tol_digits: int) -> mpmath.mpf:
    return mpmath.mpf(10) ** (-int(tol_digits))


def root_of_unity(n: int, k: int, digits: int = DEFAULT_DIGITS) -> mpmath.mpc:
    """Return e(k/n) = exp(2*pi*i*k/n)."""
    if n < 1:
        raise ValueError("n must be positive")
    k %= n
    with workdps(digits):
        # quarter turns are exact
        if (4 * k) % n == 0:
            return [mpmath.mpc(1), mpmath.mpc(0, 1), mpmath.mpc(-1), mpmath.mpc(0, -1)][4 * k // n]
        return mpmath.expjpi(mpmath.mpf(2 * k) / n)


def roots_table(n: int, digits: int = DEFAULT_DIGITS) -> list:
    """All n-th roots of unity e(k/n), k = 0..n-1."""
    return [root_of_unity(n, k, digits) for k in range(n)]


def to_mpc(x, digits: int = DEFAULT_DIGITS) -> mpmath.mpc:
    with workdps(digits):
        if isinstance(x, str):
            parts = x.split()
            if len(parts) == 2:
                return mpmath.mpc(mpmath.mpf(parts[0]), mpmath.mpf(parts[1]))
            return mpmath.mpc(mpmath.mpf(x))
        if isinstance(x, (complex, np.complexfloating)):
            return mpmath.mpc(x.real, x.imag)
        return mpmath.mpc(x)


@dataclass(frozen=True)
class ComplexVector:
    """A fixed-length tuple of ``mpc`` entries tagged with its working precision."""

    entries: tuple
    digits: int = DEFAULT_DIGITS

    def __post_init__(self):
        check_digits(self.digits)
        object.__setattr__(self, "entries", tuple(to_mpc(x, self.digits) for x in self.entries))
        if not self.entries:
            raise ValueError("vector must have at least one entry")

    @classmethod
    def from_numpy(cls, arr: np.ndarray, digits: int = DEFAULT_DIGITS) -> "ComplexVector":
        return cls(tuple(complex(x) for x in np.asarray(arr).ravel()), digits)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def _peer_digits(self, other: "ComplexVector") -> int:
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return min(self.digits, other.digits)

    def to_numpy(self) -> np.ndarray:
        return np.array([complex(x) for x in self.entries])

    def with_digits(self, digits: int) -> "ComplexVector":
        return ComplexVector(self.entries, digits)

    def inner(self, other: "ComplexVector") -> mpmath.mpc:
        """<self|other>, conjugate-linear in ``self``."""
        digits = self._peer_digits(other)
        with workdps(digits):
            return mpmath.fsum(mpmath.conj(a) * b for a, b in zip(self.entries, other.entries))

    def norm(self) -> mpmath.mpf:
        with workdps(self.digits):
            return mpmath.sqrt(mpmath.fsum(abs(a) ** 2 for a in self.entries))

    def scaled(self, c) -> "ComplexVector":
        with workdps(self.digits):
            return ComplexVector(tuple(c * a for a in self.entries), self.digits)

    def normalized(self) -> "ComplexVector":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("cannot normalize the zero vector")
        with workdps(self.digits):
            return self.scaled(1 / n)

    def conj(self) -> "ComplexVector":
        with workdps(self.digits):
            return ComplexVector(tuple(mpmath.conj(a) for a in self.entries), self.digits)

    def __add__(self, other: "ComplexVector") -> "ComplexVector":
        digits = self._peer_digits(other)
        with workdps(digits):
            return ComplexVector(tuple(a + b for a, b in zip(self, other)), digits)

    def __sub__(self, other: "ComplexVector") -> "ComplexVector":
        digits = self._peer_digits(other)
        with workdps(digits):
            return ComplexVector(tuple(a - b for a, b in zip(self, other)), digits)

    def max_abs_diff(self, other: "ComplexVector") -> mpmath.mpf:
        digits = self._peer_digits(other)
        with workdps(digits):
            return max(abs(a - b) for a, b in zip(self, other))


def dft(v: ComplexVector, inverse: bool = False, tol_digits: int | None = None) -> ComplexVector:
    """Unitary DFT, (F v)_k = d^{-1/2} sum_j e(jk/d) v_j; ``inverse`` uses e(-jk/d).

    Direct O(d^2) evaluation. Passing ``tol_digits`` asks for a guarantee that the
    result is good to 1e-tol_digits; a PrecisionError is raised if the working
    precision cannot support it.
    """
    if tol_digits is not None:
        require_tolerance(tol_digits, v.digits)
    d = v.dim
    sign = -1 if inverse else 1
    with workdps(v.digits + 5):
        w = roots_table(d, v.digits + 5)
        scale = 1 / mpmath.sqrt(d)
        out = [
            scale * mpmath.fsum(w[(sign * j * k) % d] * v[j] for j in range(d))
            for k in range(d)
        ]
    return ComplexVector(tuple(out), v.digits)


def dft_matrix(d: int, digits: int = DEFAULT_DIGITS, inverse: bool = False) -> list:
    sign = -1 if inverse else 1
    with workdps(digits):
        w = roots_table(d, digits)
        scale = 1 / mpmath.sqrt(d)
        return [[scale * w[(sign * j * k) % d] for j in range(d)] for k in range(d)]


def nullspace(rows: Sequence[Sequence], ncols: int, digits: int, tol=None) -> list:
    """Basis of the right null space of a real matrix by pivoted row reduction.

    Entries with modulus below ``tol`` (default 1e-(digits/2)) count as zero. The
    returned basis vectors have a 1 in their free coordinate, so exact 0/1 systems
    give exact 0/+-1 bases.
    """
    with workdps(digits):
        tol = mpmath.mpf(10) ** (-(digits // 2)) if tol is None else mpmath.mpf(tol)
        a = [[mpmath.mpf(x) for x in row] for row in rows]
        pivots = []
        r = 0
        for c in range(ncols):
            if r == len(a):
                break
            best = max(range(r, len(a)), key=lambda i: abs(a[i][c]))
            if abs(a[best][c]) <= tol:
                continue
            a[r], a[best] = a[best], a[r]
            piv = a[r][c]
            a[r] = [x / piv for x in a[r]]
            for i in range(len(a)):
                if i != r and a[i][c] != 0:
                    f = a[i][c]
                    a[i] = [x - f * y for x, y in zip(a[i], a[r])]
            pivots.append(c)
            r += 1
        free = [c for c in range(ncols) if c not in pivots]
        basis = []
        for f in free:
            vec = [mpmath.mpf(0)] * ncols
            vec[f] = mpmath.mpf(1)
            for i, c in enumerate(pivots):
                vec[c] = -a[i][f]
            basis.append(vec)
        return basis


def solve(matrix: Sequence[Sequence], rhs: Sequence, digits: int) -> list:
    with workdps(digits):
        x = mpmath.lu_solve(mpmath.matrix([list(r) for r in matrix]), mpmath.matrix(list(rhs)))
        return [x[i] for i in range(len(rhs))]


def fmt(x, n: int = 6) -> str:
    """Short scientific rendering used in reports."""
    return mpmath.nstr(mpmath.mpf(x), n, min_fixed=0, max_fixed=0) if x != 0 else "0"


def exact_str(x, digits: int) -> str:
    """Decimal text that reads back to the same binary value at ``digits`` precision."""
    with workdps(digits):
        return mpmath.nstr(mpmath.mpf(x), repr_dps(mp.prec))


def as_object_array(values: Iterable) -> np.ndarray:
    arr = np.empty(len(values := list(values)), dtype=object)
    arr[:] = values
    return arr
