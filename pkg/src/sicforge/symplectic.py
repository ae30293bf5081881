"""Clifford symmetries: the Weil representation of SL(2, Z_d) for odd d, its
antiunitary extension to determinant -1, and stabilizer search on fiducials.

An extended Clifford element is labelled by a pair (G, q): G acts on
displacement labels with det G = +-1 and q is a translation. The operator is

    A = D_q U_G          (det G = +1)
    A = D_q U_{GJ} K     (det G = -1, K = complex conjugation, J = diag(1, -1))

so that A D_p A^{-1} is proportional to D_{Gp}. Composition is
(G1, q1)(G2, q2) = (G1 G2, q1 + G1 q2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import mpmath
import numpy as np

from .heisenberg import (FiducialVector, apply_displacement, orbit_numpy, tau_table)
from .hpnum import DEFAULT_DIGITS, ComplexVector, nullspace, roots_table, workdps

EXHAUSTIVE_LIMIT = 19


@dataclass(frozen=True)
class SymplecticMatrix:
    """[[alpha, beta], [gamma, delta]] over Z_d with determinant +-1."""

    alpha: int
    beta: int
    gamma: int
    delta: int
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("modulus must be at least 2")
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, getattr(self, name) % self.d)
        if self.det not in (1 % self.d, (-1) % self.d):
            raise ValueError(f"determinant {self.det} is not +-1 mod {self.d}")

    @classmethod
    def identity(cls, d: int) -> "SymplecticMatrix":
        return cls(1, 0, 0, 1, d)

    @classmethod
    def conjugation_flip(cls, d: int) -> "SymplecticMatrix":
        """J = diag(1, -1), the label of plain complex conjugation."""
        return cls(1, 0, 0, -1, d)

    @classmethod
    def diagonal(cls, theta: int, d: int) -> "SymplecticMatrix":
        """C = diag(theta^{-1}, theta)."""
        return cls(pow(theta, -1, d), 0, 0, theta, d)

    @property
    def det(self) -> int:
        return (self.alpha * self.delta - self.beta * self.gamma) % self.d

    @property
    def antiunitary(self) -> bool:
        return self.d > 2 and self.det == self.d - 1

    @property
    def is_diagonal(self) -> bool:
        return self.beta == 0 and self.gamma == 0

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        a, b, c, e = self.alpha, self.beta, self.gamma, self.delta
        A, B, C, E = other.alpha, other.beta, other.gamma, other.delta
        return SymplecticMatrix(a * A + b * C, a * B + b * E, c * A + e * C, c * B + e * E, self.d)

    def apply(self, p: tuple[int, int]) -> tuple[int, int]:
        return ((self.alpha * p[0] + self.beta * p[1]) % self.d,
                (self.gamma * p[0] + self.delta * p[1]) % self.d)

    def astuple(self) -> tuple[int, int, int, int]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    def __str__(self):
        return f"[[{self.alpha},{self.beta}],[{self.gamma},{self.delta}]]"


def _as_matrix(F, d: int | None = None) -> SymplecticMatrix:
    if isinstance(F, SymplecticMatrix):
        return F
    (a, b), (c, e) = F
    return SymplecticMatrix(a, b, c, e, d)


def multiplicative_order(a: int, n: int) -> int:
    if math.gcd(a, n) != 1:
        raise ValueError(f"{a} is not invertible mod {n}")
    k, x = 1, a % n
    while x != 1 % n:
        x = x * a % n
        k += 1
    return k


def permutation_of_diagonal(theta: int, d: int) -> tuple[int, ...]:
    """j -> theta*j mod d, the index map of the permutation matrix for diag(theta^{-1}, theta)."""
    if math.gcd(theta, d) != 1:
        raise ValueError(f"theta={theta} is not coprime to d={d}")
    return tuple(theta * j % d for j in range(d))


def permutation_cycles(perm) -> list[tuple[int, ...]]:
    seen, cycles = set(), []
    for start in range(len(perm)):
        if start in seen:
            continue
        cyc, j = [], start
        while j not in seen:
            seen.add(j)
            cyc.append(j)
            j = perm[j]
        cycles.append(tuple(cyc))
    return cycles


# Weil representation ---------------------------------------------------------

def _weil_factors(F: SymplecticMatrix) -> list[tuple]:
    """Split F into factors whose matrices have closed forms.

    ('perm', a) is diag(a, a^{-1}); ('chirp', binv, alpha, delta) is a matrix
    with invertible beta.
    """
    d = F.d
    if d % 2 == 0:
        raise ValueError("the Weil representation is implemented for odd d only")
    if F.det != 1:
        raise ValueError("weil_unitary needs det F = 1; antiunitaries go through extended_operator")
    if F.beta == 0 and F.gamma == 0:
        return [("perm", F.alpha)]
    if math.gcd(F.beta, d) == 1:
        return [("chirp", pow(F.beta, -1, d), F.alpha, F.delta)]
    # F = (F T_x)(T_{-x}) with T_x = [[1, x], [0, 1]] and both beta entries invertible
    for x in range(1, d):
        if math.gcd(x, d) == 1 and math.gcd(F.alpha * x + F.beta, d) == 1:
            left = F @ SymplecticMatrix(1, x, 0, 1, d)
            right = SymplecticMatrix(1, -x, 0, 1, d)
            return _weil_factors(left) + _weil_factors(right)
    raise ValueError(f"no invertible-beta factorization found for {F}")


def _factor_rows(factor: tuple, d: int, w, t, sqrt_d, zero, one) -> list:
    if factor[0] == "perm":
        a = factor[1]
        rows = [[zero] * d for _ in range(d)]
        for u in range(d):
            rows[a * u % d][u] = one
        return rows
    _, binv, alpha, delta = factor
    # U[u][v] = d^{-1/2} tau^{binv (delta u^2 - 2 u v + alpha v^2)}
    return [[t[(binv * (delta * u * u - 2 * u * v + alpha * v * v)) % d] / sqrt_d
             for v in range(d)] for u in range(d)]


def _matmul(a, b):
    n = len(b)
    return [[mpmath.fsum(row[k] * b[k][j] for k in range(n)) for j in range(len(b[0]))] for row in a]


def weil_unitary(F, d: int | None = None, digits: int = DEFAULT_DIGITS) -> list:
    """Unitary U_F (rows of ``mpc``) with U_F D_p U_F^dagger = phase * D_{Fp}.

    Diagonal F gives the exact 0/1 permutation matrix with (U psi)_j = psi_{alpha^{-1} j}.
    """
    F = _as_matrix(F, d)
    d = F.d
    factors = _weil_factors(F)
    with workdps(digits + 5):
        # for odd d, tau = e((d+1)/(2d)) is a d-th root of unity, so tau^e only needs e mod d
        t = [tau_table(d, digits + 5)[e] for e in range(d)]
        w = roots_table(d, digits + 5)
        sqrt_d = mpmath.sqrt(d)
        zero, one = mpmath.mpc(0), mpmath.mpc(1)
        mats = [_factor_rows(f, d, w, t, sqrt_d, zero, one) for f in factors]
        out = mats[0]
        for m in mats[1:]:
            out = _matmul(out, m)
    with workdps(digits):
        return [[+x for x in row] for row in out]


@lru_cache(maxsize=4096)
def weil_unitary_numpy(F: SymplecticMatrix) -> np.ndarray:
    d = F.d
    out = np.eye(d, dtype=complex)
    for factor in _weil_factors(F):
        if factor[0] == "perm":
            m = np.zeros((d, d), dtype=complex)
            u = np.arange(d)
            m[factor[1] * u % d, u] = 1
        else:
            _, binv, alpha, delta = factor
            u = np.arange(d)[:, None]
            v = np.arange(d)[None, :]
            e = (binv * (delta * u * u - 2 * u * v + alpha * v * v) * (d + 1)) % (2 * d)
            m = np.exp(1j * np.pi * e / d) / np.sqrt(d)
        out = out @ m
    out.setflags(write=False)
    return out


def _unitary_part(G: SymplecticMatrix) -> SymplecticMatrix:
    return G @ SymplecticMatrix.conjugation_flip(G.d) if G.antiunitary else G


def apply_operator(G: SymplecticMatrix, v: ComplexVector) -> ComplexVector:
    """U_G v, or U_{GJ} conj(v) when G has determinant -1."""
    if G.antiunitary:
        v = v.conj()
    U = weil_unitary(_unitary_part(G), digits=v.digits)
    with workdps(v.digits):
        out = [mpmath.fsum(a * b for a, b in zip(row, v)) for row in U]
    return ComplexVector(tuple(out), v.digits)


def apply_operator_numpy(G: SymplecticMatrix, v: np.ndarray) -> np.ndarray:
    if G.antiunitary:
        v = v.conj()
    return weil_unitary_numpy(_unitary_part(G)) @ v


def real_form_numpy(G: SymplecticMatrix) -> np.ndarray:
    """The real-linear map of the operator on (Re psi, Im psi)."""
    U = weil_unitary_numpy(_unitary_part(G))
    R, I = U.real, U.imag
    if G.antiunitary:
        return np.block([[R, I], [I, -R]])
    return np.block([[R, -I], [I, R]])


def fixed_subspace(ops, d: int, digits: int = DEFAULT_DIGITS) -> list:
    """Real basis (vectors of length 2d over Re, Im) of {psi : A psi = psi for all A in ops}.

    Unitary labels use the eigenvalue-1 eigenspace of U_G as normalized by
    :func:`weil_unitary`; for diagonal G that is the permutation-invariant subspace.
    """
    rows = []
    for G in ops:
        G = _as_matrix(G, d)
        if G.d != d:
            raise ValueError("symmetry modulus does not match the dimension")
        U = weil_unitary(_unitary_part(G), digits=digits)
        with workdps(digits):
            R = [[x.real for x in row] for row in U]
            I = [[x.imag for x in row] for row in U]
            for r in range(d):
                if G.antiunitary:
                    top = R[r] + I[r]
                    bot = I[r] + [-x for x in R[r]]
                else:
                    top = R[r] + [-x for x in I[r]]
                    bot = I[r] + R[r]
                top = list(top)
                bot = list(bot)
                top[r] -= 1
                bot[d + r] -= 1
                rows.extend([top, bot])
    if not rows:
        return [[mpmath.mpf(int(i == j)) for i in range(2 * d)] for j in range(2 * d)]
    return nullspace(rows, 2 * d, digits)


# stabilizer search -------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryElement:
    matrix: SymplecticMatrix
    shift: tuple[int, int] = (0, 0)

    @property
    def antiunitary(self) -> bool:
        return self.matrix.antiunitary

    def __mul__(self, other: "SymmetryElement") -> "SymmetryElement":
        G, q = self.matrix, self.shift
        Gq = G.apply(other.shift)
        return SymmetryElement(G @ other.matrix, ((q[0] + Gq[0]) % G.d, (q[1] + Gq[1]) % G.d))

    def order(self) -> int:
        ident = SymmetryElement(SymplecticMatrix.identity(self.matrix.d))
        x, k = self, 1
        while x != ident:
            x = x * self
            k += 1
        return k

    def apply(self, v: ComplexVector) -> ComplexVector:
        return apply_displacement(self.shift, apply_operator(self.matrix, v))

    def __str__(self):
        tag = "anti" if self.antiunitary else "unit"
        return f"{self.matrix}+{self.shift}({tag})"


@dataclass
class SymmetryReport:
    d: int
    elements: list[SymmetryElement] = field(default_factory=list)
    generators: list[SymmetryElement] = field(default_factory=list)
    max_residual: mpmath.mpf | None = None
    exhaustive: bool = True

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def unitary_order(self) -> int:
        return sum(1 for e in self.elements if not e.antiunitary)

    @property
    def has_antiunitary(self) -> bool:
        return any(e.antiunitary for e in self.elements)

    @property
    def zauner_divisible(self) -> bool:
        return self.order > 0 and self.order % 3 == 0

    def summary(self) -> dict:
        return {
            "symmetry_order": self.order,
            "symmetry_unitary_order": self.unitary_order,
            "symmetry_antiunitary": "yes" if self.has_antiunitary else "no",
            "symmetry_zauner_divisible": "yes" if self.zauner_divisible else "no",
            "symmetry_generators": " ".join(str(g) for g in self.generators) or "-",
            "symmetry_search": "exhaustive" if self.exhaustive else "targeted",
        }


def det_pm1_matrices(d: int):
    """All of GL(2, Z_d) with determinant +-1."""
    ok = {1 % d, (-1) % d}
    for a, b, c, e in product(range(d), repeat=4):
        if (a * e - b * c) % d in ok:
            yield SymplecticMatrix(a, b, c, e, d)


def predicted_candidates(d: int, theta: int, ell: int) -> list[SymplecticMatrix]:
    """Powers of C^{(d-1)/(3 ell)} and their products with the conjugation flip."""
    if (d - 1) % (3 * ell):
        raise ValueError(f"3*ell={3 * ell} does not divide d-1={d - 1}")
    g = pow(theta, (d - 1) // (3 * ell), d)
    J = SymplecticMatrix.conjugation_flip(d)
    out = []
    for k in range(3 * ell):
        C = SymplecticMatrix.diagonal(pow(g, k, d), d)
        out.extend([C, C @ J])
    return out


def closure(gens: list[SymmetryElement]) -> set[SymmetryElement]:
    if not gens:
        return set()
    ident = SymmetryElement(SymplecticMatrix.identity(gens[0].matrix.d))
    group = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x * g
                if y not in group:
                    group.add(y)
                    nxt.append(y)
        frontier = nxt
    return group


def _generators(elements: list[SymmetryElement]) -> list[SymmetryElement]:
    gens: list[SymmetryElement] = []
    span: set = set()
    for e in sorted(elements, key=lambda e: (-e.order(), e.matrix.astuple(), e.shift)):
        if e not in span:
            gens.append(e)
            span = closure(gens)
    return gens


def _phase_residual(a: ComplexVector, b: ComplexVector):
    """max |a - phase*b| with the phase fitted on the first sizeable component."""
    with workdps(a.digits):
        big = max(abs(x) for x in b)
        k = next(i for i, x in enumerate(b) if abs(x) > big / 2)
        phase = a[k] / b[k]
        return max(abs(x - phase * y) for x, y in zip(a, b))


def detect_symmetries(fid: FiducialVector, theta: int | None = None, ell: int | None = None,
                      tol_digits: int | None = None) -> SymmetryReport:
    """Find extended Clifford elements A with A psi = phase * psi.

    Exhaustive over det +-1 matrices for d <= 19 (each with its unique matching
    translation), otherwise over the candidates predicted from ``theta`` and ``ell``.
    Candidates are screened in complex128 and confirmed at the fiducial's precision
    with tolerance 1e-(digits - 15).
    """
    if not fid.normalized:
        raise ValueError("fiducial must be normalized")
    fid = fid.to_standard()
    d, digits = fid.dim, fid.digits
    if d % 2 == 0:
        raise ValueError("symmetry detection is implemented for odd d only")
    tol_digits = digits - 15 if tol_digits is None else tol_digits
    exhaustive = d <= EXHAUSTIVE_LIMIT
    if exhaustive:
        candidates = det_pm1_matrices(d)
    elif theta is not None and ell is not None:
        candidates = predicted_candidates(d, theta, ell)
    else:
        raise ValueError(f"d={d} > {EXHAUSTIVE_LIMIT} needs theta and ell for a targeted search")

    psi = fid.to_numpy()
    orb = orbit_numpy(psi).reshape(d * d, d).conj()
    tol = mpmath.mpf(10) ** (-tol_digits)
    found, worst = [], mpmath.mpf(0)
    for G in candidates:
        v = apply_operator_numpy(G, psi)
        ov = np.abs(orb @ v)
        hit = int(np.argmax(ov))
        if ov[hit] < 1 - 1e-6:
            continue
        # U_G psi ~ D_p psi, so D_{-p} U_G psi ~ psi
        p = divmod(hit, d)
        elem = SymmetryElement(G, ((-p[0]) % d, (-p[1]) % d))
        res = _phase_residual(elem.apply(fid.vector), fid.vector)
        if res < tol:
            found.append(elem)
            worst = max(worst, res)
    report = SymmetryReport(d, found, [], worst if found else None, exhaustive)
    report.generators = _generators(found)
    return report
