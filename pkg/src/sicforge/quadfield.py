"""Exact arithmetic in real quadratic fields Q(sqrt D) and the dimension bookkeeping
for d = n^2 + 3: square-free parts, fundamental units, class numbers, the
splitting d = (sqrt(d+1)+1)(sqrt(d+1)-1) and ray class group orders.

Everything here is exact (int / Fraction); nothing touches floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import sympy

from .hpnum import workdps


def _is_squarefree(n: int) -> bool:
    return n >= 1 and all(k == 1 for k in sympy.factorint(n).values())


@dataclass(frozen=True)
class QuadElem:
    """a + b sqrt(D) with rational a, b and square-free D > 1."""

    a: Fraction
    b: Fraction
    D: int

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.D <= 1 or not _is_squarefree(self.D):
            raise ValueError(f"D={self.D} must be a square-free integer > 1")

    def _coerce(self, other) -> "QuadElem":
        if isinstance(other, QuadElem):
            if other.D != self.D:
                raise ValueError("elements live in different fields")
            return other
        return QuadElem(Fraction(other), Fraction(0), self.D)

    def __add__(self, other):
        o = self._coerce(other)
        return QuadElem(self.a + o.a, self.b + o.b, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadElem(-self.a, -self.b, self.D)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return QuadElem(self.a * o.a + self.D * self.b * o.b, self.a * o.b + self.b * o.a, self.D)

    __rmul__ = __mul__

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero has no inverse")
        c = self.conj()
        return QuadElem(c.a / n, c.b / n, self.D)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = QuadElem(1, 0, self.D), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "QuadElem":
        """The Galois conjugate, sqrt D -> -sqrt D."""
        return QuadElem(self.a, -self.b, self.D)

    def norm(self) -> Fraction:
        return self.a * self.a - self.D * self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a

    def is_integral(self) -> bool:
        """Membership in the ring of integers (half-integers allowed when D = 1 mod 4)."""
        if self.a.denominator == 1 and self.b.denominator == 1:
            return True
        if self.D % 4 != 1:
            return False
        x, y = 2 * self.a, 2 * self.b
        return x.denominator == 1 and y.denominator == 1 and (x.numerator - y.numerator) % 2 == 0

    def sign(self, place: int = 1) -> int:
        """Sign of the real embedding; place 1 sends sqrt D to +sqrt D, place 2 to -sqrt D."""
        a, b = self.a, (self.b if place == 1 else -self.b)
        if b == 0 or (a >= 0 and b >= 0) or (a <= 0 and b <= 0):
            s = a if a != 0 else b
            return (s > 0) - (s < 0)
        # opposite signs: the larger magnitude wins
        big_b = self.D * b * b > a * a
        return ((b > 0) if big_b else (a > 0)) * 2 - 1

    def to_mp(self, digits: int = 60, place: int = 1) -> mpmath.mpf:
        with workdps(digits):
            r = mpmath.sqrt(self.D)
            b = self.b if place == 1 else -self.b
            return mpmath.mpf(self.a.numerator) / self.a.denominator + \
                mpmath.mpf(b.numerator) / b.denominator * r

    def __str__(self):
        den = math.lcm(self.a.denominator, self.b.denominator)
        x, y = int(self.a * den), int(self.b * den)
        if y == 0:
            body = str(x)
        else:
            rad = f"√{self.D}" if abs(y) == 1 else f"{abs(y)}√{self.D}"
            if x == 0:
                body = ("-" if y < 0 else "") + rad
            else:
                body = f"{x}{'-' if y < 0 else '+'}{rad}"
        if den == 1:
            return body
        return f"({body})/{den}"


def squarefree_part(n: int) -> int:
    """n with every square factor removed."""
    if n < 1:
        raise ValueError("squarefree_part needs n >= 1")
    out = 1
    for p, k in sympy.factorint(n).items():
        if k % 2:
            out *= p
    return out


def magical_D(d: int) -> int:
    """Square-free part of (d+1)(d-3), the base field discriminant selector."""
    if d <= 3:
        raise ValueError(f"degenerate dimension d={d}: (d+1)(d-3) <= 0 has no square-free part")
    return squarefree_part((d + 1) * (d - 3))


@dataclass
class DimensionForm:
    d: int
    is_form: bool
    n: int | None = None
    e0: int = 0
    e1: int = 0
    primes: dict = field(default_factory=dict)
    is_prime: bool = False

    @property
    def primes_one_mod_three(self) -> bool:
        return all(p % 3 == 1 for p in self.primes)

    @property
    def prime_case(self) -> bool:
        """d = n^2 + 3 = p, which forces p = 1 mod 3."""
        return self.is_form and self.is_prime

    def factorization(self) -> str:
        parts = []
        if self.e0:
            parts.append("4")
        if self.e1:
            parts.append("3")
        parts += [f"{p}^{k}" if k > 1 else str(p) for p, k in sorted(self.primes.items())]
        return "·".join(parts) or "1"


def dimension_form(d: int) -> DimensionForm:
    """Is d = n^2 + 3, and if so its decomposition 4^e0 3^e1 prod p_i^k_i."""
    if d < 4:
        raise ValueError("dimension_form needs d >= 4")
    n = math.isqrt(d - 3)
    if n * n != d - 3:
        return DimensionForm(d, False)
    fac = sympy.factorint(d)
    e2 = fac.pop(2, 0)
    if e2 % 2:
        raise ArithmeticError(f"{d} = n^2+3 with an odd power of 2")
    e0 = e2 // 2
    e1 = fac.pop(3, 0)
    return DimensionForm(d, True, n, e0, e1, fac, sympy.isprime(d))


# units ---------------------------------------------------------------------------

def field_discriminant(D: int) -> int:
    return D if D % 4 == 1 else 4 * D


def _omega(D: int) -> QuadElem:
    """Generator of the ring of integers: (1+sqrt D)/2 or sqrt D."""
    return QuadElem(Fraction(1, 2), Fraction(1, 2), D) if D % 4 == 1 else QuadElem(0, 1, D)


def fundamental_unit(D: int) -> tuple[QuadElem, int]:
    """Fundamental unit eps > 1 of the ring of integers of Q(sqrt D), with its norm.

    Continued fraction of omega = (delta + sqrt Delta)/2; the first convergent p/q with
    N(p - q omega) = +-1 ends the first period and gives eps = p - q conj(omega).
    """
    if D <= 1 or not _is_squarefree(D):
        raise ValueError(f"D={D} must be a square-free integer > 1")
    disc = field_discriminant(D)
    delta = disc % 2
    s = math.isqrt(disc)
    omega = _omega(D)
    w_trace, w_norm = int(omega.trace()), int(omega.norm())
    P, Q = delta, 2
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    while True:
        a = (P + s) // Q
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        n = p * p - p * q * w_trace + q * q * w_norm
        if abs(n) == 1:
            eps = p - q * omega.conj()
            return eps, n
        P = a * Q - P
        Q = (disc - P * P) // Q


def narrow_class_number(D: int) -> int:
    """Number of cycles of reduced primitive forms of the field discriminant."""
    disc = field_discriminant(D)
    s = math.isqrt(disc)

    reduced = set()
    for b in range(disc % 2, s + 1, 2):
        if b == 0:
            continue
        ac = (b * b - disc) // 4
        m = -ac
        for a in sympy.divisors(m):
            # sqrt(disc) - b < 2|a| < sqrt(disc) + b
            if not (2 * a + b > s and 2 * a - b <= s):
                continue
            for sa in (a, -a):
                c = ac // sa
                if math.gcd(math.gcd(sa, b), c) == 1:
                    reduced.add((sa, b, c))

    def rho(f):
        a, b, c = f
        m = 2 * abs(c)
        b2 = s - ((s + b) % m)
        return (c, b2, (b2 * b2 - disc) // (4 * c))

    cycles, seen = 0, set()
    for f in sorted(reduced):
        if f in seen:
            continue
        cycles += 1
        g = f
        while g not in seen:
            seen.add(g)
            g = rho(g)
    return cycles


def class_number(D: int) -> int:
    """Wide class number h of Q(sqrt D)."""
    if D <= 1 or not _is_squarefree(D):
        raise ValueError(f"D={D} must be a square-free integer > 1")
    h_plus = narrow_class_number(D)
    _, n = fundamental_unit(D)
    return h_plus if n == -1 else h_plus // 2


# splitting and ray classes -----------------------------------------------------------

@dataclass(frozen=True)
class IdealFactor:
    generator: QuadElem
    conjugate: QuadElem
    norm_value: int

    def residue_root(self) -> int:
        """The image of sqrt D in O/(generator) = F_p."""
        r = -self.generator.a / self.generator.b
        return r.numerator * pow(r.denominator, -1, self.norm_value) % self.norm_value


def split_dimension(d: int) -> tuple[IdealFactor, IdealFactor]:
    """The factors (sqrt(d+1)+1, sqrt(d+1)-1) of d = n^2 + 3 over K = Q(magical_D(d))."""
    form = dimension_form(d) if d >= 4 else None
    if form is None or not form.is_form:
        raise ValueError(f"d={d} is not of the form n^2 + 3")
    D = magical_D(d)
    f2, rem = divmod(d + 1, D)
    f = math.isqrt(f2)
    if rem or f * f != f2:
        raise ArithmeticError(f"d+1={d + 1} is not a square times D={D}")
    root = QuadElem(0, f, D)
    outer, inner = root + 1, root - 1
    if outer * inner != QuadElem(d, 0, D):
        raise ArithmeticError("splitting identity failed")
    if not (outer.is_integral() and inner.is_integral()):
        raise ArithmeticError("split factors are not algebraic integers")
    return (IdealFactor(outer, outer.conj(), abs(int(outer.norm()))),
            IdealFactor(inner, inner.conj(), abs(int(inner.norm()))))


@dataclass
class RayClassDescriptor:
    D: int
    modulus: str
    places: tuple[int, ...]
    order: int
    h: int
    residue_order: int
    unit_image_order: int
    ell: Fraction

    @property
    def ell_is_integer(self) -> bool:
        return self.ell.denominator == 1

    @property
    def modulus_tag(self) -> str:
        return f"{self.modulus},[{','.join(map(str, self.places))}]"


def ray_class_group_order(h: int, residue_order: int, places: int, unit_image_order: int) -> int:
    """h * |(O/m)^x| * 2^places / |image of the global units|."""
    num = h * residue_order * 2 ** places
    if num % unit_image_order:
        raise ArithmeticError("unit image order does not divide the ray residue group")
    return num // unit_image_order


def _residue(x: QuadElem, root: int, p: int) -> int:
    val = x.a + x.b * root
    return val.numerator * pow(val.denominator, -1, p) % p


def _generated_order(gens, mul, ident) -> int:
    group = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for h in gens:
                y = mul(g, h)
                if y not in group:
                    group.add(y)
                    nxt.append(y)
        frontier = nxt
    return len(group)


MODULUS_PLACES = {"∂": (1,), "∂̄": (2,), "d": (1, 2)}


def ray_class_order(d: int, modulus: str = "∂", places: tuple[int, ...] | None = None) -> RayClassDescriptor:
    """Order of the ray class group of K = Q(sqrt D) for a modulus built from the split of d.

    ``modulus`` is '∂' (sqrt(d+1)+1), '∂̄' (sqrt(d+1)-1) or 'd'; ``places`` lists the
    real places in the modulus (1: sqrt D > 0, 2: sqrt D < 0). The bracket labels
    are taken as given; they are not derived from a ramification computation.
    """
    form = dimension_form(d)
    if not form.is_form:
        raise ValueError(f"d={d} is not of the form n^2 + 3")
    if not form.is_prime:
        raise ValueError(f"d={d} is composite; only the prime case is supported")
    if modulus not in MODULUS_PLACES:
        raise ValueError(f"unknown modulus {modulus!r}; use one of {list(MODULUS_PLACES)}")
    places = MODULUS_PLACES[modulus] if places is None else tuple(places)
    p = d
    D = magical_D(d)
    h = class_number(D)
    eps, _ = fundamental_unit(D)
    outer, inner = split_dimension(d)
    factors = {"∂": [outer], "∂̄": [inner], "d": [outer, inner]}[modulus]
    roots = [fac.residue_root() for fac in factors]
    residue_order = (p - 1) ** len(factors)

    def image(u: QuadElem):
        return tuple(_residue(u, r, p) for r in roots) + tuple(u.sign(pl) for pl in places)

    n_res = len(roots)

    def mul(x, y):
        return tuple((a * b) % p for a, b in zip(x[:n_res], y[:n_res])) + \
            tuple(a * b for a, b in zip(x[n_res:], y[n_res:]))

    ident = tuple([1] * (n_res + len(places)))
    unit_image = _generated_order([image(QuadElem(-1, 0, D)), image(eps)], mul, ident)
    order = ray_class_group_order(h, residue_order, len(places), unit_image)
    three_ell = Fraction(h * residue_order, order) if modulus == "d" else Fraction(h * (p - 1), order)
    return RayClassDescriptor(D, modulus, places, order, h, residue_order, unit_image, three_ell / 3)


def primitive_roots(p: int) -> list[int]:
    """All primitive roots mod an odd prime p, ascending."""
    if p < 3 or not sympy.isprime(p):
        raise ValueError(f"{p} is not an odd prime")
    qs = list(sympy.factorint(p - 1))
    return [g for g in range(2, p) if all(pow(g, (p - 1) // q, p) != 1 for q in qs)]


def primitive_root(p: int) -> int:
    """Smallest primitive root mod the odd prime p."""
    if p < 3 or not sympy.isprime(p):
        raise ValueError(f"{p} is not an odd prime")
    qs = list(sympy.factorint(p - 1))
    return next(g for g in range(2, p) if all(pow(g, (p - 1) // q, p) != 1 for q in qs))
