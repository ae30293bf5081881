"""Forward construction of almost flat fiducials from unit-circle phase data,
plus the self-consistency roundtrip search -> fingerprint -> construct.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import mpmath
import numpy as np
import sympy

from .etf_search import EtfSpec, SearchOptions, polish_fiducial, search
from .fingerprint import (FingerprintError, FingerprintReport, extract_phases, is_algebraic_unit,
                          orbit_structure, to_almost_flat, unit_circle_conjugates)
from .heisenberg import FiducialVector, overlaps_numpy
from .hpnum import ComplexVector, fmt, workdps
from .lattice import minimal_polynomial, poly_eval
from .quadfield import dimension_form, magical_D, primitive_root, primitive_roots, ray_class_order
from .symplectic import SymplecticMatrix
from .verifier import SicCertificate, verify_sic

SEARCH_WINDOW = 120
SCREEN_TOL = 1e-10


def _check_prime_form(d: int) -> None:
    if d < 4 or not dimension_form(d).is_form:
        raise ValueError(f"d={d} is not of the form n^2 + 3")
    if not sympy.isprime(d):
        raise ValueError(f"d={d} is not prime; only the prime case is supported")


@dataclass
class UnitCandidateSet:
    d: int
    units: tuple
    digits: int
    D: int | None = None
    theta: int | None = None
    ell: int | None = None
    minpoly: list | None = None
    provenance: str = "manual"

    def __post_init__(self):
        _check_prime_form(self.d)
        if self.D is None:
            self.D = magical_D(self.d)
        with workdps(self.digits):
            self.units = tuple(mpmath.mpc(u) for u in self.units)
            if not self.units:
                raise ValueError("no units supplied")
            tol = mpmath.mpf(10) ** (10 - self.digits)
            for k, u in enumerate(self.units):
                if abs(abs(u) - 1) > tol:
                    raise ValueError(f"unit {k} has modulus {fmt(abs(u))}, not 1")
                if self.minpoly is not None and abs(poly_eval(self.minpoly, u)) > tol:
                    raise ValueError(f"unit {k} is not a root of the supplied minimal polynomial")

    @property
    def m(self) -> int:
        return len(self.units)


@dataclass
class ConstructionResult:
    d: int
    fiducial: FiducialVector | None
    sign: int | None
    theta: int | None
    ordering: str | None
    certificate: SicCertificate | None
    trials: int
    screened: int
    best_screen_deviation: float
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.certificate is not None and self.certificate.passed

    def summary(self) -> dict:
        out = {
            "construct_verdict": "pass" if self.passed else "fail",
            "construct_theta": self.theta if self.theta is not None else "-",
            "construct_sign": self.sign if self.sign is not None else "-",
            "construct_ordering": self.ordering or "-",
            "construct_trials": self.trials,
            "construct_screened": self.screened,
            "construct_best_screen_deviation": f"{self.best_screen_deviation:.3e}",
        }
        for k, note in enumerate(self.notes):
            out[f"construct_note_{k}"] = note
        return out


def build_fiducial(units, d: int, theta: int, sign: int, digits: int) -> FiducialVector:
    """Fourier-basis vector a_0 = -(2+sqrt(d+1)), a_{theta^r} = s sqrt((-2-sqrt(d+1)) u_{r mod m}).

    Principal square roots; the result is not normalized.
    """
    _check_prime_form(d)
    units = list(units)
    m = len(units)
    if m == 0 or (d - 1) % m:
        raise ValueError(f"unit count {m} does not divide p-1={d - 1}")
    if sympy.n_order(theta % d, d) != d - 1:
        raise ValueError(f"{theta} is not a primitive root mod {d}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    with workdps(digits):
        c = 2 + mpmath.sqrt(d + 1)
        a = [mpmath.mpc(0)] * d
        a[0] = mpmath.mpc(-c)
        for r in range(d - 1):
            a[pow(theta, r, d)] = sign * mpmath.sqrt(-c * mpmath.mpc(units[r % m]))
    return FiducialVector(ComplexVector(tuple(a), digits), "fourier", False)


def _screen_numpy(units: np.ndarray, d: int, theta: int, sign: int) -> float:
    c = 2 + np.sqrt(d + 1)
    a = np.zeros(d, dtype=complex)
    a[0] = -c
    m = len(units)
    for r in range(d - 1):
        a[pow(theta, r, d)] = sign * np.sqrt(-c * units[r % m])
    psi = np.fft.fft(a) / np.sqrt(d)
    psi /= np.linalg.norm(psi)
    o = np.abs(overlaps_numpy(psi)) ** 2
    o[0, 0] = 1 / (d + 1)
    return float(np.max(np.abs(o - 1 / (d + 1))))


def _orderings(m: int, full: bool):
    if full:
        for perm in itertools.permutations(range(m)):
            yield "perm=" + ",".join(map(str, perm)), list(perm)
        return
    seen = set()
    for rev in (False, True):
        for rot in range(m):
            idx = [(rot + k) % m for k in range(m)]
            if rev:
                idx = [(rot - k) % m for k in range(m)]
            if tuple(idx) in seen:
                continue
            seen.add(tuple(idx))
            yield f"rot={rot},rev={int(rev)}", idx


def construct_search(cands: UnitCandidateSet, tol_digits: int = 20, theta: int | None = None,
                     sign: int | None = None, full_permutations: bool = False) -> ConstructionResult:
    """Try every primitive root, both global signs and each rotation/reversal of the unit order.

    Candidates are screened in complex128 at 1e-10 and survivors certified at the
    unit data's precision. The first passing configuration in the fixed iteration
    order wins, so the search is deterministic.
    """
    d = cands.d
    if d - 1 > SEARCH_WINDOW:
        raise ValueError(f"p-1={d - 1} exceeds the search window {SEARCH_WINDOW}")
    if (d - 1) % cands.m:
        raise ValueError(f"unit count {cands.m} does not divide p-1={d - 1}")
    thetas = primitive_roots(d) if theta is None else [theta]
    signs = (1, -1) if sign is None else (sign,)
    notes = []
    if cands.minpoly is not None and not is_algebraic_unit(cands.minpoly):
        notes.append("supplied minimal polynomial is not that of an algebraic unit")
    u_np = np.array([complex(u) for u in cands.units])
    trials = screened = 0
    best = (np.inf, None)
    for th in thetas:
        for s in signs:
            for tag, idx in _orderings(cands.m, full_permutations):
                trials += 1
                dev = _screen_numpy(u_np[idx], d, th, s)
                if dev < best[0]:
                    best = (dev, (th, s, tag, idx))
                if dev >= SCREEN_TOL:
                    continue
                screened += 1
                fid = build_fiducial([cands.units[k] for k in idx], d, th, s, cands.digits).normalize()
                cert = verify_sic(fid, tol_digits)
                if cert.passed:
                    return ConstructionResult(d, fid, s, th, tag, cert, trials, screened, dev, notes)
    dev, cfg = best
    if cfg is None:
        return ConstructionResult(d, None, None, None, None, None, trials, screened, dev, notes)
    th, s, tag, idx = cfg
    fid = build_fiducial([cands.units[k] for k in idx], d, th, s, cands.digits).normalize()
    cert = verify_sic(fid, tol_digits)
    notes.append("no configuration passed; best trial kept")
    return ConstructionResult(d, fid, s, th, tag, cert, trials, screened, dev, notes)


# roundtrip -------------------------------------------------------------------------

@dataclass
class Stage:
    name: str
    ok: bool
    detail: str
    seconds: float


@dataclass
class RoundtripReport:
    d: int
    stages: list[Stage] = field(default_factory=list)
    ell: int | None = None
    theta: int | None = None
    fiducial: FiducialVector | None = None
    fingerprint: FingerprintReport | None = None
    construction: ConstructionResult | None = None

    @property
    def passed(self) -> bool:
        return bool(self.stages) and all(s.ok for s in self.stages) and \
            self.construction is not None and self.construction.passed

    @property
    def failed_stage(self) -> Stage | None:
        return next((s for s in self.stages if not s.ok), None)

    def table(self, timings: bool = False) -> str:
        lines = [f"roundtrip d={self.d}"]
        for s in self.stages:
            row = f"  {s.name:<16} {'ok' if s.ok else 'FAIL':<5} {s.detail}"
            if timings:
                row += f"  [{s.seconds:.1f}s]"
            lines.append(row)
        lines.append(f"verdict = {'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"


class _Stages:
    def __init__(self, report: RoundtripReport):
        self.report = report
        self.t = time.perf_counter()

    def add(self, name: str, ok: bool, detail: str) -> bool:
        now = time.perf_counter()
        self.report.stages.append(Stage(name, ok, detail, now - self.t))
        self.t = now
        return ok


def zauner_type_symmetry(d: int, theta: int, ell: int) -> tuple[SymplecticMatrix, SymplecticMatrix]:
    """diag(g^-1, g) with g = theta^((p-1)/3 ell), together with complex conjugation."""
    g = pow(theta, (d - 1) // (3 * ell), d)
    return SymplecticMatrix.diagonal(g, d), SymplecticMatrix.conjugation_flip(d)


def roundtrip(d: int, digits: int = 100, seed: int = 0, restarts: int = 20,
              tol_digits: int = 20) -> RoundtripReport:
    """search -> polish -> fingerprint -> construct from the unordered unit-circle roots -> certify.

    The search is restricted to vectors fixed by the symmetry predicted from the
    ray class order, so the fiducial lands in the almost flat frame.
    """
    _check_prime_form(d)
    rep = RoundtripReport(d)
    st = _Stages(rep)

    desc = ray_class_order(d)
    if not st.add("ray_class", desc.ell_is_integer, f"order={desc.order} h={desc.h} ell={desc.ell}"):
        return rep
    rep.ell = int(desc.ell)
    rep.theta = primitive_root(d)
    sym = zauner_type_symmetry(d, rep.theta, rep.ell)

    res = search(EtfSpec(d, d * d), SearchOptions(orbit=True, symmetry=sym, seed=seed,
                                                   restarts=restarts, digits=40))
    if not st.add("search", res.converged, f"frame_error={fmt(res.error)} restart={res.restart}"):
        return rep
    fid = polish_fiducial(res.best, digits, sym)
    cert = verify_sic(fid, tol_digits)
    rep.fiducial = fid
    if not st.add("polish", cert.passed, f"deviation={fmt(cert.max_deviation)} digits={digits}"):
        return rep

    afv = to_almost_flat(fid)
    flat_ok = max(afv.flatness_residual, afv.ratio_residual) < mpmath.mpf(10) ** (-(digits // 5))
    if not st.add("almost_flat", flat_ok,
                  f"flatness={fmt(afv.flatness_residual)} ratio={fmt(afv.ratio_residual)}"):
        return rep
    try:
        fp = extract_phases(afv)
    except FingerprintError as exc:
        st.add("phases", False, str(exc))
        return rep
    rep.fingerprint = fp
    st.add("phases", True, f"max||u|-1|={fmt(fp.phase_deviation)}")

    fp.theta = rep.theta
    with workdps(digits):
        fp.m = orbit_structure(fp.phases, rep.theta, d, tol=mpmath.mpf(10) ** (-(digits // 4)))
    ok = 3 * fp.m * rep.ell == d - 1
    if not st.add("orbit_structure", ok, f"m={fp.m} 3*m*ell={3 * fp.m * rep.ell} p-1={d - 1}"):
        return rep

    polys = []
    for u in fp.independent():
        polys.append(minimal_polynomial(u, digits=digits))
    fp.minpolys = polys
    found = [p for p in polys if p is not None]
    fp.degree = max((len(p) - 1 for p in found), default=None)
    fp.is_unit = len(found) == len(polys) and all(is_algebraic_unit(p) for p in found)
    if not st.add("minpoly", fp.is_unit,
                  "; ".join("-" if p is None else ",".join(map(str, p)) for p in polys)
                  + f" unit={'yes' if fp.is_unit else 'no'}"):
        return rep

    roots = []
    with workdps(digits):
        for p in dict.fromkeys(tuple(p) for p in found):
            for z in unit_circle_conjugates(p, digits):
                if all(abs(z - w) > mpmath.mpf(10) ** (-(digits // 2)) for w in roots):
                    roots.append(z)
        match = len(roots) == fp.m and all(
            min(abs(z - u) for z in roots) < mpmath.mpf(10) ** (-(digits // 4)) for u in fp.independent())
    if not st.add("conjugates", match, f"{len(roots)} roots on the unit circle, m={fp.m}"):
        return rep

    cands = UnitCandidateSet(d, tuple(roots), digits, ell=rep.ell, minpoly=found[0] if len(found) == 1 else None,
                             provenance="fingerprint roundtrip, unit-circle roots sorted by argument")
    con = construct_search(cands, tol_digits)
    rep.construction = con
    detail = (f"theta={con.theta} sign={con.sign} ordering={con.ordering} "
              f"trials={con.trials} deviation="
              f"{fmt(con.certificate.max_deviation) if con.certificate else '-'}")
    st.add("construct", con.passed, detail)
    return rep
