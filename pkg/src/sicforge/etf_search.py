"""Numerical discovery of equiangular tight frames and SIC fiducials.

Each restart runs projected gradient descent on the unit sphere(s) in complex128
with an adaptive step, then hands a candidate that got close enough to a
Gauss-Newton polish: first in complex128, then in mpmath at the requested
precision. Restarts draw their start from ``default_rng([seed, restart])`` so a
run with more restarts explores a superset of a run with fewer.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .heisenberg import (FiducialVector, apply_displacement, apply_displacement_adjoint,
                         overlap_table, orbit_numpy)
from .hpnum import ComplexVector, solve, workdps
from .symplectic import SymplecticMatrix, fixed_subspace

log = logging.getLogger(__name__)

# a descent that gains less than this fraction over a window has reached a plateau
STALL_WINDOW = 500
STALL_RELATIVE = 1e-6


@dataclass(frozen=True)
class EtfSpec:
    d: int
    N: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if not self.d <= self.N <= self.d * self.d:
            raise ValueError(f"need d <= N <= d^2, got d={self.d}, N={self.N}")

    @property
    def c1(self) -> Fraction:
        return Fraction(self.N, self.d)

    @property
    def c2(self) -> Fraction:
        if self.N == 1:
            return Fraction(0)
        return Fraction(self.N - self.d, self.d * (self.N - 1))

    @property
    def is_sic(self) -> bool:
        return self.N == self.d * self.d


@dataclass
class SearchOptions:
    restarts: int = 20
    max_iterations: int = 20000
    target_digits: int = 24
    seed: int = 0
    symmetry: tuple[SymplecticMatrix, ...] = ()
    orbit: bool = False
    digits: int = 40
    polish_below: float = 1e-8
    # candidates that stall above polish_below but below this still get a Newton try
    newton_try_below: float = 1e-3
    stop_at_target: bool = True

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        self.symmetry = tuple(self.symmetry)
        if self.symmetry and not self.orbit:
            raise ValueError("symmetry restriction applies to orbit (fiducial) searches")


@dataclass
class RestartTrace:
    restart: int
    iterations: int
    descent_error: float
    error: mpmath.mpf
    polished: bool


@dataclass
class SearchResult:
    spec: EtfSpec
    best: FiducialVector | list | None
    error: mpmath.mpf
    restart: int
    target_digits: int
    trace: list[RestartTrace] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.error < mpmath.mpf(10) ** (-self.target_digits)


# objective ----------------------------------------------------------------------

def frame_error(obj, spec: EtfSpec, norm_tol_digits: int = 10):
    """Squared deviation from an ETF.

    For a list of vectors: sum_{i<j} (|<psi_i|psi_j>|^2 - c2)^2 + ||sum |psi><psi| - c1 1||_F^2.
    For a :class:`FiducialVector`: sum_{p != 0} (|<psi|D_p psi>|^2 - 1/(d+1))^2.
    """
    if isinstance(obj, FiducialVector):
        if not spec.is_sic or spec.d != obj.dim:
            raise ValueError("a fiducial needs a SIC spec (N = d^2) of matching dimension")
        return _orbit_error(obj.vector)
    vectors = list(obj)
    if len(vectors) != spec.N or any(v.dim != spec.d for v in vectors):
        raise ValueError(f"expected {spec.N} vectors of dimension {spec.d}")
    digits = min(v.digits for v in vectors)
    with workdps(digits):
        tol = mpmath.mpf(10) ** (norm_tol_digits - digits)
        for k, v in enumerate(vectors):
            if abs(v.norm() - 1) > tol:
                raise ValueError(f"vector {k} is not unit norm")
        c1, c2 = mpmath.mpf(spec.c1.numerator) / spec.c1.denominator, \
            mpmath.mpf(spec.c2.numerator) / spec.c2.denominator
        N, d = spec.N, spec.d
        err = mpmath.mpf(0)
        for i in range(N):
            for j in range(i + 1, N):
                err += (abs(vectors[i].inner(vectors[j])) ** 2 - c2) ** 2
        for a in range(d):
            for b in range(d):
                s = mpmath.fsum(v[a] * mpmath.conj(v[b]) for v in vectors)
                if a == b:
                    s -= c1
                err += abs(s) ** 2
        return err


def _orbit_error(v: ComplexVector):
    d = v.dim
    table = overlap_table(v)
    with workdps(v.digits):
        c = mpmath.mpf(1) / (d + 1)
        return mpmath.fsum((abs(table[i][j]) ** 2 - c) ** 2
                           for i in range(d) for j in range(d) if i or j)


def orbit_objective_numpy(psi: np.ndarray) -> tuple[float, np.ndarray]:
    """Orbit-mode error and its real gradient (as a complex vector) at a unit psi."""
    d = psi.shape[0]
    Y = orbit_numpy(psi)
    o = np.einsum("k,ijk->ij", psi.conj(), Y)
    e = np.abs(o) ** 2 - 1.0 / (d + 1)
    e[0, 0] = 0.0
    f = float(np.sum(e * e))
    grad = 8.0 * np.einsum("ij,ijk->k", e * o.conj(), Y)
    return f, grad


def frame_objective_numpy(V: np.ndarray, c1: float, c2: float) -> tuple[float, np.ndarray]:
    """General-frame error and its real gradient for rows V (N x d) of unit vectors."""
    N, d = V.shape
    G = V.conj() @ V.T
    E = np.abs(G) ** 2 - c2
    np.fill_diagonal(E, 0.0)
    A = V.T @ V.conj() - c1 * np.eye(d)
    f = 0.5 * float(np.sum(E * E)) + float(np.sum(np.abs(A) ** 2))
    grad = 4.0 * (E * G.conj()) @ V + 4.0 * V @ A.T
    return f, grad


# descent --------------------------------------------------------------------------

def _pack(psi: np.ndarray) -> np.ndarray:
    return np.concatenate([psi.real, psi.imag])


def _unpack(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1] // 2
    return x[..., :n] + 1j * x[..., n:]


def _descend_orbit(t, R, opts):
    """Projected gradient on the unit sphere of the coefficient space of R."""
    def evaluate(t):
        f, g = orbit_objective_numpy(_unpack(R @ t))
        return f, R.T @ _pack(g)

    step = 0.05
    f, g = evaluate(t)
    it = 0
    checkpoint = f
    for it in range(1, opts.max_iterations + 1):
        gt = g - (g @ t) * t
        if f < opts.polish_below or step < 1e-14 or np.linalg.norm(gt) < 1e-15:
            break
        if it % STALL_WINDOW == 0:
            if checkpoint - f < STALL_RELATIVE * checkpoint:
                break
            checkpoint = f
        trial = t - step * gt
        trial /= np.linalg.norm(trial)
        f_new, g_new = evaluate(trial)
        if f_new < f:
            t, f, g = trial, f_new, g_new
            step *= 1.3
        else:
            step *= 0.5
    return t, f, it


def _descend_frame(V, spec, opts):
    c1, c2 = float(spec.c1), float(spec.c2)
    step = 0.05
    f, g = frame_objective_numpy(V, c1, c2)
    it = 0
    checkpoint = f
    for it in range(1, opts.max_iterations + 1):
        radial = np.real(np.sum(V.conj() * g, axis=1, keepdims=True))
        gt = g - radial * V
        if f < opts.polish_below or step < 1e-14 or np.linalg.norm(gt) < 1e-15:
            break
        if it % STALL_WINDOW == 0:
            if checkpoint - f < STALL_RELATIVE * checkpoint:
                break
            checkpoint = f
        trial = V - step * gt
        trial /= np.linalg.norm(trial, axis=1, keepdims=True)
        f_new, g_new = frame_objective_numpy(trial, c1, c2)
        if f_new < f:
            V, f, g = trial, f_new, g_new
            step *= 1.3
        else:
            step *= 0.5
    return V, f, it


# Gauss-Newton in complex128 -----------------------------------------------------------

def _adjoint_tables(d: int):
    i, j, k = np.meshgrid(np.arange(d), np.arange(d), np.arange(d), indexing="ij")
    tau_exp = (-i * j * (d + 1)) % (2 * d)
    phase = np.exp(1j * np.pi * tau_exp / d) * np.exp(-2j * np.pi * ((j * k) % d) / d)
    shift = (np.arange(d)[None, :] + np.arange(d)[:, None]) % d
    return phase, shift


def _orbit_residuals_numpy(psi, want_jac=True):
    d = psi.shape[0]
    c = 1.0 / (d + 1)
    Y = orbit_numpy(psi).reshape(d * d, d)
    o = Y @ psi.conj()
    n2 = float(np.vdot(psi, psi).real)
    r = np.abs(o[1:]) ** 2 - c * n2 * n2
    r = np.append(r, n2 - 1.0)
    if not want_jac:
        return r, None
    aph, ash = _adjoint_tables(d)
    Ya = (aph * psi[ash][:, None, :]).reshape(d * d, d)
    g = o.conj()[:, None] * Y + o[:, None] * Ya - 2 * c * n2 * psi[None, :]
    g = np.vstack([g[1:], psi[None, :]])
    J = 2.0 * np.hstack([g.real, g.imag])
    return r, J


def _frame_residuals_numpy(V, spec, want_jac=True):
    N, d = V.shape
    c1, c2 = float(spec.c1), float(spec.c2)
    G = V.conj() @ V.T
    iu = np.triu_indices(N, 1)
    S = V.T @ V.conj() - c1 * np.eye(d)
    au = np.triu_indices(d)
    r = np.concatenate([np.abs(G[iu]) ** 2 - c2, S[au].real, S[np.triu_indices(d, 1)].imag,
                        np.real(np.diag(G)) - 1.0])
    if not want_jac:
        return r, None
    rows = []
    for i, j in zip(*iu):
        gam = np.zeros((N, d), complex)
        gam[i] = 2 * np.conj(G[i, j]) * V[j]
        gam[j] = 2 * G[i, j] * V[i]
        rows.append(gam)
    for a, b in zip(*au):
        gam = np.zeros((N, d), complex)
        gam[:, b] += V[:, a]
        gam[:, a] += V[:, b]
        rows.append(gam)
    for a, b in zip(*np.triu_indices(d, 1)):
        gam = np.zeros((N, d), complex)
        gam[:, b] += -1j * V[:, a]
        gam[:, a] += 1j * V[:, b]
        rows.append(gam)
    for i in range(N):
        gam = np.zeros((N, d), complex)
        gam[i] = 2 * V[i]
        rows.append(gam)
    gam = np.array(rows).reshape(len(rows), N * d)
    return r, np.hstack([gam.real, gam.imag])


def _gauss_newton_numpy(x, residuals, R=None, iterations=200):
    """Levenberg-Marquardt on packed real parameters x (psi = unpack(R @ x)).

    Steps are only accepted when they lower the residual; the damping shrinks on
    success and grows on failure. Plain Gauss-Newton diverges at frames where the
    Jacobian loses rank, which happens for some ETFs.
    """
    R = np.eye(x.shape[0]) if R is None else R
    r, J = residuals(_unpack(R @ x))
    val = float(r @ r)
    JR = J @ R
    lam = 1e-6 * float(np.max(np.sum(JR * JR, axis=0)))
    for _ in range(iterations):
        if val < 1e-30 or lam > 1e12:
            break
        k = JR.shape[1]
        dx = np.linalg.lstsq(np.vstack([JR, np.sqrt(lam) * np.eye(k)]),
                             np.concatenate([-r, np.zeros(k)]), rcond=None)[0]
        r_new, J_new = residuals(_unpack(R @ (x + dx)))
        v_new = float(r_new @ r_new)
        if v_new < val:
            x, r, J, val = x + dx, r_new, J_new, v_new
            JR = J @ R
            lam /= 10.0
        else:
            lam *= 4.0
    return x, val


# Gauss-Newton in mpmath ----------------------------------------------------------------

def _orbit_residuals_mp(v: ComplexVector):
    """Residuals |o_p|^2 - |psi|^4/(d+1) (p != 0), |psi|^2 - 1, and complex gradients."""
    d = v.dim
    c = mpmath.mpf(1) / (d + 1)
    n2 = mpmath.fsum(abs(x) ** 2 for x in v)
    res, grads = [], []
    for i in range(d):
        for j in range(d):
            if i == 0 and j == 0:
                continue
            Dv = apply_displacement((i, j), v)
            Dav = apply_displacement_adjoint((i, j), v)
            o = mpmath.fsum(mpmath.conj(a) * b for a, b in zip(v, Dv))
            res.append(abs(o) ** 2 - c * n2 * n2)
            oc = mpmath.conj(o)
            grads.append([oc * a + o * b - 2 * c * n2 * x for a, b, x in zip(Dv, Dav, v)])
    res.append(n2 - 1)
    grads.append(list(v.entries))
    return res, grads


def _frame_residuals_mp(vectors, spec):
    N, d = spec.N, spec.d
    c1 = mpmath.mpf(spec.c1.numerator) / spec.c1.denominator
    c2 = mpmath.mpf(spec.c2.numerator) / spec.c2.denominator
    zero = mpmath.mpc(0)
    res, grads = [], []

    def blank():
        return [[zero] * d for _ in range(N)]

    for i in range(N):
        for j in range(i + 1, N):
            g = vectors[i].inner(vectors[j])
            res.append(abs(g) ** 2 - c2)
            gam = blank()
            gam[i] = [2 * mpmath.conj(g) * x for x in vectors[j]]
            gam[j] = [2 * g * x for x in vectors[i]]
            grads.append(gam)
    S = [[mpmath.fsum(v[a] * mpmath.conj(v[b]) for v in vectors) for b in range(d)] for a in range(d)]
    for a in range(d):
        for b in range(a, d):
            res.append(S[a][b].real - (c1 if a == b else 0))
            gam = blank()
            for i, v in enumerate(vectors):
                gam[i][b] += v[a]
                gam[i][a] += v[b]
            grads.append(gam)
    for a in range(d):
        for b in range(a + 1, d):
            res.append(S[a][b].imag)
            gam = blank()
            for i, v in enumerate(vectors):
                gam[i][b] += -1j * v[a]
                gam[i][a] += 1j * v[b]
            grads.append(gam)
    for i, v in enumerate(vectors):
        res.append(mpmath.fsum(abs(x) ** 2 for x in v) - 1)
        gam = blank()
        gam[i] = [2 * x for x in v]
        grads.append(gam)
    return res, [[x for row in gam for x in row] for gam in grads]


def _sumsq(res):
    return mpmath.fsum(r * r for r in res)


def _gn_step_mp(res, grads, basis, extra_digits):
    """Damped normal-equation step; a gradient gamma is the Jacobian row [Re gamma, Im gamma]."""
    k = len(basis)
    rows = []
    for gam in grads:
        packed = [x.real for x in gam] + [x.imag for x in gam]
        rows.append([mpmath.fsum(a * b for a, b in zip(packed, bvec)) for bvec in basis])
    JtJ = [[mpmath.fsum(rows[r][a] * rows[r][b] for r in range(len(rows))) for b in range(k)]
           for a in range(k)]
    Jtr = [mpmath.fsum(rows[r][a] * res[r] for r in range(len(rows))) for a in range(k)]
    trace = mpmath.fsum(JtJ[a][a] for a in range(k))
    mu = trace * mpmath.mpf(10) ** (-(mpmath.mp.dps - extra_digits) // 2) / k
    for a in range(k):
        JtJ[a][a] += mu
    return solve(JtJ, [-x for x in Jtr], mpmath.mp.dps)


def polish_fiducial(fid: FiducialVector, digits: int, symmetry=(), iterations: int = 12,
                    tol_digits: int | None = None) -> FiducialVector:
    """Gauss-Newton refinement of a near-SIC fiducial at ``digits`` precision.

    With ``symmetry`` the update stays inside the fixed subspace of those
    extended Clifford elements, so exact symmetries survive polishing.
    """
    d = fid.dim
    fid = fid.to_standard()
    tol_digits = digits - 5 if tol_digits is None else tol_digits
    extra = 10
    with workdps(digits + extra):
        if symmetry:
            basis = fixed_subspace(symmetry, d, digits + extra)
        else:
            basis = [[mpmath.mpf(int(i == j)) for i in range(2 * d)] for j in range(2 * d)]
        v = fid.vector.with_digits(digits + extra)
        x = [e.real for e in v] + [e.imag for e in v]
        t = _coefficients(x, basis)
        tol = mpmath.mpf(10) ** (-tol_digits)
        v = _vector_from(t, basis, d, digits + extra)
        res, grads = _orbit_residuals_mp(v)
        cur = _sumsq(res)
        for _ in range(iterations):
            if max(abs(r) for r in res) < tol:
                break
            grads = [[2 * g for g in gam] for gam in grads]
            dt = _gn_step_mp(res, grads, basis, extra)
            t_new = [a + b for a, b in zip(t, dt)]
            v_new = _vector_from(t_new, basis, d, digits + extra)
            res_new, grads_new = _orbit_residuals_mp(v_new)
            new = _sumsq(res_new)
            if new >= cur:
                break
            t, v, res, grads, cur = t_new, v_new, res_new, grads_new, new
    return FiducialVector(v.with_digits(digits).normalized(), "standard", True)


def _coefficients(x, basis):
    """Coordinates of x in a row-reduced basis (each basis vector has a private unit entry)."""
    coeffs = []
    for b in basis:
        f = next(c for c, val in enumerate(b) if val == 1 and all(o[c] == 0 for o in basis if o is not b))
        coeffs.append(x[f])
    return coeffs


def _vector_from(t, basis, d, digits):
    x = [mpmath.fsum(tm * b[c] for tm, b in zip(t, basis)) for c in range(2 * d)]
    return ComplexVector(tuple(mpmath.mpc(x[c], x[d + c]) for c in range(d)), digits)


def polish_frame(vectors, spec: EtfSpec, digits: int, iterations: int = 12) -> list:
    N, d = spec.N, spec.d
    extra = 10
    with workdps(digits + extra):
        vs = [v.with_digits(digits + extra) for v in vectors]
        basis = [[mpmath.mpf(int(i == j)) for i in range(2 * N * d)] for j in range(2 * N * d)]
        tol = mpmath.mpf(10) ** (5 - digits)
        res, grads = _frame_residuals_mp(vs, spec)
        cur = _sumsq(res)
        for _ in range(iterations):
            if max(abs(r) for r in res) < tol:
                break
            dt = _gn_step_mp(res, grads, basis, extra)
            flat = [x for v in vs for x in v]
            moved = [flat[c] + mpmath.mpc(dt[c], dt[N * d + c]) for c in range(N * d)]
            vs_new = [ComplexVector(tuple(moved[i * d:(i + 1) * d]), digits + extra) for i in range(N)]
            res_new, grads_new = _frame_residuals_mp(vs_new, spec)
            new = _sumsq(res_new)
            if new >= cur:
                break
            vs, res, grads, cur = vs_new, res_new, grads_new, new
    return [v.with_digits(digits).normalized() for v in vs]


# driver ----------------------------------------------------------------------------

def _restriction_numpy(symmetry, d):
    """Orthonormal real basis (2d x k) of the fixed subspace, complex128 accuracy."""
    if not symmetry:
        return np.eye(2 * d)
    basis = fixed_subspace(symmetry, d, 30)
    B = np.array([[float(x) for x in b] for b in basis]).T
    if B.size == 0:
        raise ValueError("the requested symmetries fix no nonzero vector")
    Q, _ = np.linalg.qr(B)
    return Q


def search(spec: EtfSpec, opts: SearchOptions | None = None) -> SearchResult:
    """Multi-restart search; returns the restart with the smallest error."""
    opts = opts or SearchOptions()
    if opts.orbit:
        if not spec.is_sic:
            raise ValueError("orbit mode searches for SIC fiducials, so N must equal d^2")
        if spec.d < 2:
            raise ValueError("orbit mode needs d >= 2")
        R = _restriction_numpy(opts.symmetry, spec.d)
    target = mpmath.mpf(10) ** (-opts.target_digits)
    best = SearchResult(spec, None, mpmath.inf, -1, opts.target_digits)
    for restart in range(opts.restarts):
        rng = np.random.default_rng([opts.seed, restart])
        if opts.orbit:
            cand, derr, its = _run_orbit(spec, opts, R, rng)
        else:
            cand, derr, its = _run_frame(spec, opts, rng)
        polished = cand is not None
        if polished:
            err = frame_error(cand, spec)
        else:
            err = mpmath.mpf(derr)
        best.trace.append(RestartTrace(restart, its, derr, err, polished))
        log.debug("restart %d: descent %.3e after %d its, final %s", restart, derr, its,
                  mpmath.nstr(err, 5))
        if err < best.error:
            best.error, best.restart = err, restart
            best.best = cand
        if opts.stop_at_target and best.error < target:
            break
    return best


def _run_orbit(spec, opts, R, rng):
    k = R.shape[1]
    t = rng.standard_normal(k)
    t /= np.linalg.norm(t)
    t, f, its = _descend_orbit(t, R, opts)
    if f >= opts.newton_try_below:
        return None, f, its
    t, val = _gauss_newton_numpy(t, _orbit_residuals_numpy, R)
    psi = _unpack(R @ t)
    psi = psi / np.linalg.norm(psi)
    f_gn, _ = orbit_objective_numpy(psi)
    if f_gn > 1e-20:
        return None, min(f, f_gn), its
    with workdps(opts.digits):
        fid = FiducialVector.from_entries([complex(x) for x in psi], opts.digits)
    return polish_fiducial(fid, opts.digits, opts.symmetry), f_gn, its


def _run_frame(spec, opts, rng):
    d, N = spec.d, spec.N
    V = rng.standard_normal((N, d)) + 1j * rng.standard_normal((N, d))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    V, f, its = _descend_frame(V, spec, opts)
    if f >= opts.newton_try_below:
        return None, f, its
    x, _ = _gauss_newton_numpy(_pack(V.ravel()),
                               lambda z: _frame_residuals_numpy(z.reshape(N, d), spec))
    V = _unpack(x).reshape(N, d)
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    f_gn, _ = frame_objective_numpy(V, float(spec.c1), float(spec.c2))
    if f_gn > 1e-20:
        return None, min(f, f_gn), its
    vectors = [ComplexVector(tuple(complex(x) for x in row), opts.digits).normalized() for row in V]
    return polish_frame(vectors, spec, opts.digits), f_gn, its
