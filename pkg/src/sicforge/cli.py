"""Command line entry point: ``sicforge <command> ...``.

Exit codes: 0 pass, 1 verified failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import mpmath

from .catalog import (Catalog, FormatError, UnitData, read_sicdata, read_units, write_sicdata,
                      write_units)
from .etf_search import EtfSpec, SearchOptions, search
from .fingerprint import FingerprintError, fingerprint
from .heisenberg import FiducialVector
from .hpnum import MIN_DIGITS, fmt
from .quadfield import (class_number, dimension_form, fundamental_unit, magical_D, ray_class_order,
                        split_dimension)
from .stark_construct import UnitCandidateSet, construct_search, roundtrip
from .verifier import verify_etf, verify_sic

ENV_DIGITS = "SICFORGE_DIGITS"
EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
PLATEAU = 1e-4


class UsageError(Exception):
    pass


def resolve_digits(flag: int | None, default: int) -> int:
    """--digits wins over SICFORGE_DIGITS, which wins over the command default."""
    if flag is not None:
        digits = flag
    elif os.environ.get(ENV_DIGITS):
        try:
            digits = int(os.environ[ENV_DIGITS])
        except ValueError:
            raise UsageError(f"{ENV_DIGITS}={os.environ[ENV_DIGITS]!r} is not an integer") from None
    else:
        digits = default
    if digits < MIN_DIGITS:
        raise UsageError(f"precision must be at least {MIN_DIGITS} digits, got {digits}")
    return digits


def _kv(fields: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in fields.items())


# commands ------------------------------------------------------------------------

def cmd_search(args, out) -> int:
    digits = resolve_digits(args.digits, 40)
    N = args.n if args.n is not None else args.d * args.d
    try:
        spec = EtfSpec(args.d, N)
        opts = SearchOptions(restarts=args.restarts, seed=args.seed, orbit=args.orbit, digits=digits,
                             target_digits=args.target, stop_at_target=not args.all_restarts)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.orbit and not spec.is_sic:
        raise UsageError("--orbit needs N = d^2")
    res = search(spec, opts)
    out.write(f"search d={spec.d} N={spec.N} mode={'orbit' if args.orbit else 'frame'} "
              f"seed={args.seed} restarts={args.restarts} digits={digits}\n")
    out.write("restart  iterations  descent_error  final_error  polished\n")
    for t in res.trace:
        out.write(f"{t.restart:7d}  {t.iterations:10d}  {t.descent_error:13.4e}  {fmt(t.error):>11}  "
                  f"{'yes' if t.polished else 'no'}\n")
    out.write(f"best_restart = {res.restart}\nbest_error = {fmt(res.error)}\n"
              f"target = 1e-{opts.target_digits}\n")
    if not res.converged:
        if res.error > PLATEAU:
            out.write(f"plateau: best error {fmt(res.error)} stays above {PLATEAU:g} over "
                      f"{len(res.trace)} restarts\n")
        out.write("verdict = fail\n")
        return EXIT_FAIL
    if spec.is_sic and isinstance(res.best, FiducialVector):
        cert = verify_sic(res.best)
        out.write(cert.to_text())
        meta = {"seed": args.seed, "restarts": args.restarts, "mode": "orbit"}
        if args.out:
            write_sicdata(args.out, res.best, "search", {f"meta_{k}": v for k, v in meta.items()})
        if args.catalog:
            entry = Catalog(args.catalog).add(res.best, "search", cert.fields(), meta)
            out.write(f"catalog_id = {entry.id}\n")
    else:
        cert = verify_etf(res.best, spec)
        out.write(cert.to_text())
    return EXIT_PASS if cert.passed else EXIT_FAIL


def _load_fiducial(path, digits_flag):
    digits = None if digits_flag is None else resolve_digits(digits_flag, 60)
    if digits is None and os.environ.get(ENV_DIGITS):
        digits = resolve_digits(None, 60)
    return read_sicdata(path, digits)


def cmd_verify(args, out) -> int:
    fid, header = _load_fiducial(args.infile, args.digits)
    cert = verify_sic(fid, args.tol)
    out.write(f"file = {Path(args.infile).name}\n")
    out.write(cert.to_text())
    return EXIT_PASS if cert.passed else EXIT_FAIL


def cmd_fingerprint(args, out) -> int:
    fid, _ = _load_fiducial(args.infile, args.digits)
    try:
        rep = fingerprint(fid, theta=args.theta)
    except FingerprintError as exc:
        out.write(f"fingerprint failed: {exc}\nverdict = fail\n")
        return EXIT_FAIL
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out.write(f"d = {rep.d}\n")
    out.write(_kv(rep.summary()))
    for j in range(1, rep.d):
        u = rep.phase(j)
        out.write(f"u[{j}] = {mpmath.nstr(u.real, 20)} {mpmath.nstr(u.imag, 20)}\n")
    ok = rep.is_unit is not False
    out.write(f"verdict = {'pass' if ok else 'fail'}\n")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_construct(args, out) -> int:
    digits = None if args.digits is None and not os.environ.get(ENV_DIGITS) else resolve_digits(args.digits, 60)
    data = read_units(args.units, digits)
    try:
        cands = UnitCandidateSet(data.d, tuple(data.units), data.digits, data.D, data.theta, data.ell,
                                 data.minpoly, data.provenance)
        res = construct_search(cands, args.tol, theta=args.theta, sign=args.sign,
                               full_permutations=args.all_permutations)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out.write(f"construct d={data.d} units={len(data.units)} digits={data.digits}\n")
    out.write(_kv(res.summary()))
    if res.certificate is not None:
        out.write(res.certificate.to_text())
    if res.passed and args.out:
        write_sicdata(args.out, res.fiducial, "construct",
                      {"meta_theta": res.theta, "meta_sign": res.sign, "meta_ordering": res.ordering})
    if res.passed and args.catalog:
        entry = Catalog(args.catalog).add(res.fiducial, "construct", res.certificate.fields(),
                                          {"theta": res.theta, "sign": res.sign, "ordering": res.ordering})
        out.write(f"catalog_id = {entry.id}\n")
    return EXIT_PASS if res.passed else EXIT_FAIL


def cmd_roundtrip(args, out) -> int:
    digits = resolve_digits(args.digits, 100)
    try:
        rep = roundtrip(args.d, digits=digits, seed=args.seed, restarts=args.restarts, tol_digits=args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out.write(rep.table(timings=args.timings))
    if rep.passed and args.units_out:
        fp = rep.fingerprint
        write_units(args.units_out, UnitData(args.d, fp.independent(), digits, magical_D(args.d), fp.theta,
                                             rep.ell, fp.minpoly, "roundtrip"))
    return EXIT_PASS if rep.passed else EXIT_FAIL


def numtheory_row(d: int) -> dict:
    form = dimension_form(d)
    if not form.is_form:
        return {"d": d, "form": "no"}
    row = {"d": d, "form": "yes", "n": form.n, "prime": "yes" if form.is_prime else "no",
           "factorization": form.factorization(),
           "primes_1_mod_3": "yes" if form.primes_one_mod_three else "no"}
    D = magical_D(d)
    eps, norm = fundamental_unit(D)
    outer, inner = split_dimension(d)
    prod = outer.generator * inner.generator
    row.update({"D": D, "unit": str(eps), "unit_norm": norm, "h": class_number(D),
                "split": f"({outer.generator})({inner.generator})={prod}",
                "split_ok": "yes" if prod.a == d and prod.b == 0 else "no"})
    if form.is_prime:
        rc = ray_class_order(d)
        row.update({"ray_order": rc.order, "ell": str(rc.ell)})
    else:
        row.update({"ray_order": "-", "ell": "-"})
    return row


NT_COLUMNS = ["n", "d", "prime", "factorization", "primes_1_mod_3", "D", "unit", "unit_norm", "h",
              "split", "split_ok", "ray_order", "ell"]


def format_numtheory(rows: list[dict]) -> str:
    table = [NT_COLUMNS]
    for r in rows:
        if r["form"] == "no":
            table.append([str(r["d"]) + " (not n^2+3)" if c == "d" else "-" for c in NT_COLUMNS])
        else:
            table.append([str(r[c]) for c in NT_COLUMNS])
    widths = [max(len(row[k]) for row in table) for k in range(len(NT_COLUMNS))]
    return "".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() + "\n"
                   for row in table)


def _parse_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        a, b = int(lo), int(hi)
    except ValueError:
        raise UsageError(f"--range expects N1..N2, got {text!r}") from None
    if not sep or a < 1 or b < a:
        raise UsageError(f"--range expects 1 <= N1 <= N2, got {text!r}")
    return a, b


def cmd_numtheory(args, out) -> int:
    if args.d is not None:
        if args.d < 4:
            raise UsageError(f"d={args.d}: degenerate dimension, need d >= 4")
        ds = [args.d]
    else:
        a, b = _parse_range(args.range)
        ds = [n * n + 3 for n in range(a, b + 1)]
    out.write(format_numtheory([numtheory_row(d) for d in ds]))
    return EXIT_PASS


# parser --------------------------------------------------------------------------

def _sign(text: str) -> int:
    if text in ("1", "+1", "+"):
        return 1
    if text in ("-1", "-"):
        return -1
    raise argparse.ArgumentTypeError("sign must be +1 or -1")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sicforge", description="SIC fiducial search, verification and construction")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("search", help="numerical ETF / SIC fiducial search")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n", type=int, help="number of vectors (default d^2)")
    s.add_argument("--orbit", action="store_true", help="search a single fiducial (needs N = d^2)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--restarts", type=int, default=20)
    s.add_argument("--target", type=int, default=24, help="success when error < 1e-TARGET")
    s.add_argument("--all-restarts", action="store_true", help="do not stop at the first success")
    s.add_argument("--digits", type=int)
    s.add_argument("--out", help="write the fiducial as SICDATA")
    s.add_argument("--catalog", help="catalog directory to add the fiducial to")
    s.set_defaults(func=cmd_search)

    v = sub.add_parser("verify", help="certify a SICDATA file")
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument("--tol", type=int, help="pass when deviations < 1e-TOL (default digits-20)")
    v.add_argument("--digits", type=int)
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fingerprint", help="almost flat form, phases and minimal polynomials")
    f.add_argument("--in", dest="infile", required=True)
    f.add_argument("--theta", type=int)
    f.add_argument("--digits", type=int)
    f.set_defaults(func=cmd_fingerprint)

    c = sub.add_parser("construct", help="build and certify a fiducial from unit data")
    c.add_argument("--units", required=True)
    c.add_argument("--theta", type=int)
    c.add_argument("--sign", type=_sign)
    c.add_argument("--tol", type=int, default=20)
    c.add_argument("--all-permutations", action="store_true")
    c.add_argument("--digits", type=int)
    c.add_argument("--out")
    c.add_argument("--catalog")
    c.set_defaults(func=cmd_construct)

    r = sub.add_parser("roundtrip", help="search -> fingerprint -> construct self-consistency run")
    r.add_argument("--d", type=int, required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--restarts", type=int, default=20)
    r.add_argument("--tol", type=int, default=20)
    r.add_argument("--digits", type=int)
    r.add_argument("--timings", action="store_true")
    r.add_argument("--units-out", help="write the extracted unit data as SICUNITS")
    r.set_defaults(func=cmd_roundtrip)

    n = sub.add_parser("numtheory", help="quadratic field data for d = n^2 + 3")
    g = n.add_mutually_exclusive_group(required=True)
    g.add_argument("--d", type=int)
    g.add_argument("--range", help="N1..N2, the range of n")
    n.set_defaults(func=cmd_numtheory)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args, out)
    except (UsageError, FormatError, FileNotFoundError) as exc:
        sys.stderr.write(f"sicforge: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
