"""Text file formats (SICDATA 1, SICUNITS 1) and the on-disk fiducial catalog.

Both formats are line oriented: a magic line, ``key = value`` header lines, then
one complex number per line as ``re im`` decimal strings. ``#`` starts a comment.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import mpmath

from . import __version__
from .heisenberg import BASES, FiducialVector
from .hpnum import ComplexVector, DEFAULT_DIGITS, exact_str, workdps

SICDATA_MAGIC = "SICDATA 1"
SICUNITS_MAGIC = "SICUNITS 1"
INDEX_NAME = "index.txt"


class FormatError(ValueError):
    def __init__(self, path, line: int | None, message: str):
        self.path, self.line, self.message = str(path), line, message
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


def _complex_line(x, digits: int) -> str:
    return f"{exact_str(x.real, digits)} {exact_str(x.imag, digits)}"


def _parse(text: str, path, magic: str):
    """Split into (header dict, header line numbers, [(lineno, body line)])."""
    lines = [(k + 1, raw.split("#", 1)[0].strip()) for k, raw in enumerate(text.splitlines())]
    lines = [(k, s) for k, s in lines if s]
    if not lines:
        raise FormatError(path, None, "empty file")
    k0, first = lines[0]
    if first != magic:
        raise FormatError(path, k0, f"expected '{magic}', found '{first}'")
    header, where, body = {}, {}, []
    for k, s in lines[1:]:
        if "=" in s and not body:
            key, _, val = s.partition("=")
            key, val = key.strip(), val.strip()
            if not key:
                raise FormatError(path, k, "empty header key")
            if key in header:
                raise FormatError(path, k, f"duplicate header key '{key}'")
            header[key], where[key] = val, k
        else:
            body.append((k, s))
    return header, where, body


def _int_field(header, where, key, path, required=True):
    if key not in header:
        if required:
            raise FormatError(path, None, f"missing header key '{key}'")
        return None
    try:
        return int(header[key])
    except ValueError:
        raise FormatError(path, where[key], f"'{key}' must be an integer, got '{header[key]}'") from None


def _complex_body(body, count, digits, path):
    if len(body) != count:
        k = body[count][0] if len(body) > count else (body[-1][0] if body else None)
        raise FormatError(path, k, f"expected {count} component lines, found {len(body)}")
    out = []
    with workdps(digits):
        for k, s in body:
            parts = s.split()
            if len(parts) != 2:
                raise FormatError(path, k, f"expected 're im', found '{s}'")
            try:
                out.append(mpmath.mpc(mpmath.mpf(parts[0]), mpmath.mpf(parts[1])))
            except (ValueError, TypeError):
                raise FormatError(path, k, f"not a decimal number pair: '{s}'") from None
    return out


# SICDATA ------------------------------------------------------------------------

def format_sicdata(fid: FiducialVector, source: str, extra: dict | None = None) -> str:
    lines = [SICDATA_MAGIC, f"d = {fid.dim}", f"basis = {fid.basis}", f"digits = {fid.digits}",
             f"source = {source}"]
    for k, v in (extra or {}).items():
        lines.append(f"{k} = {v}")
    lines += [_complex_line(x, fid.digits) for x in fid.vector]
    return "\n".join(lines) + "\n"


def parse_sicdata(text: str, path="<string>", digits: int | None = None):
    """Return (FiducialVector, header). The vector is normalized on read."""
    header, where, body = _parse(text, path, SICDATA_MAGIC)
    d = _int_field(header, where, "d", path)
    if d < 2:
        raise FormatError(path, where["d"], "d must be at least 2")
    stored = _int_field(header, where, "digits", path, required=False) or DEFAULT_DIGITS
    digits = stored if digits is None else digits
    basis = header.get("basis", "standard")
    if basis not in BASES:
        raise FormatError(path, where.get("basis"), f"basis must be one of {BASES}")
    entries = _complex_body(body, d, digits, path)
    with workdps(digits):
        if all(x == 0 for x in entries):
            raise FormatError(path, body[0][0], "zero vector")
    fid = FiducialVector(ComplexVector(tuple(entries), digits).normalized(), basis, True)
    return fid, header


def read_sicdata(path, digits: int | None = None):
    path = Path(path)
    return parse_sicdata(path.read_text(), path, digits)


def write_sicdata(path, fid: FiducialVector, source: str, extra: dict | None = None) -> None:
    Path(path).write_text(format_sicdata(fid, source, extra))


# SICUNITS -----------------------------------------------------------------------

@dataclass
class UnitData:
    d: int
    units: list
    digits: int
    D: int | None = None
    theta: int | None = None
    ell: int | None = None
    minpoly: list | None = None
    provenance: str = "manual"


def format_units(data: UnitData) -> str:
    lines = [SICUNITS_MAGIC, f"d = {data.d}"]
    if data.D is not None:
        lines.append(f"D = {data.D}")
    if data.theta is not None:
        lines.append(f"theta = {data.theta}")
    if data.ell is not None:
        lines.append(f"ell = {data.ell}")
    if data.minpoly is not None:
        lines.append("minpoly = " + ",".join(map(str, data.minpoly)))
    lines += [f"digits = {data.digits}", f"provenance = {data.provenance}"]
    lines += [_complex_line(u, data.digits) for u in data.units]
    return "\n".join(lines) + "\n"


def parse_units(text: str, path="<string>", digits: int | None = None) -> UnitData:
    header, where, body = _parse(text, path, SICUNITS_MAGIC)
    d = _int_field(header, where, "d", path)
    stored = _int_field(header, where, "digits", path, required=False) or DEFAULT_DIGITS
    digits = stored if digits is None else digits
    minpoly = None
    if "minpoly" in header:
        try:
            minpoly = [int(c) for c in header["minpoly"].split(",")]
        except ValueError:
            raise FormatError(path, where["minpoly"], "minpoly must be a comma separated integer list") from None
    if not body:
        raise FormatError(path, None, "no unit lines")
    units = _complex_body(body, len(body), digits, path)
    return UnitData(d, units, digits, _int_field(header, where, "D", path, False),
                    _int_field(header, where, "theta", path, False),
                    _int_field(header, where, "ell", path, False), minpoly,
                    header.get("provenance", "manual"))


def read_units(path, digits: int | None = None) -> UnitData:
    path = Path(path)
    return parse_units(path.read_text(), path, digits)


def write_units(path, data: UnitData) -> None:
    Path(path).write_text(format_units(data))


# shipped data -------------------------------------------------------------------

def shipped_path(name: str) -> Path:
    """Path of a data file shipped with the package, e.g. 'hesse_d3.sic'."""
    return Path(str(resources.files("sicforge") / "data" / name))


# catalog ------------------------------------------------------------------------

@dataclass
class CatalogEntry:
    id: str
    d: int
    source: str
    digits: int
    fiducial: FiducialVector
    certificate: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def header(self) -> dict:
        out = {"id": self.id, "created_by": f"sicforge {__version__}"}
        out.update({f"meta_{k}": v for k, v in self.metadata.items()})
        out.update({f"cert_{k}": v for k, v in self.certificate.items()})
        return out


def entry_id(d: int, source: str, fid: FiducialVector) -> str:
    body = "".join(_complex_line(x, fid.digits) + "\n" for x in fid.vector)
    return f"d{d}-{source}-{hashlib.sha256(body.encode()).hexdigest()[:10]}"


class Catalog:
    """A directory of SICDATA files plus a sorted, tab separated index."""

    def __init__(self, root):
        self.root = Path(root)

    def _index_lines(self) -> list[str]:
        p = self.root / INDEX_NAME
        return p.read_text().splitlines()[1:] if p.exists() else []

    def add(self, fid: FiducialVector, source: str, certificate: dict | None = None,
            metadata: dict | None = None) -> CatalogEntry:
        self.root.mkdir(parents=True, exist_ok=True)
        eid = entry_id(fid.dim, source, fid)
        entry = CatalogEntry(eid, fid.dim, source, fid.digits, fid, dict(certificate or {}),
                             dict(metadata or {}))
        write_sicdata(self.root / f"{eid}.sic", fid, source, entry.header())
        row = "\t".join([eid, str(fid.dim), source, str(fid.digits),
                         str(entry.certificate.get("verdict", "-")),
                         str(entry.certificate.get("max_equiangular_deviation", "-"))])
        rows = {line.split("\t", 1)[0]: line for line in self._index_lines()}
        rows[eid] = row
        text = "id\td\tsource\tdigits\tverdict\tmax_deviation\n" + "".join(
            rows[k] + "\n" for k in sorted(rows))
        (self.root / INDEX_NAME).write_text(text)
        return entry

    def ids(self) -> list[str]:
        return [line.split("\t", 1)[0] for line in self._index_lines()]

    def load(self, eid: str) -> CatalogEntry:
        fid, header = read_sicdata(self.root / f"{eid}.sic")
        cert = {k[5:]: v for k, v in header.items() if k.startswith("cert_")}
        meta = {k[5:]: v for k, v in header.items() if k.startswith("meta_")}
        return CatalogEntry(header.get("id", eid), fid.dim, header.get("source", "import"),
                            fid.digits, fid, cert, meta)
