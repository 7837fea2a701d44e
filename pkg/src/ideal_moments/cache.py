"""Line-oriented text cache for coefficient tables.

Layout::

    #ideal-moments-cache v1 field=<descriptor> table=<tag> N=<N>
    1,<value>
    ...
    N,<value>
    #crc=<16 hex digits>

The trailer is a 64-bit BLAKE2b digest of every byte before it.
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import CacheError
from .field import NumberField
from .ideals import CoefficientTable

log = logging.getLogger(__name__)

ENV_VAR = "IDEAL_MOMENTS_CACHE"
DEFAULT_DIR = ".ideal-moments-cache"
MAGIC = "#ideal-moments-cache v1"
_HEADER = re.compile(r"^#ideal-moments-cache v1 field=(\S+) table=(\S+) N=(\d+)$")


def checksum(data: bytes) -> str:
    return hashlib.blake2b(data, digest_size=8).hexdigest()


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v))
    return repr(float(v))


def _parse(s: str):
    if "j" in s:
        return complex(s)
    if "/" in s:
        return Fraction(s)
    if any(c in s for c in ".eEn"):
        return float(s)
    return int(s)


def dumps(table: CoefficientTable) -> str:
    lines = [f"{MAGIC} field={table.field} table={table.tag} N={table.N}"]
    vals = table.values
    lines.extend(f"{n},{_fmt(vals[n])}" for n in range(1, table.N + 1))
    body = "\n".join(lines) + "\n"
    return body + f"#crc={checksum(body.encode())}\n"


def loads(text: str) -> CoefficientTable:
    body, sep, trailer = text.rstrip("\n").rpartition("\n#crc=")
    if not sep:
        raise CacheError("missing checksum trailer")
    body += "\n"
    if checksum(body.encode()) != trailer.strip():
        raise CacheError("checksum mismatch")
    lines = body.splitlines()
    m = _HEADER.match(lines[0])
    if not m:
        raise CacheError(f"bad header {lines[0]!r}")
    field, tag, N = NumberField.parse(m.group(1)), m.group(2), int(m.group(3))
    if len(lines) != N + 1:
        raise CacheError(f"expected {N} data lines, found {len(lines) - 1}")
    parsed = []
    for i, line in enumerate(lines[1:], start=1):
        n, _, v = line.partition(",")
        if int(n) != i:
            raise CacheError(f"line {i} has index {n}")
        parsed.append(_parse(v))
    kinds = {type(v) for v in parsed}
    if kinds <= {int}:
        wide = any(abs(v) >= 2**62 for v in parsed)
        dtype = object if wide else np.int64
    elif complex in kinds:
        dtype = np.complex128
    elif float in kinds:
        dtype = np.float64
    else:
        dtype = object
    values = np.empty(N + 1, dtype=dtype)
    values[0] = 0
    values[1:] = parsed
    return CoefficientTable(field, tag, N, values)


def write_table(path: str | os.PathLike, table: CoefficientTable) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(dumps(table))
    tmp.replace(path)
    return path


def read_table(path: str | os.PathLike) -> CoefficientTable:
    return loads(Path(path).read_text())


def _slug(s: str) -> str:
    return re.sub(r"[^A-Za-z0-9=.-]+", "_", s).strip("_")


def resolve_dir(explicit: str | None = None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(ENV_VAR) or DEFAULT_DIR)


class TableCache:
    """Directory of cached tables keyed by (field, tag); a larger N serves smaller requests."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)

    def path_for(self, field: NumberField, tag: str, N: int) -> Path:
        return self.root / f"{_slug(str(field))}__{_slug(tag)}__N{N}.txt"

    def _candidates(self, field: NumberField, tag: str):
        prefix = f"{_slug(str(field))}__{_slug(tag)}__N"
        if not self.root.is_dir():
            return []
        out = []
        for p in self.root.glob(prefix + "*.txt"):
            rest = p.name[len(prefix) : -4]
            if rest.isdigit():
                out.append((int(rest), p))
        return sorted(out)

    def get(self, field: NumberField, tag: str, N: int, build: Callable[[int], CoefficientTable]) -> CoefficientTable:
        for size, path in self._candidates(field, tag):
            if size < N:
                continue
            try:
                table = read_table(path)
            except CacheError as exc:
                log.warning("cache file %s rejected (%s); rebuilding", path, exc)
                path.unlink(missing_ok=True)
                continue
            if str(table.field) != str(field) or table.tag != tag:
                log.warning("cache file %s has mismatched header; rebuilding", path)
                continue
            return _truncate(table, N)
        table = build(N)
        write_table(self.path_for(field, tag, N), table)
        return table

    def validate(self) -> list[tuple[Path, str | None]]:
        """(path, error or None) for every cache file in the directory."""
        out = []
        for path in sorted(self.root.glob("*.txt")) if self.root.is_dir() else []:
            try:
                read_table(path)
                out.append((path, None))
            except (CacheError, ValueError) as exc:
                out.append((path, str(exc)))
        return out

    def purge(self, field: NumberField | None = None, tag: str | None = None) -> int:
        count = 0
        if not self.root.is_dir():
            return 0
        for path in self.root.glob("*.txt"):
            parts = path.name[:-4].split("__")
            if len(parts) != 3:
                continue
            if field is not None and parts[0] != _slug(str(field)):
                continue
            if tag is not None and parts[1] != _slug(tag):
                continue
            path.unlink()
            count += 1
        return count


def _truncate(table: CoefficientTable, N: int) -> CoefficientTable:
    if table.N == N:
        return table
    return CoefficientTable(table.field, table.tag, N, table.values[: N + 1].copy())
