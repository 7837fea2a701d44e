"""Command-line experiment runner.

    ideal-moments constants --field "Q(sqrt{-1})"
    ideal-moments verify [--field F[,F...]] [--n N] [--selftest-corrupt]
    ideal-moments moment --kind first --field "Q(sqrt{-1})" --x 10,20,40,80 --y-rule "y=x^3"
    ideal-moments cache {build,validate,purge} --field F --max-n N

Settings come from a flat ``key=value`` file (``--config``) and the command
line; flags win.  Exit status: 0 pass, 2 identity failure, 3 resource cap,
4 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path

from . import analytic, arith, moments
from .cache import TableCache, resolve_dir
from .errors import CacheError, ConfigError, ResourceLimitError
from .field import NumberField, REFERENCE_FIELDS, primes_up_to
from .ideals import (
    DEFAULT_MAX_IDEALS,
    DEFAULT_MAX_TABLE_N,
    CoefficientTable,
    enumerate_ideals,
    ideal_count_table,
    rough_count_table,
)

log = logging.getLogger("ideal_moments")

EXIT_OK, EXIT_IDENTITY, EXIT_CAP, EXIT_CONFIG = 0, 2, 3, 4
CSV_COLUMNS = (
    "field", "x", "y", "kind", "empirical", "predicted", "residual",
    "normalized_residual", "regime", "c2", "seed", "runtime_ms",
)
KINDS = ("first", "second", "avg-sigma", "avg-sigma-pair")
DEFAULT_MAX_RUNTIME = 900.0


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    fields: list[NumberField] = dc_field(default_factory=list)
    x: list[int] = dc_field(default_factory=list)
    y: list[int] = dc_field(default_factory=list)
    y_rule: str | None = None
    z: list = dc_field(default_factory=list)
    z1: object = None
    z2: object = None
    kind: str = "first"
    c2: float = 0.5
    regime: str | None = None
    n: int | None = None
    cache_dir: Path | None = None
    out: Path | None = None
    json: Path | None = None
    log_path: Path | None = None
    seed: int = moments.DEFAULT_SEED
    max_n: int = DEFAULT_MAX_TABLE_N
    max_ideals: int = DEFAULT_MAX_IDEALS
    max_runtime: float = DEFAULT_MAX_RUNTIME
    workers: int = 1
    record_runtime: bool = False
    selftest_corrupt: bool = False
    action: str | None = None
    tag: str | None = None
    fields_explicit: bool = False

    def pairs(self) -> list[tuple[int, int | None]]:
        if self.kind in ("avg-sigma", "avg-sigma-pair"):
            return [(x, None) for x in self.x]
        if self.y_rule:
            rule = parse_y_rule(self.y_rule)
            return [(x, rule(x)) for x in self.x]
        if not self.y:
            raise ConfigError("moment kinds first/second need --y or --y-rule")
        return [(x, y) for x in self.x for y in self.y]


_Y_RULE = re.compile(r"^\s*y\s*=\s*(?:([0-9]*\.?[0-9]+)\s*\*\s*)?x\s*(?:\^\s*([0-9]*\.?[0-9]+))?\s*$")


def parse_y_rule(text: str):
    """"y=x^3" or "y=c*x^a" (c, a > 0); returns x -> floor(c x^a)."""
    m = _Y_RULE.match(text)
    if not m:
        raise ConfigError(f"cannot parse y-rule {text!r}; expected 'y=x^a' or 'y=c*x^a'")
    c = Fraction(m.group(1)) if m.group(1) else Fraction(1)
    a = Fraction(m.group(2)) if m.group(2) else Fraction(1)
    if c <= 0 or a <= 0:
        raise ConfigError("y-rule must be increasing in x (c > 0, a > 0)")

    def rule(x: int) -> int:
        if a.denominator == 1:
            return math.floor(c * x ** int(a))
        return math.floor(float(c) * x ** float(a))

    return rule


def _int(text: str, what: str) -> int:
    try:
        v = float(text) if re.search(r"[eE.]", text) else int(text)
    except ValueError:
        raise ConfigError(f"{what}: not an integer: {text!r}") from None
    if isinstance(v, float):
        if not v.is_integer():
            raise ConfigError(f"{what}: not an integer: {text!r}")
        v = int(v)
    return v


def _int_list(text: str, what: str) -> list[int]:
    out = [_int(t.strip(), what) for t in str(text).split(",") if t.strip()]
    if not out or any(v < 1 for v in out):
        raise ConfigError(f"{what}: need positive integers, got {text!r}")
    return out


def parse_z(text: str):
    text = str(text).strip()
    try:
        if "j" in text:
            return complex(text)
        f = Fraction(text)
    except ValueError:
        raise ConfigError(f"cannot parse z value {text!r}") from None
    return int(f) if f.denominator == 1 else float(f)


def _fields(text: str) -> list[NumberField]:
    out = []
    for part in re.split(r"[,;\s]+", text.strip()):
        if not part:
            continue
        try:
            out.append(NumberField.parse(part))
        except (ConfigError, ValueError) as exc:
            raise ConfigError(f"unsupported field {part!r}: {exc}") from None
    if not out:
        raise ConfigError("empty field list")
    return out


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    """Flat key=value file; '#' starts a comment, keys may use '-' or '_'."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


_OPTION_KEYS = (
    "field", "x", "y", "y_rule", "z", "z1", "z2", "kind", "c2", "regime", "n", "cache_dir", "out",
    "json", "log", "seed", "max_n", "max_ideals", "max_runtime", "workers", "record_runtime",
    "selftest_corrupt", "tag",
)


def build_config(args: argparse.Namespace) -> RunConfig:
    file_cfg = read_config_file(args.config) if args.config else {}
    unknown = set(file_cfg) - set(_OPTION_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def get(key, default=None):
        v = getattr(args, key, None)
        if v is not None and v is not False:
            return v
        return file_cfg.get(key, default)

    cfg = RunConfig(command=args.command, action=getattr(args, "action", None))
    fields = get("field")
    if fields:
        cfg.fields = _fields(fields)
        cfg.fields_explicit = True
    elif args.command in ("verify", "cache"):
        cfg.fields = [NumberField.parse(s) for s in REFERENCE_FIELDS]
    else:
        raise ConfigError("--field is required")

    if get("x") is not None:
        cfg.x = _int_list(get("x"), "x")
    if get("y") is not None:
        cfg.y = _int_list(get("y"), "y")
    cfg.y_rule = get("y_rule")
    if cfg.y_rule:
        parse_y_rule(cfg.y_rule)
    if get("z") is not None:
        cfg.z = [parse_z(t) for t in str(get("z")).split(",") if t.strip()]
    if get("z1") is not None:
        cfg.z1 = parse_z(get("z1"))
    if get("z2") is not None:
        cfg.z2 = parse_z(get("z2"))
    kind = get("kind", "first")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}")
    cfg.kind = kind
    c2 = str(get("c2", "0.5"))
    if c2 not in ("1", "0.5", "1.0"):
        raise ConfigError("c2 must be 1 or 0.5")
    cfg.c2 = 0.5 if c2 == "0.5" else 1
    regime = get("regime")
    if regime is not None and regime not in ("below", "above"):
        raise ConfigError("regime must be 'below' or 'above'")
    cfg.regime = regime
    if get("n") is not None:
        cfg.n = _int(str(get("n")), "n")
        if cfg.n < 1:
            raise ConfigError("n must be >= 1")

    cache_dir = getattr(args, "cache_dir", None) or os.environ.get("IDEAL_MOMENTS_CACHE") or file_cfg.get("cache_dir")
    cfg.cache_dir = Path(cache_dir) if cache_dir else None
    for key in ("out", "json"):
        v = get(key)
        setattr(cfg, key, Path(v) if v else None)
    lp = get("log")
    cfg.log_path = Path(lp) if lp else None
    cfg.seed = _int(str(get("seed", moments.DEFAULT_SEED)), "seed")
    cfg.max_n = _int(str(get("max_n", DEFAULT_MAX_TABLE_N)), "max-n")
    cfg.max_ideals = _int(str(get("max_ideals", DEFAULT_MAX_IDEALS)), "max-ideals")
    try:
        cfg.max_runtime = float(get("max_runtime", DEFAULT_MAX_RUNTIME))
    except ValueError:
        raise ConfigError("max-runtime must be a number of seconds") from None
    cfg.workers = _int(str(get("workers", 1)), "workers")
    if min(cfg.max_n, cfg.max_ideals, cfg.workers) < 1 or cfg.max_runtime <= 0:
        raise ConfigError("caps and worker count must be positive")
    cfg.record_runtime = _flag(get("record_runtime", False))
    cfg.selftest_corrupt = _flag(get("selftest_corrupt", False))
    cfg.tag = get("tag")

    for p in (cfg.out, cfg.json, cfg.log_path):
        if p is not None and p.parent and not p.parent.exists():
            raise ConfigError(f"output directory {p.parent} does not exist")

    if args.command == "moment":
        if not cfg.x:
            raise ConfigError("moment needs --x")
        if cfg.kind == "avg-sigma" and not cfg.z:
            raise ConfigError("avg-sigma needs --z")
        if cfg.kind == "avg-sigma-pair" and (cfg.z1 is None or cfg.z2 is None):
            raise ConfigError("avg-sigma-pair needs --z1 and --z2")
        cfg.pairs()
    return cfg


def _flag(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


# ---------------------------------------------------------------------------
# table access (through the cache when one is configured)
# ---------------------------------------------------------------------------


class Tables:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.cache = TableCache(cfg.cache_dir) if cfg.cache_dir else None

    def _get(self, K, tag, N, build):
        if N > self.cfg.max_n:
            raise ResourceLimitError(f"table {tag} for {K} needs N={N} > max-n {self.cfg.max_n}")
        if self.cache is None:
            return build(N)
        return self.cache.get(K, tag, N, build)

    def counts(self, K, N):
        return self._get(K, "a_K", N, lambda n: ideal_count_table(K, n, self.cfg.max_n))

    def moebius(self, K, N):
        return self._get(K, "mu", N, lambda n: arith.moebius_table(K, n, self.cfg.max_n))

    def mertens(self, K, N):
        return self._get(K, "mertens", N, lambda n: self.moebius(K, n).cumulative(tag="mertens"))

    def rough_cumulative(self, K, x, N):
        tag = f"cum(rough(x={x}))"
        return self._get(K, tag, N, lambda n: rough_count_table(K, x, n, self.cfg.max_n).cumulative())

    def sigma(self, K, N, z):
        tag = f"A(z={arith.ZParam.of(z)})"
        return self._get(K, tag, N, lambda n: arith.divisor_coeff_table(K, n, z, self.cfg.max_n))

    def pair(self, K, N, z1, z2):
        tag = f"A(z1={arith.ZParam.of(z1)},z2={arith.ZParam.of(z2)})"
        return self._get(K, tag, N, lambda n: arith.pair_coeff_table(K, n, z1, z2, self.cfg.max_n))


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, complex):
        return repr(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _c2_cell(v) -> str:
    if v is None:
        return ""
    return "1" if v == 1 else "0.5"


def result_row(r: moments.MomentResult, record_runtime: bool) -> list[str]:
    return [
        r.field, _cell(r.x), _cell(r.y), r.kind, _cell(r.empirical), _cell(r.predicted),
        _cell(r.residual), _cell(r.normalized_residual), r.regime, _c2_cell(r.c2), _cell(r.seed),
        _cell(round(r.runtime_ms, 3)) if record_runtime and r.runtime_ms is not None else "",
    ]


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(w) for k, w in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(w) for w in v]
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, complex):
        return {"re": _jsonable(v.real), "im": _jsonable(v.imag)}
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, Path):
        return str(v)
    return v


def result_record(r: moments.MomentResult, record_runtime: bool) -> dict:
    d = asdict(r)
    if not record_runtime:
        d["runtime_ms"] = None
    return _jsonable(d)


def _dump_json(obj, path: Path | None, stream) -> None:
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
    if path is None:
        stream.write(text)
    else:
        path.write_text(text)


class RuntimeLog:
    """Timestamped timing lines kept out of the reproducible outputs."""

    def __init__(self, path: Path | None):
        self.path = path

    def write(self, **fields) -> None:
        fields["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
        line = json.dumps(_jsonable(fields), sort_keys=True)
        if self.path is None:
            log.info("%s", line)
            return
        with self.path.open("a") as fh:
            fh.write(line + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_constants(cfg: RunConfig, stdout=sys.stdout) -> int:
    payload = [analytic.constants(K).to_json() for K in cfg.fields]
    _dump_json(payload[0] if len(payload) == 1 else payload, cfg.out or cfg.json, stdout)
    return EXIT_OK


@dataclass
class VerifyPlan:
    lemma21_norm: int = 200
    lemma21_n: int = 500
    lemma22_n: int = 10_000
    lemma22_z: tuple = (0, 1, 2)
    lemma23_pmax: int = 100
    lemma23_kmax: int = 6


def _plan(cfg: RunConfig) -> VerifyPlan:
    plan = VerifyPlan()
    if cfg.n is not None:
        plan.lemma21_n = plan.lemma22_n = cfg.n
        plan.lemma21_norm = min(plan.lemma21_norm, cfg.n)
    if cfg.z:
        if not all(isinstance(z, int) and z >= 0 for z in cfg.z):
            raise ConfigError("verify needs integer z >= 0 for exact checks")
        plan.lemma22_z = tuple(cfg.z)
    return plan


def _invariants(K: NumberField, bound: int) -> list[arith.VerifyReport]:
    """Two routes to C_J(I) agree, and C_J(I) is multiplicative in J for coprime norms."""
    ideals = enumerate_ideals(K, bound)
    bad, checked = None, 0
    for J in ideals:
        for I in ideals:
            checked += 1
            if arith.ramanujan_sum(J, I, "local") != arith.ramanujan_sum(J, I, "divisor"):
                bad = (J, I)
                break
        if bad:
            break
    reports = [
        arith.VerifyReport(
            f"ramanujan-routes[{K}, norms<={bound}]", bad is None, checked,
            bad[1].norm if bad else None, f"J={bad[0]!r} I={bad[1]!r}" if bad else "",
        )
    ]
    bad, checked = None, 0
    for I in ideals:
        for J1 in ideals:
            for J2 in ideals:
                if J1.norm * J2.norm > bound or math.gcd(J1.norm, J2.norm) != 1:
                    continue
                checked += 1
                if arith.ramanujan_sum(J1 * J2, I) != arith.ramanujan_sum(J1, I) * arith.ramanujan_sum(J2, I):
                    bad = (J1 * J2, I)
                    break
            if bad:
                break
        if bad:
            break
    reports.append(
        arith.VerifyReport(
            f"ramanujan-multiplicative[{K}, norms<={bound}]", bad is None, checked,
            bad[0].norm if bad else None, f"J={bad[0]!r} I={bad[1]!r}" if bad else "",
        )
    )
    return reports


def cmd_verify(cfg: RunConfig, stdout=sys.stdout) -> int:
    plan = _plan(cfg)
    tables = Tables(cfg)
    reports: list[arith.VerifyReport] = []
    if max(plan.lemma21_n, plan.lemma22_n) <= 1:
        log.warning("coefficient range N=%d checks only n=1; the pass is vacuous", max(plan.lemma21_n, plan.lemma22_n))
    for K in cfg.fields:
        big = max(plan.lemma21_n, plan.lemma22_n)
        counts = tables.counts(K, big)
        if cfg.selftest_corrupt:
            counts = _corrupt(counts)
        ideals = enumerate_ideals(K, plan.lemma21_n, cfg.max_ideals)
        c21 = counts if counts.N == plan.lemma21_n else _slice(counts, plan.lemma21_n)
        for I in enumerate_ideals(K, plan.lemma21_norm, cfg.max_ideals):
            rep = arith.verify_lemma21(K, I, plan.lemma21_n, ideals=ideals, counts=c21)
            if not rep.ok or I.is_unit:
                reports.append(rep)
            if not rep.ok:
                break
        else:
            reports.append(arith.VerifyReport(f"lemma21[{K}, all I with N(I)<={plan.lemma21_norm}, N={plan.lemma21_n}]", True, plan.lemma21_n))
        c22 = _slice(counts, plan.lemma22_n)
        for z in plan.lemma22_z:
            table = tables.sigma(K, plan.lemma22_n, z)
            reports.append(arith.verify_lemma22(K, plan.lemma22_n, z, counts=c22, table=table))
        ok23 = True
        for p in primes_up_to(plan.lemma23_pmax):
            rep = arith.verify_lemma23_local(K, int(p), plan.lemma23_kmax)
            if not rep.ok:
                reports.append(rep)
                ok23 = False
        if ok23:
            reports.append(arith.VerifyReport(
                f"lemma23[{K}, p<={plan.lemma23_pmax}, k<={plan.lemma23_kmax}]", True,
                len(primes_up_to(plan.lemma23_pmax)) * (plan.lemma23_kmax + 1)))
        reports.extend(_invariants(K, min(30, max(plan.lemma21_norm, 1))))

    lines = [r.line() for r in reports]
    failed = [r for r in reports if not r.ok]
    lines.append(f"SUMMARY {len(reports) - len(failed)} passed, {len(failed)} failed")
    text = "\n".join(lines) + "\n"
    stdout.write(text)
    if cfg.out:
        cfg.out.write_text(text)
    if cfg.json:
        _dump_json(
            [{"name": r.name, "ok": r.ok, "checked": r.checked, "first_failure": r.first_failure, "detail": r.detail}
             for r in reports],
            cfg.json, stdout,
        )
    return EXIT_IDENTITY if failed else EXIT_OK


def _slice(t: CoefficientTable, N: int) -> CoefficientTable:
    return CoefficientTable(t.field, t.tag, N, t.values[: N + 1].copy())


def _corrupt(t: CoefficientTable) -> CoefficientTable:
    n = min(2, t.N)
    vals = t.values.copy()
    vals[n] += 1
    log.warning("self-test: a_K(%d) of %s changed from %s to %s", n, t.field, t.values[n], vals[n])
    return CoefficientTable(t.field, t.tag, t.N, vals)


def _fit_row(K: NumberField, kind: str, rows: list[moments.MomentResult], seed: int) -> moments.MomentResult | None:
    pts = [(r.x, r.residual) for r in rows if r.residual is not None]
    if len(pts) < 3 or len({x for x, _ in pts}) < 3:
        return None
    slope, intercept, r2 = moments.fit_error_exponent(pts)
    scales = [(r.x, _scale(K, r)) for r in rows if r.residual is not None]
    sslope, _, _ = moments.fit_error_exponent(scales)
    return moments.MomentResult(
        str(K), None, None, f"fit:{kind}", slope, sslope, slope - sslope, r2,
        regime="loglog-vs-x", seed=seed,
    )


def _scale(K: NumberField, r: moments.MomentResult) -> float:
    if r.kind == "first":
        return moments.first_error_scale(r.x, r.y)
    if r.kind == "second":
        return moments.second_error_scale(r.x, r.y)
    if r.kind == "avg-sigma":
        return r.x**0.5
    return r.x ** r.extras.get("error_exponent", 0.5)


def run_moment_rows(cfg: RunConfig, K: NumberField, tables: Tables, emit, deadline: float, runlog: RuntimeLog):
    rows = []
    pairs = cfg.pairs()
    if cfg.kind in ("first", "second"):
        mert = tables.mertens(K, max(x for x, _ in pairs))
        for x, y in pairs:
            if y > cfg.max_n:
                raise ResourceLimitError(f"y={y} exceeds max-n {cfg.max_n}")
            tabs = {"mertens": mert, "rough": tables.rough_cumulative(K, x, y)}
            if cfg.kind == "first":
                r = moments.first_moment(K, x, y, cfg.workers, cfg.seed, tables=tabs)
            else:
                r = moments.second_moment(K, x, y, cfg.regime, cfg.c2, cfg.workers, cfg.seed, tables=tabs)
            rows.append(r)
            emit(r)
            runlog.write(field=str(K), kind=r.kind, x=x, y=y, runtime_ms=r.runtime_ms)
            if time.monotonic() > deadline:
                raise ResourceLimitError(f"runtime cap of {cfg.max_runtime:g}s reached")
    else:
        X = max(x for x, _ in pairs)
        zs = cfg.z if cfg.kind == "avg-sigma" else [(cfg.z1, cfg.z2)]
        for z in zs:
            table = tables.sigma(K, X, z) if cfg.kind == "avg-sigma" else tables.pair(K, X, *z)
            for x, _ in pairs:
                if cfg.kind == "avg-sigma":
                    r = moments.avg_sigma_result(K, x, z, cfg.seed, table=table)
                else:
                    r = moments.avg_sigma_pair_result(K, x, z[0], z[1], cfg.seed, table=table)
                rows.append(r)
                emit(r)
                runlog.write(field=str(K), kind=r.kind, x=x, runtime_ms=r.runtime_ms)
                if time.monotonic() > deadline:
                    raise ResourceLimitError(f"runtime cap of {cfg.max_runtime:g}s reached")
    return rows


def cmd_moment(cfg: RunConfig, stdout=sys.stdout) -> int:
    tables = Tables(cfg)
    deadline = time.monotonic() + cfg.max_runtime
    runlog = RuntimeLog(cfg.log_path or (cfg.out.with_name(cfg.out.name + ".log") if cfg.out else None))
    records = []
    if cfg.out is not None:
        new = not cfg.out.exists() or cfg.out.stat().st_size == 0
        fh = cfg.out.open("a", newline="")
    else:
        new, fh = True, stdout
    writer = csv.writer(fh, lineterminator="\n")
    if new:
        writer.writerow(CSV_COLUMNS)

    def emit(r):
        writer.writerow(result_row(r, cfg.record_runtime))
        fh.flush()
        records.append(result_record(r, cfg.record_runtime))

    try:
        for K in cfg.fields:
            rows = run_moment_rows(cfg, K, tables, emit, deadline, runlog)
            groups: dict = {}
            for r in rows:
                groups.setdefault(r.regime if r.kind.startswith("avg") else "", []).append(r)
            for group in groups.values():
                fit = _fit_row(K, cfg.kind, group, cfg.seed)
                if fit is not None:
                    emit(fit)
    finally:
        if fh is not stdout:
            fh.close()
        if cfg.json:
            _dump_json(records, cfg.json, stdout)
    return EXIT_OK


def cmd_cache(cfg: RunConfig, stdout=sys.stdout) -> int:
    root = cfg.cache_dir or resolve_dir()
    cache = TableCache(root)
    if cfg.action == "purge":
        fields = cfg.fields if cfg.fields_explicit else [None]
        count = sum(cache.purge(K, cfg.tag) for K in fields)
        stdout.write(f"purged {count} file(s) from {root}\n")
        return EXIT_OK
    if cfg.action == "validate":
        bad = 0
        for path, err in cache.validate():
            stdout.write(f"{'FAIL' if err else 'ok  '} {path.name}{': ' + err if err else ''}\n")
            bad += err is not None
        return EXIT_IDENTITY if bad else EXIT_OK
    N = cfg.n or 10_000
    cfg.cache_dir = root
    tables = Tables(cfg)
    for K in cfg.fields:
        built = [tables.counts(K, N), tables.moebius(K, N), tables.mertens(K, N)]
        for z in cfg.z:
            built.append(tables.sigma(K, N, z))
        for t in built:
            stdout.write(f"built {K} {t.tag} N={t.N}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", help='descriptor such as Q, "Q(sqrt{-1})", "Q(zeta{5})"; comma-separated list allowed')
    common.add_argument("--config", help="flat key=value settings file (flags win)")
    common.add_argument("--cache-dir", help="table cache directory (env IDEAL_MOMENTS_CACHE)")
    common.add_argument("--out", help="output path (CSV for moment, text for verify, JSON for constants)")
    common.add_argument("--json", help="JSON mirror of the report")
    common.add_argument("--log", help="separate log for timings (default <out>.log)")
    common.add_argument("--seed", type=str)
    common.add_argument("--max-n", type=str, help="largest coefficient table to build")
    common.add_argument("--max-ideals", type=str, help="largest explicit ideal enumeration")
    common.add_argument("--max-runtime", type=str, help="seconds per command")
    common.add_argument("--workers", type=str, help="worker processes for moment sums")
    common.add_argument("--n", type=str, help="coefficient range (verify) or table size (cache build)")
    common.add_argument("--z", help="z value(s), comma-separated")

    p = _Parser(prog="ideal-moments", description="Moments of Ramanujan sums over number fields.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("constants", parents=[common], help="dump analytic constants as JSON")

    v = sub.add_parser("verify", parents=[common], help="exact Dirichlet-series identity suites")
    v.add_argument("--selftest-corrupt", action="store_true", help="flip one a_K entry to test failure reporting")

    m = sub.add_parser("moment", parents=[common], help="moment experiments, one CSV row per grid point")
    m.add_argument("--kind", choices=KINDS)
    m.add_argument("--x", help="comma-separated x values")
    m.add_argument("--y", help="comma-separated y values (grid with x)")
    m.add_argument("--y-rule", help='y as a function of x, e.g. "y=x^3" or "y=2*x^2.5"')
    m.add_argument("--z1")
    m.add_argument("--z2")
    m.add_argument("--c2", choices=("1", "0.5"))
    m.add_argument("--regime", choices=("below", "above"))
    m.add_argument("--record-runtime", action="store_true", help="fill runtime_ms (breaks byte-identical reruns)")

    c = sub.add_parser("cache", parents=[common], help="build, validate or purge cached tables")
    c.add_argument("action", choices=("build", "validate", "purge"))
    c.add_argument("--tag", help="restrict purge to one table tag")
    return p


def main(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.INFO)
        cfg = build_config(args)
        cmd = {"constants": cmd_constants, "verify": cmd_verify, "moment": cmd_moment, "cache": cmd_cache}
        return cmd[args.command](cfg, stdout)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        log.error("resource cap: %s", exc)
        return EXIT_CAP
    except CacheError as exc:
        log.error("cache error: %s", exc)
        return EXIT_IDENTITY


if __name__ == "__main__":
    sys.exit(main())
