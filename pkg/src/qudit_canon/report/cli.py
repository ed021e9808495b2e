"""Command line entry point ``qudit-canon``.

Exit codes: 0 all reference cells pass, 1 at least one reference mismatch,
2 usage or configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .. import __version__
from ..core import ATOL_NOISE, RTOL_TABLE, ConvergenceError, DimensionError, NormalizationError, StructureError
from ..metrics import canonical_fraction
from ..states import TruncationError
from .artifacts import FIGURE_IDS, KAPPA_POINTS, TABLE_IDS, ReportArtifact, run_figure, run_table

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (ConvergenceError, NormalizationError, StructureError, TruncationError,
                  ArithmeticError, FloatingPointError)
OUT_ENV = "QUDIT_CANON_OUT"


class ConfigError(ValueError):
    pass


# -- writers ----------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _atomic_write(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


_UNITLESS = {"value", "reference", "rel_error", "tolerance", "kappa", "residual", "defect", "g_3", "g_1/3"}


def artifact_csv(art: ReportArtifact) -> str:
    """CSV text; quantities are dimensionless and labelled with unit ``[1]``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"{c} [1]" if c in _UNITLESS else c for c in art.columns])
    for r in art.rows:
        w.writerow([_fmt(r[c]) for c in art.columns])
    return buf.getvalue()


def artifact_json(art: ReportArtifact) -> str:
    doc = {"kind": art.kind, "id": art.id, "params": art.params, "meta": art.meta,
           "columns": art.columns, "rows": art.rows}
    if art.kind == "table":
        doc["verdicts"] = art.counts()
    return json.dumps(doc, indent=1) + "\n"


def write_artifact(art: ReportArtifact, out_dir: str, fmt: str = "csv") -> str:
    path = os.path.join(out_dir, f"{art.id}.{fmt}")
    _atomic_write(path, artifact_csv(art) if fmt == "csv" else artifact_json(art))
    return path


@dataclass
class RunSummary:
    artifacts: list = field(default_factory=list)
    files: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    @property
    def status(self) -> int:
        if any(isinstance(e, NUMERIC_ERRORS) for e in self.errors.values()):
            return EXIT_NUMERIC
        if self.errors and all(isinstance(e, (ValueError, KeyError)) for e in self.errors.values()):
            return EXIT_USAGE
        if self.errors:
            return EXIT_NUMERIC
        return EXIT_MISMATCH if any(a.kind == "table" and a.failed for a in self.artifacts) else EXIT_OK

    @property
    def verdict(self) -> str:
        return "pass" if self.status == EXIT_OK else "fail"


def write_manifest(summary: RunSummary, out_dir: str) -> str:
    entries = []
    for a in summary.artifacts:
        e = {"id": a.id, "kind": a.kind, "file": os.path.basename(summary.files[a.id]), "params": a.params}
        if a.kind == "table":
            e["verdicts"] = a.counts()
            e["status"] = "fail" if a.failed else "pass"
        entries.append(e)
    for aid, err in summary.errors.items():
        entries.append({"id": aid, "error": f"{type(err).__name__}: {err}"})
    doc = {
        "toolkit": "qudit_canon",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "tolerances": {"atol_noise": ATOL_NOISE, "rtol_table": RTOL_TABLE},
        "summary": {"verdict": summary.verdict, "exit_code": summary.status},
        "artifacts": entries,
    }
    path = os.path.join(out_dir, "manifest.json")
    _atomic_write(path, json.dumps(doc, indent=1) + "\n")
    return path


# -- batch runs -------------------------------------------------------------

DEFAULT_CONFIG = {"tables": list(TABLE_IDS), "figures": list(FIGURE_IDS), "dimension": None,
                  "kappa_points": KAPPA_POINTS, "format": "csv", "out": None}


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse a JSON run configuration and validate its fields."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    cfg = dict(DEFAULT_CONFIG)
    for key, val in raw.items():
        if key not in DEFAULT_CONFIG:
            raise ConfigError(f"{source}: field '{key}': unknown field; expected one of {sorted(DEFAULT_CONFIG)}")
        cfg[key] = val
    for key, allowed in (("tables", TABLE_IDS), ("figures", FIGURE_IDS)):
        if not isinstance(cfg[key], list) or any(x not in allowed for x in cfg[key]):
            raise ConfigError(f"{source}: field '{key}': must be a list drawn from {list(allowed)}")
    d = cfg["dimension"]
    if d is not None:
        if isinstance(d, bool) or not isinstance(d, int) or d < 3 or d % 2 == 0:
            raise ConfigError(f"{source}: field 'dimension': must be an odd integer >= 3, got {d!r}")
    kp = cfg["kappa_points"]
    if isinstance(kp, bool) or not isinstance(kp, int) or kp < 2:
        raise ConfigError(f"{source}: field 'kappa_points': must be an integer >= 2, got {kp!r}")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"{source}: field 'format': must be 'csv' or 'json'")
    if cfg["out"] is not None and not isinstance(cfg["out"], str):
        raise ConfigError(f"{source}: field 'out': must be a string path")
    return cfg


def default_out_dir(explicit: str | None = None) -> str:
    return explicit or os.environ.get(OUT_ENV) or os.path.join(os.getcwd(), "qudit_canon_out")


def run_all(config: dict | None = None, out_dir: str | None = None) -> RunSummary:
    """Run every requested table and figure, write files and the manifest.

    A failing artifact is recorded in the summary; the batch continues.
    """
    cfg = dict(DEFAULT_CONFIG)
    cfg.update(config or {})
    out = default_out_dir(out_dir or cfg["out"])
    summary = RunSummary()
    jobs = [(t, lambda t=t: run_table(t, cfg["dimension"])) for t in cfg["tables"]]
    jobs += [(f, lambda f=f: run_figure(f, cfg["dimension"], kappa_points=cfg["kappa_points"]))
             for f in cfg["figures"]]
    for aid, job in jobs:
        try:
            art = job()
        except Exception as exc:  # recorded per artifact, batch continues
            summary.errors[aid] = exc
            continue
        summary.artifacts.append(art)
        summary.files[aid] = write_artifact(art, out, cfg["format"])
    write_manifest(summary, out)
    return summary


def _print_table_status(art: ReportArtifact, stream) -> None:
    c = art.counts()
    state = "FAIL" if art.failed else "ok"
    print(f"{art.id:4s} {state:4s} pass={c['pass']} noise-floor={c['noise-floor']} "
          f"suspect={c['suspect']} fail={c['fail']} no-reference={c['no-reference']}", file=stream)
    for cell in art.failures():
        print(f"     d={cell.d} {cell.row} {cell.column}: computed {cell.value!r} "
              f"reference {cell.reference!r} rel_error {cell.rel_error}", file=stream)


# -- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qudit-canon", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", help="compute one table")
    t.add_argument("id", choices=TABLE_IDS)
    t.add_argument("--dimension", type=int)
    t.add_argument("--out")
    t.add_argument("--format", choices=("csv", "json"), default="csv")

    f = sub.add_parser("figure", help="compute the data behind one figure")
    f.add_argument("id", choices=FIGURE_IDS)
    f.add_argument("--dimension", type=int)
    f.add_argument("--out")
    f.add_argument("--kappa-min", type=float)
    f.add_argument("--kappa-max", type=float)
    f.add_argument("--kappa-points", type=int, default=KAPPA_POINTS)

    v = sub.add_parser("verify-all", help="run every table and figure and compare with reference values")
    v.add_argument("--config")
    v.add_argument("--out")

    s = sub.add_parser("spectrum", help="count commutator eigenvalues below epsilon")
    s.add_argument("--dimension", type=int, required=True)
    s.add_argument("--epsilon", type=float, required=True)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, DimensionError, KeyError, ValueError) as exc:
        if isinstance(exc, NUMERIC_ERRORS):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"qudit-canon: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def _dispatch(args) -> int:
    if args.command == "spectrum":
        count, frac = canonical_fraction(args.dimension, args.epsilon)
        print(f"d={args.dimension} epsilon={args.epsilon!r} count={count} fraction={frac!r}")
        return EXIT_OK

    if args.command == "verify-all":
        cfg = None
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                cfg = parse_config(fh.read(), args.config)
        summary = run_all(cfg, args.out)
        for art in summary.artifacts:
            if art.kind == "table":
                _print_table_status(art, sys.stdout)
            else:
                print(f"{art.id:4s} ok   rows={len(art.rows)}")
        for aid, err in summary.errors.items():
            print(f"{aid:4s} ERROR {type(err).__name__}: {err}")
        print(f"summary: {summary.verdict} (exit {summary.status})")
        return summary.status

    out = default_out_dir(args.out)
    summary = RunSummary()
    if args.command == "table":
        art = run_table(args.id, args.dimension)
        fmt = args.format
    else:
        art = run_figure(args.id, args.dimension, args.kappa_min, args.kappa_max, args.kappa_points)
        fmt = "csv"
    summary.artifacts.append(art)
    summary.files[art.id] = write_artifact(art, out, fmt)
    write_manifest(summary, out)
    if art.kind == "table":
        _print_table_status(art, sys.stdout)
    print(f"wrote {summary.files[art.id]}")
    return summary.status


if __name__ == "__main__":
    sys.exit(main())
