"""Command-line surface: `axisiga {pillbox,source,exactness,info}`.

Configuration comes from an optional key=value text file (see README) plus
command-line flag overrides; outputs are a CSV of measurement rows, a JSON
summary and a plain-text rate table.  Exit codes: 0 success, 1 validation
failure, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .solve import SolveError
from .studies import RUNNERS, StudyConfig, StudyError

_LIST_FIELDS = {"degrees", "subdivisions", "modes"}
_FLOAT_FIELDS = {"eps", "mu", "gamma", "radius", "length"}
_INT_FIELDS = {"eigs", "seed"}
_BOOL_FIELDS = {"sequential"}


def _parse_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise StudyError(f"config file not found: {path}")
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, _, val = line.partition("=")
            else:
                key, _, val = line.partition(" ")
            key, val = key.strip(), val.strip()
            if not key or not val:
                raise StudyError(f"{path}:{lineno}: malformed line {raw!r}")
            values[key] = val
    return values


def _coerce(key: str, val):
    if isinstance(val, str):
        if key in _LIST_FIELDS:
            return tuple(int(t) for t in val.replace(",", " ").split())
        if key in _FLOAT_FIELDS:
            return float(val)
        if key in _INT_FIELDS:
            return int(val)
        if key in _BOOL_FIELDS:
            return val.lower() in ("1", "true", "yes")
    return val


def _make_config(study: str, args) -> StudyConfig:
    values: dict = {}
    if args.config:
        values.update(_parse_config_file(args.config))
    for key in ("degrees", "subdivisions", "modes", "gamma", "eigs",
                "geometry", "out", "target", "radius", "length", "seed"):
        v = getattr(args, key, None)
        if v is not None:
            values["out_dir" if key == "out" else key] = v
    if args.sequential:
        values["sequential"] = True
    cfg = StudyConfig(study=study)
    for key, val in values.items():
        if not hasattr(cfg, key):
            raise StudyError(f"config: unknown field {key!r}")
        setattr(cfg, key, _coerce(key, val))
    cfg.validate()
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="axisiga",
        description="Fourier-spectral x isogeometric Maxwell benchmarks "
                    "on axisymmetric domains")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (
            ("pillbox", "cavity eigenvalue study against analytic frequencies"),
            ("source", "manufactured-solution magnetostatic convergence study"),
            ("exactness", "discrete de Rham exactness suite"),
            ("info", "print version and configuration schema")):
        p = sub.add_parser(name, help=help_)
        if name == "info":
            continue
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--out", help="output directory for CSV/JSON")
        p.add_argument("--sequential", action="store_true",
                       help="deterministic sequential execution")
        p.add_argument("--degrees", help="comma list, e.g. 2,3")
        p.add_argument("--subdivisions", help="comma list, e.g. 4,8,16")
        p.add_argument("--modes", help="comma list of signed modes, e.g. 1,-2")
        p.add_argument("--gamma", type=float,
                       help="manufactured-solution regularity parameter")
        p.add_argument("--eigs", type=int, help="number of eigenvalues")
        p.add_argument("--geometry",
                       help="builtin name or geometry file path")
        p.add_argument("--target",
                       help="pillbox rate target as kind,n,q (e.g. TE,3,4)")
        p.add_argument("--radius", type=float, help="cavity radius (m)")
        p.add_argument("--length", type=float, help="cavity length (m)")
        p.add_argument("--seed", type=int, help="random seed")
    return ap


_INFO = """axisiga: compatible B-spline discretization of axisymmetric Maxwell problems

subcommands: pillbox, source, exactness (see --help of each)

config file schema (key = value per line, '#' comments):
  study          pillbox | source | exactness
  geometry       builtin (rectangle, pillbox-section, quarter-annulus) or file path
  degrees        comma/space list of spline degrees, e.g. 2,3
  subdivisions   comma/space list of uniform subdivisions, e.g. 4,8,16
  modes          comma/space list of nonzero signed Fourier modes
  eps, mu        material constants (default: vacuum)
  eigs           number of eigenvalues (pillbox)
  target         pillbox rate target, kind,n,q (e.g. TE,3,4)
  gamma          manufactured-solution parameter (source)
  radius, length pillbox cavity dimensions in meters
  seed           random seed recorded in reports
  sequential     true for deterministic ordering
  out_dir        output directory
"""


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "info":
        print(_INFO)
        return 0
    try:
        config = _make_config(args.command, args)
    except (StudyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        report = RUNNERS[args.command](config)
    except (SolveError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except StudyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = config.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, config.study)
    report.write_csv(base + ".csv")
    report.write_json(base + ".json")
    table = report.rate_table()
    with open(base + "_rates.txt", "w") as fh:
        fh.write(table + "\n")
    print(f"wrote {base}.csv ({len(report.rows)} rows)")
    if table.count("\n"):
        print(table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
