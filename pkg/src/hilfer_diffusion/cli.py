"""Command-line interface: curve tables and the validation suite.

A run is described by one JSON file::

    {
      "model": {"kind": "twoterm", "a": 0.5, "b": 0.5, "mu1": 0.75, ...},
      "grid": "1e-4:1e4:81:log",
      "t": 1.0,
      "tolerances": {"series": {"rel_tol": 1e-13}, "talbot": {"node_count": 24}}
    }

``model.kind`` is one of ``twoterm``, ``uniform`` or ``harmonic`` (the
latter with a nested ``base`` two-term model).  Scalar fields can be
overridden with ``--set path=value``.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, fields
from typing import Any

import numpy as np

from .errors import HilferDiffusionError, ModelError, NumericalError
from .fps import HarmonicModel, first_moment, relax_mode, second_moment_harmonic
from .mlf import DEFAULT_POLICY, MLParams, SeriesPolicy, ml3
from .oracle import CosineQuadConfig, TalbotConfig
from .twoterm import (
    TwoTermModel,
    nonnegativity_check,
    pdf,
    pdf_hseries,
    second_moment,
    zeroth_moment,
)
from .uniform import UniformModel, msd_long_asymptote, msd_short_asymptote, msd_time
from .validation import Tolerances, run_suite

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
COMMANDS = ("msd", "pdf", "norm", "relax", "harmonic", "mlf", "validate")
_DEFAULT_GRIDS = {
    "msd": "1e-4:1e4:81:log",
    "pdf": "-5:5:101:lin",
    "norm": "1e-2:1e2:41:log",
    "relax": "1e-3:1e3:61:log",
    "harmonic": "1e-2:1e4:61:log",
    "mlf": "-10:0:101:lin",
}


class ConfigError(HilferDiffusionError, ValueError):
    """Invalid run configuration; ``errors`` holds ``(field, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{f}: {m}" for f, m in self.errors))


@dataclass(frozen=True)
class GridSpec:
    """Evaluation points ``start:stop:count:spacing``."""

    start: float
    stop: float
    count: int
    #: ``log`` or ``lin``.
    spacing: str = "log"

    def __post_init__(self) -> None:
        bad = []
        if self.count < 2:
            bad.append(("grid.count", f"must be >= 2, got {self.count}"))
        if self.spacing not in ("log", "lin"):
            bad.append(("grid.spacing", f"must be 'log' or 'lin', got {self.spacing!r}"))
        elif self.spacing == "log" and not (self.start > 0 and self.stop > 0):
            bad.append(("grid", "log grids need positive bounds"))
        if bad:
            raise ConfigError(bad)

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise ConfigError([("grid", f"expected start:stop:count[:log|lin], got {text!r}")])
        try:
            return cls(float(parts[0]), float(parts[1]), int(parts[2]), parts[3] if len(parts) == 4 else "log")
        except ValueError as exc:
            raise ConfigError([("grid", str(exc))]) from exc

    def points(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    def text(self) -> str:
        return f"{self.start!r}:{self.stop!r}:{self.count}:{self.spacing}"


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration of one command."""

    model: Any
    grid: GridSpec
    tolerances: Tolerances
    #: Raw mapping after overrides; hashed into every table header.
    raw: dict
    fmt: str = "csv"
    out: str | None = None

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.raw, sort_keys=True).encode()).hexdigest()

    def get(self, key: str, default=None):
        return self.raw.get(key, default)


# ----------------------------------------------------------------- parsing


def _build(cls, data: dict, prefix: str, skip=()):
    known = {f.name for f in fields(cls)} - set(skip)
    unknown = sorted(set(data) - known - {"kind"})
    if unknown:
        raise ConfigError([(f"{prefix}.{k}", "unknown field") for k in unknown])
    kwargs = {k: v for k, v in data.items() if k in known}
    try:
        return cls(**kwargs)
    except ModelError as exc:
        raise ConfigError([(f"{prefix}.{f}", m) for f, m in exc.violations]) from exc
    except HilferDiffusionError as exc:
        raise ConfigError([(prefix, str(exc))]) from exc
    except TypeError as exc:
        raise ConfigError([(prefix, str(exc))]) from exc


def parse_model(data: dict | None):
    """Model from its JSON mapping, dispatched on ``kind``."""
    if data is None:
        return None
    if not isinstance(data, dict):
        raise ConfigError([("model", "must be an object")])
    kind = data.get("kind")
    if kind == "twoterm":
        return _build(TwoTermModel, data, "model")
    if kind == "uniform":
        return _build(UniformModel, data, "model")
    if kind == "harmonic":
        if not isinstance(data.get("base"), dict):
            raise ConfigError([("model.base", "harmonic models need a two-term 'base' object")])
        base = _build(TwoTermModel, data["base"], "model.base")
        rest = {k: v for k, v in data.items() if k not in ("base", "einstein")}
        if data.get("einstein"):
            if "kBT" in rest:
                raise ConfigError([("model.kBT", "give either kBT or einstein, not both")])
            rest["kBT"] = rest.get("mass", 1.0) * rest.get("eta", 1.0) * base.D
        rest["base"] = base
        return _build(HarmonicModel, rest, "model")
    raise ConfigError([("model.kind", f"expected twoterm, uniform or harmonic, got {kind!r}")])


def parse_tolerances(data: dict | None) -> Tolerances:
    data = data or {}
    unknown = sorted(set(data) - {"series", "talbot", "cosine"})
    if unknown:
        raise ConfigError([(f"tolerances.{k}", "unknown field") for k in unknown])
    series = _build(SeriesPolicy, data["series"], "tolerances.series") if "series" in data else DEFAULT_POLICY
    talbot = _build(TalbotConfig, data["talbot"], "tolerances.talbot") if "talbot" in data else TalbotConfig()
    cosine = _build(CosineQuadConfig, data["cosine"], "tolerances.cosine") if "cosine" in data else None
    return Tolerances(series, talbot, cosine)


def _apply_override(raw: dict, item: str) -> None:
    if "=" not in item:
        raise ConfigError([("--set", f"expected path=value, got {item!r}")])
    path, text = item.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    keys = path.split(".")
    node = raw
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError([(path, "cannot override inside a scalar")])
    node[keys[-1]] = value


def load_config(command: str, args) -> RunConfig:
    raw: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError([("--config", str(exc))]) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError([("--config", f"invalid JSON: {exc}")]) from exc
        if not isinstance(raw, dict):
            raise ConfigError([("--config", "top level must be an object")])
    for item in args.set or ():
        _apply_override(raw, item)
    if args.grid:
        raw["grid"] = args.grid
    grid_val = raw.get("grid", _DEFAULT_GRIDS.get(command, "1:2:2:lin"))
    if isinstance(grid_val, dict):
        grid = _build(GridSpec, grid_val, "grid")
    elif isinstance(grid_val, str):
        grid = GridSpec.parse(grid_val)
    else:
        raise ConfigError([("grid", "must be a string or an object")])
    raw["grid"] = grid.text()
    out = raw.get("output", {}) if isinstance(raw.get("output"), dict) else {}
    fmt = args.format or out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError([("output.format", f"must be csv or json, got {fmt!r}")])
    model = parse_model(raw.get("model"))
    tol = parse_tolerances(raw.get("tolerances"))
    return RunConfig(model, grid, tol, raw, fmt, args.out or out.get("path"))


# ------------------------------------------------------------------ output


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def _tolerance_text(tol: Tolerances) -> str:
    return json.dumps(
        {
            "series": asdict(tol.series),
            "talbot": asdict(tol.talbot),
            "cosine": asdict(tol.cosine) if tol.cosine else None,
        },
        sort_keys=True,
    )


def render_table(command: str, cfg: RunConfig, columns, rows, meta=None) -> str:
    """Table text in the configured format, deterministic for fixed inputs."""
    meta = dict(meta or {})
    if cfg.fmt == "json":
        clean = [[None if isinstance(v, float) and math.isnan(v) else float(v) for v in r] for r in rows]
        doc = {
            "command": command,
            "config_sha256": cfg.digest(),
            "tolerances": json.loads(_tolerance_text(cfg.tolerances)),
            "meta": meta,
            "columns": list(columns),
            "rows": clean,
        }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# command={command}\n")
    buf.write(f"# config_sha256={cfg.digest()}\n")
    buf.write(f"# tolerances={_tolerance_text(cfg.tolerances)}\n")
    for k in sorted(meta):
        buf.write(f"# {k}={json.dumps(meta[k], sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _emit(text: str, cfg_out: str | None) -> None:
    if cfg_out:
        with open(cfg_out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def _need(cfg: RunConfig, *kinds):
    names = {TwoTermModel: "twoterm", UniformModel: "uniform", HarmonicModel: "harmonic"}
    if not isinstance(cfg.model, kinds):
        want = " or ".join(names[k] for k in kinds)
        raise ConfigError([("model.kind", f"this command needs a {want} model")])
    return cfg.model


def _scalar(cfg: RunConfig, key: str, default=None) -> float:
    value = cfg.get(key, default)
    if value is None:
        raise ConfigError([(key, "required for this command")])
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError([(key, f"must be a number, got {value!r}")]) from exc


def cmd_msd(cfg: RunConfig):
    m = _need(cfg, TwoTermModel, UniformModel)
    ts = cfg.grid.points()
    if isinstance(m, TwoTermModel):
        rows = [(t, second_moment(m, t)) for t in ts]
        meta = {
            "short_slope_ref": m.mu1 - (1 - m.nu1) * (1 - m.mu1),
            "long_slope_ref": m.mu2 - (1 - m.nu2) * (1 - m.mu2),
        }
        return ("t", "msd"), rows, meta
    rows = []
    for t in ts:
        long = msd_long_asymptote(m, t) if t > 1 else math.nan
        rows.append((t, msd_time(m, t, cfg.tolerances.talbot), msd_short_asymptote(m, t), long))
    return ("t", "msd", "short_asymptote", "long_asymptote"), rows, {}


def cmd_pdf(cfg: RunConfig, crosscheck: bool = False):
    m = _need(cfg, TwoTermModel)
    t = _scalar(cfg, "t", 1.0)
    xs = cfg.grid.points()
    w = np.atleast_1d(pdf(m, xs, t, cfg.tolerances.series, cfg=cfg.tolerances.cosine))
    if not crosscheck:
        return ("x", "W"), list(zip(xs, w)), {"t": t}
    h = np.array([pdf_hseries(m, x, t, cfg.tolerances.series) if x != 0 else math.nan for x in xs])
    diff = np.abs(h - w)
    worst = float(np.nanmax(diff)) if np.any(np.isfinite(diff)) else math.nan
    return ("x", "W", "W_hseries"), list(zip(xs, w, h)), {"t": t, "max_discrepancy": worst}


def cmd_norm(cfg: RunConfig):
    m = _need(cfg, TwoTermModel)
    report = nonnegativity_check(m)
    rows = [(t, zeroth_moment(m, t)) for t in cfg.grid.points()]
    meta = {
        "nonnegativity_passed": report.passed,
        "nonnegativity": [{"condition": c[0], "lhs": c[1], "rhs": c[2], "holds": c[3]} for c in report.checks],
    }
    return ("t", "zeroth_moment"), rows, meta


def cmd_relax(cfg: RunConfig):
    m = _need(cfg, TwoTermModel, HarmonicModel)
    base = m.base if isinstance(m, HarmonicModel) else m
    lam = _scalar(cfg, "lam", 1.0)
    method = cfg.get("method", "series")
    rows = [(t, relax_mode(base, lam, t, cfg.tolerances.series, method)) for t in cfg.grid.points()]
    return ("t", "relax"), rows, {"lam": lam, "method": method}


def cmd_harmonic(cfg: RunConfig):
    h = _need(cfg, HarmonicModel)
    rows = []
    for t in cfg.grid.points():
        rows.append((t, first_moment(h, t, cfg.tolerances.series), second_moment_harmonic(h, t, cfg.tolerances.series)))
    return ("t", "mean", "msd"), rows, {"x_th2": h.x_th2, "einstein_consistent": h.einstein_consistent}


def cmd_mlf(cfg: RunConfig):
    spec = cfg.get("mlf", {})
    if not isinstance(spec, dict):
        raise ConfigError([("mlf", "must be an object with alpha, beta, delta")])
    p = _build(MLParams, spec, "mlf")
    rows = [(z, ml3(p, z, cfg.tolerances.series)) for z in cfg.grid.points()]
    return ("z", "value"), rows, {"alpha": p.alpha, "beta": p.beta, "delta": p.delta}


def cmd_validate(cfg: RunConfig, only=None):
    results = run_suite(cfg.tolerances, only)
    degraded = cfg.tolerances.degraded()
    for r in results:
        print(r.line(), file=sys.stderr)
    if degraded:
        print(f"[FAIL] tolerances looser than defaults: {', '.join(degraded)}", file=sys.stderr)
    passed = all(r.passed for r in results) and not degraded
    report = {
        "passed": passed,
        "degraded_tolerances": degraded,
        "config_sha256": cfg.digest(),
        "tolerances": json.loads(_tolerance_text(cfg.tolerances)),
        "checks": [
            {k: v for k, v in r.as_dict().items() if k != "seconds"} for r in results
        ],
    }
    return json.dumps(report, sort_keys=True, indent=1, default=float) + "\n", passed


# -------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hilfer-diffusion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--grid", help="start:stop:count[:log|lin]")
        p.add_argument("--set", action="append", metavar="PATH=VALUE", help="override a config field")
        if name == "pdf":
            p.add_argument("--crosscheck", action="store_true", help="add the H-function series column")
        if name == "validate":
            p.add_argument("--only", help="comma-separated suite numbers")
    return parser


def _error_doc(kind: str, errors) -> str:
    return json.dumps({"error": kind, "errors": [{"field": f, "message": m} for f, m in errors]}, sort_keys=True)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.command, args)
        if args.command == "validate":
            only = None
            if args.only:
                try:
                    only = {int(x) for x in args.only.split(",")}
                except ValueError as exc:
                    raise ConfigError([("--only", str(exc))]) from exc
            text, passed = cmd_validate(cfg, only)
            _emit(text, cfg.out)
            return EXIT_OK if passed else EXIT_VALIDATION
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if args.command == "pdf":
                columns, rows, meta = cmd_pdf(cfg, args.crosscheck)
            else:
                columns, rows, meta = globals()[f"cmd_{args.command}"](cfg)
        _emit(render_table(args.command, cfg, columns, rows, meta), cfg.out)
        return EXIT_OK
    except ConfigError as exc:
        print(_error_doc("config", exc.errors), file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(_error_doc("numerical", [(type(exc).__name__, str(exc))]), file=sys.stderr)
        return EXIT_NUMERICAL
    except HilferDiffusionError as exc:
        print(_error_doc("config", [(type(exc).__name__, str(exc))]), file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
