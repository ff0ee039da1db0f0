"""Runs a scenario and writes ``out/{manifest.json, results.json, series/*.csv, plots/*.svg}``."""

from __future__ import annotations

import copy
import csv
import io
import json
import math
import os
import time
from datetime import datetime, timezone

import numpy as np

from .. import __version__
from ..correlations import CorrelationSeries
from ..errors import BudgetExceeded, InvariantViolation
from . import svg
from .config import ConfigError, canonical_json, config_hash, deep_merge, validate
from .scenarios import BY_NAME, COMMON

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_INVARIANT = 0, 2, 3, 4


def to_jsonable(obj):
    """Plain JSON types (complex numbers become ``{"re", "im"}``; non-finite floats become strings)."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "numerator"):
        return float(obj)
    return str(obj)


class RunContext:
    """Collects the outputs of one scenario run; nothing is written until the run completes."""

    def __init__(self, cfg: dict, threads: int):
        self.cfg = cfg
        self.seed = int(cfg["seed"])
        self.threads = max(1, int(threads))
        self.analyses = {}
        self.series = {}
        self.histograms = {}
        self.warnings = []
        self.budgets = []

    def analysis(self, name, data):
        self.analyses[name] = data

    def warn(self, msg):
        self.warnings.append(msg)

    def budget_hit(self, stage):
        self.budgets.append(stage)

    def add_correlation(self, name, series: CorrelationSeries, *, title="", logx=False, logy=True):
        rows = [[n, v.real, v.imag, None if series.stderr is None else float(series.stderr[i])]
                for i, (n, v) in enumerate(zip(series.N, series.values))]
        self.series[name] = {"kind": "correlation", "mode": series.mode, "columns": ["N", "re", "im", "stderr"],
                             "rows": rows, "metadata": series.metadata,
                             "plot": {"title": title, "xlabel": "N", "ylabel": "|correlation|", "logx": logx, "logy": logy}}

    def add_statistic(self, name, Ns, values, stderr=None, *, title="", ylabel="value", logx=False, logy=False):
        rows = [[int(n), float(v), None if stderr is None else float(stderr[i])] for i, (n, v) in enumerate(zip(Ns, values))]
        self.series[name] = {"kind": "statistic", "columns": ["N", "value", "stderr"], "rows": rows,
                             "plot": {"title": title, "xlabel": "N", "ylabel": ylabel, "logx": logx, "logy": logy}}

    def add_histogram(self, name, samples, bins=60):
        counts, edges = np.histogram(np.asarray(samples, dtype=float), bins=bins)
        self.histograms[name] = [[float(edges[i]), float(edges[i + 1]), int(c)] for i, c in enumerate(counts)]


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r])
    return buf.getvalue()


def series_xy(entry: dict):
    """``(N, y)`` for plotting: modulus of a correlation, or the statistic value."""
    xs = [r[0] for r in entry["rows"]]
    if entry["kind"] == "correlation":
        ys = [math.hypot(r[1], r[2]) for r in entry["rows"]]
    else:
        ys = [r[1] for r in entry["rows"]]
    return xs, ys


def plot_series(name: str, entry: dict) -> str:
    opts = entry.get("plot", {})
    return svg.line_chart({name: series_xy(entry)}, title=opts.get("title") or name,
                          xlabel=opts.get("xlabel", "N"), ylabel=opts.get("ylabel", ""),
                          logx=opts.get("logx", False), logy=opts.get("logy", False))


def resolve_config(cfg: dict, seed=None) -> dict:
    validate(cfg)
    name = cfg["scenario"]
    if name not in BY_NAME:
        raise ConfigError(f"unknown scenario {name!r}; run 'list' to see the builtins")
    merged = deep_merge(deep_merge(COMMON, BY_NAME[name].defaults), cfg)
    # a schedule is one choice (explicit list or m^a rule), never a blend of two
    for key in ("schedule", "system"):
        if key in cfg:
            merged[key] = copy.deepcopy(cfg[key])
    if seed is not None:
        merged["seed"] = int(seed)
    merged.pop("out", None)
    validate(merged)
    return merged


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def run_scenario(cfg: dict, out_dir=None, *, seed=None, threads: int = 1, log=print) -> int:
    """Run one scenario; returns the process exit code."""
    started = time.time()
    try:
        out_dir = out_dir or cfg.get("out") or "out"
        merged = resolve_config(cfg, seed)
        ctx = RunContext(merged, threads)
        BY_NAME[merged["scenario"]].run(ctx)
    except ConfigError as exc:
        log(f"error: {exc}")
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        log(f"error: budget exceeded in {exc.stage or 'a computation'}: {exc}. Suggested fallback: {exc.suggestion}")
        return EXIT_BUDGET
    except InvariantViolation as exc:
        log(f"error: internal invariant violated: {exc}")
        return EXIT_INVARIANT
    except (ValueError, KeyError, TypeError) as exc:
        log(f"error: invalid configuration: {exc}")
        return EXIT_CONFIG

    h = config_hash(merged)
    results = {
        "scenario": merged["scenario"],
        "version": __version__,
        "config_hash": h,
        "seed": ctx.seed,
        "analyses": ctx.analyses,
        "series": ctx.series,
        "histograms": ctx.histograms,
        "warnings": ctx.warnings,
    }
    manifest = {
        "config": merged,
        "config_hash": h,
        "seed": ctx.seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "wall_clock_seconds": round(time.time() - started, 3),
        "threads": ctx.threads,
        "budgets_hit": ctx.budgets,
        "truncation_warnings": [w for w in ctx.warnings if "truncation" in w],
        "warnings": ctx.warnings,
    }
    os.makedirs(os.path.join(out_dir, "series"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "plots"), exist_ok=True)
    _write(os.path.join(out_dir, "results.json"), json.dumps(to_jsonable(results), indent=1, sort_keys=True) + "\n")
    for name, entry in ctx.series.items():
        _write(os.path.join(out_dir, "series", f"{name}.csv"), _csv_text(entry["columns"], entry["rows"]))
        _write(os.path.join(out_dir, "plots", f"{name}.svg"), plot_series(name, entry))
    for name, rows in ctx.histograms.items():
        _write(os.path.join(out_dir, "series", f"{name}.csv"), _csv_text(["bin_left", "bin_right", "count"], rows))
    _write(os.path.join(out_dir, "manifest.json"), json.dumps(to_jsonable(manifest), indent=1, sort_keys=True) + "\n")
    log(f"{merged['scenario']}: wrote {out_dir} ({len(ctx.series)} series, {len(ctx.warnings)} warnings)")
    return EXIT_OK


__all__ = ["run_scenario", "resolve_config", "RunContext", "to_jsonable", "canonical_json", "plot_series", "series_xy"]
