"""Human-readable summary and SVG set for a ``results.json`` file."""

from __future__ import annotations

import json
import os

from .runner import plot_series


class ReportError(ValueError):
    """The results file does not have the expected layout."""


def _flatten(prefix, obj, out):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], out)
    elif isinstance(obj, list) and len(obj) > 8:
        out.append((prefix, f"[{len(obj)} values]"))
    else:
        out.append((prefix, obj))


def _verdicts(obj, out):
    if isinstance(obj, dict):
        for k in sorted(obj):
            if k == "verdict" and isinstance(obj[k], str):
                out.append(obj[k])
            else:
                _verdicts(obj[k], out)


def emit_report(results_path, plots_dir=None) -> str:
    """Summary text for the results file; writes one SVG per series into ``plots_dir``.

    ``plots_dir`` defaults to ``plots/`` next to the results file.
    """
    try:
        with open(results_path, encoding="utf-8") as fh:
            results = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportError(f"cannot read {results_path}: {exc}") from None
    if not isinstance(results, dict):
        raise ReportError("results must be a JSON object")
    if not results:
        return ""
    analyses = results.get("analyses", {})
    series = results.get("series", {})
    if not isinstance(analyses, dict) or not isinstance(series, dict):
        raise ReportError("'analyses' and 'series' must be objects")
    lines = []
    if "scenario" in results:
        lines.append(f"scenario {results['scenario']} (seed {results.get('seed')}, version {results.get('version')})")
    for name in sorted(analyses):
        lines.append("")
        lines.append(f"== {name} ==")
        rows = []
        _flatten("", analyses[name], rows)
        width = max((len(k) for k, _ in rows), default=0)
        for k, v in rows:
            if isinstance(v, float):
                v = f"{v:.6g}"
            lines.append(f"  {k.ljust(width)}  {v}")
        verdicts = []
        _verdicts(analyses[name], verdicts)
        for v in verdicts:
            lines.append(f"  verdict: {v}")
    for w in results.get("warnings", []):
        lines.append(f"warning: {w}")
    if series:
        plots_dir = plots_dir or os.path.join(os.path.dirname(os.path.abspath(results_path)), "plots")
        os.makedirs(plots_dir, exist_ok=True)
        for name, entry in sorted(series.items()):
            if not isinstance(entry, dict) or "rows" not in entry or "kind" not in entry:
                raise ReportError(f"series {name!r} lacks 'kind' or 'rows'")
            with open(os.path.join(plots_dir, f"{name}.svg"), "w", encoding="utf-8") as fh:
                fh.write(plot_series(name, entry))
        lines.append("")
        lines.append(f"{len(series)} plots written to {plots_dir}")
    return "\n".join(lines)
