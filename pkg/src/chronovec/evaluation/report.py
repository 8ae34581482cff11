"""Self-describing evaluation reports and their JSON / text / CSV / SVG writers."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path

import numpy as np

from ..errors import EvaluationError

FORMATS = ("json", "text", "csv", "svg")


def _plain(obj):
    """Convert numpy scalars, tuples and dataclasses into JSON-safe values."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return _plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


@dataclass
class EvalReport:
    task: str
    params: dict = field(default_factory=dict)
    items: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _plain({"task": self.task, "params": self.params, "items": self.items,
                       "aggregates": self.aggregates, "provenance": self.provenance,
                       "notes": self.notes})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        d = json.loads(text)
        return cls(d["task"], d.get("params", {}), d.get("items", []), d.get("aggregates", {}),
                   d.get("provenance", {}), d.get("notes", []))

    def to_text(self) -> str:
        out = [f"# {self.task}"]
        for k, v in sorted(_plain(self.aggregates).items()):
            out.append(f"{k}: {json.dumps(v, sort_keys=True)}")
        rows = _plain(self.items)
        if rows:
            cols = list(rows[0].keys())
            cells = [[_fmt_cell(r.get(c)) for c in cols] for r in rows]
            widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
            out.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip())
            for row in cells:
                out.append("  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip())
        for note in self.notes:
            out.append(f"note: {note}")
        return "\n".join(out) + "\n"

    def to_csv(self) -> str:
        if self.task == "smoothness":
            return smoothness_table_csv(self)
        rows = _plain(self.items)
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        return buf.getvalue()

    def write(self, path, fmt: str = "json") -> None:
        path = Path(path)
        if fmt == "json":
            path.write_text(self.to_json())
        elif fmt == "text":
            path.write_text(self.to_text())
        elif fmt == "csv":
            path.write_text(self.to_csv())
        elif fmt == "svg":
            smoothness_chart_svg(self, path)
        else:
            raise EvaluationError(f"unknown report format {fmt!r}; choose from {', '.join(FORMATS)}")


def _fmt_cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _smoothness_grid(report: EvalReport):
    if report.task != "smoothness":
        raise EvaluationError(f"table/chart layout only exists for smoothness reports, not {report.task!r}")
    overlaps = sorted({it["overlap"] for it in report.items}, reverse=True)
    methods = list(dict.fromkeys(it["method"] for it in report.items))
    cells = {(it["method"], it["word"], it["overlap"]): it["cosine"] for it in report.items}
    return overlaps, methods, cells


def smoothness_table_csv(report: EvalReport) -> str:
    """Rows per (method, probe word) plus a mean row per method; columns are overlaps."""
    overlaps, methods, cells = _smoothness_grid(report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "word"] + [f"{o}%" for o in overlaps])
    for m in methods:
        words = list(dict.fromkeys(it["word"] for it in report.items if it["method"] == m))
        for word in words:
            w.writerow([m, word] + [_fmt_cell(cells.get((m, word, o))) for o in overlaps])
        means = report.aggregates[m]["mean_cosine"]
        w.writerow([m, "mean"] + [_fmt_cell(means[str(o)]) for o in overlaps])
    return buf.getvalue()


def smoothness_chart_svg(report: EvalReport, path) -> None:
    """Mean cosine against context overlap, one line per method."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    overlaps, methods, _ = _smoothness_grid(report)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for m in methods:
        means = report.aggregates[m]["mean_cosine"]
        ax.plot(overlaps, [np.nan if means[str(o)] is None else means[str(o)] for o in overlaps],
                marker="o", label=m)
    ax.set_xlabel("context overlap (%)")
    ax.set_ylabel("average cosine similarity")
    ax.invert_xaxis()
    ax.legend()
    fig.tight_layout()
    # fixed id salt and no timestamp so reruns give identical files
    with matplotlib.rc_context({"svg.hashsalt": "chronovec"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
