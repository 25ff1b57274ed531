"""Trace reading, aggregation and table rendering (plain text, TSV, JSON)."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import CorruptTrace
from .types import EditTrace

INITIAL_LABEL = "Initial Summary"
FOOTER = (
    "Knlg F1 depends on the entity extractor configured for the run; "
    "values are not comparable across extractors."
)

# key -> (header, scale, decimals)
_CORE_COLUMNS = {
    "knowledge_f1": ("Knlg F1", 100.0, 2),
    "rouge1": ("R1", 100.0, 2),
    "rouge2": ("R2", 100.0, 2),
    "rougeL": ("RL", 100.0, 2),
}


@dataclass
class ReportRow:
    label: str
    n: int
    values: dict[str, float]
    mean_reward: float | None = None
    group: int = 0


@dataclass
class RunReport:
    rows: list[ReportRow] = field(default_factory=list)
    external: list[str] = field(default_factory=list)
    n_records: int = 0
    n_errors: int = 0
    errors: list[dict[str, str]] = field(default_factory=list)
    weights: dict[str, Any] | None = None
    trace_path: str | None = None
    first_column: str = "Instructor"

    def row(self, label: str) -> ReportRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    @property
    def mean_reward(self) -> float:
        """Mean reward of the first edited row (single-pass runs have exactly one)."""
        edited = [r for r in self.rows if r.mean_reward is not None]
        return edited[0].mean_reward if edited else 0.0

    def columns(self) -> list[str]:
        if self.external:
            return list(self.external) + ["rouge1", "rouge2", "rougeL"]
        return list(_CORE_COLUMNS)

    def to_dict(self) -> dict[str, Any]:
        return {
            "columns": self.columns(),
            "rows": [
                {"label": r.label, "group": r.group, "n": r.n, "mean_reward": r.mean_reward, "values": r.values}
                for r in self.rows
            ],
            "n_records": self.n_records,
            "n_errors": self.n_errors,
            "errors": self.errors,
            "weights": self.weights,
            "footer": FOOTER,
        }


def read_traces(path: str | Path) -> list[EditTrace]:
    traces = []
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                traces.append(EditTrace.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorruptTrace(line_no, f"{type(exc).__name__}: {exc}") from exc
    return traces


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def _card_values(cards: Sequence[Any]) -> dict[str, float]:
    out = {
        "knowledge_p": _mean([c.knowledge.precision for c in cards]),
        "knowledge_r": _mean([c.knowledge.recall for c in cards]),
        "knowledge_f1": _mean([c.knowledge.f1 for c in cards]),
        "rouge1": _mean([c.rouge1.f1 for c in cards]),
        "rouge2": _mean([c.rouge2.f1 for c in cards]),
        "rougeL": _mean([c.rougeL.f1 for c in cards]),
    }
    names = list(dict.fromkeys(k for c in cards for k in c.external))
    for name in names:
        vals = [c.external[name] for c in cards if name in c.external]
        out[name] = _mean(vals)
    return out


def _label(label: str, iteration: int, n_iter: int) -> str:
    if "{iter}" in label:
        return label.format(iter=iteration)
    return f"{label} Iter {iteration}" if n_iter > 1 else label


def aggregate(traces: Iterable[EditTrace], label: str = "Edited", group: int = 1) -> RunReport:
    """Per-row means over records, in record-id order (scores kept in [0, 1]).

    Rows: the initial summaries, then one row per iteration. A record that
    stopped early contributes its last edited summary to later iterations, with
    reward 0 for iterations it did not run.
    """
    by_record: dict[str, dict[int, EditTrace]] = defaultdict(dict)
    for t in traces:
        by_record[t.record_id][t.iteration] = t
    report = RunReport()
    if not by_record:
        return report
    ids = sorted(by_record)
    n_iter = max(max(its) for its in by_record.values())
    report.n_records = len(ids)
    report.rows.append(ReportRow(INITIAL_LABEL, len(ids), _card_values([by_record[i][min(by_record[i])].score_before for i in ids]), group=0))
    for j in range(1, n_iter + 1):
        cards, rewards = [], []
        for rid in ids:
            its = by_record[rid]
            last = max(i for i in its if i <= j)
            cards.append(its[last].score_after)
            rewards.append(its[j].reward if j in its else 0.0)
        report.rows.append(ReportRow(_label(label, j, n_iter), len(ids), _card_values(cards), _mean(rewards), group))
    report.external = [k for k in report.rows[0].values if k not in ("knowledge_p", "knowledge_r", *_CORE_COLUMNS)]
    return report


@dataclass(frozen=True)
class ReportSource:
    label: str
    path: Path | str
    group: int | None = None


def make_report(
    sources: Sequence[ReportSource] | str | Path,
    first_column: str = "Instructor",
) -> RunReport:
    """Combine one or more trace files into a single comparison table.

    The initial-summary row comes from the first source. Each source is its own
    row group unless ``group`` says otherwise.
    """
    if isinstance(sources, (str, Path)):
        sources = [ReportSource("Edited", sources)]
    combined = RunReport(first_column=first_column)
    for idx, src in enumerate(sources, 1):
        part = aggregate(read_traces(src.path), src.label, src.group if src.group is not None else idx)
        if not part.rows:
            continue
        if not combined.rows:
            combined.rows.append(part.rows[0])
            combined.n_records = part.n_records
        combined.rows.extend(part.rows[1:])
        for name in part.external:
            if name not in combined.external:
                combined.external.append(name)
    return combined


def _fmt(key: str, value: float | None) -> str:
    if value is None:
        return "-"
    if key in _CORE_COLUMNS:
        _, scale, dec = _CORE_COLUMNS[key]
        return f"{value * scale:.{dec}f}"
    return f"{value:.3f}"


def _header(key: str) -> str:
    return _CORE_COLUMNS[key][0] if key in _CORE_COLUMNS else key


def render_text(report: RunReport) -> str:
    """Aligned plain-text table mirroring the layout of the published result tables."""
    keys = report.columns()
    header = [report.first_column] + [_header(k) for k in keys]
    body = [[r.label] + [_fmt(k, r.values.get(k)) for k in keys] for r in report.rows]
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]

    def line(cells: list[str]) -> str:
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return "  ".join([first, *rest])

    rule = "  ".join("-" * w for w in widths)
    out = [line(header), rule]
    prev_group = None
    for row, cells in zip(report.rows, body):
        if prev_group is not None and row.group != prev_group:
            out.append(rule)
        out.append(line(cells))
        prev_group = row.group
    if report.rows:
        out += [rule, FOOTER]
    return "\n".join(out) + "\n"


def render_tsv(report: RunReport) -> str:
    keys = report.columns()
    lines = ["\t".join([report.first_column, "n", *[_header(k) for k in keys], "mean_reward"])]
    for r in report.rows:
        reward = "" if r.mean_reward is None else repr(r.mean_reward)
        lines.append("\t".join([r.label, str(r.n), *[_fmt(k, r.values.get(k)) for k in keys], reward]))
    return "\n".join(lines) + "\n"


def render_json(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"


def write_report(report: RunReport, out_dir: str | Path, stem: str = "report", figures: bool = True) -> list[Path]:
    """Write ``<stem>.txt``, ``.tsv``, ``.json`` and (optionally) PNG figures into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for suffix, render in ((".txt", render_text), (".tsv", render_tsv), (".json", render_json)):
        path = out / f"{stem}{suffix}"
        path.write_text(render(report), encoding="utf-8")
        written.append(path)
    if figures and report.rows:
        from .plotting import plot_iterations, plot_scores

        written.append(plot_scores(report, out / f"{stem}_scores.png"))
        if sum(1 for r in report.rows if r.label != INITIAL_LABEL) > 1:
            written.append(plot_iterations(report, out / f"{stem}_progression.png"))
    return written
