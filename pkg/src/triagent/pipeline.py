"""Generator -> instructor -> editor passes, iterative editing and batch runs."""

from __future__ import annotations

import json
import logging
import os
import threading
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .agents.roles import Editor, Instructor, LLMGenerator
from .agents.prompts import build_edit_prompt
from .errors import FatalConfigError, RecordError
from .report import RunReport, aggregate, read_traces
from .reward import Scorer
from .types import DatasetRecord, EditTrace, Origin, RewardWeights, Summary

log = logging.getLogger(__name__)

TRACE_FILE = "traces.jsonl"
ERROR_FILE = "errors.jsonl"


def _scorer(scoring: Scorer | RewardWeights | None) -> Scorer:
    if scoring is None:
        return Scorer()
    if isinstance(scoring, RewardWeights):
        return Scorer(weights=scoring)
    return scoring


def run_edit_once(
    record: DatasetRecord,
    instructor: Instructor,
    editor: Editor,
    scoring: Scorer | RewardWeights | None = None,
    *,
    iteration: int = 1,
    score_before: Any = None,
) -> EditTrace:
    """One instructor + editor pass over ``record.initial``.

    A no-op instruction short-circuits the editor: the edited summary is the
    initial one and the reward is exactly 0. Agent failures are re-raised as
    :class:`RecordError` carrying the record id.
    """
    scorer = _scorer(scoring)
    try:
        produced = instructor.instruct(record, iteration)
        instruction = produced.instruction
        meta = dict(produced.meta)
        if instruction.is_noop:
            edit_prompt = build_edit_prompt(record.scenario, record.document, record.initial, instruction)
            edited = Summary(record.initial.text, Origin.EDITED)
            meta["editor_skipped"] = "noop"
        else:
            out = editor.edit(record, instruction)
            edit_prompt, edited = out.prompt, out.summary
            meta.update(out.meta)
        if not edited.text:
            meta["warning"] = "editor returned an empty summary"
            log.warning("record %s: editor returned an empty summary", record.id)
        if score_before is None:
            score_before = scorer.score(record.initial, record.reference, record.document.text)
        score_after = scorer.score(edited, record.reference, record.document.text)
    except RecordError:
        raise
    except Exception as exc:
        raise RecordError(record.id, exc) from exc
    return EditTrace(
        record_id=record.id,
        iteration=iteration,
        instruction=instruction,
        instruction_prompt=produced.prompt,
        edit_prompt=edit_prompt,
        edited=edited,
        score_before=score_before,
        score_after=score_after,
        reward=score_after.f_value - score_before.f_value,
        backend_meta=meta,
    )


def run_iterative(
    record: DatasetRecord,
    instructor: Instructor,
    editor: Editor,
    scoring: Scorer | RewardWeights | None = None,
    k: int = 3,
    *,
    stop_on_noop: bool = True,
) -> list[EditTrace]:
    """Chain up to ``k`` passes, each starting from the previous edited summary."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scorer = _scorer(scoring)
    traces: list[EditTrace] = []
    current = record
    before = None
    for i in range(1, k + 1):
        trace = run_edit_once(current, instructor, editor, scorer, iteration=i, score_before=before)
        traces.append(trace)
        if stop_on_noop and trace.instruction.is_noop:
            break
        current = record.with_initial(trace.edited)
        before = trace.score_after
    return traces


@dataclass
class RunConfig:
    instructor: Instructor
    editor: Editor
    scorer: Scorer = field(default_factory=Scorer)
    output_dir: Path | str = "runs/latest"
    concurrency: int = 4
    resume: bool = True
    iterations: int = 1
    stop_on_noop: bool = True
    generator: LLMGenerator | None = None
    label: str = "Edited"


def _load_done(trace_path: Path, weights: RewardWeights) -> set[str]:
    """Record ids already traced; drops a torn trailing line left by an interruption."""
    if not trace_path.exists():
        return set()
    raw = trace_path.read_bytes()
    lines = raw.split(b"\n")
    if lines and lines[-1].strip():
        try:
            json.loads(lines[-1])
        except json.JSONDecodeError:
            log.warning("dropping torn final line of %s", trace_path)
            keep = raw[: len(raw) - len(lines[-1])]
            trace_path.write_bytes(keep)
    done = set()
    for trace in read_traces(trace_path):
        if trace.score_after.weights != weights:
            raise FatalConfigError(
                f"{trace_path} was produced with weights {trace.score_after.weights.to_dict()}, "
                f"current run uses {weights.to_dict()}; refusing to resume"
            )
        done.add(trace.record_id)
    return done


def run_batch(dataset: Sequence[DatasetRecord], config: RunConfig) -> RunReport:
    """Process ``dataset`` with a worker pool, appending traces as records finish.

    Aggregates are computed from the trace file after all workers drain, so they
    do not depend on worker count or completion order. With ``resume`` set,
    records already present in the trace file are skipped.
    """
    if config.concurrency < 1:
        raise FatalConfigError("concurrency must be >= 1")
    if config.iterations < 1:
        raise FatalConfigError("iterations must be >= 1")
    out_dir = Path(config.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise FatalConfigError(f"cannot create output directory {out_dir}: {exc}") from exc
    ids = [r.id for r in dataset]
    if len(set(ids)) != len(ids):
        raise FatalConfigError("dataset contains duplicate record ids")

    trace_path = out_dir / TRACE_FILE
    error_path = out_dir / ERROR_FILE
    if not config.resume:
        for p in (trace_path, error_path):
            if p.exists():
                p.unlink()
    done = _load_done(trace_path, config.scorer.weights)
    todo = [r for r in dataset if r.id not in done]
    if done:
        log.info("resuming: %d records already traced, %d to go", len(done), len(todo))

    lock = threading.Lock()
    errors: list[dict[str, str]] = []

    def work(record: DatasetRecord) -> list[EditTrace]:
        if config.generator is not None:
            try:
                record = config.generator.generate(record)
            except Exception as exc:
                raise RecordError(record.id, exc) from exc
        return run_iterative(
            record, config.instructor, config.editor, config.scorer, config.iterations,
            stop_on_noop=config.stop_on_noop,
        )

    with trace_path.open("a", encoding="utf-8") as sink, ThreadPoolExecutor(config.concurrency) as pool:
        futures = {pool.submit(work, r): r.id for r in todo}
        for fut in as_completed(futures):
            try:
                traces = fut.result()
            except RecordError as exc:
                log.error("record %s failed: %s", exc.record_id, exc.cause)
                errors.append({"record_id": exc.record_id, "error": f"{type(exc.cause).__name__}: {exc.cause}"})
                continue
            payload = "".join(json.dumps(t.to_dict(), ensure_ascii=False) + "\n" for t in traces)
            with lock:
                sink.write(payload)
                sink.flush()
                os.fsync(sink.fileno())

    if errors:
        with error_path.open("a", encoding="utf-8") as fh:
            for e in sorted(errors, key=lambda e: e["record_id"]):
                fh.write(json.dumps(e) + "\n")

    wanted = set(ids)
    traces = [t for t in read_traces(trace_path) if t.record_id in wanted]
    report = aggregate(traces, label=config.label)
    report.n_errors = len(errors)
    report.errors = sorted(errors, key=lambda e: e["record_id"])
    report.weights = config.scorer.weights.to_dict()
    report.trace_path = str(trace_path)
    return report


def evaluate(
    dataset: Sequence[DatasetRecord],
    instructor: Instructor,
    editor: Editor,
    scoring: Scorer | RewardWeights | None = None,
    label: str = "Edited",
) -> tuple[list[EditTrace], RunReport]:
    """In-memory single-pass run with the same report schema as :func:`run_batch`."""
    scorer = _scorer(scoring)
    traces, errors = [], []
    for record in dataset:
        try:
            traces.append(run_edit_once(record, instructor, editor, scorer))
        except RecordError as exc:
            log.error("record %s failed: %s", exc.record_id, exc.cause)
            errors.append({"record_id": exc.record_id, "error": str(exc.cause)})
    report = aggregate(traces, label=label)
    report.n_errors = len(errors)
    report.errors = errors
    report.weights = scorer.weights.to_dict()
    return traces, report
