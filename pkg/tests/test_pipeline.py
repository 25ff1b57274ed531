import json
import math

import pytest

from triagent.agents import HumanInstructor, MockEditor, OracleInstructor, ScriptedInstructor
from triagent.errors import BackendTimeout, CorruptTrace, FatalConfigError, RecordError
from triagent.pipeline import RunConfig, evaluate, run_batch, run_edit_once, run_iterative
from triagent.report import read_traces
from triagent.reward import Scorer
from triagent.synthetic import make_corpus
from triagent.types import DatasetRecord, Document, Instruction, Origin, RewardWeights, Scenario, Summary

ROUGE_ONLY = RewardWeights(alpha=1, beta=0)


def _defacto_record():
    return DatasetRecord(
        document=Document(
            "df-7",
            "Gunfire has been heard in Ivory Coast's city of Bouaké, a day after soldiers mutinied over pay.",
        ),
        reference=Summary("Gunfire has been heard in Ivory Coast city of Bouaké, a day after soldiers mutinied over pay.", Origin.REFERENCE),
        initial=Summary("Gunfire has been heard in Ivory Coast's second city of Bouaké, a day after soldiers mutinied over pay"),
        scenario=Scenario.DEFACTO,
        human_instruction=Instruction.free("Remove the information about second from the summary."),
        human_edited=Summary("Gunfire has been heard in Ivory Coast city of Bouaké, a day after soldiers mutinied over pay.", Origin.HUMAN_EDITED),
    )


def test_defacto_human_instruction_through_mock_editor():
    trace = run_edit_once(_defacto_record(), HumanInstructor(), MockEditor(), ROUGE_ONLY)
    assert "second" not in trace.edited.text.split()
    assert trace.reward >= 0
    assert "Instructions: Remove the information about second from the summary." in trace.edit_prompt


def test_noop_instruction_leaves_summary_and_zero_reward():
    rec = make_corpus(1, seed=1)[0]
    trace = run_edit_once(rec, ScriptedInstructor({rec.id: "No operation is needed."}), MockEditor())
    assert trace.edited.text == rec.initial.text
    assert trace.reward == 0.0
    assert trace.backend_meta["editor_skipped"] == "noop"


class TimeoutEditor:
    name = "timeout"

    def edit(self, record, instruction):
        raise BackendTimeout("editor timed out")


class FlakyEditor(MockEditor):
    """Times out on a fixed set of record ids."""

    def __init__(self, bad):
        self.bad = set(bad)

    def edit(self, record, instruction):
        if record.id in self.bad:
            raise BackendTimeout("editor timed out")
        return super().edit(record, instruction)


def test_editor_timeout_carries_record_id():
    rec = make_corpus(1, seed=2)[0]
    with pytest.raises(RecordError) as err:
        run_edit_once(rec, OracleInstructor(), TimeoutEditor())
    assert err.value.record_id == rec.id and isinstance(err.value.cause, BackendTimeout)


def test_iterative_early_stop_and_chaining():
    rec = make_corpus(1, seed=3)[0]
    script = ScriptedInstructor({rec.id: ["Add content related to nobody.", "No operation is needed.", "x"]})
    traces = run_iterative(rec, script, MockEditor(), k=3)
    assert [t.iteration for t in traces] == [1, 2]
    assert traces[1].score_before == traces[0].score_after
    fixed = run_iterative(rec, script, MockEditor(), k=3, stop_on_noop=False)
    assert len(fixed) == 3


def _brute_force_means(trace_path):
    rows = [json.loads(line) for line in open(trace_path, encoding="utf-8")]
    rows.sort(key=lambda r: r["record_id"])
    n = len(rows)
    return {
        "rouge1": math.fsum(r["score_after"]["rouge1"]["f1"] for r in rows) / n,
        "rouge2": math.fsum(r["score_after"]["rouge2"]["f1"] for r in rows) / n,
        "rougeL": math.fsum(r["score_after"]["rougeL"]["f1"] for r in rows) / n,
        "knowledge_f1": math.fsum(r["score_after"]["knowledge"]["f1"] for r in rows) / n,
        "initial_knowledge_f1": math.fsum(r["score_before"]["knowledge"]["f1"] for r in rows) / n,
        "reward": math.fsum(r["reward"] for r in rows) / n,
    }


def test_batch_aggregates_match_trace_file_and_count_errors(tmp_path):
    data = make_corpus(50, seed=5)
    bad = {data[3].id, data[17].id}
    report = run_batch(data, RunConfig(OracleInstructor(), FlakyEditor(bad), output_dir=tmp_path, concurrency=4))
    assert report.n_errors == 2 and {e["record_id"] for e in report.errors} == bad
    assert report.n_records == 48
    expected = _brute_force_means(tmp_path / "traces.jsonl")
    row = report.row("Edited")
    for key in ("rouge1", "rouge2", "rougeL", "knowledge_f1"):
        assert row.values[key] == expected[key]
    assert row.mean_reward == expected["reward"]
    assert report.row("Initial Summary").values["knowledge_f1"] == expected["initial_knowledge_f1"]
    errors = [json.loads(line) for line in open(tmp_path / "errors.jsonl")]
    assert {e["record_id"] for e in errors} == bad


def test_batch_invariant_to_worker_count(tmp_path):
    data = make_corpus(50, seed=6)
    reports = [
        run_batch(data, RunConfig(OracleInstructor(), MockEditor(), output_dir=tmp_path / str(w), concurrency=w))
        for w in (1, 4, 16)
    ]
    assert reports[0].rows == reports[1].rows == reports[2].rows


def test_resume_after_interruption_with_torn_line(tmp_path):
    data = make_corpus(50, seed=8)
    full = run_batch(data, RunConfig(OracleInstructor(), MockEditor(), output_dir=tmp_path / "full"))
    part_dir = tmp_path / "part"
    run_batch(data[:20], RunConfig(OracleInstructor(), MockEditor(), output_dir=part_dir))
    with open(part_dir / "traces.jsonl", "a") as fh:
        fh.write('{"record_id": "torn')  # a crash mid-write
    resumed = run_batch(data, RunConfig(OracleInstructor(), MockEditor(), output_dir=part_dir))
    assert resumed.rows == full.rows
    ids = [t.record_id for t in read_traces(part_dir / "traces.jsonl")]
    assert sorted(ids) == sorted(r.id for r in data)


def test_resume_refuses_different_weights(tmp_path):
    data = make_corpus(5, seed=9)
    run_batch(data[:2], RunConfig(OracleInstructor(), MockEditor(), output_dir=tmp_path))
    with pytest.raises(FatalConfigError):
        run_batch(data, RunConfig(OracleInstructor(), MockEditor(), Scorer(ROUGE_ONLY), output_dir=tmp_path))


def test_fatal_config_before_processing(tmp_path):
    data = make_corpus(2, seed=9)
    with pytest.raises(FatalConfigError):
        run_batch(data, RunConfig(OracleInstructor(), MockEditor(), output_dir=tmp_path, concurrency=0))
    with pytest.raises(FatalConfigError):
        run_batch(data + data[:1], RunConfig(OracleInstructor(), MockEditor(), output_dir=tmp_path))


def test_iterative_batch_has_one_trace_per_record_and_iteration(tmp_path):
    data = make_corpus(20, seed=10)
    report = run_batch(data, RunConfig(OracleInstructor(), MockEditor(), output_dir=tmp_path, iterations=3, stop_on_noop=False))
    traces = read_traces(tmp_path / "traces.jsonl")
    keys = [(t.record_id, t.iteration) for t in traces]
    assert len(keys) == len(set(keys)) == 60
    assert [r.label for r in report.rows] == ["Initial Summary", "Edited Iter 1", "Edited Iter 2", "Edited Iter 3"]


def test_corrupt_trace_reports_line(tmp_path):
    path = tmp_path / "t.jsonl"
    _, report = evaluate(make_corpus(2, seed=1), OracleInstructor(), MockEditor())
    run_batch(make_corpus(2, seed=1), RunConfig(OracleInstructor(), MockEditor(), output_dir=tmp_path))
    lines = (tmp_path / "traces.jsonl").read_text().splitlines()
    path.write_text(lines[0] + "\n{not json}\n" + lines[1] + "\n")
    with pytest.raises(CorruptTrace) as err:
        read_traces(path)
    assert err.value.line == 2


def test_evaluate_matches_batch(tmp_path):
    data = make_corpus(10, seed=12)
    _, mem = evaluate(data, OracleInstructor(), MockEditor())
    disk = run_batch(data, RunConfig(OracleInstructor(), MockEditor(), output_dir=tmp_path))
    assert mem.rows == disk.rows
