import json

import httpx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triagent.agents import (
    CompletionRequest,
    HTTPBackend,
    LLMEditor,
    LLMInstructor,
    MockEditor,
    ScriptedBackend,
    complete,
    mock_edit,
    prompt_digest,
)
from triagent.agents.prompts import build_edit_prompt
from triagent.errors import BackendRejected, BackendTimeout, NoScriptedResponse
from triagent.synthetic import make_corpus
from triagent.types import DatasetRecord, Document, Instruction, KeywordOps, Scenario, Summary


def _ok(text="hello"):
    return httpx.Response(200, json={"model": "m", "choices": [{"message": {"content": text}}]})


def _backend(handler, **kw):
    return HTTPBackend("http://llm.test/v1", "m", api_key="k", transport=httpx.MockTransport(handler),
                       sleep=lambda s: None, **kw)


def test_http_retries_429_then_succeeds():
    statuses = iter([429, 429, 200])
    seen = []

    def handler(request):
        seen.append(request)
        code = next(statuses)
        return _ok("New summary: X") if code == 200 else httpx.Response(code, text="slow down")

    out = _backend(handler).complete(CompletionRequest("p"))
    assert out.text == "New summary: X"
    assert out.meta["retries"] == "2"
    body = json.loads(seen[0].content)
    assert body["messages"] == [{"role": "user", "content": "p"}]
    assert (body["max_tokens"], body["temperature"]) == (512, 0.0)
    assert seen[0].headers["Authorization"] == "Bearer k"
    assert str(seen[0].url) == "http://llm.test/v1/chat/completions"


def test_http_4xx_is_rejected_with_body():
    with pytest.raises(BackendRejected) as err:
        _backend(lambda r: httpx.Response(400, text="bad prompt")).complete(CompletionRequest("p"))
    assert err.value.status == 400 and "bad prompt" in err.value.body


def test_http_timeouts_exhaust_into_backend_timeout():
    def handler(request):
        raise httpx.ReadTimeout("slow", request=request)

    with pytest.raises(BackendTimeout):
        _backend(handler, max_retries=2).complete(CompletionRequest("p"))


def test_http_backoff_is_exponential_and_capped():
    delays = []
    statuses = iter([503] * 4 + [200])
    b = HTTPBackend("http://x", "m", transport=httpx.MockTransport(lambda r: _ok() if next(statuses) == 200 else httpx.Response(503)),
                    sleep=delays.append, backoff_base=1.0, backoff_cap=4.0)
    b.complete(CompletionRequest("p"))
    assert delays == [1.0, 2.0, 4.0, 4.0]


def test_api_key_comes_from_environment(monkeypatch):
    monkeypatch.setenv("MY_KEY", "secret")
    seen = []
    b = HTTPBackend("http://x", "m", api_key_env="MY_KEY",
                    transport=httpx.MockTransport(lambda r: seen.append(r) or _ok()))
    b.complete(CompletionRequest("p"))
    assert seen[0].headers["Authorization"] == "Bearer secret"


def test_scripted_backend(tmp_path):
    path = tmp_path / "fixture.json"
    path.write_text(json.dumps({prompt_digest("hi"): "New summary: X"}))
    b = ScriptedBackend.from_file(path)
    assert complete(b, CompletionRequest("hi")) == "New summary: X"
    with pytest.raises(NoScriptedResponse):
        complete(b, CompletionRequest("unknown"))


def test_completion_request_validation():
    with pytest.raises(ValueError):
        CompletionRequest("p", max_tokens=0)
    with pytest.raises(ValueError):
        CompletionRequest("p", temperature=-1)


# --- mock editor ---------------------------------------------------------------

DOC = Document("d", "Chad Hurst was punched. Police arrived later. A happened.")


def test_mock_edit_examples():
    s = Summary("A happened. Source: Daily Mail")
    assert mock_edit(DOC, s, KeywordOps(remove=("daily mail",))).text == "A happened."
    assert mock_edit(DOC, s, KeywordOps(add=("chad hurst",))).text == "A happened. Source: Daily Mail Chad Hurst was punched."
    assert mock_edit(DOC, s, KeywordOps()).text == s.text


def test_mock_edit_noop_is_byte_identical():
    odd = "  spacing   kept\tas is "
    assert mock_edit(DOC, Summary(odd), KeywordOps()).text == odd


def test_mock_edit_cuts_phrase_when_removal_would_empty_summary():
    doc = Document("df", "Gunfire has been heard in Ivory Coast's city of Bouaké, a day after soldiers mutinied over pay.")
    s = Summary("Gunfire has been heard in Ivory Coast's second city of Bouaké, a day after soldiers mutinied over pay")
    out = mock_edit(doc, s, KeywordOps(remove=("second",)))
    assert out.text == "Gunfire has been heard in Ivory Coast's city of Bouaké, a day after soldiers mutinied over pay"


_corpus = make_corpus(40, seed=11, ungrounded_prob=0.3)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(_corpus), st.data())
def test_mock_edit_idempotent(record, data):
    from triagent.metrics import heuristic_entities

    doc_ents = heuristic_entities(record.document.text)
    init_ents = heuristic_entities(record.initial.text)
    add = data.draw(st.lists(st.sampled_from(doc_ents + ["nobody here"]), unique=True, max_size=4))
    remove = data.draw(st.lists(st.sampled_from(init_ents), unique=True, max_size=3))
    ops = KeywordOps(tuple(add), tuple(r for r in remove if r not in add))
    once = mock_edit(record.document, record.initial, ops)
    twice = mock_edit(record.document, once, ops)
    assert once.text == twice.text


# --- agents ----------------------------------------------------------------------

def _record():
    return DatasetRecord(DOC, Summary("Chad Hurst was punched.", "reference"), Summary("A happened. Source: Daily Mail"), Scenario.CNNDM)


def test_mock_editor_handles_editor_facing_and_free_text():
    rec = _record()
    out = MockEditor().edit(rec, Instruction.free("Delete content related to daily mail. Add content related to nobody."))
    assert out.summary.text == "A happened."
    assert out.meta["ungrounded_add"] == "nobody"
    out = MockEditor().edit(rec, Instruction.free("Please make it shorter."))
    assert out.summary.text == rec.initial.text and "warning" in out.meta


def test_llm_editor_strips_echo_and_keeps_raw():
    rec = _record()
    ins = Instruction.from_ops(KeywordOps(remove=("daily mail",)))
    prompt = build_edit_prompt("cnndm", rec.document, rec.initial, ins)
    backend = ScriptedBackend.from_prompts({prompt: "New summary: A happened."})
    out = LLMEditor(backend).edit(rec, ins)
    assert out.summary.text == "A happened."
    assert out.meta["raw_output"] == "New summary: A happened."
    assert out.prompt == prompt


def test_llm_instructor_records_shots_and_prompt():
    rec = _record()
    from triagent.agents.prompts import build_instruction_prompt

    prompt = build_instruction_prompt("cnndm", rec.document, rec.initial, None)
    out = LLMInstructor(ScriptedBackend.from_prompts({prompt: "Delete content related to daily mail."}), "cnndm").instruct(rec)
    assert out.instruction.text == "Delete content related to daily mail."
    assert out.meta["shots"] == "0" and out.prompt == prompt
