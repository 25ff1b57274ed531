import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triagent.errors import EmptyReference, InvalidOps, UnparseableInstruction
from triagent.oracle import build_keyword_oracle, parse_instruction, render_editor_facing, render_training
from triagent.types import Document, Instruction, InstructionKind, KeywordOps, Scenario

CNN_INITIAL = (
    "A former corrections officer was punched by a young man on a plane after he asked him to stop "
    "using foul language. The former officer then took the young man down and held him until police "
    "arrived. Source: Daily Mail"
)
CNN_REFERENCE = (
    "Chad Hurst of Salt Lake City, Utah was sucker punched by a plane passenger when they landed in the "
    "city Sunday . This after Hurst asked the young man to stop using foul language following their flight ."
)
CNN_DOCUMENT = Document(
    "cnn-1",
    "Chad Hurst of Salt Lake City, Utah was sucker punched by a plane passenger on Sunday. "
    "Hurst asked the young man to stop using foul language.",
)


def test_oracle_on_published_cnndm_example():
    ops = build_keyword_oracle(CNN_INITIAL, CNN_REFERENCE, CNN_DOCUMENT)
    assert "chad hurst of salt lake city" in ops.add
    assert "daily mail" in ops.remove
    assert set(ops.add).isdisjoint(ops.remove)


def test_oracle_set_difference_and_grounding():
    ops = build_keyword_oracle("Alice and Bob met.", "Bob and Carol met. Dave too.", "Carol was there.")
    assert ops == KeywordOps(add=("carol",), remove=("alice",))  # dave is not in the document


def test_oracle_noop_and_empty_reference():
    assert build_keyword_oracle(CNN_INITIAL, CNN_INITIAL, CNN_DOCUMENT).is_noop
    with pytest.raises(EmptyReference):
        build_keyword_oracle("x", " ", "d")


def test_render_training():
    assert render_training(KeywordOps(("chad hurst",), ("daily mail",))) == "<Add> chad hurst <remove> daily mail"
    assert render_training(KeywordOps()) == "No operation is needed."
    assert render_training(KeywordOps(("a", "b"))) == "<Add> a; b"
    assert render_training(KeywordOps(remove=("x",))) == "<remove> x"


def test_render_editor_facing():
    assert render_editor_facing(KeywordOps(("chad hurst",)), "cnndm") == "Add content related to chad hurst."
    assert (
        render_editor_facing(KeywordOps(remove=("second",)), Scenario.DEFACTO)
        == "Remove the information about second from the summary."
    )
    assert render_editor_facing(KeywordOps(), "cnndm") == "No operation is needed."
    assert (
        render_editor_facing(KeywordOps(("a",), ("b",)), "cnndm")
        == "Add content related to a. Delete content related to b."
    )


def test_parse_examples():
    assert parse_instruction("<Add> chad hurst <remove> daily mail") == KeywordOps(("chad hurst",), ("daily mail",))
    assert parse_instruction("<add>  Chad Hurst ").add == ("Chad Hurst",)
    assert parse_instruction("No operation is needed.") == KeywordOps()
    assert parse_instruction("") == KeywordOps()
    with pytest.raises(UnparseableInstruction):
        parse_instruction("Please make it shorter.")


def test_parse_defacto_passthrough_goes_to_leftover():
    text = "Remove the information about second from the summary. Replace the information about pay with the in-formation about wages."
    ops = parse_instruction(text)
    assert ops.remove == ("second",)
    assert ops.leftover == ("Replace the information about pay with the in-formation about wages.",)
    assert parse_instruction("Rewrite the summary entirely by focusing on the strike.").leftover


def test_parse_keeps_unknown_sentences_when_something_matched():
    ops = parse_instruction("Add content related to utah. Also be brief.")
    assert ops.add == ("utah",) and ops.leftover == ("Also be brief.",)


def test_keyword_ops_validation():
    with pytest.raises(InvalidOps):
        KeywordOps(("a",), ("A",))
    with pytest.raises(InvalidOps):
        KeywordOps(("a", "a"))
    with pytest.raises(InvalidOps):
        KeywordOps(("",))


def test_instruction_from_ops_uses_training_text():
    ins = Instruction.from_ops(KeywordOps(("utah",)))
    assert ins.kind is InstructionKind.KEYWORD_OPS and ins.text == "<Add> utah"
    assert ins.editor_text(Scenario.CNNDM) == "Add content related to utah."
    assert Instruction.from_dict(ins.to_dict()) == ins


keyword = st.text(alphabet="abcdefghij 0123", min_size=1, max_size=12).map(lambda s: " ".join(s.split())).filter(bool)
ops_strategy = st.builds(
    lambda a, r: KeywordOps(tuple(a), tuple(k for k in r if k not in a)),
    st.lists(keyword, max_size=4, unique=True),
    st.lists(keyword, max_size=4, unique=True),
)


@settings(max_examples=300, deadline=None)
@given(ops_strategy, st.sampled_from(list(Scenario)))
def test_render_parse_round_trip(ops, scenario):
    assert parse_instruction(render_training(ops)) == ops
    assert parse_instruction(render_editor_facing(ops, scenario)) == ops


names = st.lists(st.sampled_from(["Alice Abbott", "Bruno Brennan", "Carla Castillo", "Paris", "2015"]), max_size=4)


@settings(max_examples=200, deadline=None)
@given(names, names, names)
def test_oracle_properties(init, ref, doc):
    initial = " ".join(f"{n} spoke." for n in init) or "nothing."
    reference = " ".join(f"{n} spoke." for n in ref) or "nothing."
    document = " ".join(f"{n} spoke." for n in doc) or "nothing."
    ops = build_keyword_oracle(initial, reference, document)
    assert set(ops.add).isdisjoint(ops.remove)
    assert build_keyword_oracle(initial, reference, document) == ops
    assert build_keyword_oracle(initial, initial, document).is_noop
