import pytest

from holereach import benchmarks
from holereach.errors import ModelSyntaxError, ModelValidationError
from holereach.model import (
    AgeInterval,
    Model,
    Nop,
    Pop,
    Push,
    build_model,
    parse_model,
    serialize_model,
    validate_model,
)

SIMPLE = """\
model mpda
stacks 1
locations s0 s1 s2
initial s0
final s2
trans s0 s1 push 1 A label a
trans s1 s2 pop 1 A   # matching pop
"""


def test_parse_simple_model():
    m = parse_model(SIMPLE)
    assert m.kind == "mpda"
    assert m.locations == ("s0", "s1", "s2")
    assert m.finals == ("s2",)
    assert [t.id for t in m.transitions] == [0, 1]
    assert m.transitions[0].op == Push(1, "A")
    assert m.transitions[0].label == "a"
    assert m.transitions[1].op == Pop(1, "A")
    assert m.stack_alphabet == frozenset({"A"})
    assert not m.timed


def test_timed_model_constants():
    text = """\
model tmpda
stacks 1
clocks 2
locations p q
initial p
final q
trans p q pop 1 A age 1 5 guard x1<=3&x2>=7 reset 1
trans q p push 1 A
"""
    m = parse_model(text)
    assert m.timed
    assert m.cmax_clock == (3, 7)
    assert m.cmax_stack == 5
    assert m.transitions[0].op.age == AgeInterval(1, 5)
    assert m.transitions[0].resets == (1,)


def test_disjunctive_guard_splits_transition():
    text = """\
model tmpda
stacks 1
clocks 1
locations p q
initial p
final q
trans p q nop guard x1<=1|x1>=4
"""
    m = parse_model(text)
    assert len(m.transitions) == 2
    assert [str(t.guard) for t in m.transitions] == ["x1<=1", "x1>=4"]


@pytest.mark.parametrize(
    "line, fragment",
    [
        ("trans s0 s1 push 1 A age 1 2", "only allowed on pop"),
        ("trans s0 s1 pop 1 A age 3 2", "lower bound 3 exceeds 2"),
        ("trans s0 s1 jump", "unknown operation"),
        ("trans s0 s1 nop colour red", "unknown option"),
    ],
)
def test_syntax_errors_report_position(line, fragment):
    text = SIMPLE.replace("trans s1 s2 pop 1 A   # matching pop", line)
    with pytest.raises(ModelSyntaxError) as info:
        parse_model(text)
    assert fragment in str(info.value)
    assert info.value.line == 7
    assert info.value.column >= 1


def test_validation_reports_stack_out_of_range():
    text = SIMPLE.replace("pop 1 A", "pop 3 A")
    with pytest.raises(ModelValidationError) as info:
        parse_model(text)
    assert any("stack index out of range" in d for d in info.value.diagnostics)


def test_validation_of_undeclared_location():
    m = build_model("mpda", 1, ["a"], "a", ["b"], [("a", "c", Nop())])
    diags = validate_model(m)
    assert any("'b'" in d for d in diags)
    assert any("'c'" in d for d in diags)


def test_untimed_projection_drops_time():
    m = benchmarks.lcrit(timed=True).untimed()
    assert not m.timed
    assert all(not t.guard and not t.resets for t in m.transitions)
    assert all(t.op.age is None for t in m.transitions if t.is_pop)


@pytest.mark.parametrize("name", benchmarks.BENCHMARKS)
def test_serialize_roundtrip(name):
    m = benchmarks.generate(name)
    again = parse_model(serialize_model(m))
    assert again == m
    assert validate_model(again) == []


def test_model_is_hashable_value():
    m = parse_model(SIMPLE)
    assert isinstance(m, Model)
    assert m == parse_model(SIMPLE)
