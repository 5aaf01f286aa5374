import pytest

from holereach import benchmarks
from holereach.errors import NotAccepting, StepDisabled
from holereach.model import AgeInterval, Nop, Pop, Push, build_model
from holereach.semantics import (
    Elapse,
    Fire,
    Witness,
    format_witness,
    hole_bound_of_run,
    hole_bound_of_steps,
    initial_configuration,
    normalize_steps,
    oracle_reachable,
    oracle_wellnested,
    parse_witness,
    replay,
    step,
)


def push_pop(age=None, kind="mpda"):
    return build_model(
        kind, 1, ["s0", "s1", "s2"], "s0", ["s2"],
        [("s0", "s1", Push(1, "A")), ("s1", "s2", Pop(1, "A", age))],
    )


def test_step_push_then_pop():
    m = push_pop()
    c = initial_configuration(m)
    c = step(m, c, Fire(0))
    assert c.stacks == ((("A", 0),),)
    c = step(m, c, Fire(1))
    assert c.loc == "s2" and c.stacks == ((),)


def test_step_rejects_wrong_source():
    m = push_pop()
    with pytest.raises(StepDisabled):
        step(m, initial_configuration(m), Fire(1))


def test_ages_grow_with_elapse():
    m = push_pop(AgeInterval(2, 5), kind="tmpda")
    assert not replay(m, [Fire(0), Elapse(1), Fire(1)])
    assert replay(m, [Fire(0), Elapse(2), Fire(1)])
    result = replay(m, [Fire(0), Elapse(6), Fire(1)])
    assert not result and result.index == 2


def test_replay_requires_empty_stacks():
    m = build_model("mpda", 1, ["a", "b"], "a", ["b"], [("a", "b", Push(1, "X"))])
    result = replay(m, [Fire(0)])
    assert not result and "not empty" in result.reason


def test_hole_bound_of_well_nested_run_is_zero():
    m = push_pop()
    assert hole_bound_of_run(m, [Fire(0), Fire(1)]) == 0


def test_hole_bound_of_crossing_run():
    m = benchmarks.lcrit()
    # a b c d: push1 push2 pop1 pop2
    run = [Fire(0), Fire(2), Fire(4), Fire(8)]
    assert replay(m, run)
    assert hole_bound_of_run(m, run) == 2


def test_hole_bound_of_figure_run_is_three():
    m = benchmarks.fig1()
    run = [Fire(t.id) for t in m.transitions]
    assert replay(m, run)
    assert hole_bound_of_run(m, run) == 3


def test_hole_bound_needs_accepting_run():
    m = push_pop()
    with pytest.raises(NotAccepting):
        hole_bound_of_run(m, [Fire(0)])


def test_consecutive_pushes_form_one_hole():
    m = build_model(
        "mpda", 2, list("abcdef"), "a", ["f"],
        [
            ("a", "b", Push(1, "X")),
            ("b", "c", Push(1, "X")),
            ("c", "d", Pop(1, "X")),
            ("d", "e", Pop(1, "X")),
            ("e", "f", Nop()),
        ],
    )
    assert hole_bound_of_steps(m, [Fire(i) for i in range(5)]) == 0


def test_oracle_finds_shortest_run():
    result = oracle_reachable(benchmarks.lbh(), 12)
    assert result
    assert replay(benchmarks.lbh(), result.witness)
    assert result.witness.hole_bound == 2


def test_oracle_respects_total_elapse():
    m = benchmarks.maze(timed=True)
    assert not oracle_reachable(m, 20, 5, max_total_elapse=3)


def test_oracle_wellnested_uses_combined_stack():
    m = benchmarks.lcrit()
    pairs = {(a, c) for a, _, _, c, _ in oracle_wellnested(m, 6)}
    assert ("l0", "l0") in pairs
    assert ("l0", "l5") not in pairs


def test_witness_text_roundtrip():
    m = push_pop(AgeInterval(0, 3), kind="tmpda")
    w = Witness((Fire(0), Elapse(2), Fire(1)), hole_bound=0)
    text = format_witness(w, m)
    assert text.splitlines()[0] == "witness holes=0"
    assert "# s0 -> s1 push 1 A" in text
    assert parse_witness(text) == w


def test_parse_witness_rejects_garbage():
    with pytest.raises(ValueError):
        parse_witness("witness holes=1\njump 3\n")


def test_normalize_merges_elapses():
    steps = [Elapse(1), Elapse(2), Fire(0), Elapse(1)]
    assert normalize_steps(steps) == (Elapse(3), Fire(0), Elapse(1))
