import pytest

from holereach import benchmarks
from holereach.closure import TimedState, compute_wr, compute_wrt
from holereach.errors import InternalInconsistency, NotInWr, NotInWrt
from holereach.holesearch import check_reachable
from holereach.model import Nop, Pop, Push, build_model
from holereach.semantics import Configuration, Elapse, Fire, hole_bound_of_run, replay, run_segment
from holereach.witness import (
    BARRIER,
    WitnessStack,
    assemble_witness,
    timed_wellnested_witness,
    wellnested_witness,
)


def test_empty_segment():
    m = benchmarks.lbh()
    assert wellnested_witness(m, compute_wr(m), "q2", "q2") == []


def test_push_pop_segment():
    m = build_model(
        "mpda", 1, ["s0", "s1", "s2"], "s0", ["s2"],
        [("s0", "s1", Push(1, "A")), ("s1", "s2", Pop(1, "A"))],
    )
    assert wellnested_witness(m, compute_wr(m), "s0", "s2") == [0, 1]


def test_missing_pair_raises():
    m = benchmarks.lbh()
    with pytest.raises(NotInWr):
        wellnested_witness(m, compute_wr(m), "q6", "q0")


def balanced(m, tids):
    stacks = {i: [] for i in range(1, m.n_stacks + 1)}
    for tid in tids:
        op = m.transitions[tid].op
        if isinstance(op, Push):
            stacks[op.stack].append(op.symbol)
        elif isinstance(op, Pop):
            if not stacks[op.stack] or stacks[op.stack].pop() != op.symbol:
                return False
    return all(not s for s in stacks.values())


@pytest.mark.parametrize("model", [benchmarks.lbh(), benchmarks.prodcons(3, 2), benchmarks.lcrit()])
def test_every_wr_pair_unrolls(model):
    wr = compute_wr(model)
    for a, b in sorted(wr.pairs()):
        tids = wellnested_witness(model, wr, a, b)
        start = Configuration(a, tuple(() for _ in range(model.n_stacks)))
        end = run_segment(model, start, [Fire(t) for t in tids])
        assert end.loc == b
        assert balanced(model, tids)


def test_timed_identity_and_single_nop():
    m = build_model(
        "tmpda", 1, ["s", "t"], "s", ["t"],
        [("s", "t", Nop(), {"guard": "x1<=1", "resets": (1,)})], n_clocks=1,
    )
    wrt = compute_wrt(m)
    assert timed_wellnested_witness(m, wrt, TimedState("s", (0,)), 0, TimedState("s", (0,))) == []
    assert timed_wellnested_witness(m, wrt, TimedState("s", (1,)), 0, TimedState("t", (0,))) == [Fire(0)]
    assert timed_wellnested_witness(m, wrt, TimedState("s", (0,)), 1, TimedState("s", (1,))) == [Elapse(1)]
    with pytest.raises(NotInWrt):
        timed_wellnested_witness(m, wrt, TimedState("s", (2,)), 0, TimedState("t", (0,)))


def test_witness_stack_barriers():
    ws = WitnessStack()
    ws.push(BARRIER)
    ws.push("seg1")
    ws.push("seg2")
    assert ws.pop_to_barrier() == ["seg2", "seg1"]
    assert len(ws) == 0
    with pytest.raises(InternalInconsistency):
        ws.pop_to_barrier()


def test_figure_skeleton_backtracking_order():
    m = benchmarks.fig1()
    w = assemble_witness(check_reachable(m, 3), m)
    assert list(w.transitions) == list(range(len(m.transitions)))
    assert hole_bound_of_run(m, w) == 3


def test_zero_hole_witness_is_well_nested():
    m = benchmarks.maze()
    w = assemble_witness(check_reachable(m, 2), m)
    assert w.hole_bound == 0
    assert replay(m, w)
    assert hole_bound_of_run(m, w) == 0


def test_lcrit_witness_has_two_holes():
    m = benchmarks.lcrit()
    w = assemble_witness(check_reachable(m, 2), m)
    assert replay(m, w)
    assert hole_bound_of_run(m, w) == 2


def test_prodcons_witness_length():
    m = benchmarks.prodcons(3, 2)
    w = assemble_witness(check_reachable(m, 2), m)
    assert len(w.transitions) == 24
    assert replay(m, w)


def test_timed_maze_witness_elapses_five():
    m = benchmarks.maze(timed=True)
    w = assemble_witness(check_reachable(m, 2), m)
    assert replay(m, w)
    assert w.total_elapse == 5
