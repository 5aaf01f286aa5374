import random

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from holereach import benchmarks
from holereach.closure import compute_wr, compute_wrt, transitive_closure
from holereach.holesearch import check_reachable
from holereach.model import parse_model, serialize_model
from holereach.semantics import (
    Configuration,
    hole_bound_of_run,
    oracle_reachable,
    oracle_wellnested,
    replay,
    run_segment,
)
from holereach.witness import assemble_witness, timed_wellnested_witness

FAST = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def untimed(seed):
    return benchmarks.random_model(random.Random(seed))


def timed(seed):
    return benchmarks.random_model(random.Random(seed), max_locations=4, timed=True, cmax=3)


@given(st.sets(st.tuples(st.integers(0, 5), st.integers(0, 5)), max_size=12))
def test_closure_is_transitive_and_reflexive(rel):
    carrier = range(6)
    closed = transitive_closure(rel, carrier)
    assert set(rel) <= closed
    assert all((x, x) in closed for x in carrier)
    assert all((a, d) in closed for a, b in closed for c, d in closed if b == c)


@FAST
@given(seeds)
def test_model_text_roundtrip(seed):
    for m in (untimed(seed), timed(seed)):
        assert parse_model(serialize_model(m)) == m


@FAST
@given(seeds)
def test_wr_agrees_with_oracle(seed):
    m = untimed(seed)
    oracle = {(a, b) for a, _, _, b, _ in oracle_wellnested(m, 10, node_cap=500_000)}
    assert oracle <= compute_wr(m).pairs()


@FAST
@given(seeds)
def test_wrt_contains_every_oracle_run(seed):
    m = timed(seed)
    wrt = compute_wrt(m)
    sp = wrt.space
    idx = m.loc_index
    for a, va, d, b, vb in oracle_wellnested(m, 8, 3, node_cap=500_000):
        assert wrt.has(sp.sid(idx[a], va), min(d, wrt.C), sp.sid(idx[b], vb))


@FAST
@given(seeds)
def test_wrt_entries_from_zero_replay(seed):
    m = timed(seed)
    wrt = compute_wrt(m)
    sp = wrt.space
    start_states = [sp.sid(k, (0,)) for k in range(len(m.locations))]
    for a in start_states:
        src = sp.state(a)
        for t, b in wrt.forward(a):
            steps = timed_wellnested_witness(m, wrt, src, t, sp.state(b))
            end = run_segment(m, Configuration(src.loc, ((), ()), src.val), steps)
            assert end.stacks == ((), ())
            assert (end.loc, sp.clamp(end.clocks)) == tuple(sp.state(b))
            assert min(end.elapsed, wrt.C) == t


@FAST
@given(seeds, st.booleans())
def test_search_properties(seed, is_timed):
    m = timed(seed) if is_timed else untimed(seed)
    outcomes = [check_reachable(m, k) for k in range(4)]
    # a single hole can always be avoided
    assert bool(outcomes[0]) == bool(outcomes[1])
    for k in range(3):
        if outcomes[k]:
            assert outcomes[k + 1].hole_bound == outcomes[k].hole_bound
    for outcome in outcomes:
        if outcome:
            w = assemble_witness(outcome, m)
            assert replay(m, w)
            assert hole_bound_of_run(m, w) <= outcome.hole_bound


@FAST
@given(seeds)
def test_oracle_runs_are_found(seed):
    m = untimed(seed)
    found = oracle_reachable(m, 10)
    if found and found.witness.hole_bound <= 2:
        outcome = check_reachable(m, 2)
        assert outcome and outcome.hole_bound <= found.witness.hole_bound


@FAST
@given(seeds)
def test_dedup_counter_bound(seed):
    m = untimed(seed)
    outcome = check_reachable(m, 3)
    s, n = len(m.locations), m.n_stacks
    for stage in outcome.stats:
        assert stage.lists <= s ** (2 * stage.k + 3) * n ** (stage.k + 1)
