"""Acceptance criteria, one printed PASS/FAIL line per criterion.

Run with ``pytest -v -s tests/test_acceptance.py`` to see the lines inline;
they are also written to the terminal summary through ``capsys.disabled``.
"""

import random
import time

import pytest

from holereach import benchmarks
from holereach.closure import compute_wr
from holereach.errors import BudgetExceeded
from holereach.holesearch import EmptyUpTo, check_reachable
from holereach.semantics import hole_bound_of_run, oracle_reachable, oracle_wellnested, replay
from holereach.witness import assemble_witness

from conftest import fixture_path
from holereach.model import load_model

UNTIMED_SEEDS = range(200)
TIMED_SEEDS = range(100)
FUZZ_K = 3

HOLE_TABLE = [
    ("L^bh", "lbh.mpda", 2),
    ("untimed L^crit", "lcrit.mpda", 2),
    ("prodcons(3,2)", "prodcons_3_2.mpda", 2),
    ("prodcons(24,7)", "prodcons_24_7.mpda", 2),
    ("untimed maze", "maze.mpda", 0),
    ("timed L^crit", "lcrit.tmpda", 2),
    ("timed maze", "maze.tmpda", 2),
]


def report(capsys, name, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, detail


def fuzz_model(seed, timed):
    rng = random.Random(seed + (10_000 if timed else 0))
    if timed:
        return benchmarks.random_model(rng, max_locations=4, max_transitions=8, timed=True, cmax=3)
    return benchmarks.random_model(rng, max_locations=5, max_transitions=8)


@pytest.fixture(scope="module")
def fuzz_cases():
    """Every fuzz model with its search outcomes for K = 0..3 and oracle result."""
    cases = []
    for timed, seeds in ((False, UNTIMED_SEEDS), (True, TIMED_SEEDS)):
        for seed in seeds:
            m = fuzz_model(seed, timed)
            outcomes = [check_reachable(m, k) for k in range(FUZZ_K + 1)]
            try:
                if timed:
                    oracle = oracle_reachable(m, 10, 3, node_cap=2_000_000)
                else:
                    oracle = oracle_reachable(m, 12, node_cap=2_000_000)
            except BudgetExceeded:
                oracle = None
            cases.append({"seed": seed, "timed": timed, "model": m, "outcomes": outcomes, "oracle": oracle})
    return cases


def test_hole_bound_reproduction(capsys):
    rows, ok = [], True
    for label, name, expected in HOLE_TABLE:
        m = load_model(fixture_path(name))
        started = time.perf_counter()
        outcome = check_reachable(m, 2)
        seconds = time.perf_counter() - started
        got = outcome.hole_bound if outcome else None
        ok &= got == expected and seconds < 60
        rows.append(f"{label}={got} ({seconds:.2f}s)")
    report(capsys, "Hole-bound reproduction", ok, ", ".join(rows))


def test_minimality(capsys):
    rows, ok = [], True
    for label, name, expected in HOLE_TABLE:
        if expected != 2:
            continue
        outcome = check_reachable(load_model(fixture_path(name)), 1)
        ok &= isinstance(outcome, EmptyUpTo) and outcome.K == 1
        rows.append(f"{label}={'EMPTY' if not outcome else 'NONEMPTY'}")
    report(capsys, "Minimality (K=1)", ok, ", ".join(rows))


def test_witness_length(capsys):
    m = load_model(fixture_path("prodcons_3_2.mpda"))
    w = assemble_witness(check_reachable(m, 2), m)
    accepted = bool(replay(m, w))
    ok = len(w.transitions) == 24 and accepted
    report(capsys, "Witness length", ok, f"prodcons(3,2) witness has {len(w.transitions)} transitions, replay accepting={accepted}")


def test_timed_maze_minimal_elapse(capsys):
    m = load_model(fixture_path("maze.tmpda"))
    w = assemble_witness(check_reachable(m, 2), m)
    accepted = bool(replay(m, w))
    below = oracle_reachable(m, 60, 4, max_total_elapse=4, node_cap=5_000_000)
    ok = accepted and w.total_elapse == 5 and not below
    report(
        capsys, "Timed maze", ok,
        f"witness elapse={w.total_elapse}, replay accepting={accepted}, "
        f"oracle run with elapse<=4 within 60 steps: {'none' if not below else 'found'} "
        f"({getattr(below, 'explored', 0)} configurations)",
    )


def test_oracle_equivalence(capsys, fuzz_cases):
    disagreements, found, skipped = [], 0, 0
    for case in fuzz_cases:
        oracle = case["oracle"]
        if oracle is None:
            skipped += 1
            continue
        if not oracle or oracle.witness.hole_bound > 2:
            continue
        found += 1
        outcome = case["outcomes"][2]
        if not outcome or outcome.hole_bound > oracle.witness.hole_bound:
            disagreements.append((case["timed"], case["seed"]))
    n_untimed = sum(1 for c in fuzz_cases if not c["timed"])
    ok = not disagreements and skipped == 0
    report(
        capsys, "Oracle equivalence", ok,
        f"{n_untimed} untimed + {len(fuzz_cases) - n_untimed} timed models, {found} oracle-reachable "
        f"with holes<=2, {len(disagreements)} disagreements, {skipped} oracle aborts",
    )


def test_universal_witness_validity(capsys, fuzz_cases):
    total, bad = 0, []
    for label, name, _ in HOLE_TABLE + [("fig1", "fig1.mpda", 3)]:
        m = load_model(fixture_path(name))
        outcome = check_reachable(m, 3)
        w = assemble_witness(outcome, m)
        total += 1
        if not replay(m, w) or hole_bound_of_run(m, w) > outcome.hole_bound:
            bad.append(label)
    for case in fuzz_cases:
        m = case["model"]
        for outcome in case["outcomes"]:
            if not outcome:
                continue
            w = assemble_witness(outcome, m)
            total += 1
            if not replay(m, w) or hole_bound_of_run(m, w) > outcome.hole_bound:
                bad.append((case["timed"], case["seed"], outcome.hole_bound))
    report(capsys, "Universal witness validity", not bad, f"{total - len(bad)}/{total} witnesses valid")


def test_structural_properties(capsys, fuzz_cases):
    mono, collapse, dedup = [], [], []
    for case in fuzz_cases:
        outs = case["outcomes"]
        if bool(outs[0]) != bool(outs[1]):
            collapse.append(case["seed"])
        for k in range(FUZZ_K):
            if outs[k] and (not outs[k + 1] or outs[k + 1].hole_bound != outs[k].hole_bound):
                mono.append(case["seed"])
        m = case["model"]
        engine = outs[-1].stats and outs[-1]
        states = len(m.locations)
        if m.timed:
            from holereach.closure import StateSpace

            states = StateSpace(m).size
        for stage in outs[-1].stats:
            if stage.lists > states ** (2 * stage.k + 3) * m.n_stacks ** (stage.k + 1):
                dedup.append(case["seed"])
    counts = {}
    for timed in (False, True):
        stripped = benchmarks.lcrit(timed).with_finals([])
        counts[timed] = [check_reachable(stripped, k).stats[-1].lists for k in range(4)]
    monotone_lists = all(c == sorted(c) for c in counts.values())
    ok = not mono and not collapse and not dedup and monotone_lists
    report(
        capsys, "Structural properties", ok,
        f"K-monotonicity violations={len(mono)}, 1-hole collapse violations={len(collapse)}, "
        f"dedup bound violations={len(dedup)}, finals-stripped L^crit lists by K: "
        f"untimed {counts[False]}, timed {counts[True]}",
    )


def test_binary_reachability(capsys, fuzz_cases):
    compared, mismatched, aborted = 0, [], 0
    for case in fuzz_cases:
        if case["timed"]:
            continue
        m = case["model"]
        try:
            oracle = {(a, b) for a, _, _, b, _ in oracle_wellnested(m, 12, node_cap=300_000)}
        except BudgetExceeded:
            aborted += 1
            continue
        compared += 1
        if compute_wr(m).pairs() != oracle:
            mismatched.append(case["seed"])
    report(
        capsys, "Binary reachability", not mismatched,
        f"compute_wr equals the oracle relation on {compared - len(mismatched)}/{compared} models "
        f"({aborted} oracle runs exceeded the node cap and were not compared)",
    )
