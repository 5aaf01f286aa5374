"""Turning search results back into explicit runs.

Well-nested facts are unrolled recursively.  Hole-bounded results are
rebuilt by walking the exploration tree from the accepting leaf back to its
root while keeping one witness stack per model stack: pops push the atomic
segment they consumed (preceded by a barrier when the pop closed the hole),
and the node that created a hole pops its segments back off, down to the
barrier.
"""

from __future__ import annotations

import sys
from collections import deque
from dataclasses import dataclass
from typing import Optional, Union

from .closure import TimedState, TimedWellNested, WellNestedRelation
from .errors import InternalInconsistency, NotInWr, NotInWrt
from .holesearch import Reachable, SearchTree, TimedEngine, UntimedEngine
from .model import Model
from .semantics import Elapse, Fire, RunStep, Witness, normalize_steps

# ---------------------------------------------------------------------------
# untimed well-nested segments


def wellnested_witness(m: Model, wr: WellNestedRelation, s1: str, s2: str) -> list[int]:
    """Transition ids of a well-nested run from ``s1`` to ``s2``."""
    idx = m.loc_index
    a, b = idx[s1], idx[s2]
    if not wr.has(a, b):
        raise NotInWr(f"({s1}, {s2}) is not well-nested reachable")
    return _Unroller(m, wr).run(a, b)


class _Unroller:
    """Depth-first unrolling in a fixed order: empty run, a single nop, a
    push/pop wrap, then a split at the first intermediate location.

    Pairs currently being expanded are blocked so the recursion cannot loop.
    Successes are memoised; a failure is memoised only when it did not rely
    on a blocked pair.
    """

    def __init__(self, m: Model, wr: WellNestedRelation):
        self.m = m
        self.wr = wr
        idx = m.loc_index
        n = len(m.locations)
        self.nops = {}
        self.pushes: list[list] = [[] for _ in range(n)]
        self.pops_into: list[list] = [[] for _ in range(n)]
        for t in m.transitions:
            if t.is_nop:
                self.nops.setdefault((idx[t.src], idx[t.dst]), t.id)
            elif t.is_push:
                self.pushes[idx[t.src]].append(t)
            else:
                self.pops_into[idx[t.dst]].append(t)
        self.done: dict[tuple[int, int], list[int]] = {}
        self.dead: set[tuple[int, int]] = set()
        self.active: set[tuple[int, int]] = set()

    def run(self, a: int, b: int) -> list[int]:
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 20000))
        try:
            result, _ = self._solve(a, b)
        finally:
            sys.setrecursionlimit(limit)
        if result is None:
            raise InternalInconsistency(f"could not unroll well-nested pair {a} -> {b}")
        return result

    def _solve(self, a: int, b: int) -> tuple[Optional[list[int]], bool]:
        """Return (run or None, whether the answer depended on a blocked pair)."""
        key = (a, b)
        if a == b:
            return [], False
        if key in self.done:
            return self.done[key], False
        if key in self.dead or not self.wr.has(a, b):
            return None, False
        if key in self.active:
            return None, True
        self.active.add(key)
        tainted = False
        result = None
        try:
            if key in self.nops:
                result = [self.nops[key]]
            if result is None:
                idx = self.m.loc_index
                for push in self.pushes[a]:
                    inner_src = idx[push.dst]
                    for pop in self.pops_into[b]:
                        if pop.op.stack != push.op.stack or pop.op.symbol != push.op.symbol:
                            continue
                        inner_dst = idx[pop.src]
                        if not self.wr.has(inner_src, inner_dst):
                            continue
                        inner, dep = self._solve(inner_src, inner_dst)
                        tainted |= dep
                        if inner is not None:
                            result = [push.id, *inner, pop.id]
                            break
                    if result is not None:
                        break
            if result is None:
                for mid in range(len(self.m.locations)):
                    if mid in (a, b) or not (self.wr.has(a, mid) and self.wr.has(mid, b)):
                        continue
                    left, dep = self._solve(a, mid)
                    tainted |= dep
                    if left is None:
                        continue
                    right, dep = self._solve(mid, b)
                    tainted |= dep
                    if right is not None:
                        result = left + right
                        break
        finally:
            self.active.discard(key)
        if result is not None:
            self.done[key] = result
            return result, False
        if not tainted:
            self.dead.add(key)
        return None, tainted


# ---------------------------------------------------------------------------
# timed well-nested segments


@dataclass(frozen=True, order=True)
class ProgressMeasure:
    """Lexicographic measure of a timed unrolling call.

    ``rank`` bounds the wrap edges the call may use (wrap edges are numbered
    in the order the fix-point discovered them, and a wrap's inner fact was
    derivable before the wrap existed), ``remaining_elapse`` is the duration
    still to realise and ``distance`` the number of search edges left.
    Recursing into a wrap strictly lowers ``rank``.
    """

    rank: float
    remaining_elapse: int
    distance: int


def timed_wellnested_witness(
    m: Model,
    wrt: TimedWellNested,
    src: TimedState,
    t: int,
    dst: TimedState,
) -> list[RunStep]:
    """Steps of a well-nested run from ``src`` to ``dst`` lasting ``t`` (clamped)."""
    sp = wrt.space
    a, b = sp.sid_of(src), sp.sid_of(dst)
    if not wrt.has(a, t, b):
        raise NotInWrt(f"({src}, {t}, {dst}) is not in the timed well-nested relation")
    return list(normalize_steps(_timed_steps(wrt, a, t, b, float("inf"))))


def _timed_steps(wrt: TimedWellNested, a: int, t: int, b: int, bound: float) -> list[RunStep]:
    cache = wrt._witness_cache
    key = (a, t, b, bound)
    if key in cache:
        return cache[key]
    path = _timed_path(wrt, a, t, b, bound)
    steps: list[RunStep] = []
    for edge in path:
        if edge.kind == "elapse":
            steps.append(Elapse(1))
        elif edge.kind == "nop":
            steps.append(Fire(edge.info[0]))
        else:
            push_id, s1, inner_t, s2, pop_id = edge.info
            inner_measure = ProgressMeasure(edge.rank, inner_t, 0)
            assert inner_measure < ProgressMeasure(bound, t, len(path))
            steps.append(Fire(push_id))
            steps.extend(_timed_steps(wrt, s1, inner_t, s2, edge.rank))
            steps.append(Fire(pop_id))
    cache[key] = steps
    return steps


def _timed_path(wrt: TimedWellNested, a: int, t: int, b: int, bound: float) -> list:
    """Fewest-edge path from (a, 0) to (b, t) using wrap edges below ``bound``."""
    C = wrt.C
    start, goal = (a, 0), (b, t)
    if start == goal:
        return []
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        s, d = node
        for edge in wrt.out[s]:
            if edge.rank >= bound:
                continue
            nxt = (edge.dst, min(d + edge.dur, C))
            if nxt in parent:
                continue
            parent[nxt] = (node, edge)
            if nxt == goal:
                path = []
                cur = nxt
                while parent[cur] is not None:
                    cur, e = parent[cur]
                    path.append(e)
                path.reverse()
                return path
            queue.append(nxt)
    raise InternalInconsistency(f"no derivation for timed fact {a} -{t}-> {b} below rank {bound}")


# ---------------------------------------------------------------------------
# hole witnesses


class _Barrier:
    def __repr__(self) -> str:
        return "Barrier"


BARRIER = _Barrier()


class WitnessStack:
    """Per-stack store of atomic segments awaiting their hole-creation node."""

    def __init__(self) -> None:
        self.items: list = []

    def push(self, item) -> None:
        self.items.append(item)

    def pop_to_barrier(self) -> list:
        """Segments above the topmost barrier, top first; drops the barrier."""
        out = []
        while self.items:
            item = self.items.pop()
            if item is BARRIER:
                return out
            out.append(item)
        raise InternalInconsistency("witness stack has no barrier for this hole")

    def __len__(self) -> int:
        return len(self.items)


def hole_witness(tree: SearchTree) -> list[RunStep]:
    """Explicit run for the accepting leaf of ``tree``."""
    engine = tree.engine
    m = engine.model
    if engine.timed:
        segment = _TimedSegments(engine)
    else:
        segment = _UntimedSegments(engine)
    stacks = {i: WitnessStack() for i in range(1, m.n_stacks + 1)}
    reversed_parts: list[list[RunStep]] = []
    node = tree.leaf
    while node is not None:
        prev, op = tree.parent[node]
        kind = op[0]
        if kind == "prefix":
            reversed_parts.append(segment.wellnested(*op[1:]))
        elif kind == "hole":
            i = op[1]
            parts = stacks[i].pop_to_barrier()
            if not parts:
                raise InternalInconsistency(f"hole on stack {i} was never closed")
            reversed_parts.extend(parts)
        elif kind == "pop":
            _, _, pop_id, how, seg, after, s2 = op[:7]
            t4 = op[7] if engine.timed else None
            reversed_parts.append(segment.wellnested(after, s2, t4))
            reversed_parts.append([Fire(pop_id)])
            i = seg[0]
            if how == "close":
                stacks[i].push(BARRIER)
            stacks[i].push(segment.atomic(seg))
        else:
            raise InternalInconsistency(f"unknown tree operation {op!r}")
        node = prev
    if any(len(s) for s in stacks.values()):
        raise InternalInconsistency("witness stacks are not empty after backtracking")
    steps: list[RunStep] = []
    for part in reversed(reversed_parts):
        steps.extend(part)
    return list(normalize_steps(steps))


class _UntimedSegments:
    def __init__(self, engine: UntimedEngine):
        self.engine = engine
        self.unroller = _Unroller(engine.model, engine.wr)

    def wellnested(self, a: int, b: int, _t=None) -> list[RunStep]:
        return [Fire(tid) for tid in self.unroller.run(a, b)]

    def atomic(self, seg: tuple) -> list[RunStep]:
        i, mid, sym, exit_ = seg
        push_id = self.engine.ahs_push[(i, mid, sym, exit_)]
        push = self.engine.model.transitions[push_id]
        inner = self.unroller.run(self.engine.model.loc_index[push.dst], exit_)
        return [Fire(push_id)] + [Fire(tid) for tid in inner]


class _TimedSegments:
    def __init__(self, engine: TimedEngine):
        self.engine = engine

    def wellnested(self, a: int, b: int, t: int) -> list[RunStep]:
        return _timed_steps(self.engine.wr, a, t, b, float("inf"))

    def atomic(self, seg: tuple) -> list[RunStep]:
        i, mid, sym, exit_, t2 = seg
        engine = self.engine
        push_id = engine.ahs_push[(i, mid, sym, exit_, t2)]
        push = engine.model.transitions[push_id]
        sp = engine.space
        s1 = sp.sid(engine.model.loc_index[push.dst], push.apply_resets(sp.val(mid)))
        return [Fire(push_id)] + _timed_steps(engine.wr, s1, t2, exit_, float("inf"))


def assemble_witness(outcome: Reachable, m: Optional[Model] = None) -> Witness:
    """Witness file contents for a successful search."""
    if not isinstance(outcome, Reachable):
        raise ValueError("only a Reachable outcome has a witness")
    steps = hole_witness(outcome.tree)
    return Witness(tuple(steps), hole_bound=outcome.hole_bound)


__all__ = [
    "BARRIER",
    "ProgressMeasure",
    "WitnessStack",
    "assemble_witness",
    "hole_witness",
    "timed_wellnested_witness",
    "wellnested_witness",
]
