"""Hole-bounded reachability by breadth-first search over exploration lists.

An exploration list summarises a partial run by the holes that are still
open (one triple per hole: stack, entry state, exit state) followed by the
current state.  Intermediate states are forgotten once a hole or pop has
been appended, so a list with ``h`` open holes has ``h`` triples and one
trailing state.

Timed lists additionally store, per hole, its clamped duration and the
clamped time that elapsed between the hole's exit and the next hole (or the
current position).  Those two numbers are all that is needed to compute the
age of the symbol removed by a later pop.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple, Optional, Union

from .closure import (
    TimedState,
    TimedWellNested,
    WellNestedRelation,
    _bits,
    _closure_rows,
    compute_wr,
    compute_wrt,
)
from .errors import BudgetExceeded
from .model import Model

NODE_CAP_LIMIT = 10**7


@dataclass(frozen=True)
class AtomicHoleSeg:
    stack: int
    entry: Union[str, TimedState]
    symbol: str
    exit: Union[str, TimedState]
    t: Optional[int] = None


@dataclass(frozen=True)
class HoleTriple:
    stack: int
    entry: Union[str, TimedState]
    exit: Union[str, TimedState]
    t: Optional[int] = None


class ExplorationList(NamedTuple):
    """One search node.

    ``holes`` holds ``(stack, entry, exit)`` per open hole (untimed) or
    ``(stack, entry, exit, duration, gap_after)`` (timed); states are dense
    integer ids of the owning engine.  ``last`` is the current state.
    """

    holes: tuple
    last: int

    @property
    def open_holes(self) -> int:
        return len(self.holes)


# ---------------------------------------------------------------------------
# hole segments and the two search engines


class UntimedEngine:
    """AHS/HS tables and list successor functions for an MPDA."""

    timed = False

    def __init__(self, m: Model, wr: Optional[WellNestedRelation] = None):
        self.model = m
        self.wr = wr if wr is not None else compute_wr(m)
        idx = m.loc_index
        n = len(m.locations)
        self.n_states = n
        self.initial = idx[m.initial]
        self.finals = frozenset(idx[f] for f in m.finals)
        # (stack, entry, symbol, exit) -> push transition realising it
        self.ahs_push: dict[tuple[int, int, str, int], int] = {}
        # (stack, exit, symbol) -> entries
        self.ahs_into: dict[tuple[int, int, str], list[int]] = {}
        base = {i: [0] * n for i in range(1, m.n_stacks + 1)}
        for t in m.transitions:
            if not t.is_push:
                continue
            i, sym, a = t.op.stack, t.op.symbol, idx[t.src]
            for w in self.wr.successors(idx[t.dst]):
                key = (i, a, sym, w)
                if key in self.ahs_push:
                    continue
                self.ahs_push[key] = t.id
                self.ahs_into.setdefault((i, w, sym), []).append(a)
                base[i][a] |= 1 << w
        self.hs_rows = {i: _closure_rows(rows) for i, rows in base.items()}
        self.pops: list[list] = [[] for _ in range(n)]
        for t in m.transitions:
            if t.is_pop:
                self.pops[idx[t.src]].append(t)

    @property
    def wr_size(self) -> int:
        return len(self.wr)

    def name(self, s: int) -> str:
        return self.model.locations[s]

    def ahs_sets(self) -> tuple[dict[int, set[AtomicHoleSeg]], dict[int, set[HoleTriple]]]:
        ahs: dict[int, set[AtomicHoleSeg]] = {i: set() for i in self.hs_rows}
        hs: dict[int, set[HoleTriple]] = {i: set() for i in self.hs_rows}
        for i, a, sym, w in self.ahs_push:
            ahs[i].add(AtomicHoleSeg(i, self.name(a), sym, self.name(w)))
        for i, rows in self.hs_rows.items():
            for a, row in enumerate(rows):
                for w in _bits(row):
                    hs[i].add(HoleTriple(i, self.name(a), self.name(w)))
        return ahs, hs

    def roots(self) -> Iterator[tuple[ExplorationList, tuple]]:
        for s in self.wr.successors(self.initial):
            yield ExplorationList((), s), ("prefix", self.initial, s)

    def roots_from(self, s: int) -> Iterator[tuple[ExplorationList, tuple]]:
        for d in self.wr.successors(s):
            yield ExplorationList((), d), ("prefix", s, d)

    def holes_from(self, mu: ExplorationList) -> Iterator[tuple[ExplorationList, tuple]]:
        last = mu.last
        for i, rows in self.hs_rows.items():
            for x in _bits(rows[last]):
                yield ExplorationList(mu.holes + ((i, last, x),), x), ("hole", i, last, x)

    def pops_from(self, mu: ExplorationList) -> Iterator[tuple[ExplorationList, tuple]]:
        holes = mu.holes
        idx = self.model.loc_index
        for p in self.pops[mu.last]:
            i, sym = p.op.stack, p.op.symbol
            j = _rightmost(holes, i)
            if j < 0:
                continue
            _, entry, exit_ = holes[j]
            options = []
            for mid in self.ahs_into.get((i, exit_, sym), ()):
                if mid == entry:
                    options.append((holes[:j] + holes[j + 1 :], "close", mid))
                if self.hs_rows[i][entry] >> mid & 1:
                    options.append((holes[:j] + ((i, entry, mid),) + holes[j + 1 :], "shrink", mid))
            if not options:
                continue
            after = idx[p.dst]
            for new_holes, kind, mid in options:
                for s2 in self.wr.successors(after):
                    op = ("pop", j, p.id, kind, (i, mid, sym, exit_), after, s2)
                    yield ExplorationList(new_holes, s2), op

    def list_bound(self, k: int) -> int:
        """Exact count of syntactically possible lists with at most ``k`` holes."""
        s, n = self.n_states, self.model.n_stacks
        return sum(s ** (2 * h + 1) * n**h for h in range(k + 1))


class TimedEngine:
    """AHS/HS tables over clamped timed states, with durations."""

    timed = True

    def __init__(self, m: Model, wrt: Optional[TimedWellNested] = None):
        self.model = m
        self.wr = wrt if wrt is not None else compute_wrt(m)
        self.space = sp = self.wr.space
        self.C = C = sp.duration_cap
        self.n_states = sp.size
        self.initial = sp.initial()
        final_locs = {m.loc_index[f] for f in m.finals}
        self.finals = frozenset(s for s in range(sp.size) if sp.loc(s) in final_locs)
        n = sp.size
        stacks = range(1, m.n_stacks + 1)
        self.ahs_push: dict[tuple[int, int, str, int, int], int] = {}
        # (stack, exit, symbol) -> [(entry, duration)]
        self.ahs_into: dict[tuple[int, int, str], list[tuple[int, int]]] = {}
        ahs_out: dict[int, list[list[tuple[int, int]]]] = {i: [[] for _ in range(n)] for i in stacks}
        for t in m.transitions:
            if not t.is_push:
                continue
            i, sym = t.op.stack, t.op.symbol
            dst_loc = m.loc_index[t.dst]
            for a in range(n):
                if sp.loc(a) != m.loc_index[t.src] or not t.guard.holds(sp.val(a)):
                    continue
                s1 = sp.sid(dst_loc, t.apply_resets(sp.val(a)))
                for d, w in self.wr.forward(s1):
                    key = (i, a, sym, w, d)
                    if key in self.ahs_push:
                        continue
                    self.ahs_push[key] = t.id
                    self.ahs_into.setdefault((i, w, sym), []).append((a, d))
                    if (w, d) not in ahs_out[i][a]:
                        ahs_out[i][a].append((w, d))
        # HS: non-reflexive timed closure of the AHS edges, per stack
        self.hs_reach = {i: self._closure(ahs_out[i]) for i in stacks}
        self.hs_fwd: dict[int, list[list[tuple[int, int]]]] = {}
        for i, reach in self.hs_reach.items():
            fwd: list[list[tuple[int, int]]] = [[] for _ in range(n)]
            for b, row in enumerate(reach):
                for d, mask in enumerate(row):
                    for a in _bits(mask):
                        fwd[a].append((d, b))
            for lst in fwd:
                lst.sort()
            self.hs_fwd[i] = fwd
        self.pops: list[list] = [[] for _ in range(n)]
        for t in m.transitions:
            if not t.is_pop:
                continue
            for a in range(n):
                if sp.loc(a) == m.loc_index[t.src] and t.guard.holds(sp.val(a)):
                    after = sp.sid(m.loc_index[t.dst], t.apply_resets(sp.val(a)))
                    self.pops[a].append((t, after))

    def _closure(self, edges: list[list[tuple[int, int]]]) -> list[list[int]]:
        C = self.C
        reach = [[0] * (C + 1) for _ in range(len(edges))]
        queue: deque = deque()
        pending: dict[tuple[int, int], int] = {}

        def offer(b: int, d: int, mask: int) -> None:
            new = mask & ~reach[b][d]
            if not new:
                return
            reach[b][d] |= new
            if (b, d) in pending:
                pending[(b, d)] |= new
            else:
                pending[(b, d)] = new
                queue.append((b, d))

        for a, out in enumerate(edges):
            for w, d in out:
                offer(w, d, 1 << a)
        while queue:
            b, d = queue.popleft()
            delta = pending.pop((b, d))
            for w, d2 in edges[b]:
                offer(w, min(d + d2, C), delta)
        return reach

    @property
    def wr_size(self) -> int:
        return len(self.wr)

    def name(self, s: int) -> TimedState:
        return self.space.state(s)

    def ahs_sets(self) -> tuple[dict[int, set[AtomicHoleSeg]], dict[int, set[HoleTriple]]]:
        ahs: dict[int, set[AtomicHoleSeg]] = {i: set() for i in self.hs_fwd}
        hs: dict[int, set[HoleTriple]] = {i: set() for i in self.hs_fwd}
        for i, a, sym, w, d in self.ahs_push:
            ahs[i].add(AtomicHoleSeg(i, self.name(a), sym, self.name(w), d))
        for i, fwd in self.hs_fwd.items():
            for a, lst in enumerate(fwd):
                for d, w in lst:
                    hs[i].add(HoleTriple(i, self.name(a), self.name(w), d))
        return ahs, hs

    def has_hs(self, i: int, a: int, d: int, b: int) -> bool:
        return bool(self.hs_reach[i][b][d] >> a & 1)

    def roots(self) -> Iterator[tuple[ExplorationList, tuple]]:
        return self.roots_from(self.initial)

    def roots_from(self, s: int) -> Iterator[tuple[ExplorationList, tuple]]:
        for d, b in self.wr.forward(s):
            yield ExplorationList((), b), ("prefix", s, b, d)

    def holes_from(self, mu: ExplorationList) -> Iterator[tuple[ExplorationList, tuple]]:
        last = mu.last
        for i, fwd in self.hs_fwd.items():
            for d, x in fwd[last]:
                yield ExplorationList(mu.holes + ((i, last, x, d, 0),), x), ("hole", i, last, x, d)

    def pops_from(self, mu: ExplorationList) -> Iterator[tuple[ExplorationList, tuple]]:
        holes = mu.holes
        C = self.C
        for p, after in self.pops[mu.last]:
            i, sym = p.op.stack, p.op.symbol
            j = _rightmost(holes, i)
            if j < 0:
                continue
            _, entry, exit_, hdur, gap = holes[j]
            # time from the hole's exit to now
            t3 = gap
            for h in holes[j + 1 :]:
                t3 = min(t3 + h[3] + h[4], C)
            interval = p.op.interval
            options = []
            for mid, t2 in self.ahs_into.get((i, exit_, sym), ()):
                if not interval.contains_clamped(min(t2 + t3, C), C):
                    continue
                seg = (i, mid, sym, exit_, t2)
                if mid == entry and t2 == hdur:
                    rest = holes[:j] + holes[j + 1 :]
                    if j > 0:
                        prev = rest[j - 1]
                        merged = min(prev[4] + hdur + gap, C)
                        rest = rest[: j - 1] + (prev[:4] + (merged,),) + rest[j:]
                    options.append((rest, "close", seg))
                for t1 in range(C + 1):
                    if min(t1 + t2, C) == hdur and self.has_hs(i, entry, t1, mid):
                        shrunk = (i, entry, mid, t1, min(t2 + gap, C))
                        options.append((holes[:j] + (shrunk,) + holes[j + 1 :], "shrink", seg))
            for new_holes, kind, seg in options:
                for t4, s2 in self.wr.forward(after):
                    if new_holes:
                        lh = new_holes[-1]
                        tail = new_holes[:-1] + (lh[:4] + (min(lh[4] + t4, C),),)
                    else:
                        tail = new_holes
                    op = ("pop", j, p.id, kind, seg, after, s2, t4)
                    yield ExplorationList(tail, s2), op

    def list_bound(self, k: int) -> int:
        s, n, c = self.n_states, self.model.n_stacks, self.C + 1
        return sum(s ** (2 * h + 1) * n**h * c ** (2 * h) for h in range(k + 1))


Engine = Union[UntimedEngine, TimedEngine]


def _rightmost(holes: tuple, stack: int) -> int:
    for j in range(len(holes) - 1, -1, -1):
        if holes[j][0] == stack:
            return j
    return -1


def make_engine(m: Model, wr=None) -> Engine:
    return TimedEngine(m, wr) if m.timed else UntimedEngine(m, wr)


# ---------------------------------------------------------------------------
# public operations


def compute_ahs_hs(m: Model, wr=None):
    """Atomic hole segments and hole triples, per stack."""
    return make_engine(m, wr).ahs_sets()


def extend_with_hole(mu: ExplorationList, engine: Engine, k: int) -> list[ExplorationList]:
    if mu.open_holes >= k:
        return []
    return [child for child, _ in engine.holes_from(mu)]


def extend_with_pop(mu: ExplorationList, engine: Engine) -> list[ExplorationList]:
    if not mu.holes:
        return []
    return [child for child, _ in engine.pops_from(mu)]


@dataclass
class StageStats:
    k: int
    lists: int
    wr_size: int
    outcome: str
    seconds: float = 0.0

    def as_json(self) -> dict:
        return {"k": self.k, "lists": self.lists, "wr_size": self.wr_size, "outcome": self.outcome}


@dataclass
class SearchTree:
    """Parent pointers of one BFS stage, enough to rebuild a witness."""

    engine: Engine
    k: int
    parent: dict
    leaf: ExplorationList

    def path(self) -> list[tuple]:
        """Generating operations from the root to the leaf, in order."""
        ops = []
        node = self.leaf
        while node is not None:
            prev, op = self.parent[node]
            ops.append(op)
            node = prev
        ops.reverse()
        return ops


@dataclass
class Reachable:
    hole_bound: int
    tree: SearchTree
    stats: list[StageStats] = field(default_factory=list)

    def __bool__(self) -> bool:
        return True


@dataclass
class EmptyUpTo:
    K: int
    stats: list[StageStats] = field(default_factory=list)

    def __bool__(self) -> bool:
        return False


SearchOutcome = Union[Reachable, EmptyUpTo]


def default_node_cap(engine: Engine, K: int) -> int:
    """``|S|^(2K+3) * n^(K+1)``, raised to the exact count of possible lists
    when that is larger and clamped to ten million."""
    bound = engine.n_states ** (2 * K + 3) * engine.model.n_stacks ** (K + 1)
    return min(max(bound, engine.list_bound(K)), NODE_CAP_LIMIT)


def _bfs(
    engine: Engine,
    k: int,
    roots: Iterator[tuple[ExplorationList, tuple]],
    accept: Callable[[ExplorationList], bool],
    node_cap: int,
    *,
    accept_roots: bool = True,
    accept_duplicates: bool = False,
) -> tuple[Optional[ExplorationList], dict]:
    parent: dict = {}
    queue: deque = deque()
    for mu, op in roots:
        if mu in parent:
            continue
        parent[mu] = (None, op)
        if accept_roots and accept(mu):
            return mu, parent
        queue.append(mu)
    while queue:
        mu = queue.popleft()
        children = []
        if len(mu.holes) < k:
            children.append(engine.holes_from(mu))
        if mu.holes:
            children.append(engine.pops_from(mu))
        for gen in children:
            for child, op in gen:
                if child in parent:
                    if accept_duplicates and accept(child):
                        return child, parent
                    continue
                parent[child] = (mu, op)
                if len(parent) > node_cap:
                    raise BudgetExceeded(len(parent), node_cap)
                if accept(child):
                    return child, parent
                queue.append(child)
    return None, parent


def check_reachable(
    m: Model,
    K: int,
    *,
    engine: Optional[Engine] = None,
    node_cap: Optional[int] = None,
    on_stage: Optional[Callable[[StageStats], None]] = None,
) -> SearchOutcome:
    """Iterative deepening over k = 0..K; the first k with an accepting list
    is the reported hole bound."""
    if K < 0:
        raise ValueError("K must be non-negative")
    engine = engine if engine is not None else make_engine(m)
    cap = node_cap if node_cap is not None else default_node_cap(engine, K)
    finals = engine.finals

    def accept(mu: ExplorationList) -> bool:
        return not mu.holes and mu.last in finals

    stats: list[StageStats] = []
    for k in range(K + 1):
        started = time.perf_counter()
        leaf, parent = _bfs(engine, k, engine.roots(), accept, cap)
        stage = StageStats(
            k, len(parent), engine.wr_size, "nonempty" if leaf is not None else "empty",
            time.perf_counter() - started,
        )
        stats.append(stage)
        if on_stage is not None:
            on_stage(stage)
        if leaf is not None:
            return Reachable(k, SearchTree(engine, k, parent, leaf), stats)
    return EmptyUpTo(K, stats)


def repeated_reachability(m: Model, target: str, K: int, mode: int) -> bool:
    """Can ``target`` be visited infinitely often, under one of three
    decompositions of the lasso (untimed models only)."""
    if m.timed:
        raise ValueError("repeated reachability is defined for untimed models")
    engine = UntimedEngine(m)
    wr = engine.wr
    tgt = m.loc_index[target]
    if mode == 1:
        return wr.has_nonempty(engine.initial, tgt) and wr.has_nonempty(tgt, tgt)
    if mode == 2:
        stem = check_reachable(m.with_finals([target]), K)
        return bool(stem) and wr.has_nonempty(tgt, tgt)
    if mode != 3:
        raise ValueError(f"mode must be 1, 2 or 3, got {mode}")
    cap = default_node_cap(engine, K)

    def reach_target(mu: ExplorationList) -> bool:
        return mu.last == tgt

    stem, _ = _bfs(engine, K, engine.roots(), reach_target, cap)
    if stem is None:
        return False
    if wr.has_nonempty(tgt, tgt):
        return True
    # A non-empty lap: some hole or pop step lands back on target.  Roots are
    # well-nested prefixes, so they never count on their own, and a list that
    # equals an already-seen one still witnesses a lap.
    leaf, _ = _bfs(
        engine, K, engine.roots_from(tgt), reach_target, cap,
        accept_roots=False, accept_duplicates=True,
    )
    return leaf is not None


__all__ = [
    "AtomicHoleSeg",
    "EmptyUpTo",
    "ExplorationList",
    "HoleTriple",
    "Reachable",
    "SearchOutcome",
    "SearchTree",
    "StageStats",
    "TimedEngine",
    "UntimedEngine",
    "check_reachable",
    "compute_ahs_hs",
    "default_node_cap",
    "extend_with_hole",
    "extend_with_pop",
    "make_engine",
    "repeated_reachability",
]
