"""Well-nested reachability: the untimed relation WR and its timed version WRT.

Relations over locations are stored as one bitmask row per source location.
The timed relation lives on the clamped state space (location, valuation)
where every clock saturates at its own ``cmax + 1``; durations saturate at
``cmax_stack + 1``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, NamedTuple, Optional

from .errors import StateSpaceTooLarge
from .model import Model, Nop, Pop, Push, Transition

DEFAULT_STATE_CAP = 10**7


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ---------------------------------------------------------------------------
# plain transitive closure


def _closure_rows(rows: list[int]) -> list[int]:
    """Warshall's algorithm on bitmask rows (not reflexive by itself)."""
    rows = list(rows)
    n = len(rows)
    for k in range(n):
        bit = 1 << k
        row_k = rows[k]
        for i in range(n):
            if rows[i] & bit:
                rows[i] |= row_k
    return rows


def transitive_closure(rel: Iterable[tuple], carrier: Optional[Iterable] = None) -> set[tuple]:
    """Reflexive-transitive closure of ``rel`` over ``carrier``.

    Every carrier element (and every element mentioned in ``rel``) gets its
    reflexive pair, mirroring the seed of the well-nested fix-point.
    """
    rel = list(rel)
    elements = list(dict.fromkeys([*(carrier or ()), *(x for p in rel for x in p)]))
    index = {x: i for i, x in enumerate(elements)}
    rows = [1 << i for i in range(len(elements))]
    for a, b in rel:
        rows[index[a]] |= 1 << index[b]
    rows = _closure_rows(rows)
    return {(elements[i], elements[j]) for i, row in enumerate(rows) for j in _bits(row)}


# ---------------------------------------------------------------------------
# untimed WR


@dataclass
class WellNestedRelation:
    """WR for an untimed model; ``rows[i]`` has bit j iff (i, j) is in WR.

    ``plus_rows`` holds the pairs connected by a *non-empty* well-nested run.
    """

    model: Model
    rows: list[int]
    plus_rows: list[int]
    rounds: int

    def __contains__(self, pair: tuple[str, str]) -> bool:
        idx = self.model.loc_index
        a, b = pair
        return bool(self.rows[idx[a]] >> idx[b] & 1)

    def has(self, a: int, b: int) -> bool:
        return bool(self.rows[a] >> b & 1)

    def has_nonempty(self, a: int, b: int) -> bool:
        return bool(self.plus_rows[a] >> b & 1)

    def successors(self, a: int) -> list[int]:
        return list(_bits(self.rows[a]))

    def pairs(self) -> set[tuple[str, str]]:
        locs = self.model.locations
        return {(locs[i], locs[j]) for i, row in enumerate(self.rows) for j in _bits(row)}

    def __len__(self) -> int:
        return sum(bin(row).count("1") for row in self.rows)


def compute_wr(m: Model) -> WellNestedRelation:
    """Fix-point of nop steps, push/pop wrapping and transitive closure."""
    idx = m.loc_index
    n = len(m.locations)
    pushes = [t for t in m.transitions if isinstance(t.op, Push)]
    pops_by_key: dict[tuple[int, str], list[Transition]] = {}
    for t in m.transitions:
        if isinstance(t.op, Pop):
            pops_by_key.setdefault((t.op.stack, t.op.symbol), []).append(t)

    plus = [0] * n
    for t in m.transitions:
        if isinstance(t.op, Nop):
            plus[idx[t.src]] |= 1 << idx[t.dst]
    plus = _closure_rows(plus)
    rounds = 0
    while True:
        rounds += 1
        wr = [plus[i] | (1 << i) for i in range(n)]
        grown = list(plus)
        for push in pushes:
            inner = wr[idx[push.dst]]
            for pop in pops_by_key.get((push.op.stack, push.op.symbol), ()):
                if inner >> idx[pop.src] & 1:
                    grown[idx[push.src]] |= 1 << idx[pop.dst]
        grown = _closure_rows(grown)
        if grown == plus:
            break
        plus = grown
    rows = [plus[i] | (1 << i) for i in range(n)]
    return WellNestedRelation(m, rows, plus, rounds)


# ---------------------------------------------------------------------------
# clamped timed state space


class TimedState(NamedTuple):
    loc: str
    val: tuple[int, ...]

    def __str__(self) -> str:
        if not self.val:
            return self.loc
        return f"{self.loc}({','.join(map(str, self.val))})"


class StateSpace:
    """Dense indexing of clamped states ``loc * V + valuation_index``."""

    def __init__(self, m: Model, cap: int = DEFAULT_STATE_CAP):
        self.model = m
        self.limits = tuple(c + 1 for c in m.cmax_clock)  # clamp value per clock
        self.radix = tuple(c + 1 for c in self.limits)
        size = 1
        for r in self.radix:
            size *= r
        self.n_vals = size
        self.size = size * len(m.locations)
        if self.size > cap:
            raise StateSpaceTooLarge(f"{self.size} clamped states exceed the cap of {cap}")
        self.duration_cap = m.cmax_stack + 1
        self.valuations = list(product(*(range(r) for r in self.radix)))
        self._val_index = {v: i for i, v in enumerate(self.valuations)}
        self._elapse = [self._val_index[self.clamp(tuple(x + 1 for x in v))] for v in self.valuations]

    def clamp(self, val: Iterable[int]) -> tuple[int, ...]:
        return tuple(min(x, lim) for x, lim in zip(val, self.limits))

    def sid(self, loc: int, val: tuple[int, ...]) -> int:
        return loc * self.n_vals + self._val_index[self.clamp(val)]

    def sid_of(self, state: TimedState) -> int:
        return self.sid(self.model.loc_index[state.loc], state.val)

    def loc(self, sid: int) -> int:
        return sid // self.n_vals

    def val(self, sid: int) -> tuple[int, ...]:
        return self.valuations[sid % self.n_vals]

    def state(self, sid: int) -> TimedState:
        return TimedState(self.model.locations[sid // self.n_vals], self.valuations[sid % self.n_vals])

    def elapse(self, sid: int, t: int = 1) -> int:
        loc, v = divmod(sid, self.n_vals)
        for _ in range(t):
            nv = self._elapse[v]
            if nv == v:
                break
            v = nv
        return loc * self.n_vals + v

    def add(self, a: int, b: int) -> int:
        """Clamped sum of two durations."""
        return min(a + b, self.duration_cap)

    def initial(self) -> int:
        return self.sid(self.model.loc_index[self.model.initial], (0,) * self.model.n_clocks)


def enumerate_states(m: Model, cap: int = DEFAULT_STATE_CAP) -> set[TimedState]:
    """All clamped states; ``|S| * prod(cmax_c + 2)`` of them."""
    space = StateSpace(m, cap)
    return {space.state(s) for s in range(space.size)}


class WrtEntry(NamedTuple):
    src: TimedState
    t: int
    dst: TimedState


def time_elapse_closure(s: TimedState, cap: int, cmax_clock: Iterable[int]) -> set[WrtEntry]:
    """States reachable from ``s`` by letting ``t = 0..cap`` units elapse."""
    limits = [c + 1 for c in cmax_clock]
    out = set()
    for t in range(cap + 1):
        val = tuple(min(x + t, lim) for x, lim in zip(s.val, limits))
        out.add(WrtEntry(s, t, TimedState(s.loc, val)))
    return out


# ---------------------------------------------------------------------------
# timed WRT


class Edge(NamedTuple):
    dst: int
    dur: int
    rank: int  # -1 for elapse and nop edges; wrap edges are numbered in discovery order
    kind: str  # "elapse", "nop" or "wrap"
    info: tuple  # nop: (tid,); wrap: (push tid, s1, inner t, s2, pop tid)


class TimedWellNested:
    """WRT as reverse reachability masks: ``reach[b][d]`` holds every source
    ``a`` with a well-nested run from ``a`` to ``b`` of clamped duration ``d``.

    The fix-point is computed with a work list over (state, duration) nodes.
    Unit elapses, guarded nops and discovered push/pop wraps are the edges;
    composing along edges is the timed transitive closure, so the result is
    the same least fix-point as alternating wrap and closure passes.
    """

    def __init__(self, m: Model, cap: int = DEFAULT_STATE_CAP):
        self.model = m
        self.space = sp = StateSpace(m, cap)
        self.C = C = sp.duration_cap
        n = sp.size
        self.out: list[list[Edge]] = [[] for _ in range(n)]
        nop_by_loc: dict[int, list[Transition]] = {}
        push_by_loc: dict[int, list[Transition]] = {}
        pop_by_loc: dict[int, list[Transition]] = {}
        for t in m.transitions:
            bucket = nop_by_loc if t.is_nop else push_by_loc if t.is_push else pop_by_loc
            bucket.setdefault(m.loc_index[t.src], []).append(t)
        self.pre_push: list[list[tuple[int, Transition]]] = [[] for _ in range(n)]
        self.pops_at: list[list[tuple[Transition, int]]] = [[] for _ in range(n)]
        for s in range(n):
            loc, val = sp.loc(s), sp.val(s)
            nxt = sp.elapse(s)
            self.out[s].append(Edge(nxt, 1, -1, "elapse", ()))
            for t in nop_by_loc.get(loc, ()):
                if t.guard.holds(val):
                    dst = sp.sid(m.loc_index[t.dst], t.apply_resets(val))
                    self.out[s].append(Edge(dst, 0, -1, "nop", (t.id,)))
            for t in push_by_loc.get(loc, ()):
                if t.guard.holds(val):
                    s1 = sp.sid(m.loc_index[t.dst], t.apply_resets(val))
                    self.pre_push[s1].append((s, t))
            for t in pop_by_loc.get(loc, ()):
                if t.guard.holds(val):
                    self.pops_at[s].append((t, sp.sid(m.loc_index[t.dst], t.apply_resets(val))))
        self.reach = [[0] * (C + 1) for _ in range(n)]
        self.wrap_edges: dict[tuple[int, int, int], Edge] = {}
        self._fwd: Optional[list[list[tuple[int, int]]]] = None
        self._witness_cache: dict = {}
        self._solve()

    # -- fix-point -----------------------------------------------------------
    def _solve(self) -> None:
        C = self.C
        reach = self.reach
        pending: dict[tuple[int, int], int] = {}
        queue: deque = deque()
        new_edges: deque = deque()

        def offer(b: int, d: int, mask: int) -> None:
            new = mask & ~reach[b][d]
            if not new:
                return
            reach[b][d] |= new
            key = (b, d)
            if key in pending:
                pending[key] |= new
            else:
                pending[key] = new
                queue.append(key)
            for pop, tgt in self.pops_at[b]:
                if not pop.op.interval.contains_clamped(d, C):
                    continue
                for s1 in _bits(new):
                    for a, push in self.pre_push[s1]:
                        if push.op.stack == pop.op.stack and push.op.symbol == pop.op.symbol:
                            new_edges.append((a, tgt, d, (push.id, s1, d, b, pop.id)))

        for s in range(len(reach)):
            offer(s, 0, 1 << s)
        while queue or new_edges:
            while new_edges:
                a, tgt, dur, info = new_edges.popleft()
                key = (a, tgt, dur)
                if key in self.wrap_edges:
                    continue
                edge = Edge(tgt, dur, len(self.wrap_edges), "wrap", info)
                self.wrap_edges[key] = edge
                self.out[a].append(edge)
                row = reach[a]
                for d in range(C + 1):
                    if row[d]:
                        offer(tgt, min(d + dur, C), row[d])
            if not queue:
                break
            key = queue.popleft()
            delta = pending.pop(key)
            b, d = key
            for edge in self.out[b]:
                offer(edge.dst, min(d + edge.dur, C), delta)

    # -- queries -------------------------------------------------------------
    def has(self, a: int, t: int, b: int) -> bool:
        return bool(self.reach[b][t] >> a & 1)

    def __contains__(self, entry: tuple) -> bool:
        src, t, dst = entry
        sp = self.space
        return self.has(sp.sid_of(src), t, sp.sid_of(dst))

    def forward(self, a: int) -> list[tuple[int, int]]:
        """All ``(t, b)`` with ``(a, t, b)`` in WRT, ordered by duration."""
        if self._fwd is None:
            fwd: list[list[tuple[int, int]]] = [[] for _ in range(self.space.size)]
            for b, row in enumerate(self.reach):
                for d, mask in enumerate(row):
                    for src in _bits(mask):
                        fwd[src].append((d, b))
            for lst in fwd:
                lst.sort()
            self._fwd = fwd
        return self._fwd[a]

    def entries(self) -> Iterator[WrtEntry]:
        sp = self.space
        for b, row in enumerate(self.reach):
            for d, mask in enumerate(row):
                for a in _bits(mask):
                    yield WrtEntry(sp.state(a), d, sp.state(b))

    def __len__(self) -> int:
        return sum(bin(mask).count("1") for row in self.reach for mask in row)

    def projection(self) -> set[tuple[str, str]]:
        """Location pairs, forgetting valuations and durations."""
        sp = self.space
        locs = self.model.locations
        out = set()
        for b, row in enumerate(self.reach):
            mask = 0
            for m_ in row:
                mask |= m_
            for a in _bits(mask):
                out.add((locs[sp.loc(a)], locs[sp.loc(b)]))
        return out


def compute_wrt(m: Model, cap: int = DEFAULT_STATE_CAP) -> TimedWellNested:
    return TimedWellNested(m, cap)


__all__ = [
    "DEFAULT_STATE_CAP",
    "Edge",
    "StateSpace",
    "TimedState",
    "TimedWellNested",
    "WellNestedRelation",
    "WrtEntry",
    "compute_wr",
    "compute_wrt",
    "enumerate_states",
    "time_elapse_closure",
    "transitive_closure",
]
