"""Exact configuration semantics, run replay and a brute-force oracle.

Nothing in this module clamps clock values or ages: it is the reference
against which the fix-point and search modules are tested.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .errors import BudgetExceeded, NotAccepting, StepDisabled
from .model import Model, Nop, Pop, Push

Stack = tuple[tuple[str, int], ...]  # bottom first; entries are (symbol, age)


@dataclass(frozen=True)
class Configuration:
    loc: str
    stacks: tuple[Stack, ...]
    clocks: tuple[int, ...] = ()
    elapsed: int = 0


@dataclass(frozen=True)
class Elapse:
    t: int

    def __str__(self) -> str:
        return f"elapse {self.t}"


@dataclass(frozen=True)
class Fire:
    tid: int

    def __str__(self) -> str:
        return f"fire {self.tid}"


RunStep = Union[Elapse, Fire]


@dataclass(frozen=True)
class Witness:
    steps: tuple[RunStep, ...]
    hole_bound: int = 0

    @property
    def transitions(self) -> list[int]:
        return [s.tid for s in self.steps if isinstance(s, Fire)]

    @property
    def total_elapse(self) -> int:
        return sum(s.t for s in self.steps if isinstance(s, Elapse))


@dataclass(frozen=True)
class Accepting:
    final: Configuration

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Rejected:
    index: int
    reason: str

    def __bool__(self) -> bool:
        return False


def initial_configuration(m: Model) -> Configuration:
    return Configuration(m.initial, tuple(() for _ in range(m.n_stacks)), (0,) * m.n_clocks, 0)


def step(m: Model, c: Configuration, s: RunStep) -> Configuration:
    """Apply one run step, raising :class:`StepDisabled` if it cannot fire."""
    if isinstance(s, Elapse):
        if s.t < 1:
            raise StepDisabled(f"elapse must be positive, got {s.t}")
        stacks = tuple(tuple((sym, age + s.t) for sym, age in st) for st in c.stacks)
        clocks = tuple(v + s.t for v in c.clocks)
        return Configuration(c.loc, stacks, clocks, c.elapsed + s.t)
    if not 0 <= s.tid < len(m.transitions):
        raise StepDisabled(f"unknown transition {s.tid}")
    t = m.transitions[s.tid]
    if t.src != c.loc:
        raise StepDisabled(f"transition {t.id} leaves {t.src}, current location is {c.loc}")
    if not t.guard.holds(c.clocks):
        raise StepDisabled(f"guard {t.guard} of transition {t.id} is false at {c.clocks}")
    stacks = c.stacks
    if isinstance(t.op, Push):
        i = t.op.stack - 1
        stacks = stacks[:i] + (stacks[i] + ((t.op.symbol, 0),),) + stacks[i + 1 :]
    elif isinstance(t.op, Pop):
        i = t.op.stack - 1
        if not stacks[i]:
            raise StepDisabled(f"transition {t.id} pops empty stack {t.op.stack}")
        symbol, age = stacks[i][-1]
        if symbol != t.op.symbol:
            raise StepDisabled(
                f"transition {t.id} pops {t.op.symbol} but the top of stack {t.op.stack} is {symbol}"
            )
        if not t.op.interval.contains(age):
            raise StepDisabled(f"age {age} of {symbol} is outside [{t.op.interval}]")
        stacks = stacks[:i] + (stacks[i][:-1],) + stacks[i + 1 :]
    return Configuration(t.dst, stacks, t.apply_resets(c.clocks), c.elapsed)


def is_accepting(m: Model, c: Configuration) -> bool:
    return c.loc in m.finals and all(not st for st in c.stacks)


def replay(m: Model, w: Union[Witness, Iterable[RunStep]]) -> Union[Accepting, Rejected]:
    """Run ``w`` from the initial configuration and report acceptance."""
    steps = w.steps if isinstance(w, Witness) else tuple(w)
    c = initial_configuration(m)
    for index, s in enumerate(steps):
        try:
            c = step(m, c, s)
        except StepDisabled as exc:
            return Rejected(index, exc.reason)
    if c.loc not in m.finals:
        return Rejected(len(steps), f"location {c.loc} is not final")
    if any(c.stacks):
        return Rejected(len(steps), "stacks are not empty")
    return Accepting(c)


def run_segment(m: Model, start: Configuration, steps: Iterable[RunStep]) -> Configuration:
    """Fire ``steps`` from an arbitrary configuration (raises on failure)."""
    c = start
    for s in steps:
        c = step(m, c, s)
    return c


# ---------------------------------------------------------------------------
# oracle


@dataclass(frozen=True)
class Reachable:
    witness: Witness

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class NotFoundWithinBound:
    explored: int = 0

    def __bool__(self) -> bool:
        return False


def _moves(m: Model, c: Configuration, max_elapse: int, last_was_elapse: bool):
    for t in m.out.get(c.loc, ()):
        try:
            yield Fire(t.id), step(m, c, Fire(t.id))
        except StepDisabled:
            pass
    if m.timed and not last_was_elapse:
        for d in range(1, max_elapse + 1):
            yield Elapse(d), step(m, c, Elapse(d))


def oracle_reachable(
    m: Model,
    max_steps: int,
    max_elapse: int = 0,
    *,
    max_total_elapse: Optional[int] = None,
    node_cap: int = 2_000_000,
) -> Union[Reachable, NotFoundWithinBound]:
    """Breadth-first search over exact configurations.

    Runs have at most ``max_steps`` steps (fires and elapses) and every
    single elapse is at most ``max_elapse``.  Untimed models never elapse.
    The first accepting run found uses the fewest steps.

    Two prunings keep the search finite in practice without changing its
    answer: a configuration is dropped when a stack holds a symbol that no
    pop of that stack can ever remove, or when fewer steps remain than
    there are symbols left to pop.
    """
    poppable = {(t.op.stack, t.op.symbol) for t in m.transitions if isinstance(t.op, Pop)}

    def doomed(c: Configuration, steps_left: int) -> bool:
        height = 0
        for i, st in enumerate(c.stacks, start=1):
            height += len(st)
            if any((i, sym) not in poppable for sym, _ in st):
                return True
        return height > steps_left

    start = initial_configuration(m)
    if is_accepting(m, start):
        return Reachable(Witness((), hole_bound=0))
    keyed_on_total = max_total_elapse is not None

    def key(c: Configuration):
        return (c.loc, c.clocks, c.stacks, c.elapsed if keyed_on_total else None)

    parent: dict = {key(start): None}
    frontier = deque([(start, False)])
    for depth in range(max_steps):
        next_frontier: deque = deque()
        for c, after_elapse in frontier:
            for s, nxt in _moves(m, c, max_elapse, after_elapse):
                if keyed_on_total and nxt.elapsed > max_total_elapse:
                    continue
                if doomed(nxt, max_steps - depth - 1):
                    continue
                k = key(nxt)
                if k in parent:
                    continue
                parent[k] = (key(c), s)
                if is_accepting(m, nxt):
                    steps = []
                    while parent[k] is not None:
                        k, s_prev = parent[k]
                        steps.append(s_prev)
                    steps.reverse()
                    run = tuple(steps)
                    return Reachable(Witness(run, hole_bound=hole_bound_of_steps(m, run)))
                if len(parent) > node_cap:
                    raise BudgetExceeded(len(parent), node_cap)
                next_frontier.append((nxt, isinstance(s, Elapse)))
        frontier = next_frontier
        if not frontier:
            break
    return NotFoundWithinBound(len(parent))


def oracle_wellnested(
    m: Model,
    max_steps: int,
    max_elapse: int = 0,
    sources: Optional[Iterable[tuple[str, tuple[int, ...]]]] = None,
    *,
    node_cap: int = 2_000_000,
) -> set[tuple[str, tuple[int, ...], int, str, tuple[int, ...]]]:
    """Enumerate endpoints of well-nested runs of at most ``max_steps`` steps.

    A run is well-nested iff every pop matches the most recent pending push
    over all stacks together, so a single combined stack is simulated.  The
    result holds exact tuples ``(src, src_val, duration, dst, dst_val)``.
    Sources default to every location with all clocks at zero.  Branches
    that can no longer empty the combined stack within the remaining steps
    are cut, which never removes an endpoint.
    """
    poppable = {(t.op.stack, t.op.symbol) for t in m.transitions if isinstance(t.op, Pop)}
    if sources is None:
        sources = [(loc, (0,) * m.n_clocks) for loc in m.locations]
    found = set()
    explored = 0
    for src, val in sources:
        start = (src, val, (), 0)
        seen = {start}
        frontier = [(start, False)]
        found.add((src, val, 0, src, val))
        for depth in range(max_steps):
            steps_left = max_steps - depth - 1
            nxt_frontier = []
            for (loc, clocks, combined, dur), after_elapse in frontier:
                succ = []
                for t in m.out.get(loc, ()):
                    if not t.guard.holds(clocks):
                        continue
                    if isinstance(t.op, Nop):
                        succ.append(((t.dst, t.apply_resets(clocks), combined, dur), False))
                    elif isinstance(t.op, Push):
                        entry = (t.op.stack, t.op.symbol, dur)
                        succ.append(((t.dst, t.apply_resets(clocks), combined + (entry,), dur), False))
                    else:
                        if not combined:
                            continue
                        stack, symbol, pushed_at = combined[-1]
                        if stack != t.op.stack or symbol != t.op.symbol:
                            continue
                        if not t.op.interval.contains(dur - pushed_at):
                            continue
                        succ.append(((t.dst, t.apply_resets(clocks), combined[:-1], dur), False))
                if m.timed and not after_elapse:
                    for d in range(1, max_elapse + 1):
                        moved = tuple(v + d for v in clocks)
                        succ.append(((loc, moved, combined, dur + d), True))
                for state, flag in succ:
                    if state in seen:
                        continue
                    pending = state[2]
                    if len(pending) > steps_left or any((i, sym) not in poppable for i, sym, _ in pending):
                        continue
                    seen.add(state)
                    explored += 1
                    if explored > node_cap:
                        raise BudgetExceeded(explored, node_cap)
                    if not state[2]:
                        found.add((src, val, state[3], state[0], state[1]))
                    nxt_frontier.append((state, flag))
            frontier = nxt_frontier
    return found


# ---------------------------------------------------------------------------
# hole bound of an explicit run


def _matching(m: Model, ops: list[int]) -> list[int]:
    """Partner index of every push/pop in a complete run (-1 for nops)."""
    partner = [-1] * len(ops)
    pending: list[list[int]] = [[] for _ in range(m.n_stacks)]
    for pos, tid in enumerate(ops):
        op = m.transitions[tid].op
        if isinstance(op, Push):
            pending[op.stack - 1].append(pos)
        elif isinstance(op, Pop):
            q = pending[op.stack - 1].pop()
            partner[pos] = q
            partner[q] = pos
    return partner


def hole_bound_of_steps(m: Model, steps: Iterable[RunStep]) -> int:
    """Hole bound of a complete run given as steps (elapses are ignored)."""
    ops = [s.tid for s in steps if isinstance(s, Fire)]
    n = len(ops)
    partner = _matching(m, ops)
    is_push = [m.transitions[tid].is_push for tid in ops]

    # good[p] is True when push p and its pop enclose a well-nested factor:
    # every operation strictly inside is matched inside and is itself good.
    good = [False] * n
    pairs = sorted((partner[p] - p, p) for p in range(n) if is_push[p])
    for _, p in pairs:
        z = partner[p]
        ok = True
        for q in range(p + 1, z):
            r = partner[q]
            if r == -1:
                continue
            if not p < r < z or (is_push[q] and not good[q]):
                ok = False
                break
        good[p] = ok

    # Group crossing pushes into maximal (push_i ws)+ factors.  Anything that
    # is not part of a well-nested block and not a push of the current stack
    # ends the factor.
    in_ws = [False] * n
    for p in range(n):
        if is_push[p] and good[p]:
            for q in range(p, partner[p] + 1):
                in_ws[q] = True
    holes: list[list[int]] = []
    current_stack = None
    for pos, tid in enumerate(ops):
        t = m.transitions[tid]
        if in_ws[pos] or t.is_nop:
            continue
        if is_push[pos]:
            if current_stack == t.op.stack:
                holes[-1].append(pos)
            else:
                holes.append([pos])
                current_stack = t.op.stack
        else:
            current_stack = None

    # a hole is open at point x (after x operations) when one of its pushes
    # has fired at or before x and its pop fires after x
    delta = [0] * (n + 2)
    for pushes in holes:
        start = min(pushes)
        end = max(partner[p] for p in pushes)
        delta[start] += 1
        delta[end] -= 1
    best = running = 0
    for x in range(n):
        running += delta[x]
        best = max(best, running)
    return best


def hole_bound_of_run(m: Model, w: Union[Witness, Iterable[RunStep]]) -> int:
    """Maximum number of simultaneously open holes along an accepting run."""
    steps = w.steps if isinstance(w, Witness) else tuple(w)
    outcome = replay(m, steps)
    if not outcome:
        raise NotAccepting(f"run is not accepting: {outcome.reason} (step {outcome.index})")
    return hole_bound_of_steps(m, steps)


# ---------------------------------------------------------------------------
# witness files


def format_witness(w: Witness, m: Optional[Model] = None) -> str:
    lines = [f"witness holes={w.hole_bound}"]
    for s in w.steps:
        text = str(s)
        if m is not None and isinstance(s, Fire):
            t = m.transitions[s.tid]
            note = f"{t.src} -> {t.dst} {t.op}"
            if t.label is not None:
                note += f" [{t.label}]"
            text += f"  # {note}"
        lines.append(text)
    return "\n".join(lines) + "\n"


def parse_witness(text: str) -> Witness:
    hole_bound = None
    steps: list[RunStep] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if hole_bound is None:
            if parts[0] != "witness" or len(parts) != 2 or not parts[1].startswith("holes="):
                raise ValueError(f"line {number}: expected 'witness holes=<k>' header")
            hole_bound = int(parts[1][len("holes=") :])
            continue
        if len(parts) != 2 or parts[0] not in ("fire", "elapse") or not parts[1].isdigit():
            raise ValueError(f"line {number}: expected 'fire <id>' or 'elapse <t>'")
        value = int(parts[1])
        steps.append(Fire(value) if parts[0] == "fire" else Elapse(value))
    if hole_bound is None:
        raise ValueError("missing 'witness holes=<k>' header")
    return Witness(tuple(steps), hole_bound)


def normalize_steps(steps: Iterable[RunStep]) -> tuple[RunStep, ...]:
    """Drop zero elapses and merge adjacent elapses."""
    out: list[RunStep] = []
    for s in steps:
        if isinstance(s, Elapse):
            if s.t == 0:
                continue
            if out and isinstance(out[-1], Elapse):
                out[-1] = Elapse(out[-1].t + s.t)
                continue
        out.append(s)
    return tuple(out)
