"""Generators for the benchmark models used in tests and on the command line."""

from __future__ import annotations

import random
from typing import Optional

from .model import AgeInterval, Model, Nop, Pop, Push, build_model

BENCHMARKS = ("lbh", "lcrit", "lcrit-timed", "prodcons", "maze", "maze-timed", "lprime-phase", "fig1")


def lbh() -> Model:
    """a^n b^m, then n rounds of (a^k c^k c) (b^l d^l d) that each consume one
    symbol from the prefix on both stacks."""
    return build_model(
        "mpda",
        2,
        [f"q{i}" for i in range(7)],
        "q0",
        ["q6"],
        [
            ("q0", "q0", Push(1, "X"), {"label": "a"}),
            ("q0", "q1", Push(2, "U"), {"label": "b"}),
            ("q1", "q1", Push(2, "U"), {"label": "b"}),
            ("q1", "q2", Nop()),
            ("q6", "q2", Nop()),
            ("q2", "q2", Push(1, "Y"), {"label": "a"}),
            ("q2", "q3", Nop()),
            ("q3", "q3", Pop(1, "Y"), {"label": "c"}),
            ("q3", "q4", Pop(1, "X"), {"label": "c"}),
            ("q4", "q4", Push(2, "V"), {"label": "b"}),
            ("q4", "q5", Nop()),
            ("q5", "q5", Pop(2, "V"), {"label": "d"}),
            ("q5", "q6", Pop(2, "U"), {"label": "d"}),
        ],
    )


def lcrit(timed: bool = False) -> Model:
    """a^y b^z c^y d^z with y, z >= 1.

    The timed variant keeps a global clock x (never reset) and a clock y
    reset on every a: all b's happen by time 2, the first c comes at least
    one unit after the last a, the last b is popped at most 3 units after it
    was pushed, and the word ends at time exactly 4.
    """
    def extra(label, guard=None, resets=()):
        out = {"label": label}
        if timed and guard:
            out["guard"] = guard
        if timed and resets:
            out["resets"] = resets
        return out

    def pop(stack, symbol, age):
        if timed and age is not None:
            return Pop(stack, symbol, AgeInterval(*age))
        return Pop(stack, symbol)

    return build_model(
        "tmpda" if timed else "mpda",
        2,
        [f"l{i}" for i in range(6)],
        "l0",
        ["l5"],
        [
            ("l0", "l1", Push(1, "A"), extra("a", "x1<=8", (2,))),
            ("l1", "l1", Push(1, "A"), extra("a", None, (2,))),
            ("l1", "l2", Push(2, "B"), extra("b", "x1<=2")),
            ("l2", "l2", Push(2, "B"), extra("b", "x1<=2")),
            ("l2", "l3", pop(1, "A", (1, 8)), extra("c", "x2>=1&x2<=8")),
            ("l3", "l3", pop(1, "A", None), extra("c")),
            ("l3", "l4", pop(2, "B", (0, 3)), extra("d")),
            ("l4", "l4", pop(2, "B", None), extra("d")),
            ("l3", "l5", pop(2, "B", (0, 3)), extra("d", "x1>=4&x1<=4")),
            ("l4", "l5", pop(2, "B", None), extra("d", "x1>=4&x1<=4")),
        ],
        n_clocks=2 if timed else 0,
    )


def prodcons(m: int, n: int, shape: Optional[str] = None) -> Model:
    """Producers push batches of m A's or n B's; consumers pop A,B pairs.

    Two equivalent shapes exist.  ``loop`` (m+n+2 locations, m+n+6
    transitions) consumes in a dedicated c2/c3 loop and restarts production
    with a push; ``compact`` (m+n+1 locations, m+n+3 transitions) returns to
    the producer hub with a nop after each consumed pair.  By default small
    instances use ``loop`` and large ones ``compact``.
    """
    if m < 1 or n < 1:
        raise ValueError("prodcons needs M, N >= 1")
    if shape is None:
        shape = "loop" if (m, n) == (3, 2) or m + n <= 8 else "compact"
    if shape not in ("loop", "compact"):
        raise ValueError(f"unknown prodcons shape {shape!r}")
    locs = ["q0"] + [f"a{k}" for k in range(1, m)] + [f"b{k}" for k in range(1, n)]
    trans = []
    for prefix, count, stack, sym, label in (("a", m, 1, "A", "a"), ("b", n, 2, "B", "b")):
        chain = ["q0"] + [f"{prefix}{k}" for k in range(1, count)] + ["q0"]
        for src, dst in zip(chain, chain[1:]):
            trans.append((src, dst, Push(stack, sym), {"label": label}))
    first_a = "a1" if m > 1 else "q0"
    first_b = "b1" if n > 1 else "q0"
    if shape == "loop":
        locs += ["c1", "c2", "c3"]
        trans += [
            ("q0", "c1", Pop(1, "A"), {"label": "abar"}),
            ("c1", "c2", Pop(2, "B"), {"label": "bbar"}),
            ("c2", "c3", Pop(1, "A"), {"label": "abar"}),
            ("c3", "c2", Pop(2, "B"), {"label": "bbar"}),
            ("c2", first_a, Push(1, "A"), {"label": "a"}),
            ("c2", first_b, Push(2, "B"), {"label": "b"}),
        ]
    else:
        locs += ["c1", "c2"]
        trans += [
            ("q0", "c1", Pop(1, "A"), {"label": "abar"}),
            ("c1", "c2", Pop(2, "B"), {"label": "bbar"}),
            ("c2", "q0", Nop()),
        ]
    return build_model("mpda", 2, locs, "q0", ["c2"], trans)


def maze(timed: bool = False) -> Model:
    """Nine-room maze; the timed version forces a total delay of 5 units."""
    rows = [
        # src, dst, op, guard, resets
        ("1", "8", Nop(), "x2<=0", ()),
        ("8", "2", Nop(), "x2<=0", (1,)),
        ("2", "3", Push(1, "A"), "x2<=0", ()),
        ("3", "2", Nop(), "x2<=1", ()),
        ("2", "4", Nop(), "x2<=0&x1>=2&x1<=3", (1,)),
        ("4", "5", Push(2, "B"), "x2<=0", ()),
        ("5", "4", Nop(), "x2<=1", ()),
        ("4", "6", Nop(), "x2<=0&x1>=2&x1<=3", ()),
        ("6", "7", Pop(1, "A", AgeInterval(4, 6)), "x2<=1", ()),
        ("7", "6", Pop(2, "B", AgeInterval(1, 4)), "x2<=0", ()),
        ("6", "8", Nop(), "x2<=1", ()),
        ("8", "9", Nop(), "x2<=0&x1>=1", ()),
    ]
    trans = []
    for src, dst, op, guard, resets in rows:
        if not timed:
            if isinstance(op, Pop):
                op = Pop(op.stack, op.symbol)
            trans.append((src, dst, op))
        else:
            trans.append((src, dst, op, {"guard": guard, "resets": tuple(sorted(set(resets) | {2}))}))
    return build_model(
        "tmpda" if timed else "mpda",
        2,
        [str(i) for i in range(1, 10)],
        "1",
        ["9"],
        trans,
        n_clocks=2 if timed else 0,
    )


def lprime_phase(min_n: int = 1) -> Model:
    """(ab)^n c^n d^n with n >= min_n: 2-phase bounded, hole bound 2n."""
    if min_n < 1:
        raise ValueError("min_n must be at least 1")
    locs = [f"u{k}" for k in range(min_n + 1)] + [f"v{k}" for k in range(min_n)] + ["w", "c", "d"]
    trans = []
    for k in range(min_n):
        trans.append((f"u{k}", f"v{k}", Push(1, "X"), {"label": "a"}))
        trans.append((f"v{k}", f"u{k + 1}", Push(2, "Y"), {"label": "b"}))
    top = f"u{min_n}"
    trans += [
        (top, "w", Push(1, "X"), {"label": "a"}),
        ("w", top, Push(2, "Y"), {"label": "b"}),
        (top, "c", Pop(1, "X"), {"label": "c"}),
        ("c", "c", Pop(1, "X"), {"label": "c"}),
        ("c", "d", Pop(2, "Y"), {"label": "d"}),
        ("d", "d", Pop(2, "Y"), {"label": "d"}),
    ]
    return build_model("mpda", 2, locs, "u0", ["d"], trans)


# The run ws1 p11 p21 ws2 p31 ws3 p12 p22 ws4 o31 o21 ws5 p41 p51 o22 o51 o12 o41 o11
# where pJI pushes item J on stack I, oJI pops it and wsK is a nop.
FIG1_RUN = (
    "ws", "+1.1", "+1.2", "ws", "+1.3", "ws", "+2.1", "+2.2", "ws", "-1.3", "-1.2", "ws",
    "+1.4", "+1.5", "-2.2", "-1.5", "-2.1", "-1.4", "-1.1",
)


def fig1() -> Model:
    """A straight-line model whose only run has three simultaneously open holes."""
    trans = []
    for k, step in enumerate(FIG1_RUN):
        src, dst = f"p{k}", f"p{k + 1}"
        if step == "ws":
            trans.append((src, dst, Nop()))
            continue
        stack, item = step[1:].split(".")
        op = Push if step[0] == "+" else Pop
        trans.append((src, dst, op(int(stack), f"I{item}")))
    locs = [f"p{k}" for k in range(len(FIG1_RUN) + 1)]
    return build_model("mpda", 2, locs, "p0", [locs[-1]], trans)


def generate(name: str, *, m: int = 3, n: int = 2, min_n: int = 1) -> Model:
    """Look up a benchmark by its command-line name."""
    if name == "lbh":
        return lbh()
    if name == "lcrit":
        return lcrit(False)
    if name == "lcrit-timed":
        return lcrit(True)
    if name == "prodcons":
        return prodcons(m, n)
    if name == "maze":
        return maze(False)
    if name == "maze-timed":
        return maze(True)
    if name == "lprime-phase":
        return lprime_phase(min_n)
    if name == "fig1":
        return fig1()
    raise ValueError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARKS)}")


# ---------------------------------------------------------------------------
# random models for property tests


def random_model(
    rng: random.Random,
    *,
    max_locations: int = 5,
    max_transitions: int = 8,
    n_stacks: int = 2,
    timed: bool = False,
    cmax: int = 3,
    symbols: str = "AB",
) -> Model:
    """A small random model; timed ones have a single clock."""
    n_locs = rng.randint(2, max_locations)
    locs = [f"s{k}" for k in range(n_locs)]
    trans = []
    for _ in range(rng.randint(1, max_transitions)):
        src, dst = rng.choice(locs), rng.choice(locs)
        kind = rng.choice(("nop", "push", "push", "pop", "pop"))
        stack = rng.randint(1, n_stacks)
        sym = rng.choice(symbols)
        extra: dict = {}
        if kind == "nop":
            op = Nop()
        elif kind == "push":
            op = Push(stack, sym)
        else:
            age = None
            if timed and rng.random() < 0.5:
                lo = rng.randint(0, cmax)
                hi = rng.choice([None, rng.randint(lo, cmax)])
                age = AgeInterval(lo, hi)
            op = Pop(stack, sym, age)
        if timed:
            atoms = []
            if rng.random() < 0.5:
                atoms.append(f"x1{rng.choice(('<=', '>='))}{rng.randint(0, cmax)}")
            if atoms:
                extra["guard"] = "&".join(atoms)
            if rng.random() < 0.4:
                extra["resets"] = (1,)
        trans.append((src, dst, op, extra))
    finals = rng.sample(locs, rng.randint(1, 2))
    return build_model(
        "tmpda" if timed else "mpda", n_stacks, locs, locs[0], finals, trans,
        n_clocks=1 if timed else 0,
    )


__all__ = [
    "BENCHMARKS",
    "FIG1_RUN",
    "fig1",
    "generate",
    "lbh",
    "lcrit",
    "lprime_phase",
    "maze",
    "prodcons",
    "random_model",
]
