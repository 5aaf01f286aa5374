"""Multi-stack pushdown automata (optionally timed) and their text format.

A model file is line oriented::

    model tmpda
    stacks 2
    clocks 1
    locations s0 s1 s2
    initial s0
    final s2
    trans s0 s1 push 1 A label a guard x1<=2 reset 1
    trans s1 s2 pop 1 A age 1 inf label c

Clock indices are 1-based.  A guard is a conjunction of atoms joined by
``&``; a disjunction (atoms groups joined by ``|``) is expanded at parse time
into one transition per disjunct.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Optional, Union

from .errors import ModelSyntaxError, ModelValidationError

INF = None  # marker for an unbounded age interval


@dataclass(frozen=True)
class AgeInterval:
    """Closed interval ``[lo, hi]`` of stack-symbol ages; ``hi=None`` is infinity."""

    lo: int = 0
    hi: Optional[int] = None

    def contains(self, age: int) -> bool:
        return self.lo <= age and (self.hi is None or age <= self.hi)

    def contains_clamped(self, age: int, clamp: int) -> bool:
        """Membership test for an age that saturates at ``clamp``.

        ``clamp`` stands for "strictly larger than every finite constant of
        the model", so it only belongs to intervals without an upper bound.
        """
        if age >= clamp:
            return self.hi is None
        return self.contains(age)

    def __str__(self) -> str:
        return f"{self.lo} {'inf' if self.hi is None else self.hi}"


UNBOUNDED = AgeInterval(0, None)


@dataclass(frozen=True)
class Nop:
    def __str__(self) -> str:
        return "nop"


@dataclass(frozen=True)
class Push:
    stack: int
    symbol: str

    def __str__(self) -> str:
        return f"push {self.stack} {self.symbol}"


@dataclass(frozen=True)
class Pop:
    stack: int
    symbol: str
    age: Optional[AgeInterval] = None

    @property
    def interval(self) -> AgeInterval:
        return self.age if self.age is not None else UNBOUNDED

    def __str__(self) -> str:
        text = f"pop {self.stack} {self.symbol}"
        if self.age is not None:
            text += f" age {self.age}"
        return text


StackOp = Union[Nop, Push, Pop]


@dataclass(frozen=True)
class Atom:
    clock: int  # 1-based
    op: str  # "<=" or ">="
    bound: int

    def holds(self, valuation: tuple[int, ...]) -> bool:
        value = valuation[self.clock - 1]
        return value <= self.bound if self.op == "<=" else value >= self.bound

    def __str__(self) -> str:
        return f"x{self.clock}{self.op}{self.bound}"


@dataclass(frozen=True)
class Guard:
    atoms: tuple[Atom, ...] = ()

    def holds(self, valuation: tuple[int, ...]) -> bool:
        return all(atom.holds(valuation) for atom in self.atoms)

    def __bool__(self) -> bool:
        return bool(self.atoms)

    def __str__(self) -> str:
        return "&".join(str(a) for a in self.atoms)


TRUE = Guard()


@dataclass(frozen=True)
class Transition:
    id: int
    src: str
    dst: str
    op: StackOp
    label: Optional[str] = None
    guard: Guard = TRUE
    resets: tuple[int, ...] = ()

    @property
    def is_nop(self) -> bool:
        return isinstance(self.op, Nop)

    @property
    def is_push(self) -> bool:
        return isinstance(self.op, Push)

    @property
    def is_pop(self) -> bool:
        return isinstance(self.op, Pop)

    def apply_resets(self, valuation: tuple[int, ...]) -> tuple[int, ...]:
        if not self.resets:
            return valuation
        values = list(valuation)
        for clock in self.resets:
            values[clock - 1] = 0
        return tuple(values)

    def to_line(self) -> str:
        parts = ["trans", self.src, self.dst, str(self.op)]
        if self.label is not None:
            parts += ["label", self.label]
        if self.guard:
            parts += ["guard", str(self.guard)]
        if self.resets:
            parts += ["reset", ",".join(str(c) for c in self.resets)]
        return " ".join(parts)


@dataclass(frozen=True)
class Model:
    """An MPDA (``kind="mpda"``) or TMPDA (``kind="tmpda"``)."""

    kind: str
    n_stacks: int
    locations: tuple[str, ...]
    initial: str
    finals: tuple[str, ...] = ()
    transitions: tuple[Transition, ...] = ()
    n_clocks: int = 0

    @property
    def timed(self) -> bool:
        return self.kind == "tmpda"

    @cached_property
    def loc_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.locations)}

    @cached_property
    def cmax_clock(self) -> tuple[int, ...]:
        """Largest constant compared against each clock (0 if none)."""
        best = [0] * self.n_clocks
        for t in self.transitions:
            for atom in t.guard.atoms:
                if 1 <= atom.clock <= self.n_clocks:
                    best[atom.clock - 1] = max(best[atom.clock - 1], atom.bound)
        return tuple(best)

    @cached_property
    def cmax_stack(self) -> int:
        """Largest finite endpoint of any pop age interval (0 if none)."""
        best = 0
        for t in self.transitions:
            if isinstance(t.op, Pop) and t.op.age is not None:
                best = max(best, t.op.age.lo)
                if t.op.age.hi is not None:
                    best = max(best, t.op.age.hi)
        return best

    @cached_property
    def stack_alphabet(self) -> frozenset[str]:
        return frozenset(t.op.symbol for t in self.transitions if not t.is_nop)

    @cached_property
    def input_alphabet(self) -> frozenset[str]:
        return frozenset(t.label for t in self.transitions if t.label is not None)

    @cached_property
    def out(self) -> dict[str, tuple[Transition, ...]]:
        table: dict[str, list[Transition]] = {name: [] for name in self.locations}
        for t in self.transitions:
            table.setdefault(t.src, []).append(t)
        return {k: tuple(v) for k, v in table.items()}

    def with_finals(self, finals: Iterable[str]) -> "Model":
        return replace(self, finals=tuple(finals))

    def untimed(self) -> "Model":
        """Drop clocks, guards, resets and age intervals."""
        trans = []
        for t in self.transitions:
            op = Pop(t.op.stack, t.op.symbol) if isinstance(t.op, Pop) else t.op
            trans.append(replace(t, op=op, guard=TRUE, resets=()))
        return replace(self, kind="mpda", n_clocks=0, transitions=tuple(trans))


# ---------------------------------------------------------------------------
# validation


def validate_model(m: Model) -> list[str]:
    """Return one human-readable diagnostic per violated invariant."""
    diags: list[str] = []
    if m.kind not in ("mpda", "tmpda"):
        diags.append(f"model kind {m.kind!r} is neither mpda nor tmpda")
    if m.n_stacks < 1:
        diags.append(f"stacks must be at least 1, got {m.n_stacks}")
    if m.n_clocks < 0:
        diags.append(f"clocks must be non-negative, got {m.n_clocks}")
    if m.kind == "mpda" and m.n_clocks:
        diags.append("an mpda model cannot declare clocks")
    seen: set[str] = set()
    for name in m.locations:
        if name in seen:
            diags.append(f"duplicate location {name!r}")
        seen.add(name)
    if m.initial not in seen:
        diags.append(f"initial location {m.initial!r} is not declared")
    for name in m.finals:
        if name not in seen:
            diags.append(f"final location {name!r} is not declared")
    for index, t in enumerate(m.transitions):
        where = f"transition {t.id}"
        if t.id != index:
            diags.append(f"{where}: id is not dense (expected {index})")
        for end in (t.src, t.dst):
            if end not in seen:
                diags.append(f"{where}: location {end!r} is not declared")
        if not isinstance(t.op, Nop):
            if not 1 <= t.op.stack <= m.n_stacks:
                diags.append(f"{where}: stack index out of range ({t.op.stack})")
        if isinstance(t.op, Pop) and t.op.age is not None:
            if m.kind != "tmpda":
                diags.append(f"{where}: age interval in an untimed model")
            if t.op.age.lo < 0 or (t.op.age.hi is not None and t.op.age.lo > t.op.age.hi):
                diags.append(f"{where}: malformed age interval [{t.op.age}]")
        for atom in t.guard.atoms:
            if not 1 <= atom.clock <= m.n_clocks:
                diags.append(f"{where}: guard clock x{atom.clock} out of range")
            if atom.op not in ("<=", ">=") or atom.bound < 0:
                diags.append(f"{where}: malformed guard atom {atom}")
        for clock in t.resets:
            if not 1 <= clock <= m.n_clocks:
                diags.append(f"{where}: reset clock {clock} out of range")
    return diags


# ---------------------------------------------------------------------------
# parsing

_NAME = re.compile(r"^[A-Za-z0-9_.\-]+$")
_ATOM = re.compile(r"^x(\d+)(<=|>=)(\d+)$")


class _Line:
    """Tokenised source line that remembers token columns for diagnostics."""

    def __init__(self, number: int, text: str):
        self.number = number
        self.tokens: list[tuple[str, int]] = [
            (m.group(0), m.start() + 1) for m in re.finditer(r"\S+", text)
        ]
        self.pos = 0

    def error(self, message: str, index: Optional[int] = None) -> ModelSyntaxError:
        if index is None:
            index = self.pos
        if index < len(self.tokens):
            column = self.tokens[index][1]
        elif self.tokens:
            last, col = self.tokens[-1]
            column = col + len(last)
        else:
            column = 1
        return ModelSyntaxError(message, self.number, column)

    def next(self, what: str) -> str:
        if self.pos >= len(self.tokens):
            raise self.error(f"expected {what}")
        token = self.tokens[self.pos][0]
        self.pos += 1
        return token

    def nat(self, what: str) -> int:
        token = self.next(what)
        if not token.isdigit():
            raise self.error(f"expected {what} (a natural number), got {token!r}", self.pos - 1)
        return int(token)

    def name(self, what: str) -> str:
        token = self.next(what)
        if not _NAME.match(token):
            raise self.error(f"invalid {what} {token!r}", self.pos - 1)
        return token

    def done(self) -> bool:
        return self.pos >= len(self.tokens)


def _parse_guard(line: _Line) -> list[tuple[Atom, ...]]:
    token = line.next("guard")
    where = line.pos - 1
    disjuncts = []
    for part in token.split("|"):
        atoms = []
        for raw in part.split("&"):
            match = _ATOM.match(raw)
            if not match:
                raise line.error(f"malformed guard atom {raw!r}", where)
            atoms.append(Atom(int(match.group(1)), match.group(2), int(match.group(3))))
        disjuncts.append(tuple(atoms))
    return disjuncts


def _parse_trans(line: _Line) -> tuple[dict, list[tuple[Atom, ...]]]:
    src = line.name("source location")
    dst = line.name("target location")
    kind_index = line.pos
    kind = line.next("operation (nop, push or pop)")
    op: StackOp
    if kind == "nop":
        op = Nop()
    elif kind in ("push", "pop"):
        stack = line.nat("stack index")
        symbol = line.name("stack symbol")
        op = Push(stack, symbol) if kind == "push" else Pop(stack, symbol)
    else:
        raise line.error(f"unknown operation {kind!r}", kind_index)
    label = None
    guards: list[tuple[Atom, ...]] = [()]
    resets: tuple[int, ...] = ()
    seen: set[str] = set()
    while not line.done():
        key_index = line.pos
        key = line.next("option")
        if key in seen:
            raise line.error(f"duplicate option {key!r}", key_index)
        seen.add(key)
        if key == "age":
            if not isinstance(op, Pop):
                raise line.error("age interval is only allowed on pop", key_index)
            lo = line.nat("age lower bound")
            hi_token = line.next("age upper bound")
            if hi_token == "inf":
                hi = None
            elif hi_token.isdigit():
                hi = int(hi_token)
            else:
                raise line.error(f"malformed age upper bound {hi_token!r}", line.pos - 1)
            if hi is not None and lo > hi:
                raise line.error(f"malformed interval: lower bound {lo} exceeds {hi}", key_index)
            op = Pop(op.stack, op.symbol, AgeInterval(lo, hi))
        elif key == "label":
            label = line.name("label")
        elif key == "guard":
            guards = _parse_guard(line)
        elif key == "reset":
            token = line.next("reset clock list")
            try:
                resets = tuple(int(c) for c in token.split(","))
            except ValueError:
                raise line.error(f"malformed reset list {token!r}", line.pos - 1) from None
        else:
            raise line.error(f"unknown option {key!r}", key_index)
    fields = {"src": src, "dst": dst, "op": op, "label": label, "resets": resets}
    return fields, guards


def parse_model(text: str) -> Model:
    """Parse and validate a model file; raise on syntax or validation errors."""
    kind = None
    n_stacks = None
    n_clocks = 0
    locations: Optional[tuple[str, ...]] = None
    initial = None
    finals: tuple[str, ...] = ()
    transitions: list[Transition] = []
    trans_lines: list[_Line] = []
    seen_headers: set[str] = set()

    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        line = _Line(number, body)
        if line.done():
            continue
        keyword = line.next("statement")
        if keyword != "trans":
            if keyword in seen_headers:
                raise line.error(f"duplicate {keyword!r} statement", 0)
            seen_headers.add(keyword)
        if kind is None and keyword != "model":
            raise line.error("the first statement must be 'model'", 0)
        if keyword == "model":
            kind = line.next("model kind")
            if kind not in ("mpda", "tmpda"):
                raise line.error(f"unknown model kind {kind!r}", 1)
        elif keyword == "stacks":
            n_stacks = line.nat("number of stacks")
        elif keyword == "clocks":
            n_clocks = line.nat("number of clocks")
            if kind != "tmpda":
                raise line.error("'clocks' is only allowed in tmpda models", 0)
        elif keyword == "locations":
            names = []
            while not line.done():
                name = line.name("location name")
                if name in names:
                    raise line.error(f"duplicate location {name!r}", line.pos - 1)
                names.append(name)
            locations = tuple(names)
        elif keyword == "initial":
            initial = line.name("initial location")
        elif keyword == "final":
            names = []
            while not line.done():
                names.append(line.name("final location"))
            finals = tuple(names)
        elif keyword == "trans":
            fields, guards = _parse_trans(line)
            for atoms in guards:
                transitions.append(Transition(id=len(transitions), guard=Guard(atoms), **fields))
                trans_lines.append(line)
            continue
        else:
            raise line.error(f"unknown statement {keyword!r}", 0)
        if not line.done():
            raise line.error("unexpected trailing tokens")

    if kind is None:
        raise ModelSyntaxError("empty model file", 1)
    for header in ("stacks", "locations", "initial"):
        if header not in seen_headers:
            raise ModelSyntaxError(f"missing '{header}' statement", len(text.splitlines()) or 1)
    model = Model(
        kind=kind,
        n_stacks=n_stacks,
        locations=locations,
        initial=initial,
        finals=finals,
        transitions=tuple(transitions),
        n_clocks=n_clocks,
    )
    diags = validate_model(model)
    if diags:
        raise ModelValidationError(diags)
    return model


def serialize_model(m: Model) -> str:
    """Render ``m`` in the canonical text format (parse inverts it)."""
    lines = [f"model {m.kind}", f"stacks {m.n_stacks}"]
    if m.kind == "tmpda":
        lines.append(f"clocks {m.n_clocks}")
    lines.append(" ".join(["locations", *m.locations]))
    lines.append(f"initial {m.initial}")
    lines.append(" ".join(["final", *m.finals]))
    lines.extend(t.to_line() for t in m.transitions)
    return "\n".join(lines) + "\n"


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as handle:
        return parse_model(handle.read())


def build_model(
    kind: str,
    n_stacks: int,
    locations: Iterable[str],
    initial: str,
    finals: Iterable[str],
    transitions: Iterable[tuple],
    n_clocks: int = 0,
) -> Model:
    """Convenience constructor used by generators and tests.

    Each transition is ``(src, dst, op)`` optionally followed by keyword-ish
    extras given as a dict with keys ``label``, ``guard`` (tuple of atoms or a
    guard string) and ``resets``.
    """
    trans = []
    for index, spec in enumerate(transitions):
        src, dst, op = spec[:3]
        extra = spec[3] if len(spec) > 3 else {}
        guard = extra.get("guard", TRUE)
        if isinstance(guard, str):
            guard = Guard(tuple(_atom_from_text(a) for a in guard.split("&") if a))
        elif isinstance(guard, tuple):
            guard = Guard(guard)
        trans.append(
            Transition(
                id=index,
                src=src,
                dst=dst,
                op=op,
                label=extra.get("label"),
                guard=guard,
                resets=tuple(extra.get("resets", ())),
            )
        )
    return Model(
        kind=kind,
        n_stacks=n_stacks,
        locations=tuple(locations),
        initial=initial,
        finals=tuple(finals),
        transitions=tuple(trans),
        n_clocks=n_clocks,
    )


def _atom_from_text(text: str) -> Atom:
    match = _ATOM.match(text)
    if not match:
        raise ValueError(f"malformed guard atom {text!r}")
    return Atom(int(match.group(1)), match.group(2), int(match.group(3)))


__all__ = [
    "AgeInterval",
    "Atom",
    "Guard",
    "Model",
    "Nop",
    "Pop",
    "Push",
    "StackOp",
    "TRUE",
    "Transition",
    "UNBOUNDED",
    "build_model",
    "load_model",
    "parse_model",
    "serialize_model",
    "validate_model",
]
