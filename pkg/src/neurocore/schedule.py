"""Block schedules: the microcode-constraint model and its validator.

A schedule is an ordered list of computation blocks.  Each block may access
fields from at most one compartment-state word; values needed across words
are spilled through registers.  Identifier conventions in the abstract ops:

    bare name   compartment-state field (``v``, ``u``, ``a`` ...)
    ``$name``   register
    ``@name``   group-level constant
    ``DA``      the dendrite-accumulator input port

The canonical Izhikevich schedule shipped with the package mirrors the
dataflow of :func:`neurocore.neuron.step_fixed` block for block.
"""

from __future__ import annotations

from dataclasses import dataclass

from .neuron import FIELD_LAYOUT

INPUT_PORTS = frozenset({"DA"})


class ScheduleError(ValueError):
    """Malformed schedule: unknown field identifier or unparseable text."""


@dataclass(frozen=True)
class Op:
    """One abstract instruction: ``mnemonic dest <- source, source ...``."""

    mnemonic: str
    dest: str
    sources: tuple[str, ...]

    def render(self) -> str:
        return f"{self.mnemonic} {self.dest} <- {', '.join(self.sources)}"


@dataclass(frozen=True)
class Block:
    name: str
    word: int | None
    ops: tuple[Op, ...]

    def identifiers(self):
        for op in self.ops:
            yield op.dest
            yield from op.sources


@dataclass(frozen=True)
class BlockSchedule:
    name: str
    blocks: tuple[Block, ...]


@dataclass(frozen=True)
class Violation:
    """A block whose field accesses span more than one state word."""

    block: str
    words: frozenset[int]

    def describe(self) -> str:
        words = ", ".join(str(w) for w in sorted(self.words))
        return f"block {self.block!r} touches state words {{{words}}}"


def _field_words(block: Block) -> set[int]:
    words: set[int] = set()
    for ident in block.identifiers():
        if ident.startswith(("$", "@")) or ident in INPUT_PORTS:
            continue
        token = ident.split(",")[0].strip()
        if token.isdigit():  # literal shift count
            continue
        if token not in FIELD_LAYOUT:
            raise ScheduleError(
                f"unknown state field {token!r} in block {block.name!r}"
            )
        words.add(FIELD_LAYOUT[token][0])
    return words


def validate_schedule(schedule: BlockSchedule) -> list[Violation]:
    """Return one violation per block that touches more than one state word.

    A block whose declared word disagrees with the fields it references is
    reported as touching both.
    """
    violations = []
    for block in schedule.blocks:
        words = _field_words(block)
        if block.word is not None and words:
            words = words | {block.word}
        if len(words) > 1:
            violations.append(Violation(block=block.name, words=frozenset(words)))
    return violations


# ---------------------------------------------------------------------------
# Line-oriented text serialization
# ---------------------------------------------------------------------------

def render_schedule(schedule: BlockSchedule) -> str:
    lines = [f"schedule: {schedule.name}", ""]
    for block in schedule.blocks:
        lines.append(f"block: {block.name}")
        lines.append(f"word: {'-' if block.word is None else block.word}")
        for op in block.ops:
            lines.append(f"op: {op.render()}")
        lines.append("")
    return "\n".join(lines)


def parse_schedule(text: str) -> BlockSchedule:
    name = ""
    blocks: list[Block] = []
    current: dict | None = None

    def flush() -> None:
        nonlocal current
        if current is not None:
            blocks.append(
                Block(current["name"], current["word"], tuple(current["ops"]))
            )
            current = None

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ScheduleError(f"line {lineno}: expected 'key: value', got {line!r}")
        key, _, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if key == "schedule":
            name = value
        elif key == "block":
            flush()
            current = {"name": value, "word": None, "ops": []}
        elif key == "word":
            if current is None:
                raise ScheduleError(f"line {lineno}: 'word' outside a block")
            current["word"] = None if value == "-" else int(value)
        elif key == "op":
            if current is None:
                raise ScheduleError(f"line {lineno}: 'op' outside a block")
            current["ops"].append(_parse_op(value, lineno))
        else:
            raise ScheduleError(f"line {lineno}: unknown key {key!r}")
    flush()
    return BlockSchedule(name=name, blocks=tuple(blocks))


def _parse_op(text: str, lineno: int) -> Op:
    head, sep, rest = text.partition("<-")
    if not sep:
        raise ScheduleError(f"line {lineno}: op missing '<-': {text!r}")
    head_parts = head.split()
    if len(head_parts) != 2:
        raise ScheduleError(f"line {lineno}: expected 'mnemonic dest <- ...': {text!r}")
    sources = tuple(s.strip() for s in rest.split(",") if s.strip())
    return Op(mnemonic=head_parts[0], dest=head_parts[1], sources=sources)


def izhikevich_schedule() -> BlockSchedule:
    """The canonical schedule realised by the fixed-point pipeline."""
    b = Block
    o = Op
    return BlockSchedule(
        name="izhikevich-core",
        blocks=(
            b("isyn-update", 0, (
                o("shl", "$da", ("DA", "9")),
                o("mul", "$decay", ("@alpha", "isyn")),
                o("add", "$isyn", ("$decay", "$da")),
                o("mov", "isyn", ("$isyn",)),
                o("mov", "$a", ("a",)),
                o("mov", "$b", ("b",)),
            )),
            b("dopamine-gain", 1, (
                o("mul", "$mod", ("@beta", "delta_dop")),
                o("add", "$gain", ("@one", "$mod")),
                o("mov", "$c", ("c",)),
                o("mov", "$d", ("d",)),
            )),
            b("modulate", None, (
                o("mul", "$imod", ("$isyn", "$gain")),
            )),
            b("current-and-recovery", 2, (
                o("add", "$i", ("$imod", "iconst")),
                o("mul", "$bv", ("$b", "v")),
                o("sub", "$bvmu", ("$bv", "u")),
                o("mul", "$du", ("$a", "$bvmu")),
            )),
            b("membrane-derivative", 2, (
                o("mul", "$v2", ("v", "v")),
                o("mulw", "$quad", ("@kquad", "$v2")),
                o("mul", "$lin", ("@klin", "v")),
                o("add", "$dv", ("$quad", "$lin")),
                o("add", "$dv", ("$dv", "@kbias")),
                o("sub", "$dv", ("$dv", "u")),
                o("add", "$dv", ("$dv", "$i")),
            )),
            b("timestep-shift", 2, (
                o("shr", "$dv", ("$dv", "3")),
                o("shr", "$du", ("$du", "3")),
                o("add", "v", ("v", "$dv")),
                o("add", "u", ("u", "$du")),
            )),
            b("threshold-reset", 2, (
                o("gt", "$spk", ("v", "@vpeak")),
                o("add", "$ud", ("u", "$d")),
                o("sel", "v", ("$spk", "$c", "v")),
                o("sel", "u", ("$spk", "$ud", "u")),
            )),
        ),
    )
