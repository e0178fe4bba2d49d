"""Block-schedule validation and serialization."""

from importlib import resources

import pytest

from neurocore.schedule import (
    Block,
    BlockSchedule,
    Op,
    ScheduleError,
    izhikevich_schedule,
    parse_schedule,
    render_schedule,
    validate_schedule,
)


def block(name, word, *ops):
    return Block(name, word, tuple(ops))


class TestValidator:
    def test_cross_word_access_is_one_violation(self):
        schedule = BlockSchedule(
            "bad", (block("mix", None, Op("add", "$t", ("v", "c"))),)
        )
        violations = validate_schedule(schedule)
        assert len(violations) == 1
        assert violations[0].block == "mix"
        assert violations[0].words == frozenset({1, 2})

    def test_single_word_access_passes(self):
        schedule = BlockSchedule(
            "ok", (block("w2", 2, Op("add", "$t", ("v", "u", "iconst"))),)
        )
        assert validate_schedule(schedule) == []

    def test_empty_schedule_passes(self):
        assert validate_schedule(BlockSchedule("empty", ())) == []

    def test_unknown_field_raises_naming_it(self):
        schedule = BlockSchedule(
            "typo", (block("b", None, Op("mov", "$t", ("voltage",))),)
        )
        with pytest.raises(ScheduleError, match="voltage"):
            validate_schedule(schedule)

    def test_declared_word_conflicting_with_fields(self):
        schedule = BlockSchedule(
            "mismatch", (block("b", 0, Op("mov", "$t", ("v",))),)
        )
        violations = validate_schedule(schedule)
        assert len(violations) == 1
        assert violations[0].words == frozenset({0, 2})

    def test_registers_and_constants_are_unconstrained(self):
        schedule = BlockSchedule(
            "regs",
            (block("b", 0, Op("mul", "$x", ("@alpha", "isyn")), Op("shl", "$y", ("DA", "9"))),),
        )
        assert validate_schedule(schedule) == []


class TestCanonicalSchedule:
    def test_no_violations(self):
        assert validate_schedule(izhikevich_schedule()) == []

    def test_text_roundtrip(self):
        schedule = izhikevich_schedule()
        assert parse_schedule(render_schedule(schedule)) == schedule

    def test_shipped_file_matches_code(self):
        shipped = (
            resources.files("neurocore")
            .joinpath("data/izhikevich_schedule.txt")
            .read_text()
        )
        assert shipped == render_schedule(izhikevich_schedule())

    def test_timestep_shift_happens_in_word2_block(self):
        schedule = izhikevich_schedule()
        shift_blocks = [
            b for b in schedule.blocks
            if any(op.mnemonic == "shr" and "3" in op.sources for op in b.ops)
        ]
        assert shift_blocks and all(b.word == 2 for b in shift_blocks)


class TestParser:
    def test_rejects_malformed_op(self):
        with pytest.raises(ScheduleError, match="line 3"):
            parse_schedule("schedule: x\nblock: b\nop: nonsense without arrow\n")

    def test_rejects_op_outside_block(self):
        with pytest.raises(ScheduleError):
            parse_schedule("schedule: x\nop: mov $a <- a\n")

    def test_word_dash_means_register_only(self):
        schedule = parse_schedule(
            "schedule: x\nblock: spill\nword: -\nop: mov $a <- $b\n"
        )
        assert schedule.blocks[0].word is None
