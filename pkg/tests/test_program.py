import pytest

from socsim.errors import BadAlignment, ProgramError
from socsim.memory import SlaveMemory, byte_mask
from socsim.program import Add, Cpu, Read, Reg, Repeat, Set, Write, format_program, iter_ops, parse_program


def test_four_instruction_program():
    prog = parse_program(["set r1 5", "set r2 7", "add r0 r1 r2", "write 0x0010 r0"])
    assert prog.instructions == (Set(1, 5), Set(2, 7), Add(0, 1, 2), Write(0x10, Reg(0)))
    assert prog.transfer_count() == 1


def test_empty_program_is_legal():
    assert len(parse_program([])) == 0
    assert Cpu(parse_program([])).done


def test_read_missing_destination():
    with pytest.raises(ProgramError) as err:
        parse_program(["read 0x10"])
    assert err.value.line == 1
    assert "line 1" in str(err.value)


@pytest.mark.parametrize("lines, line", [
    (["set r1 1", "frob r1"], 2),
    (["set r9 1"], 1),
    (["set r1 1", "", "# note", "add r1 r2"], 4),
    (["repeat 2", "read 0 r1"], 1),
    (["end"], 1),
    (["repeat 0", "end"], 1),
])
def test_errors_carry_line(lines, line):
    with pytest.raises(ProgramError) as err:
        parse_program(lines)
    assert err.value.line == line


def test_misaligned_address():
    with pytest.raises(BadAlignment):
        parse_program(["write 0x3 r0"])


def test_repeat_nesting_limit():
    ok = ["repeat 2"] * 4 + ["read 0 r0"] + ["end"] * 4
    assert parse_program(ok).transfer_count() == 16
    with pytest.raises(ProgramError):
        parse_program(["repeat 2"] * 5 + ["read 0 r0"] + ["end"] * 5)


def test_comments_immediates_and_format_roundtrip():
    lines = ["set r1 0b101  # five", "write 0x8 0xdead", "repeat 3", "  read 8 r2", "end"]
    prog = parse_program(lines)
    assert prog.instructions[1] == Write(8, 0xDEAD)
    assert prog.instructions[2] == Repeat(3, (Read(8, 2),))
    assert parse_program(format_program(prog)) == prog
    assert len(list(iter_ops(prog))) == 5


def test_cpu_executes_against_start_address():
    cpu = Cpu(parse_program(["set r1 0xffffffff", "set r2 2", "add r3 r1 r2", "write 0x4 r3", "read 0x4 r4"]), 0x100)
    while not cpu.is_transfer():
        cpu.execute_local()
    assert cpu.effective_address() == 0x104
    assert cpu.write_value() == 1  # wraps mod 2**32
    cpu.complete()
    cpu.complete(0xABCD)
    assert cpu.done and cpu.regs[4] == 0xABCD


def test_memory_byte_enables():
    assert byte_mask(0b0101) == 0x00FF00FF
    mem = SlaveMemory(8)
    mem.write_word(4, 0x11223344)
    mem.write_word(4, 0xAABBCCDD, 0b0010)
    assert mem.read_word(4) == 0x1122CC44
    assert mem.image()[4:] == bytes([0x44, 0xCC, 0x22, 0x11])
