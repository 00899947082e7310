"""Master behaviour mini-language.

A program is a list of text lines, one instruction per line::

    set   rD IMM        rD <- IMM
    add   rD rA rB      rD <- rA + rB (mod 2**32)
    write ADDR SRC      store register or immediate SRC at ADDR
    read  ADDR rD       load the word at ADDR into rD
    repeat N            repeat the following block N times ...
    end                 ... up to the matching ``end``

Blank lines and ``#`` comments are ignored. Numbers are decimal, ``0x`` hex
or ``0b`` binary. ``ADDR`` is an offset from the owning master's start
address and must be word aligned.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .errors import BadAlignment, ProgramError

NUM_REGS = 8
WORD_MASK = 0xFFFF_FFFF
MAX_REPEAT_DEPTH = 4


@dataclass(frozen=True)
class Set:
    rd: int
    imm: int


@dataclass(frozen=True)
class Add:
    rd: int
    ra: int
    rb: int


@dataclass(frozen=True)
class Reg:
    index: int


@dataclass(frozen=True)
class Write:
    addr: int
    src: Union[Reg, int]


@dataclass(frozen=True)
class Read:
    addr: int
    rd: int


@dataclass(frozen=True)
class Repeat:
    count: int
    body: tuple


Instr = Union[Set, Add, Write, Read, Repeat]


@dataclass(frozen=True)
class Program:
    instructions: tuple = ()

    def __len__(self):
        return len(self.instructions)

    def mnemonics(self) -> set[str]:
        """Mnemonics used anywhere in the program, nested blocks included."""
        found: set[str] = set()
        stack = list(self.instructions)
        while stack:
            ins = stack.pop()
            if isinstance(ins, Repeat):
                found.add("repeat")
                stack.extend(ins.body)
            else:
                found.add(type(ins).__name__.lower())
        return found

    def transfer_count(self) -> int:
        return _count_transfers(self.instructions)


def _count_transfers(body) -> int:
    n = 0
    for ins in body:
        if isinstance(ins, Repeat):
            n += ins.count * _count_transfers(ins.body)
        elif isinstance(ins, (Read, Write)):
            n += 1
    return n


def parse_number(token: str) -> int:
    """Parse a decimal, 0x-hex or 0b-binary literal; raises ValueError."""
    t = token.strip().lower().replace("_", "")
    if t.startswith("-"):
        raise ValueError(f"negative literal {token!r}")
    return int(t, 0)


def _reg(tok: str, lineno: int) -> int:
    t = tok.lower()
    if not t.startswith("r") or not t[1:].isdigit():
        raise ProgramError(f"expected register, got {tok!r}", line=lineno)
    idx = int(t[1:])
    if not 0 <= idx < NUM_REGS:
        raise ProgramError(f"register index {idx} out of range 0..{NUM_REGS - 1}", line=lineno)
    return idx


def _imm(tok: str, lineno: int) -> int:
    try:
        v = parse_number(tok)
    except ValueError:
        raise ProgramError(f"bad immediate {tok!r}", line=lineno) from None
    if v > WORD_MASK:
        raise ProgramError(f"immediate {tok} does not fit 32 bits", line=lineno)
    return v


def _addr(tok: str, lineno: int) -> int:
    v = _imm(tok, lineno)
    if v % 4:
        raise BadAlignment(f"address {tok} is not 4-aligned", line=lineno)
    return v


_ARITY = {"set": 2, "add": 3, "write": 2, "read": 2, "repeat": 1, "end": 0}


def parse_program(lines) -> Program:
    """Parse program text lines into a :class:`Program`.

    Errors carry the 1-based line number of the offending instruction.
    """
    # stack of (body list, opening line, count)
    stack: list[tuple[list, int, int]] = [([], 0, 1)]
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        op, *args = text.split()
        op = op.lower()
        if op not in _ARITY:
            raise ProgramError(f"unknown mnemonic {op!r}", line=lineno)
        if len(args) != _ARITY[op]:
            raise ProgramError(
                f"{op} takes {_ARITY[op]} operand(s), got {len(args)}", line=lineno
            )
        body = stack[-1][0]
        if op == "set":
            body.append(Set(_reg(args[0], lineno), _imm(args[1], lineno)))
        elif op == "add":
            body.append(Add(*(_reg(a, lineno) for a in args)))
        elif op == "write":
            src_tok = args[1]
            src = Reg(_reg(src_tok, lineno)) if src_tok.lower().startswith("r") else _imm(src_tok, lineno)
            body.append(Write(_addr(args[0], lineno), src))
        elif op == "read":
            body.append(Read(_addr(args[0], lineno), _reg(args[1], lineno)))
        elif op == "repeat":
            count = _imm(args[0], lineno)
            if count < 1:
                raise ProgramError("repeat count must be >= 1", line=lineno)
            if len(stack) > MAX_REPEAT_DEPTH:
                raise ProgramError(f"repeat nesting deeper than {MAX_REPEAT_DEPTH}", line=lineno)
            stack.append(([], lineno, count))
        else:  # end
            if len(stack) == 1:
                raise ProgramError("'end' without matching 'repeat'", line=lineno)
            inner, _, count = stack.pop()
            stack[-1][0].append(Repeat(count, tuple(inner)))
    if len(stack) > 1:
        raise ProgramError("unterminated repeat block", line=stack[-1][1])
    return Program(tuple(stack[0][0]))


def format_program(program: Program) -> list[str]:
    """Inverse of :func:`parse_program` (canonical spelling)."""
    out: list[str] = []

    def emit(body, depth):
        pad = "  " * depth
        for ins in body:
            if isinstance(ins, Set):
                out.append(f"{pad}set r{ins.rd} {ins.imm:#x}")
            elif isinstance(ins, Add):
                out.append(f"{pad}add r{ins.rd} r{ins.ra} r{ins.rb}")
            elif isinstance(ins, Write):
                src = f"r{ins.src.index}" if isinstance(ins.src, Reg) else f"{ins.src:#x}"
                out.append(f"{pad}write {ins.addr:#06x} {src}")
            elif isinstance(ins, Read):
                out.append(f"{pad}read {ins.addr:#06x} r{ins.rd}")
            else:
                out.append(f"{pad}repeat {ins.count}")
                emit(ins.body, depth + 1)
                out.append(f"{pad}end")

    emit(program.instructions, 0)
    return out


def iter_ops(program: Program) -> Iterator[Instr]:
    """Yield the primitive instructions of ``program`` in execution order.

    Repeat blocks are expanded lazily so long loops cost no memory.
    """

    def walk(body):
        for ins in body:
            if isinstance(ins, Repeat):
                for _ in range(ins.count):
                    yield from walk(ins.body)
            else:
                yield ins

    return walk(program.instructions)


class Cpu:
    """Register file plus instruction stream of one master.

    Both simulation kernels drive masters through this class so the
    instruction semantics exist exactly once; the kernels differ only in
    how and when a bus transfer completes.
    """

    def __init__(self, program: Program, start_address: int = 0):
        self.regs = [0] * NUM_REGS
        self.start = start_address
        self._ops = iter_ops(program)
        self.current: Instr | None = next(self._ops, None)

    @property
    def done(self) -> bool:
        return self.current is None

    def advance(self):
        self.current = next(self._ops, None)

    def execute_local(self):
        """Execute the current Set/Add and move on."""
        ins = self.current
        if isinstance(ins, Set):
            self.regs[ins.rd] = ins.imm
        elif isinstance(ins, Add):
            self.regs[ins.rd] = (self.regs[ins.ra] + self.regs[ins.rb]) & WORD_MASK
        else:
            raise TypeError(f"{ins!r} is not a local instruction")
        self.advance()

    def is_transfer(self) -> bool:
        return isinstance(self.current, (Read, Write))

    def effective_address(self) -> int:
        return (self.start + self.current.addr) & WORD_MASK

    def write_value(self) -> int:
        src = self.current.src
        return self.regs[src.index] if isinstance(src, Reg) else src

    def complete(self, read_data: int = 0):
        """Retire the current transfer; ``read_data`` lands in rd for reads."""
        if isinstance(self.current, Read):
            self.regs[self.current.rd] = read_data & WORD_MASK
        self.advance()
