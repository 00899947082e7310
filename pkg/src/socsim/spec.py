"""System descriptions: masters, slaves, arbiter policy and master programs.

A spec file is a JSON document::

    {
      "bus": "wishbone",                # or "avalon"
      "arbiter": "round_robin",         # or "none" (point-to-point, 1 master + 1 slave)
      "description": "free text",       # optional
      "masters": [
        {"name": "MicroPro", "start_address": "0x0000",
         "program": ["set r1 5", "set r2 7", "add r0 r1 r2", "write 0x0010 r0"]}
      ],
      "slaves": [
        {"name": "ram0", "base": "0x0000", "size": 4096,
         "read_latency": 1, "write_latency": 1}
      ]
    }

Integers may be JSON numbers or strings with a 0x/0b prefix.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from .errors import (
    BadAlignment,
    DuplicateName,
    NoMasters,
    NoSlaves,
    OverlappingMap,
    SpecError,
    SpecSyntaxError,
)
from .program import Program, format_program, parse_number, parse_program

WORD_BYTES = 4
ADDR_LIMIT = 1 << 32


class BusKind(str, enum.Enum):
    AVALON = "avalon"
    WISHBONE = "wishbone"

    @classmethod
    def parse(cls, value) -> "BusKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise SpecError(f"unknown bus kind {value!r} (expected avalon or wishbone)") from None


class ArbiterPolicy(str, enum.Enum):
    ROUND_ROBIN = "round_robin"


@dataclass(frozen=True)
class MasterSpec:
    name: str
    start_address: int = 0
    program: Program = field(default_factory=Program)


@dataclass(frozen=True)
class SlaveSpec:
    name: str
    base: int
    size: int
    read_latency: int = 1
    write_latency: int = 1

    @property
    def end(self) -> int:
        return self.base + self.size

    def contains(self, address: int) -> bool:
        return self.base <= address < self.base + self.size


@dataclass(frozen=True)
class SystemSpec:
    bus: BusKind
    masters: tuple[MasterSpec, ...]
    slaves: tuple[SlaveSpec, ...]
    arbiter: ArbiterPolicy | None = ArbiterPolicy.ROUND_ROBIN
    description: str = ""

    @property
    def point_to_point(self) -> bool:
        return self.arbiter is None

    @property
    def tiers(self) -> int:
        return len(self.masters) + len(self.slaves) + (0 if self.arbiter is None else 1)

    def with_bus(self, bus) -> "SystemSpec":
        return SystemSpec(BusKind.parse(bus), self.masters, self.slaves, self.arbiter, self.description)

    def master_names(self) -> list[str]:
        return [m.name for m in self.masters]


def _is_identifier(name) -> bool:
    return isinstance(name, str) and name.isidentifier()


def validate(spec: SystemSpec) -> SystemSpec:
    """Check every structural invariant; return ``spec`` unchanged or raise."""
    if not spec.masters:
        raise NoMasters("system has no masters")
    if not spec.slaves:
        raise NoSlaves("system has no slaves")
    seen: set[str] = set()
    for comp in (*spec.masters, *spec.slaves):
        if not _is_identifier(comp.name):
            raise SpecError(f"component name {comp.name!r} is not an identifier")
        if comp.name in seen:
            raise DuplicateName(f"duplicate component name {comp.name!r}")
        seen.add(comp.name)
    for m in spec.masters:
        if not 0 <= m.start_address < ADDR_LIMIT:
            raise SpecError(f"master {m.name}: start address out of 32-bit range")
        if m.start_address % WORD_BYTES:
            raise BadAlignment(f"master {m.name}: start address {m.start_address:#x} is not 4-aligned")
    for s in spec.slaves:
        if s.base % WORD_BYTES:
            raise BadAlignment(f"slave {s.name}: base {s.base:#x} is not 4-aligned")
        if s.size < WORD_BYTES or s.size % WORD_BYTES:
            raise BadAlignment(f"slave {s.name}: size {s.size} must be a positive multiple of 4")
        if s.base < 0 or s.end > ADDR_LIMIT:
            raise SpecError(f"slave {s.name}: range [{s.base:#x}, {s.end:#x}) overflows 32 bits")
        if s.read_latency < 1 or s.write_latency < 1:
            raise SpecError(f"slave {s.name}: latencies must be >= 1 cycle")
    ordered = sorted(spec.slaves, key=lambda s: s.base)
    for a, b in zip(ordered, ordered[1:]):
        if b.base < a.end:
            raise OverlappingMap(
                f"slave {a.name} [{a.base:#06x}, {a.end:#06x}) overlaps "
                f"slave {b.name} [{b.base:#06x}, {b.end:#06x})"
            )
    if spec.arbiter is None and (len(spec.masters) != 1 or len(spec.slaves) != 1):
        raise SpecError("arbiter 'none' (point-to-point) needs exactly one master and one slave")
    return spec


def _int_field(obj: dict, key: str, where: str, default=None) -> int:
    if key not in obj:
        if default is None:
            raise SpecError(f"{where}: missing field {key!r}")
        return default
    v = obj[key]
    if isinstance(v, bool):
        raise SpecError(f"{where}: field {key!r} must be an integer")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        try:
            return parse_number(v)
        except ValueError:
            pass
    raise SpecError(f"{where}: field {key!r} must be an integer, got {v!r}")


def _parse_arbiter(value) -> ArbiterPolicy | None:
    if value is None or str(value).lower() == "none":
        return None
    try:
        return ArbiterPolicy(str(value).lower())
    except ValueError:
        raise SpecError(f"unsupported arbiter policy {value!r}") from None


def spec_from_dict(doc) -> SystemSpec:
    if not isinstance(doc, dict):
        raise SpecError("spec document must be a JSON object")
    unknown = set(doc) - {"bus", "arbiter", "description", "masters", "slaves"}
    if unknown:
        raise SpecError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    if "bus" not in doc:
        raise SpecError("missing top-level key 'bus'")
    bus = BusKind.parse(doc["bus"])
    arbiter = _parse_arbiter(doc.get("arbiter", "round_robin"))
    raw_masters = doc.get("masters", [])
    raw_slaves = doc.get("slaves", [])
    if not isinstance(raw_masters, list) or not isinstance(raw_slaves, list):
        raise SpecError("'masters' and 'slaves' must be arrays")

    masters = []
    for i, m in enumerate(raw_masters):
        where = f"masters[{i}]"
        if not isinstance(m, dict) or "name" not in m:
            raise SpecError(f"{where}: expected an object with a 'name'")
        lines = m.get("program", [])
        if not isinstance(lines, list) or not all(isinstance(x, str) for x in lines):
            raise SpecError(f"{where}: 'program' must be an array of strings")
        try:
            program = parse_program(lines)
        except SpecError as exc:
            raise type(exc)(f"{where} ({m['name']}) program: {exc}") from None
        masters.append(MasterSpec(m["name"], _int_field(m, "start_address", where, 0), program))

    slaves = []
    for i, s in enumerate(raw_slaves):
        where = f"slaves[{i}]"
        if not isinstance(s, dict) or "name" not in s:
            raise SpecError(f"{where}: expected an object with a 'name'")
        slaves.append(
            SlaveSpec(
                s["name"],
                _int_field(s, "base", where),
                _int_field(s, "size", where),
                _int_field(s, "read_latency", where, 1),
                _int_field(s, "write_latency", where, 1),
            )
        )
    description = doc.get("description", "")
    if not isinstance(description, str):
        raise SpecError("'description' must be a string")
    return validate(SystemSpec(bus, tuple(masters), tuple(slaves), arbiter, description))


def parse_spec(text: str) -> SystemSpec:
    """Parse and validate a JSON spec document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecSyntaxError(exc.msg, line=exc.lineno, column=exc.colno) from None
    return spec_from_dict(doc)


def load_spec(path) -> SystemSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


def spec_to_dict(spec: SystemSpec) -> dict:
    doc = {
        "bus": spec.bus.value,
        "arbiter": "none" if spec.arbiter is None else spec.arbiter.value,
        "masters": [
            {
                "name": m.name,
                "start_address": f"{m.start_address:#06x}",
                "program": format_program(m.program),
            }
            for m in spec.masters
        ],
        "slaves": [
            {
                "name": s.name,
                "base": f"{s.base:#06x}",
                "size": s.size,
                "read_latency": s.read_latency,
                "write_latency": s.write_latency,
            }
            for s in spec.slaves
        ],
    }
    if spec.description:
        doc["description"] = spec.description
    return doc


def serialize_spec(spec: SystemSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2) + "\n"


# Canonical tier scenarios. Slaves are 4 KiB apart; every master works only
# inside its own window so the scenarios are race free on every fabric.
CANONICAL_SLAVE_SIZE = 0x1000
CANONICAL_READ_LATENCY = 2
CANONICAL_WRITE_LATENCY = 1

_TIER_LAYOUT = {
    # tiers: (master start addresses, slave count, arbitrated)
    2: ((0x0000,), 1, False),
    3: ((0x0000,), 1, True),
    4: ((0x0000, 0x0800), 1, True),
    5: ((0x0000, 0x1000), 2, True),
}


def canonical_program(index: int) -> Program:
    seed = 0x1000 * (index + 1) + 0xA0
    step = index + 1
    lines = [
        f"set r1 {seed:#x}",
        f"set r2 {step}",
        "write 0x00 r1",
        "add r1 r1 r2",
        "write 0x04 r1",
        "add r1 r1 r2",
        "write 0x08 r1",
        "add r1 r1 r2",
        "write 0x0c r1",
        "repeat 2",
        "read 0x00 r3",
        "end",
        "read 0x04 r4",
        "read 0x08 r5",
        "read 0x0c r6",
        "add r7 r3 r6",
        "write 0x10 r7",
        "read 0x10 r0",
    ]
    return parse_program(lines)


def tier_spec(tiers: int, bus) -> SystemSpec:
    """Canonical scenario with ``tiers`` components (arbiter included)."""
    if tiers not in _TIER_LAYOUT:
        raise SpecError(f"tiers must be in 2..5, got {tiers}")
    starts, n_slaves, arbitrated = _TIER_LAYOUT[tiers]
    masters = tuple(
        MasterSpec(f"cpu{i}", start, canonical_program(i)) for i, start in enumerate(starts)
    )
    slaves = tuple(
        SlaveSpec(
            f"ram{j}",
            j * CANONICAL_SLAVE_SIZE,
            CANONICAL_SLAVE_SIZE,
            CANONICAL_READ_LATENCY,
            CANONICAL_WRITE_LATENCY,
        )
        for j in range(n_slaves)
    )
    arbiter = ArbiterPolicy.ROUND_ROBIN if arbitrated else None
    return validate(
        SystemSpec(BusKind.parse(bus), masters, slaves, arbiter, f"canonical {tiers}-tier scenario")
    )
