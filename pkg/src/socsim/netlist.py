"""Structural netlists shared by the TLM elaborator, the fabric builders and
the TLM to RTL transformation."""
from __future__ import annotations

import enum
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import networkx as nx


class Level(str, enum.Enum):
    TLM = "TLM"
    RTL = "RTL"


class Tag(str, enum.Enum):
    TLM_ONLY = "tlm"
    RTL_ONLY = "rtl"
    COMMON = "common"


IN = "in"
OUT = "out"


@dataclass(frozen=True)
class Port:
    name: str
    direction: str
    width: int = 1
    tag: Tag = Tag.RTL_ONLY

    def signature(self):
        return (self.name, self.direction, self.width)


@dataclass(frozen=True)
class Process:
    name: str
    tag: Tag = Tag.RTL_ONLY


@dataclass
class Module:
    name: str
    kind: str
    ports: list[Port] = field(default_factory=list)
    processes: list[Process] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def port(self, name: str) -> Port | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def has_port(self, name: str) -> bool:
        return self.port(name) is not None

    def inputs(self) -> list[Port]:
        return [p for p in self.ports if p.direction == IN]

    def outputs(self) -> list[Port]:
        return [p for p in self.ports if p.direction == OUT]

    def signature(self):
        return (self.kind, tuple(sorted(p.signature() for p in self.ports)))


@dataclass(frozen=True)
class Connection:
    src: str
    src_port: str
    dst: str
    dst_port: str

    def __str__(self):
        return f"{self.src}.{self.src_port} -> {self.dst}.{self.dst_port}"


@dataclass
class Netlist:
    level: Level
    modules: list[Module] = field(default_factory=list)
    connections: list[Connection] = field(default_factory=list)
    bus: str | None = None
    address_map: object = None

    def module(self, name: str) -> Module:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)

    def find(self, name: str) -> Module | None:
        for m in self.modules:
            if m.name == name:
                return m
        return None

    def add(self, module: Module) -> Module:
        if self.find(module.name) is not None:
            raise ValueError(f"duplicate module name {module.name!r}")
        self.modules.append(module)
        return module

    def connect(self, src: str, src_port: str, dst: str, dst_port: str):
        self.connections.append(Connection(src, src_port, dst, dst_port))

    def of_kind(self, kind: str) -> list[Module]:
        return [m for m in self.modules if m.kind == kind]

    def census(self) -> Counter:
        return Counter(m.kind for m in self.modules)


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    detail: str = ""

    def __str__(self):
        return f"{self.kind} at {self.where}" + (f": {self.detail}" if self.detail else "")


def check_portmap(netlist: Netlist) -> list[Violation]:
    """Every input driven exactly once, every endpoint real and compatible.

    Outputs may have any number of loads, zero included.
    """
    violations: list[Violation] = []
    drivers: dict[tuple[str, str], list[Connection]] = defaultdict(list)
    for c in netlist.connections:
        src_mod, dst_mod = netlist.find(c.src), netlist.find(c.dst)
        sp = src_mod.port(c.src_port) if src_mod else None
        dp = dst_mod.port(c.dst_port) if dst_mod else None
        if sp is None:
            violations.append(Violation("UnknownEndpoint", f"{c.src}.{c.src_port}", str(c)))
        if dp is None:
            violations.append(Violation("UnknownEndpoint", f"{c.dst}.{c.dst_port}", str(c)))
        if sp is None or dp is None:
            continue
        if sp.direction != OUT or dp.direction != IN:
            violations.append(Violation("DirectionMismatch", str(c), "must connect an output to an input"))
            continue
        if sp.width != dp.width:
            violations.append(Violation("WidthMismatch", str(c), f"{sp.width} vs {dp.width} bits"))
        drivers[(c.dst, c.dst_port)].append(c)
    for m in netlist.modules:
        for p in m.inputs():
            ds = drivers.get((m.name, p.name), [])
            if not ds:
                violations.append(Violation("UnconnectedPort", f"{m.name}.{p.name}"))
            elif len(ds) > 1:
                names = ", ".join(f"{d.src}.{d.src_port}" for d in ds)
                violations.append(Violation("MultipleDrivers", f"{m.name}.{p.name}", f"driven by {names}"))
    return violations


def check_level(netlist: Netlist) -> list[Violation]:
    """Level discipline: no clocks in TLM, no TLM-only ports in RTL."""
    out = []
    for m in netlist.modules:
        for p in m.ports:
            if netlist.level is Level.TLM and (p.name == "clk" or p.tag is Tag.RTL_ONLY):
                out.append(Violation("LevelViolation", f"{m.name}.{p.name}", "RTL port in TLM netlist"))
            if netlist.level is Level.RTL and p.tag is Tag.TLM_ONLY:
                out.append(Violation("LevelViolation", f"{m.name}.{p.name}", "TLM-only port in RTL netlist"))
    return out


def _graph(netlist: Netlist) -> nx.DiGraph:
    g = nx.DiGraph()
    for m in netlist.modules:
        g.add_node(m.name, sig=m.signature())
    labels: dict[tuple[str, str], list] = defaultdict(list)
    for c in netlist.connections:
        labels[(c.src, c.dst)].append((c.src_port, c.dst_port))
    for (a, b), pairs in labels.items():
        g.add_edge(a, b, ports=tuple(sorted(pairs)))
    return g


def isomorphic(a: Netlist, b: Netlist) -> bool:
    """Name-independent structural equality of two netlists.

    Equal multisets of (kind, port signature), equal connection multisets
    projected onto port names, and a label-preserving graph isomorphism.
    """
    if a.level != b.level:
        return False
    if Counter(m.signature() for m in a.modules) != Counter(m.signature() for m in b.modules):
        return False
    if Counter((c.src_port, c.dst_port) for c in a.connections) != Counter(
        (c.src_port, c.dst_port) for c in b.connections
    ):
        return False
    return nx.is_isomorphic(
        _graph(a),
        _graph(b),
        node_match=lambda x, y: x["sig"] == y["sig"],
        edge_match=lambda x, y: x["ports"] == y["ports"],
    )


def export_text(netlist: Netlist) -> str:
    """Stable textual dump: modules, ports and processes, then connections."""
    lines = [f"netlist level={netlist.level.value} bus={netlist.bus or '-'}"]
    for m in sorted(netlist.modules, key=lambda m: m.name):
        lines.append(f"module {m.name} kind={m.kind}")
        for p in m.ports:
            lines.append(f"  port {p.direction:<3} {p.name} width={p.width} tag={p.tag.value}")
        for pr in m.processes:
            lines.append(f"  process {pr.name} tag={pr.tag.value}")
    for c in sorted(netlist.connections, key=lambda c: (c.src, c.src_port, c.dst, c.dst_port)):
        lines.append(f"connect {c}")
    return "\n".join(lines) + "\n"
