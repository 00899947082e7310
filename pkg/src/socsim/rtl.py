"""Cycle-accurate kernel: elaboration and two-phase simulation.

Each cycle first settles combinational logic by evaluating every comb
process once in topological order, then applies the clock edge by calling
every module's ``tick``. Ticks only update registered state, never signals.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter

from .components import BEHAVIOURS, MasterB, SlaveB
from .errors import (
    CombinationalLoop,
    CycleLimitExceeded,
    ElaborationError,
    MultipleDrivers,
    UnconnectedPort,
)
from .netlist import Level, Netlist, check_level, check_portmap
from .tlm import ObservationRecord, SimResult

DEFAULT_CYCLE_LIMIT = 1_000_000


class Signal:
    __slots__ = ("name", "width", "value")

    def __init__(self, name: str, width: int):
        self.name = name
        self.width = width
        self.value = 0

    def set(self, value: int):
        v = int(value)
        if v < 0 or v >> self.width:
            raise ValueError(f"{v:#x} does not fit {self.width}-bit signal {self.name}")
        self.value = v

    def __repr__(self):
        return f"Signal({self.name}={self.value:#x})"


@dataclass
class RtlStats:
    cycles_simulated: int = 0
    transfers_completed: int = 0
    wall_time: float = 0.0
    protocol_violations: int = 0


@dataclass
class CombProcess:
    name: str
    reads: list
    writes: list
    fn: object


@dataclass
class RtlSystem:
    netlist: Netlist
    signals: dict = field(default_factory=dict)
    comb: list = field(default_factory=list)
    behaviours: dict = field(default_factory=dict)
    clock_cycle: int = 0
    trace: list = field(default_factory=list)
    grants: list = field(default_factory=list)
    decisions: list = field(default_factory=list)
    history: list | None = None
    fault: tuple | None = None
    monitor: object = None
    _ports: dict = field(default_factory=dict)
    _seq: dict = field(default_factory=dict)

    # -- wiring ------------------------------------------------------------
    def port_signal(self, module: str, port: str) -> Signal:
        return self._ports[(module, port)]

    @property
    def masters(self) -> list[MasterB]:
        return [b for b in self.behaviours.values() if isinstance(b, MasterB)]

    @property
    def slaves(self) -> list[SlaveB]:
        return [b for b in self.behaviours.values() if isinstance(b, SlaveB)]

    @property
    def seq_processes(self):
        return [b.tick for b in self.behaviours.values()]

    # -- hooks used by behaviours -------------------------------------------
    def observe(self, master, kind, address, data, status, cycle):
        seq = self._seq.get(master, 0)
        self._seq[master] = seq + 1
        self.trace.append(ObservationRecord(seq, master, kind, address, data, status))

    def log_grant(self, cycle, domain, master):
        self.grants.append((cycle, domain, master))

    def log_decision(self, cycle, domain, requesters, winner):
        self.decisions.append((cycle, domain, tuple(requesters), winner))

    def fault_filter(self, master, read_index, data):
        if self.fault is not None and self.fault == (master, read_index):
            return data ^ 0xFFFF_FFFF
        return data

    # -- simulation --------------------------------------------------------
    def settle(self):
        for proc in self.comb:
            proc.fn()

    def snapshot(self) -> tuple:
        return tuple(sig.value for sig in self.signals.values())

    def step(self):
        self.settle()
        if self.monitor is not None:
            self.monitor.check(self.clock_cycle)
        if self.history is not None:
            self.history.append(self.snapshot())
        for tick in self.seq_processes:
            tick(self.clock_cycle)
        self.clock_cycle += 1

    def finished(self) -> bool:
        return all(m.done for m in self.masters)

    def final_state(self) -> dict:
        return {s.name: s.mem.image() for s in self.slaves}


def _raise_violations(violations):
    kinds = {v.kind for v in violations}
    text = "; ".join(str(v) for v in violations)
    if "MultipleDrivers" in kinds:
        raise MultipleDrivers(text, violations)
    if "UnconnectedPort" in kinds:
        raise UnconnectedPort(text, violations)
    raise ElaborationError(text, violations)


def elaborate(netlist: Netlist, record_history: bool = False, monitor: bool = True) -> RtlSystem:
    """Turn an RTL netlist into a runnable :class:`RtlSystem`."""
    if netlist.level is not Level.RTL:
        raise ElaborationError("only RTL netlists can be elaborated")
    violations = check_portmap(netlist) + check_level(netlist)
    if violations:
        _raise_violations(violations)

    sys_ = RtlSystem(netlist, history=[] if record_history else None)
    for m in netlist.modules:
        for p in m.outputs():
            sig = Signal(f"{m.name}.{p.name}", p.width)
            sys_.signals[sig.name] = sig
            sys_._ports[(m.name, p.name)] = sig
    for c in netlist.connections:
        sys_._ports[(c.dst, c.dst_port)] = sys_._ports[(c.src, c.src_port)]

    writer: dict[str, str] = {}
    procs: dict[str, CombProcess] = {}
    for m in netlist.modules:
        cls = BEHAVIOURS.get(m.kind)
        if cls is None:
            raise ElaborationError(f"no behaviour for module kind {m.kind!r} ({m.name})")
        beh = cls(sys_, m)
        sys_.behaviours[m.name] = beh
        declared = {p.name for p in m.processes}
        for name, reads, writes, fn in beh.comb_processes():
            if name not in declared:
                raise ElaborationError(f"{m.name}: behaviour process {name!r} not declared in netlist")
            key = f"{m.name}.{name}"
            procs[key] = CombProcess(key, [sys_.port_signal(m.name, r).name for r in reads],
                                     [sys_.port_signal(m.name, w).name for w in writes], fn)
            for w in procs[key].writes:
                if w in writer:
                    raise MultipleDrivers(f"signal {w} written by {writer[w]} and {key}")
                writer[w] = key

    graph = {key: {writer[r] for r in p.reads if r in writer} for key, p in procs.items()}
    try:
        order = list(TopologicalSorter(graph).static_order())
    except CycleError as exc:
        cycle = exc.args[1]
        raise CombinationalLoop("combinational loop: " + " -> ".join(cycle), cycle) from None
    sys_.comb = [procs[k] for k in order]
    if monitor:
        from .monitor import ProtocolMonitor
        sys_.monitor = ProtocolMonitor(sys_)
    return sys_


def run_rtl(system: RtlSystem, max_cycles: int = DEFAULT_CYCLE_LIMIT, fault=None) -> SimResult:
    """Clock ``system`` until every master program finishes.

    ``fault`` is a ``(master, read_index)`` pair whose read return gets
    corrupted; it exists for exercising the mismatch path of comparisons.
    """
    system.fault = fault
    t0 = time.perf_counter()
    while not system.finished():
        if system.clock_cycle >= max_cycles:
            raise CycleLimitExceeded(f"cycle limit {max_cycles} reached with programs unfinished")
        system.step()
    stats = RtlStats(
        cycles_simulated=system.clock_cycle,
        transfers_completed=len(system.trace),
        wall_time=time.perf_counter() - t0,
        protocol_violations=len(system.monitor.violations) if system.monitor else 0,
    )
    return SimResult(list(system.trace), system.final_state(), stats, list(system.grants))


def simulate_rtl(spec, bus=None, max_cycles: int = DEFAULT_CYCLE_LIMIT, fault=None,
                 record_history: bool = False) -> tuple[SimResult, RtlSystem]:
    """Build the fabric for ``spec``, elaborate it and run it."""
    from .fabric import build_rtl

    system = elaborate(build_rtl(spec, bus), record_history=record_history)
    return run_rtl(system, max_cycles, fault), system
