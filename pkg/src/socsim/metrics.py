"""Accuracy between abstraction levels, structural design-effort ratio and
simulation speedup."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .fabric import build_rtl
from .netlist import Netlist
from .refine import elaborate_tlm_netlist
from .rtl import DEFAULT_CYCLE_LIMIT, simulate_rtl
from .spec import BusKind, SystemSpec
from .tlm import DEFAULT_TRANSACTION_LIMIT, Kind, SimResult, Status, run_tlm

LINES_PER_MAN_DAY = 8


@dataclass
class AccuracyReport:
    alpha: float
    record_diffs: list = field(default_factory=list)
    final_state_diffs: list = field(default_factory=list)
    race_flag: bool = False
    mismatched_records: int = 0
    total_records: int = 0

    @property
    def equivalent(self) -> bool:
        return self.alpha == 0

    def to_dict(self) -> dict:
        return asdict(self)


def _record_view(rec):
    if rec is None:
        return None
    return {"kind": rec.kind.value, "address": f"{rec.address:#010x}",
            "data": f"{rec.data:#010x}", "status": rec.status.value}


def race_flag(*results: SimResult) -> bool:
    """True when two masters touched one address and at least one wrote it."""
    touched: dict[int, set] = {}
    written: set[int] = set()
    for res in results:
        for r in res.trace:
            if r.status is not Status.OK:
                continue
            touched.setdefault(r.address, set()).add(r.master)
            if r.kind is Kind.WRITE:
                written.add(r.address)
    return any(len(ms) > 1 and a in written for a, ms in touched.items())


def diff_results(a: SimResult, b: SimResult) -> AccuracyReport:
    """Compare two runs of one spec; symmetric in its arguments.

    alpha is the larger of the per-master record mismatch ratio (over the
    bigger trace) and the differing-word ratio of the final memories.
    """
    ma, mb = a.per_master(), b.per_master()
    mismatches = 0
    diffs = []
    for master in sorted(set(ma) | set(mb)):
        ra, rb = ma.get(master, []), mb.get(master, [])
        first = None
        for i in range(max(len(ra), len(rb))):
            x = ra[i] if i < len(ra) else None
            y = rb[i] if i < len(rb) else None
            if x is None or y is None or x.key() != y.key():
                mismatches += 1
                if first is None:
                    first = {"master": master, "seq": i, "tlm": _record_view(x), "rtl": _record_view(y)}
        if first is not None:
            diffs.append(first)
    total = max(len(a.trace), len(b.trace))
    record_ratio = mismatches / total if total else 0.0

    state_diffs = []
    words = 0
    for slave in sorted(set(a.final_state) | set(b.final_state)):
        ia, ib = a.final_state.get(slave, b""), b.final_state.get(slave, b"")
        n = max(len(ia), len(ib))
        words += n // 4
        for off in range(0, n, 4):
            wa, wb = ia[off:off + 4], ib[off:off + 4]
            if wa != wb:
                state_diffs.append((slave, off, int.from_bytes(wa, "little") if wa else None,
                                    int.from_bytes(wb, "little") if wb else None))
    state_ratio = len(state_diffs) / words if words else 0.0
    return AccuracyReport(
        alpha=max(record_ratio, state_ratio),
        record_diffs=diffs,
        final_state_diffs=state_diffs,
        race_flag=race_flag(a, b),
        mismatched_records=mismatches,
        total_records=total,
    )


@dataclass
class Comparison:
    report: AccuracyReport
    tlm: SimResult
    rtl: SimResult


def compare_runs(spec: SystemSpec, bus=None, fault=None,
                 max_transactions: int = DEFAULT_TRANSACTION_LIMIT,
                 max_cycles: int = DEFAULT_CYCLE_LIMIT) -> Comparison:
    spec = spec if bus is None else spec.with_bus(bus)
    tlm = run_tlm(spec, max_transactions)
    rtl, _ = simulate_rtl(spec, max_cycles=max_cycles, fault=fault)
    return Comparison(diff_results(tlm, rtl), tlm, rtl)


def compare(spec: SystemSpec, bus=None, fault=None) -> AccuracyReport:
    """Run both kernels on ``spec`` and report their observable distance."""
    return compare_runs(spec, bus, fault).report


@dataclass(frozen=True)
class ComplexityCounts:
    modules: int = 0
    ports: int = 0
    processes: int = 0
    connections: int = 0

    @property
    def total(self) -> int:
        return self.modules + self.ports + self.processes + self.connections

    @property
    def man_days(self) -> float:
        return self.total / LINES_PER_MAN_DAY

    def to_dict(self) -> dict:
        return {**asdict(self), "total": self.total, "man_days": self.man_days}


def complexity(netlist: Netlist) -> ComplexityCounts:
    return ComplexityCounts(
        modules=len(netlist.modules),
        ports=sum(len(m.ports) for m in netlist.modules),
        processes=sum(len(m.processes) for m in netlist.modules),
        connections=len(netlist.connections),
    )


@dataclass(frozen=True)
class TeResult:
    t_rtl: ComplexityCounts
    t_tlm: ComplexityCounts

    @property
    def te(self) -> float:
        return self.t_rtl.total / self.t_tlm.total


def te_ratio(spec: SystemSpec, bus=None) -> TeResult:
    bus = spec.bus if bus is None else BusKind.parse(bus)
    spec = spec.with_bus(bus)
    return TeResult(complexity(build_rtl(spec)), complexity(elaborate_tlm_netlist(spec)))


@dataclass(frozen=True)
class Speedup:
    wall_ratio: float
    event_ratio: float


def _ratio(num, den) -> float:
    if den:
        return num / den
    return 1.0 if not num else math.inf


def speedup(tlm_stats, rtl_stats) -> Speedup:
    return Speedup(
        wall_ratio=_ratio(rtl_stats.wall_time, tlm_stats.wall_time),
        event_ratio=_ratio(rtl_stats.cycles_simulated, tlm_stats.transactions_completed),
    )
