"""Untimed transaction-level kernel.

Masters run their programs; every Read/Write becomes one atomic
:class:`Transaction`. The scheduler works in rounds: each round visits the
masters in declaration order, lets each one run local instructions up to its
next transfer, then resolves all pending transfers at once. Contention is
settled round-robin per contention domain: the whole bus for Wishbone, each
slave for Avalon. Losers log a WAIT and retry next round. Targets outside the
address map complete immediately with status ERROR.
"""
from __future__ import annotations

import bisect
import enum
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import LimitExceeded
from .memory import FULL_WORD, SlaveMemory
from .program import Cpu, Write
from .spec import BusKind, SystemSpec

DEFAULT_TRANSACTION_LIMIT = 1_000_000


class Kind(str, enum.Enum):
    READ = "R"
    WRITE = "W"


class Status(str, enum.Enum):
    OK = "OK"
    WAIT = "WAIT"
    ERROR = "ERROR"


@dataclass
class Transaction:
    kind: Kind
    address: int
    data: int = 0
    byte_enable: int = FULL_WORD
    status: Status = Status.OK
    latency: int = 0
    attributes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.address % 4:
            raise ValueError(f"transaction address {self.address:#x} is not 4-aligned")
        if self.kind is Kind.WRITE and not self.byte_enable:
            raise ValueError("write with empty byte-enable")


@dataclass(frozen=True)
class ObservationRecord:
    seq: int
    master: str
    kind: Kind
    address: int
    data: int
    status: Status

    def key(self):
        """Fields compared across abstraction levels."""
        return (self.kind, self.address, self.data, self.status)


@dataclass(frozen=True)
class MapEntry:
    base: int
    size: int
    target: str

    @property
    def end(self):
        return self.base + self.size


@dataclass(frozen=True)
class Route:
    target: str
    offset: int


class AddressMap:
    """Disjoint address ranges, each owned by one target port."""

    def __init__(self, entries: Iterable[MapEntry]):
        self.entries = tuple(entries)
        self._sorted = sorted(self.entries, key=lambda e: e.base)
        self._bases = [e.base for e in self._sorted]
        for a, b in zip(self._sorted, self._sorted[1:]):
            if b.base < a.end:
                raise ValueError(f"map entries {a.target} and {b.target} overlap")

    @classmethod
    def from_spec(cls, spec: SystemSpec) -> "AddressMap":
        return cls(MapEntry(s.base, s.size, s.name) for s in spec.slaves)

    def __eq__(self, other):
        return isinstance(other, AddressMap) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        inner = ", ".join(f"{e.target}:[{e.base:#x},{e.end:#x})" for e in self.entries)
        return f"AddressMap({inner})"


def route(amap: AddressMap, address: int) -> Route | None:
    """Resolve ``address`` to its target and offset; None means unmapped."""
    i = bisect.bisect_right(amap._bases, address) - 1
    if i < 0:
        return None
    entry = amap._sorted[i]
    if address < entry.end:
        return Route(entry.target, address - entry.base)
    return None


def arbitrate_rr(requesters, last_grant, order: Sequence):
    """Round-robin choice: first requester strictly after ``last_grant``.

    Scanning starts at index 0 when ``last_grant`` is None. Returns None
    when nobody requests.
    """
    if not requesters:
        return None
    n = len(order)
    start = 0 if last_grant is None else order.index(last_grant) + 1
    for k in range(n):
        cand = order[(start + k) % n]
        if cand in requesters:
            return cand
    return None


@dataclass
class TlmStats:
    transactions_completed: int = 0
    wait_events: int = 0
    scheduler_rounds: int = 0
    wall_time: float = 0.0


@dataclass
class SimResult:
    """What either kernel hands back: trace, final memories, stats."""

    trace: list
    final_state: dict
    stats: object
    grants: list = field(default_factory=list)

    def per_master(self, masters: Sequence[str] | None = None) -> dict[str, list[ObservationRecord]]:
        out: dict[str, list] = {m: [] for m in (masters or [])}
        for rec in self.trace:
            out.setdefault(rec.master, []).append(rec)
        return out


class TlmSimulator:
    def __init__(self, spec: SystemSpec):
        self.spec = spec
        self.amap = AddressMap.from_spec(spec)
        self.order = spec.master_names()
        self.memories = {s.name: SlaveMemory(s.size) for s in spec.slaves}
        self.cpus = {m.name: Cpu(m.program, m.start_address) for m in spec.masters}
        self.pending: dict[str, Transaction] = {}
        self.last_grant: dict[str, str | None] = {}
        self.seq = {name: 0 for name in self.order}
        self.trace: list[ObservationRecord] = []
        self.grants: list[tuple[int, str, str]] = []
        self.stats = TlmStats()

    def _domain(self, target: str) -> str:
        return "bus" if self.spec.bus is BusKind.WISHBONE else target

    def _record(self, master: str, txn: Transaction) -> ObservationRecord:
        rec = ObservationRecord(self.seq[master], master, txn.kind, txn.address, txn.data, txn.status)
        self.seq[master] += 1
        self.trace.append(rec)
        self.stats.transactions_completed += 1
        return rec

    def _perform(self, master: str, txn: Transaction, hit: Route) -> ObservationRecord:
        mem = self.memories[hit.target]
        if txn.kind is Kind.WRITE:
            mem.write_word(hit.offset, txn.data, txn.byte_enable)
        else:
            txn.data = mem.read_word(hit.offset)
        txn.status = Status.OK
        return self._record(master, txn)

    def step_round(self) -> dict[str, ObservationRecord]:
        """Resolve every pending transaction once; return the ones that completed."""
        self.stats.scheduler_rounds += 1
        done: dict[str, ObservationRecord] = {}
        contenders: dict[str, list[tuple[str, Route]]] = {}
        for master in self.order:
            txn = self.pending.get(master)
            if txn is None:
                continue
            hit = route(self.amap, txn.address)
            if hit is None:
                txn.status = Status.ERROR
                if txn.kind is Kind.READ:
                    txn.data = 0
                done[master] = self._record(master, txn)
                continue
            contenders.setdefault(self._domain(hit.target), []).append((master, hit))
        for domain, reqs in contenders.items():
            names = {m for m, _ in reqs}
            winner = arbitrate_rr(names, self.last_grant.get(domain), self.order)
            self.last_grant[domain] = winner
            self.grants.append((self.stats.scheduler_rounds, domain, winner))
            for master, hit in reqs:
                if master == winner:
                    done[master] = self._perform(master, self.pending[master], hit)
                else:
                    self.pending[master].status = Status.WAIT
                    self.stats.wait_events += 1
        for master in done:
            del self.pending[master]
        return done

    def issue(self, master: str, txn: Transaction) -> ObservationRecord:
        """Blocking transport: retry rounds until ``txn`` completes."""
        if master not in self.seq:
            raise KeyError(f"unknown master {master!r}")
        self.pending[master] = txn
        while True:
            done = self.step_round()
            if master in done:
                return done[master]

    def _fetch(self, master: str):
        cpu = self.cpus[master]
        while not cpu.done and not cpu.is_transfer():
            cpu.execute_local()
        if cpu.done:
            return
        if isinstance(cpu.current, Write):
            txn = Transaction(Kind.WRITE, cpu.effective_address(), cpu.write_value())
        else:
            txn = Transaction(Kind.READ, cpu.effective_address())
        self.pending[master] = txn

    def finished(self) -> bool:
        return not self.pending and all(c.done for c in self.cpus.values())

    def run(self, limit: int = DEFAULT_TRANSACTION_LIMIT) -> SimResult:
        t0 = time.perf_counter()
        while True:
            for master in self.order:
                if master not in self.pending:
                    self._fetch(master)
            if self.finished():
                break
            if self.stats.transactions_completed >= limit:
                raise LimitExceeded(
                    f"transaction limit {limit} reached with programs unfinished"
                )
            done = self.step_round()
            for master, rec in done.items():
                self.cpus[master].complete(rec.data)
        self.stats.wall_time = time.perf_counter() - t0
        return SimResult(
            list(self.trace),
            {name: mem.image() for name, mem in self.memories.items()},
            self.stats,
            list(self.grants),
        )


def run_tlm(spec: SystemSpec, limit: int = DEFAULT_TRANSACTION_LIMIT) -> SimResult:
    return TlmSimulator(spec).run(limit)
