"""Cycle behaviour of each RTL module kind.

A behaviour exposes combinational processes as ``(name, reads, writes, fn)``
tuples over its own port names, plus an optional clock-edge ``tick``. Comb
processes compute outputs from inputs and registered state; ``tick`` reads
settled signals and updates registered state only, so the order in which
modules tick within a cycle is irrelevant.
"""
from __future__ import annotations

from .memory import FULL_WORD, SlaveMemory
from .program import Cpu, Read, Write
from .tlm import Kind, Status, route


def _rr_pick(requests: list[bool], pointer: int) -> int | None:
    n = len(requests)
    for k in range(n):
        i = (pointer + k) % n
        if requests[i]:
            return i
    return None


class Behaviour:
    kind = ""

    def __init__(self, system, module):
        self.system = system
        self.module = module
        self.name = module.name
        self.params = module.params

    def s(self, port: str):
        return self.system.port_signal(self.name, port)

    def get(self, port: str) -> int:
        return self.system.port_signal(self.name, port).value

    def put(self, port: str, value: int):
        self.system.port_signal(self.name, port).set(value)

    def comb_processes(self):
        return []

    def tick(self, cycle: int):
        pass


class ClockSourceB(Behaviour):
    kind = "ClockSource"

    def __init__(self, system, module):
        super().__init__(system, module)
        self.put("clk", 1)


class MuxB(Behaviour):
    kind = "Mux"

    def __init__(self, system, module):
        super().__init__(system, module)
        self.n = self.params["inputs"]
        self.lanes = [
            ([f"{lane}_in{i}" if lane else f"in{i}" for i in range(self.n)], f"{lane}_out" if lane else "out")
            for lane, _ in self.params["lanes"]
        ]

    def comb_processes(self):
        reads = ["sel"] + [p for ins, _ in self.lanes for p in ins]
        writes = [out for _, out in self.lanes]
        return [(f"sel_{self.name}", reads, writes, self.select)]

    def select(self):
        sel = self.get("sel")
        for ins, out in self.lanes:
            self.put(out, self.get(ins[sel]) if sel < self.n else 0)


class MasterB(Behaviour):
    """Program-driven bus master; emits observation records on completion."""

    kind = "Master"

    def __init__(self, system, module):
        super().__init__(system, module)
        self.cpu = Cpu(module.params["program"], module.params["start_address"])
        self.avalon = module.has_port("readdata")
        self.reads_done = 0

    @property
    def done(self) -> bool:
        return self.cpu.done

    def comb_processes(self):
        outs = [p.name for p in self.module.outputs()]
        return [("bus_fsm", [], outs, self.drive)]

    def _request(self):
        if not self.cpu.is_transfer():
            return None
        ins = self.cpu.current
        is_write = isinstance(ins, Write)
        return is_write, self.cpu.effective_address(), self.cpu.write_value() if is_write else 0

    def drive(self):
        req = self._request()
        is_write, addr, data = req if req else (False, 0, 0)
        active = int(req is not None)
        if self.avalon:
            self.put("address", addr)
            self.put("be_n", (~FULL_WORD & 0xF) if active else 0xF)
            self.put("write", int(active and is_write))
            self.put("writedata", data)
            self.put("read", int(active and not is_write))
        else:
            self.put("cyc", active)
            self.put("stb", active)
            self.put("we", int(active and is_write))
            self.put("adr", addr)
            self.put("datW", data)
            self.put("sel", FULL_WORD if active else 0)

    def tick(self, cycle: int):
        if self.cpu.done:
            return
        req = self._request()
        if req is None:
            self.cpu.execute_local()
            return
        is_write, addr, wdata = req
        err = self.get("err")
        if self.avalon:
            finished = err or not self.get("wait")
            rdata = self.get("readdata")
        else:
            finished = err or self.get("ack")
            rdata = self.get("datR")
        if not finished:
            return
        status = Status.ERROR if err else Status.OK
        if is_write:
            data = wdata
        elif err:
            data = 0
        else:
            data = self.system.fault_filter(self.name, self.reads_done, rdata)
            self.reads_done += 1
        self.system.observe(self.name, Kind.WRITE if is_write else Kind.READ, addr, data, status, cycle)
        self.cpu.complete(data)


class SlaveB(Behaviour):
    """Memory with fixed read/write latency counted from request presentation."""

    kind = "Slave"

    def __init__(self, system, module):
        super().__init__(system, module)
        p = module.params
        self.base = p["base"]
        self.read_latency = p["read_latency"]
        self.write_latency = p["write_latency"]
        self.mem = SlaveMemory(p["size"])
        self.count = 0
        self.avalon = module.has_port("cs")

    def _offset(self, addr: int) -> int | None:
        off = addr - self.base
        return off if 0 <= off < len(self.mem) else None

    # Avalon view: active, is_write, address, data, byte enable
    def _access(self):
        if self.avalon:
            rd, wr = self.get("read"), self.get("write")
            active = bool(self.get("cs") and (rd or wr))
            return active, bool(wr), self.get("address"), self.get("writedata"), ~self.get("be_n") & 0xF
        active = bool(self.get("cyc") and self.get("stb"))
        return active, bool(self.get("we")), self.get("adr"), self.get("datW"), self.get("sel")

    def latency(self, is_write: bool) -> int:
        return self.write_latency if is_write else self.read_latency

    def comb_processes(self):
        if self.avalon:
            return [("respond", ["cs", "read", "write", "address"], ["wait", "readdata"], self.respond)]
        return [("respond", ["cyc", "stb", "we", "adr"], ["ack", "datR"], self.respond)]

    def respond(self):
        active, is_write, addr, _, _ = self._access()
        ready = active and self.count >= self.latency(is_write)
        off = self._offset(addr)
        rdata = self.mem.read_word(off) if ready and not is_write and off is not None else 0
        if self.avalon:
            self.put("wait", int(active and not ready))
            self.put("readdata", rdata)
        else:
            self.put("ack", int(ready))
            self.put("datR", rdata)

    def tick(self, cycle: int):
        active, is_write, addr, wdata, be = self._access()
        if not active:
            self.count = 0
            return
        if self.count >= self.latency(is_write):
            off = self._offset(addr)
            if is_write and off is not None and be:
                self.mem.write_word(off, wdata, be)
            self.count = 0
        else:
            self.count += 1


class LogicRequestB(Behaviour):
    """Avalon per-master address decode and wait merge."""

    kind = "LogicRequest"

    def __init__(self, system, module):
        super().__init__(system, module)
        self.amap = module.params["map"]
        self.slaves = list(module.params["slaves"])

    def comb_processes(self):
        return [
            ("decode", ["address", "read", "write"],
             [f"req_{s}" for s in self.slaves] + ["err", "rsel"], self.decode),
            ("wait_merge", ["address", "read", "write"] + [f"wait_{s}" for s in self.slaves],
             ["wait"], self.merge),
        ]

    def _target(self):
        if not (self.get("read") or self.get("write")):
            return False, None
        hit = route(self.amap, self.get("address"))
        return True, (None if hit is None else self.slaves.index(hit.target))

    def decode(self):
        active, j = self._target()
        for k, s in enumerate(self.slaves):
            self.put(f"req_{s}", int(active and j == k))
        self.put("err", int(active and j is None))
        self.put("rsel", j or 0)

    def merge(self):
        active, j = self._target()
        self.put("wait", self.get(f"wait_{self.slaves[j]}") if active and j is not None else 0)


class LogicArbitratorB(Behaviour):
    """Avalon per-slave round-robin arbitrator."""

    kind = "LogicArbitrator"

    def __init__(self, system, module):
        super().__init__(system, module)
        self.masters = list(module.params["masters"])
        self.slave = self.name[len("arb_"):]
        self.pointer = 0
        self.owner: int | None = None

    def comb_processes(self):
        reqs = [f"req_{m}" for m in self.masters]
        return [
            ("rr_grant", reqs, ["sel", "cs"], self.grant),
            ("wait_route", reqs + ["sel", "cs", "wait"], [f"wait_{m}" for m in self.masters], self.route_wait),
        ]

    def _requests(self):
        return [bool(self.get(f"req_{m}")) for m in self.masters]

    def _choose(self, reqs):
        if self.owner is not None and reqs[self.owner]:
            return self.owner
        return _rr_pick(reqs, self.pointer)

    def grant(self):
        g = self._choose(self._requests())
        self.put("sel", 0 if g is None else g)
        self.put("cs", int(g is not None))

    def route_wait(self):
        sel, cs, busy = self.get("sel"), self.get("cs"), self.get("wait")
        for i, m in enumerate(self.masters):
            served = cs and sel == i and not busy
            self.put(f"wait_{m}", int(self.get(f"req_{m}") and not served))

    def tick(self, cycle: int):
        reqs = self._requests()
        if not self.get("cs"):
            self.owner = None
            return
        g = self.get("sel")
        if self.owner is None:
            self.system.log_decision(cycle, self.slave, [m for m, r in zip(self.masters, reqs) if r],
                                     self.masters[g])
        if self.get("wait"):
            self.owner = g
        else:
            self.system.log_grant(cycle, self.slave, self.masters[g])
            self.pointer = (g + 1) % len(self.masters)
            self.owner = None


class RrArbiterB(Behaviour):
    """Wishbone shared-bus round-robin arbiter with ack/err routing."""

    kind = "RrArbiter"

    def __init__(self, system, module):
        super().__init__(system, module)
        self.masters = list(module.params["masters"])
        self.pointer = 0
        self.owner: int | None = None

    def comb_processes(self):
        cycs = [f"cyc_{m}" for m in self.masters]
        outs = [f"ack_{m}" for m in self.masters] + [f"err_{m}" for m in self.masters]
        return [
            ("rr_grant", cycs, ["gnt"], self.grant),
            ("ack_route", cycs + ["gnt", "ack", "err"], outs, self.route_ack),
        ]

    def _requests(self):
        return [bool(self.get(f"cyc_{m}")) for m in self.masters]

    def grant(self):
        reqs = self._requests()
        if self.owner is not None and reqs[self.owner]:
            g = self.owner
        else:
            g = _rr_pick(reqs, self.pointer)
        self.put("gnt", 0 if g is None else g)

    def route_ack(self):
        gnt, ack, err = self.get("gnt"), self.get("ack"), self.get("err")
        for i, m in enumerate(self.masters):
            mine = gnt == i and self.get(f"cyc_{m}")
            self.put(f"ack_{m}", int(bool(mine and ack)))
            self.put(f"err_{m}", int(bool(mine and err)))

    def tick(self, cycle: int):
        reqs = self._requests()
        g = self.get("gnt")
        if not reqs[g]:
            self.owner = None
            return
        if self.owner is None:
            self.system.log_decision(cycle, "bus", [m for m, r in zip(self.masters, reqs) if r],
                                     self.masters[g])
        if self.get("ack") or self.get("err"):
            self.system.log_grant(cycle, "bus", self.masters[g])
            self.pointer = (g + 1) % len(self.masters)
            self.owner = None
        else:
            self.owner = g


class DecoderB(Behaviour):
    """Wishbone address decoder plus decoder-selected response path."""

    kind = "Decoder"

    def __init__(self, system, module):
        super().__init__(system, module)
        self.amap = module.params["map"]
        self.slaves = list(module.params["slaves"])

    def comb_processes(self):
        return [
            ("decode", ["adr", "cyc", "stb"], [f"stb_{s}" for s in self.slaves] + ["err"], self.decode),
            ("respond", ["adr"] + [f"ack_{s}" for s in self.slaves] + [f"dat_{s}" for s in self.slaves],
             ["ack", "datR"], self.respond),
        ]

    def _hit(self):
        hit = route(self.amap, self.get("adr"))
        return None if hit is None else self.slaves.index(hit.target)

    def decode(self):
        active = self.get("cyc") and self.get("stb")
        j = self._hit()
        for k, s in enumerate(self.slaves):
            self.put(f"stb_{s}", int(bool(active and j == k)))
        self.put("err", int(bool(active and j is None)))

    def respond(self):
        j = self._hit()
        self.put("ack", int(any(self.get(f"ack_{s}") for s in self.slaves)))
        self.put("datR", 0 if j is None else self.get(f"dat_{self.slaves[j]}"))


BEHAVIOURS = {
    cls.kind: cls
    for cls in (ClockSourceB, MuxB, MasterB, SlaveB, LogicRequestB, LogicArbitratorB, RrArbiterB, DecoderB)
}
