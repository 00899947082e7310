"""In-simulator protocol assertions, checked every cycle after settling.

* Wishbone: ack implies cyc and stb, at the bus and at every master.
* Single grant: at most one master completes per shared resource per cycle
  (the bus for Wishbone, each slave for Avalon).
* Latency: a slave completes exactly L cycles after a request is presented.
"""
from __future__ import annotations

from dataclasses import dataclass

from .fabric import DECODER, LOGIC_ARBITRATOR, LOGIC_REQUEST


@dataclass(frozen=True)
class ProtocolViolation:
    cycle: int
    rule: str
    where: str

    def __str__(self):
        return f"cycle {self.cycle}: {self.rule} at {self.where}"


class ProtocolMonitor:
    def __init__(self, system):
        self.system = system
        nl = system.netlist
        self.avalon = nl.bus == "avalon"
        self.violations: list[ProtocolViolation] = []
        self.completions = 0
        self._presented: dict[str, int | None] = {s.name: None for s in system.slaves}
        self._lr = [m for m in nl.modules if m.kind == LOGIC_REQUEST]
        self._arbs = {m.name[len("arb_"):]: m for m in nl.modules if m.kind == LOGIC_ARBITRATOR}
        self._decoder = next((m for m in nl.modules if m.kind == DECODER), None)

    def _v(self, cycle, rule, where):
        self.violations.append(ProtocolViolation(cycle, rule, where))

    def sig(self, module, port):
        return self.system.port_signal(module, port).value

    def check(self, cycle: int):
        if self.avalon:
            self._check_avalon(cycle)
        else:
            self._check_wishbone(cycle)
        self._check_latency(cycle)

    def _check_wishbone(self, cycle):
        served = 0
        for m in self.system.masters:
            n = m.name
            ack, err = self.sig(n, "ack"), self.sig(n, "err")
            if ack and not (self.sig(n, "cyc") and self.sig(n, "stb")):
                self._v(cycle, "ack without cyc&stb", n)
            served += bool(ack or err)
        if served > 1:
            self._v(cycle, "multiple masters served on shared bus", "bus")
        d = self._decoder.name
        if self.sig(d, "ack") and not (self.sig(d, "cyc") and self.sig(d, "stb")):
            self._v(cycle, "bus ack without cyc&stb", d)

    def _check_avalon(self, cycle):
        slaves = [s.name for s in self.system.slaves]
        for s in slaves:
            served = 0
            for lr in self._lr:
                master = lr.name[len("lr_"):]
                if not self.sig(lr.name, f"req_{s}"):
                    continue
                if s in self._arbs:
                    if not self.sig(self._arbs[s].name, f"wait_{master}"):
                        served += 1
                elif not self.sig(s, "wait"):
                    served += 1
            if served > 1:
                self._v(cycle, "multiple masters served by one slave", s)

    def _check_latency(self, cycle):
        for slave in self.system.slaves:
            active, is_write, _, _, _ = slave._access()
            if slave.avalon:
                done = active and not self.sig(slave.name, "wait")
            else:
                done = bool(self.sig(slave.name, "ack"))
                if done and not active:
                    self._v(cycle, "slave ack without request", slave.name)
            start = self._presented[slave.name]
            if active and start is None:
                start = self._presented[slave.name] = cycle
            if not active and start is not None:
                self._v(cycle, "request withdrawn before completion", slave.name)
                self._presented[slave.name] = None
            if done:
                self.completions += 1
                # expectation comes from the netlist, not from the behaviour under check
                params = slave.module.params
                want = params["write_latency"] if is_write else params["read_latency"]
                if cycle - start != want:
                    self._v(cycle, f"latency {cycle - start} != {want}", slave.name)
                self._presented[slave.name] = None
