"""TLM netlist construction, TLM to RTL transformation and the early
verification loop over candidate system descriptions."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import fabric as fb
from .errors import LimitExceeded, RequirementsUnsatisfiable, SpecError, TransformError, UnknownBusKind
from .netlist import IN, OUT, Level, Module, Netlist, Port, Process, Tag, check_portmap
from .spec import BusKind, SystemSpec, spec_from_dict, validate
from .tlm import AddressMap, Status, route, run_tlm

TLM_ARBITER = "Arbiter"


def elaborate_tlm_netlist(spec: SystemSpec) -> Netlist:
    """One module per master, per slave, and the bus arbiter (if any)."""
    validate(spec)
    nl = Netlist(Level.TLM, bus=spec.bus.value, address_map=AddressMap.from_spec(spec))
    arbitrated = not spec.point_to_point
    for m in spec.masters:
        ports = [Port("init", OUT, 32, Tag.TLM_ONLY)]
        procs = fb.master_methods(m)
        if arbitrated:
            ports += [Port("req", OUT, 1, Tag.TLM_ONLY), Port("grant", IN, 1, Tag.TLM_ONLY)]
            procs = procs + [Process("grant_process", Tag.TLM_ONLY)]
        nl.add(Module(m.name, fb.MASTER, ports, procs, fb.master_params(m)))
    for s in spec.slaves:
        nl.add(Module(s.name, fb.SLAVE, [Port("tgt", IN, 32, Tag.TLM_ONLY)], fb.slave_methods(),
                      fb.slave_params(s)))
    if not arbitrated:
        nl.connect(spec.masters[0].name, "init", spec.slaves[0].name, "tgt")
        return nl
    ports = []
    for m in spec.masters:
        ports += [Port(f"tgt_{m.name}", IN, 32, Tag.TLM_ONLY), Port(f"req_{m.name}", IN, 1, Tag.TLM_ONLY),
                  Port(f"grant_{m.name}", OUT, 1, Tag.TLM_ONLY)]
    ports += [Port(f"init_{s.name}", OUT, 32, Tag.TLM_ONLY) for s in spec.slaves]
    nl.add(Module("arbiter", TLM_ARBITER, ports,
                  [Process("arbitrate", Tag.TLM_ONLY), Process("route", Tag.TLM_ONLY)],
                  {"policy": spec.arbiter.value}))
    for m in spec.masters:
        nl.connect(m.name, "init", "arbiter", f"tgt_{m.name}")
        nl.connect(m.name, "req", "arbiter", f"req_{m.name}")
        nl.connect("arbiter", f"grant_{m.name}", m.name, "grant")
    for s in spec.slaves:
        nl.connect("arbiter", f"init_{s.name}", s.name, "tgt")
    return nl


@dataclass
class TransformReport:
    ports_added: list = field(default_factory=list)
    ports_deleted: list = field(default_factory=list)
    processes_added: list = field(default_factory=list)
    processes_deleted: list = field(default_factory=list)
    mux_plan: fb.MuxPlan | None = None
    arbiter_choice: str = ""
    mapping_count: int = 0

    def to_dict(self) -> dict:
        plan = self.mux_plan
        return {
            "ports_added": self.ports_added,
            "ports_deleted": self.ports_deleted,
            "processes_added": self.processes_added,
            "processes_deleted": self.processes_deleted,
            "mux_plan": None if plan is None else {
                "bus": plan.bus.value,
                "per_slave_muxes": plan.per_slave_muxes,
                "master_read_muxes": plan.master_read_muxes,
                "bus_signal_muxes": plan.bus_signal_muxes,
                "return_paths": plan.return_paths,
                "total": plan.total,
            },
            "arbiter_choice": self.arbiter_choice,
            "mapping_count": self.mapping_count,
        }

    def to_text(self) -> str:
        lines = []
        for title, items in (("Port addition", self.ports_added), ("Port deletion", self.ports_deleted),
                             ("Process addition", self.processes_added),
                             ("Process deletion", self.processes_deleted)):
            lines.append(f"{title}:")
            lines += [f"  {x}" for x in items]
        if self.mux_plan is not None:
            lines.append(f"Multiplexers: {self.mux_plan.total}")
        lines.append(f"Arbiter: {self.arbiter_choice}")
        lines.append(f"Port mappings: {self.mapping_count}")
        return "\n".join(lines) + "\n"


class _Transformer:
    def __init__(self, tlm: Netlist, bus: BusKind):
        self.bus = bus
        self.report = TransformReport()
        self.amap = tlm.address_map
        self.masters = [m for m in tlm.modules if m.kind == fb.MASTER]
        self.slaves = [m for m in tlm.modules if m.kind == fb.SLAVE]
        self.arbiter = next((m for m in tlm.modules if m.kind == TLM_ARBITER), None)
        self.p2p = self.arbiter is None
        self.mnames = [m.name for m in self.masters]
        self.snames = [s.name for s in self.slaves]
        # deep-enough copies so the input netlist is left untouched
        self.modules = [Module(m.name, m.kind, list(m.ports), list(m.processes), dict(m.params))
                        for m in tlm.modules]
        self.mux_roles: dict[str, tuple] = {}

    def _add_module(self, mod: Module):
        self.modules.append(mod)
        self.report.ports_added += [f"{mod.name}.{p.name}" for p in mod.ports]
        self.report.processes_added += [f"{mod.name}.{p.name}" for p in mod.processes]

    # stage 1
    def ports(self):
        for mod in self.modules:
            kept = [p for p in mod.ports if p.tag is not Tag.TLM_ONLY]
            self.report.ports_deleted += [f"{mod.name}.{p.name}" for p in mod.ports if p.tag is Tag.TLM_ONLY]
            new = [] if mod.kind == TLM_ARBITER else [fb.clk_port()]
            if mod.kind == fb.MASTER:
                new += fb.master_bus_ports(self.bus)
            elif mod.kind == fb.SLAVE:
                new += fb.slave_bus_ports(self.bus)
            mod.ports = kept + new
            self.report.ports_added += [f"{mod.name}.{p.name}" for p in new]
        self._add_module(fb.clock_source())

    # stage 2
    def processes(self):
        for mod in self.modules:
            if mod.kind == fb.CLOCK_SOURCE:
                continue
            self.report.processes_deleted += [
                f"{mod.name}.{p.name}" for p in mod.processes if p.tag is Tag.TLM_ONLY]
            mod.processes = [p for p in mod.processes if p.tag is not Tag.TLM_ONLY]
            if mod.kind == fb.MASTER:
                added = [Process("bus_fsm")]
            elif mod.kind == fb.SLAVE:
                added = [Process("latency_counter"), Process("respond")]
            else:
                added = []
            mod.processes += added
            self.report.processes_added += [f"{mod.name}.{p.name}" for p in added]

    # stage 3
    def multiplexers(self):
        plan = fb.mux_plan(len(self.masters), len(self.slaves), self.bus, self.p2p)
        self.report.mux_plan = plan
        if self.bus is BusKind.AVALON:
            for s in self.snames:
                for sig in plan.per_slave_kinds:
                    name = f"mux_{sig}_{s}"
                    self.mux_roles[name] = ("slave", sig, s)
                    self._add_module(fb.mux_module(name, plan.slave_side_width,
                                                   ((sig, fb.AVALON_SIGNAL_WIDTH[sig]),)))
            for m in self.mnames[:plan.master_read_muxes]:
                name = f"mux_master_{m}"
                self.mux_roles[name] = ("master", m)
                self._add_module(fb.mux_module(name, plan.master_read_width, (("readdata", 32),)))
        else:
            for kind in plan.bus_signal_kinds:
                name = f"mux_{kind}"
                self.mux_roles[name] = ("bus", kind)
                self._add_module(fb.mux_module(name, plan.slave_side_width, fb.WISHBONE_MUX_LANES[kind]))

    # stage 4
    def arbitration(self):
        self.report.arbiter_choice = "none" if self.p2p else "round_robin"
        if self.arbiter is not None:
            self.modules = [m for m in self.modules if m.kind != TLM_ARBITER]
        if self.bus is BusKind.AVALON:
            for m in self.mnames:
                self._add_module(fb.logic_request(m, self.snames, self.amap))
            if not self.p2p:
                for s in self.snames:
                    self._add_module(fb.logic_arbitrator(s, self.mnames))
        else:
            self._add_module(fb.decoder(self.snames, self.amap))
            if not self.p2p:
                self._add_module(fb.rr_arbiter(self.mnames))

    # stage 5
    def port_mapping(self) -> Netlist:
        nl = Netlist(Level.RTL, bus=self.bus.value, address_map=self.amap)
        for mod in self.modules:
            nl.add(mod)
        for mod in self.modules:
            for p in mod.inputs():
                src = self._driver(mod, p.name)
                if src is not None:
                    nl.connect(src[0], src[1], mod.name, p.name)
        self.report.mapping_count = len(nl.connections)
        return nl

    def _driver(self, mod: Module, port: str):
        if port == "clk":
            return fb.CLOCK, "clk"
        if self.bus is BusKind.AVALON:
            return self._avalon_driver(mod, port)
        return self._wishbone_driver(mod, port)

    def _avalon_driver(self, mod, port):
        name, kind = mod.name, mod.kind
        s0, m0 = self.snames[0], self.mnames[0]
        if kind == fb.MASTER:
            if port == "readdata":
                return (s0, "readdata") if self.p2p else (f"mux_master_{name}", "out")
            return f"lr_{name}", port                       # wait, err
        if kind == fb.LOGIC_REQUEST:
            master = name[len("lr_"):]
            if port.startswith("wait_"):
                slave = port[len("wait_"):]
                return (slave, "wait") if self.p2p else (f"arb_{slave}", f"wait_{master}")
            return master, port                             # address, read, write
        if kind == fb.LOGIC_ARBITRATOR:
            slave = name[len("arb_"):]
            if port == "wait":
                return slave, "wait"
            return f"lr_{port[len('req_'):]}", f"req_{slave}"
        if kind == fb.SLAVE:
            if port == "cs":
                return (f"lr_{m0}", f"req_{name}") if self.p2p else (f"arb_{name}", "cs")
            return (m0, port) if self.p2p else (f"mux_{port}_{name}", "out")
        if kind == fb.MUX:
            role = self.mux_roles[name]
            if role[0] == "slave":
                _, sig, slave = role
                if port == "sel":
                    return f"arb_{slave}", "sel"
                return self.mnames[int(port[2:])], sig
            master = role[1]
            if port == "sel":
                return f"lr_{master}", "rsel"
            return self.snames[int(port[2:])], "readdata"
        return None

    def _wishbone_driver(self, mod, port):
        name, kind = mod.name, mod.kind
        m0 = self.mnames[0]
        bus_src = {"cyc": ("mux_cycstb", "cyc_out"), "stb": ("mux_cycstb", "stb_out"),
                   "we": ("mux_we", "out"), "adr": ("mux_adr", "out"),
                   "datW": ("mux_datw", "out"), "sel": ("mux_sel", "out")}
        if kind == fb.MASTER:
            if port == "datR":
                return "decoder", "datR"
            return ("decoder", port) if self.p2p else ("arbiter", f"{port}_{name}")   # ack, err
        if kind == fb.RR_ARBITER:
            if port in ("ack", "err"):
                return "decoder", port
            return port[len("cyc_"):], "cyc"
        if kind == fb.DECODER:
            if port.startswith("ack_"):
                return port[len("ack_"):], "ack"
            if port.startswith("dat_"):
                return port[len("dat_"):], "datR"
            return (m0, port) if self.p2p else bus_src[port]          # adr, cyc, stb
        if kind == fb.SLAVE:
            if port == "stb":
                return "decoder", f"stb_{name}"
            return (m0, port) if self.p2p else bus_src[port]
        if kind == fb.MUX:
            if port == "sel":
                return "arbiter", "gnt"
            lanes = dict(fb.WISHBONE_MUX_LANES[self.mux_roles[name][1]])
            if "_in" in port:
                lane, idx = port.split("_in")
            else:
                lane, idx = next(iter(lanes)), port[2:]
            return self.mnames[int(idx)], lane
        return None


def transform(tlm: Netlist, bus) -> tuple[Netlist, TransformReport]:
    """Rewrite a TLM netlist into an RTL netlist for ``bus`` in five stages:
    ports, processes, multiplexers, arbitration, port mapping."""
    if tlm.level is not Level.TLM:
        raise TransformError("transform expects a TLM-level netlist")
    try:
        bus = BusKind(str(getattr(bus, "value", bus)).lower())
    except ValueError:
        raise UnknownBusKind(f"unknown bus kind {bus!r}") from None
    t = _Transformer(tlm, bus)
    t.ports()
    t.processes()
    t.multiplexers()
    t.arbitration()
    rtl = t.port_mapping()
    violations = check_portmap(rtl)
    if violations:
        raise TransformError("port mapping incomplete: " + "; ".join(map(str, violations)), violations)
    return rtl, t.report


# -- early verification ----------------------------------------------------

@dataclass(frozen=True)
class MemoryEquals:
    address: int
    value: int

    @property
    def name(self):
        return f"word at {self.address:#06x} == {self.value:#x}"

    def check(self, spec, result) -> bool:
        hit = route(AddressMap.from_spec(spec), self.address)
        if hit is None:
            return False
        image = result.final_state[hit.target]
        return int.from_bytes(image[hit.offset:hit.offset + 4], "little") == self.value


@dataclass(frozen=True)
class NoStatus:
    status: Status = Status.ERROR

    @property
    def name(self):
        return f"no {self.status.value} records"

    def check(self, spec, result) -> bool:
        return all(r.status is not self.status for r in result.trace)


@dataclass(frozen=True)
class CompletesWithin:
    master: str
    limit: int

    @property
    def name(self):
        return f"{self.master} completes within {self.limit} transactions"

    def check(self, spec, result) -> bool:
        return sum(r.master == self.master for r in result.trace) <= self.limit


def parse_requirement(doc: dict):
    from .program import parse_number

    def num(v):
        return v if isinstance(v, int) else parse_number(str(v))

    kind = doc.get("check")
    try:
        if kind == "memory_equals":
            return MemoryEquals(num(doc["address"]), num(doc["value"]))
        if kind == "no_status":
            return NoStatus(Status(doc.get("status", "ERROR")))
        if kind == "completes_within":
            return CompletesWithin(doc["master"], num(doc["limit"]))
    except (KeyError, ValueError) as exc:
        raise SpecError(f"bad requirement {doc!r}: {exc}") from None
    raise SpecError(f"unknown requirement check {kind!r}")


def parse_refinement(text: str):
    """Read a spec document plus its optional ``requirements`` and ordered
    ``refinements`` (full alternative spec objects)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        from .errors import SpecSyntaxError
        raise SpecSyntaxError(exc.msg, line=exc.lineno, column=exc.colno) from None
    doc = dict(doc)
    reqs = [parse_requirement(r) for r in doc.pop("requirements", [])]
    cands = [spec_from_dict(c) for c in doc.pop("refinements", [])]
    return spec_from_dict(doc), reqs, cands


@dataclass
class RefineOutcome:
    accepted: SystemSpec
    iterations: int
    failures: list = field(default_factory=list)


def refine_loop(spec: SystemSpec, requirements, candidates=(), limit: int = 100_000) -> RefineOutcome:
    """Run the TLM model, check requirements, fall back to the next candidate.

    Returns the first description whose run satisfies every requirement.
    """
    failures = []
    for i, cand in enumerate([spec, *candidates], start=1):
        try:
            result = run_tlm(cand, limit)
        except LimitExceeded as exc:
            failures.append((i, [str(exc)]))
            continue
        failed = [r.name for r in requirements if not r.check(cand, result)]
        if not failed:
            return RefineOutcome(cand, i, failures)
        failures.append((i, failed))
    raise RequirementsUnsatisfiable(
        f"no candidate satisfies the requirements after {len(failures)} iteration(s)", len(failures))
