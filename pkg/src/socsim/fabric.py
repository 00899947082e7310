"""RTL netlists for the Avalon and Wishbone fabrics.

Port tables below are the signal-level contract shared by the direct
builders, the TLM to RTL transform and the RTL behaviours. Wiring itself is
done independently in each construction path.

Avalon (slave-side arbitration)
    Master -> LogicRequest (decode address, per-slave request lines)
    LogicRequest -> LogicArbitrator of each slave (one grant per slave)
    5 muxes per slave (address, be_n, write, writedata, read), M inputs each
    1 read-return mux per master, S inputs

Wishbone (shared bus)
    RrArbiter grants the bus among masters asserting cyc
    5 bus-signal muxes (cyc/stb, we, adr, datW, sel), M inputs each
    Decoder selects the slave from adr and returns ack/err/datR
"""
from __future__ import annotations

from dataclasses import dataclass

from .netlist import IN, OUT, Level, Module, Netlist, Port, Process, Tag
from .spec import BusKind, MasterSpec, SlaveSpec, SystemSpec, validate
from .tlm import AddressMap

CLOCK = "clock"

# module kinds
MASTER = "Master"
SLAVE = "Slave"
CLOCK_SOURCE = "ClockSource"
LOGIC_REQUEST = "LogicRequest"
LOGIC_ARBITRATOR = "LogicArbitrator"
DECODER = "Decoder"
RR_ARBITER = "RrArbiter"
MUX = "Mux"

AVALON_SLAVE_MUXES = ("address", "be_n", "write", "writedata", "read")
WISHBONE_BUS_MUXES = ("cycstb", "we", "adr", "datw", "sel")

AVALON_MASTER_OUT = (("address", 32), ("be_n", 4), ("write", 1), ("writedata", 32), ("read", 1))
AVALON_MASTER_IN = (("readdata", 32), ("wait", 1), ("err", 1))
AVALON_SIGNAL_WIDTH = dict(AVALON_MASTER_OUT)

WISHBONE_MASTER_OUT = (("cyc", 1), ("stb", 1), ("we", 1), ("adr", 32), ("datW", 32), ("sel", 4))
WISHBONE_MASTER_IN = (("datR", 32), ("ack", 1), ("err", 1))
# bus-signal mux name -> lanes (master port, width)
WISHBONE_MUX_LANES = {
    "cycstb": (("cyc", 1), ("stb", 1)),
    "we": (("we", 1),),
    "adr": (("adr", 32),),
    "datw": (("datW", 32),),
    "sel": (("sel", 4),),
}

_METHOD_NAMES = (("set", "do_set"), ("add", "do_add"), ("read", "memory_read"), ("write", "memory_write"))


def sel_width(n: int) -> int:
    """Bits needed for a select index over ``n`` inputs."""
    return max(1, (n - 1).bit_length())


@dataclass(frozen=True)
class MuxPlan:
    bus: BusKind
    masters: int
    slaves: int
    per_slave_muxes: int = 0
    per_slave_kinds: tuple = ()
    master_read_muxes: int = 0
    bus_signal_muxes: int = 0
    bus_signal_kinds: tuple = ()
    return_paths: int = 0
    slave_side_width: int = 0
    master_read_width: int = 0

    @property
    def total(self) -> int:
        return self.per_slave_muxes + self.master_read_muxes + self.bus_signal_muxes


def mux_plan(masters: int, slaves: int, bus, point_to_point: bool = False) -> MuxPlan:
    """Multiplexer inventory for a fabric with the given master/slave counts."""
    bus = BusKind.parse(bus)
    if masters < 1 or slaves < 1:
        raise ValueError("mux_plan needs at least one master and one slave")
    if point_to_point:
        return MuxPlan(bus, masters, slaves, return_paths=1 if bus is BusKind.WISHBONE else 0)
    if bus is BusKind.AVALON:
        return MuxPlan(
            bus, masters, slaves,
            per_slave_muxes=len(AVALON_SLAVE_MUXES) * slaves,
            per_slave_kinds=AVALON_SLAVE_MUXES,
            master_read_muxes=masters,
            slave_side_width=masters,
            master_read_width=slaves,
        )
    return MuxPlan(
        bus, masters, slaves,
        bus_signal_muxes=len(WISHBONE_BUS_MUXES),
        bus_signal_kinds=WISHBONE_BUS_MUXES,
        return_paths=1,
        slave_side_width=masters,
    )


# -- module factories (port/process inventories) ---------------------------

def clk_port() -> Port:
    return Port("clk", IN, 1, Tag.RTL_ONLY)


def master_methods(m: MasterSpec) -> list[Process]:
    used = m.program.mnemonics()
    return [Process(name, Tag.COMMON) for mnemonic, name in _METHOD_NAMES if mnemonic in used]


def slave_methods() -> list[Process]:
    return [Process("memory_read", Tag.COMMON), Process("memory_write", Tag.COMMON)]


def master_bus_ports(bus: BusKind) -> list[Port]:
    outs, ins = (AVALON_MASTER_OUT, AVALON_MASTER_IN) if bus is BusKind.AVALON else (
        WISHBONE_MASTER_OUT, WISHBONE_MASTER_IN)
    return [Port(n, OUT, w) for n, w in outs] + [Port(n, IN, w) for n, w in ins]


def slave_bus_ports(bus: BusKind) -> list[Port]:
    if bus is BusKind.AVALON:
        return [Port("cs", IN, 1)] + [Port(n, IN, w) for n, w in AVALON_MASTER_OUT] + [
            Port("readdata", OUT, 32), Port("wait", OUT, 1)]
    return [Port(n, IN, w) for n, w in WISHBONE_MASTER_OUT] + [Port("datR", OUT, 32), Port("ack", OUT, 1)]


def master_params(m: MasterSpec) -> dict:
    return {"start_address": m.start_address, "program": m.program}


def slave_params(s: SlaveSpec) -> dict:
    return {"base": s.base, "size": s.size, "read_latency": s.read_latency, "write_latency": s.write_latency}


def rtl_master(m: MasterSpec, bus: BusKind) -> Module:
    return Module(
        m.name, MASTER, [clk_port()] + master_bus_ports(bus),
        master_methods(m) + [Process("bus_fsm")], master_params(m),
    )


def rtl_slave(s: SlaveSpec, bus: BusKind) -> Module:
    return Module(
        s.name, SLAVE, [clk_port()] + slave_bus_ports(bus),
        slave_methods() + [Process("latency_counter"), Process("respond")], slave_params(s),
    )


def clock_source() -> Module:
    return Module(CLOCK, CLOCK_SOURCE, [Port("clk", OUT, 1)], [Process("clock_gen")])


def mux_module(name: str, n_inputs: int, lanes) -> Module:
    """``lanes`` is a sequence of (lane name, width); a single lane uses in<i>/out."""
    ports = [clk_port(), Port("sel", IN, sel_width(n_inputs))]
    single = len(lanes) == 1
    for lane, width in lanes:
        prefix = "" if single else f"{lane}_"
        ports += [Port(f"{prefix}in{i}", IN, width) for i in range(n_inputs)]
        ports.append(Port(f"{prefix}out", OUT, width))
    return Module(
        name, MUX, ports, [Process(f"sel_{name}")],
        {"inputs": n_inputs, "lanes": tuple((("" if single else lane), w) for lane, w in lanes)},
    )


def logic_request(master: str, slaves: list[str], amap: AddressMap) -> Module:
    ports = [clk_port(), Port("address", IN, 32), Port("read", IN, 1), Port("write", IN, 1)]
    ports += [Port(f"wait_{s}", IN, 1) for s in slaves]
    ports += [Port(f"req_{s}", OUT, 1) for s in slaves]
    ports += [Port("wait", OUT, 1), Port("err", OUT, 1), Port("rsel", OUT, sel_width(len(slaves)))]
    return Module(f"lr_{master}", LOGIC_REQUEST, ports, [Process("decode"), Process("wait_merge")],
                  {"map": amap, "slaves": tuple(slaves)})


def logic_arbitrator(slave: str, masters: list[str]) -> Module:
    ports = [clk_port()] + [Port(f"req_{m}", IN, 1) for m in masters] + [Port("wait", IN, 1)]
    ports += [Port("sel", OUT, sel_width(len(masters))), Port("cs", OUT, 1)]
    ports += [Port(f"wait_{m}", OUT, 1) for m in masters]
    return Module(f"arb_{slave}", LOGIC_ARBITRATOR, ports,
                  [Process("rr_grant"), Process("wait_route"), Process("rr_pointer")],
                  {"masters": tuple(masters)})


def rr_arbiter(masters: list[str]) -> Module:
    ports = [clk_port()] + [Port(f"cyc_{m}", IN, 1) for m in masters]
    ports += [Port("ack", IN, 1), Port("err", IN, 1), Port("gnt", OUT, sel_width(len(masters)))]
    ports += [Port(f"ack_{m}", OUT, 1) for m in masters] + [Port(f"err_{m}", OUT, 1) for m in masters]
    return Module("arbiter", RR_ARBITER, ports,
                  [Process("rr_grant"), Process("rr_pointer"), Process("ack_route")],
                  {"masters": tuple(masters)})


def decoder(slaves: list[str], amap: AddressMap) -> Module:
    ports = [clk_port(), Port("adr", IN, 32), Port("cyc", IN, 1), Port("stb", IN, 1)]
    ports += [Port(f"ack_{s}", IN, 1) for s in slaves] + [Port(f"dat_{s}", IN, 32) for s in slaves]
    ports += [Port(f"stb_{s}", OUT, 1) for s in slaves]
    ports += [Port("ack", OUT, 1), Port("err", OUT, 1), Port("datR", OUT, 32)]
    return Module("decoder", DECODER, ports, [Process("decode"), Process("respond")],
                  {"map": amap, "slaves": tuple(slaves)})


# -- direct builders --------------------------------------------------------

def build_avalon(spec: SystemSpec) -> Netlist:
    validate(spec)
    bus = BusKind.AVALON
    amap = AddressMap.from_spec(spec)
    mnames = spec.master_names()
    snames = [s.name for s in spec.slaves]
    nl = Netlist(Level.RTL, bus=bus.value, address_map=amap)
    nl.add(clock_source())
    for m in spec.masters:
        nl.add(rtl_master(m, bus))
        nl.add(logic_request(m.name, snames, amap))
    for s in spec.slaves:
        nl.add(rtl_slave(s, bus))
    plan = mux_plan(len(mnames), len(snames), bus, spec.point_to_point)
    if not spec.point_to_point:
        for s in snames:
            nl.add(logic_arbitrator(s, mnames))
            for sig in plan.per_slave_kinds:
                nl.add(mux_module(f"mux_{sig}_{s}", len(mnames), ((sig, AVALON_SIGNAL_WIDTH[sig]),)))
        for m in mnames:
            nl.add(mux_module(f"mux_master_{m}", len(snames), (("readdata", 32),)))

    for mod in nl.modules:
        if mod.has_port("clk") and mod.name != CLOCK:
            nl.connect(CLOCK, "clk", mod.name, "clk")

    for m in mnames:
        lr = f"lr_{m}"
        for sig in ("address", "read", "write"):
            nl.connect(m, sig, lr, sig)
        nl.connect(lr, "wait", m, "wait")
        nl.connect(lr, "err", m, "err")

    if spec.point_to_point:
        m, s = mnames[0], snames[0]
        for sig, _ in AVALON_MASTER_OUT:
            nl.connect(m, sig, s, sig)
        nl.connect(f"lr_{m}", f"req_{s}", s, "cs")
        nl.connect(s, "wait", f"lr_{m}", f"wait_{s}")
        nl.connect(s, "readdata", m, "readdata")
        return nl

    for s in snames:
        arb = f"arb_{s}"
        for i, m in enumerate(mnames):
            nl.connect(f"lr_{m}", f"req_{s}", arb, f"req_{m}")
            nl.connect(arb, f"wait_{m}", f"lr_{m}", f"wait_{s}")
            for sig in AVALON_SLAVE_MUXES:
                nl.connect(m, sig, f"mux_{sig}_{s}", f"in{i}")
        for sig in AVALON_SLAVE_MUXES:
            nl.connect(arb, "sel", f"mux_{sig}_{s}", "sel")
            nl.connect(f"mux_{sig}_{s}", "out", s, sig)
        nl.connect(arb, "cs", s, "cs")
        nl.connect(s, "wait", arb, "wait")
    for m in mnames:
        for j, s in enumerate(snames):
            nl.connect(s, "readdata", f"mux_master_{m}", f"in{j}")
        nl.connect(f"lr_{m}", "rsel", f"mux_master_{m}", "sel")
        nl.connect(f"mux_master_{m}", "out", m, "readdata")
    return nl


def build_wishbone(spec: SystemSpec) -> Netlist:
    validate(spec)
    bus = BusKind.WISHBONE
    amap = AddressMap.from_spec(spec)
    mnames = spec.master_names()
    snames = [s.name for s in spec.slaves]
    nl = Netlist(Level.RTL, bus=bus.value, address_map=amap)
    nl.add(clock_source())
    for m in spec.masters:
        nl.add(rtl_master(m, bus))
    for s in spec.slaves:
        nl.add(rtl_slave(s, bus))
    nl.add(decoder(snames, amap))
    if not spec.point_to_point:
        nl.add(rr_arbiter(mnames))
        for name in WISHBONE_BUS_MUXES:
            nl.add(mux_module(f"mux_{name}", len(mnames), WISHBONE_MUX_LANES[name]))

    for mod in nl.modules:
        if mod.has_port("clk") and mod.name != CLOCK:
            nl.connect(CLOCK, "clk", mod.name, "clk")

    for s in snames:
        nl.connect("decoder", f"stb_{s}", s, "stb")
        nl.connect(s, "ack", "decoder", f"ack_{s}")
        nl.connect(s, "datR", "decoder", f"dat_{s}")
    for m in mnames:
        nl.connect("decoder", "datR", m, "datR")

    if spec.point_to_point:
        m = mnames[0]
        for sig in ("cyc", "stb", "adr"):
            nl.connect(m, sig, "decoder", sig)
        for s in snames:
            for sig, _ in WISHBONE_MASTER_OUT:
                if sig != "stb":
                    nl.connect(m, sig, s, sig)
        nl.connect("decoder", "ack", m, "ack")
        nl.connect("decoder", "err", m, "err")
        return nl

    for i, m in enumerate(mnames):
        nl.connect(m, "cyc", "arbiter", f"cyc_{m}")
        nl.connect(m, "cyc", "mux_cycstb", f"cyc_in{i}")
        nl.connect(m, "stb", "mux_cycstb", f"stb_in{i}")
        nl.connect(m, "we", "mux_we", f"in{i}")
        nl.connect(m, "adr", "mux_adr", f"in{i}")
        nl.connect(m, "datW", "mux_datw", f"in{i}")
        nl.connect(m, "sel", "mux_sel", f"in{i}")
        nl.connect("arbiter", f"ack_{m}", m, "ack")
        nl.connect("arbiter", f"err_{m}", m, "err")
    for name in WISHBONE_BUS_MUXES:
        nl.connect("arbiter", "gnt", f"mux_{name}", "sel")
    nl.connect("mux_cycstb", "cyc_out", "decoder", "cyc")
    nl.connect("mux_cycstb", "stb_out", "decoder", "stb")
    nl.connect("mux_adr", "out", "decoder", "adr")
    for s in snames:
        nl.connect("mux_cycstb", "cyc_out", s, "cyc")
        nl.connect("mux_we", "out", s, "we")
        nl.connect("mux_adr", "out", s, "adr")
        nl.connect("mux_datw", "out", s, "datW")
        nl.connect("mux_sel", "out", s, "sel")
    nl.connect("decoder", "ack", "arbiter", "ack")
    nl.connect("decoder", "err", "arbiter", "err")
    return nl


def build_rtl(spec: SystemSpec, bus=None) -> Netlist:
    bus = spec.bus if bus is None else BusKind.parse(bus)
    if bus is BusKind.AVALON:
        return build_avalon(spec.with_bus(bus))
    return build_wishbone(spec.with_bus(bus))
