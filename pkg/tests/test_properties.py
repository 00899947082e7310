import json
import random

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import random_spec
from socsim.errors import SpecError
from socsim.fabric import build_rtl
from socsim.metrics import compare, diff_results
from socsim.netlist import isomorphic
from socsim.program import format_program, parse_program
from socsim.refine import elaborate_tlm_netlist, transform
from socsim.rtl import simulate_rtl
from socsim.spec import parse_spec, serialize_spec
from socsim.tlm import AddressMap, MapEntry, Route, arbitrate_rr, route, run_tlm

seeds = st.integers(min_value=0, max_value=2**32 - 1)
slow = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

reg = st.integers(0, 7).map(lambda i: f"r{i}")
addr = st.integers(0, 0x3F).map(lambda w: f"{4 * w:#x}")
instr = st.one_of(
    st.tuples(st.just("set"), reg, st.integers(0, 2**32 - 1).map(hex)),
    st.tuples(st.just("add"), reg, reg, reg),
    st.tuples(st.just("write"), addr, st.one_of(reg, st.integers(0, 255).map(str))),
    st.tuples(st.just("read"), addr, reg),
).map(" ".join)


@st.composite
def programs(draw, depth=0):
    lines = []
    for _ in range(draw(st.integers(0, 5))):
        if depth < 2 and draw(st.integers(0, 5)) == 0:
            lines += [f"repeat {draw(st.integers(1, 3))}", *draw(programs(depth + 1)), "end"]
        else:
            lines.append(draw(instr))
    return lines


@given(programs())
def test_program_roundtrip(lines):
    prog = parse_program(lines)
    assert parse_program(format_program(prog)) == prog


@given(seeds)
@slow
def test_spec_roundtrip(seed):
    spec = random_spec(random.Random(seed), unmapped=True)
    assert parse_spec(serialize_spec(spec)) == spec


junk = st.sampled_from([None, True, 0, -1, "x", [], {}, [1], {"name": 1}])
line = st.sampled_from(["set r1 1", "read 0x4 r2", "write 0x8 r1", "read 0x10", "set r9 1",
                        "write 0x3 r1", "repeat 2", "end", "jump 4", ""])
master = st.fixed_dictionaries(
    {"name": st.sampled_from(["a", "b", "1x"])},
    optional={"program": st.lists(line, max_size=3), "start_address": st.sampled_from([0, 4, 2, -4, "0x10"])},
)
slave = st.fixed_dictionaries(
    {"name": st.sampled_from(["s", "t"]), "base": st.sampled_from([0, 0x40, 0x80, 2, "0x20"]),
     "size": st.sampled_from([0, 4, 0x40, 0x80, 6])},
    optional={"read_latency": st.sampled_from([0, 1, 3])},
)


@given(st.fixed_dictionaries({}, optional={
    "bus": st.sampled_from(["avalon", "wishbone", "x", 3]),
    "arbiter": st.sampled_from(["round_robin", "none", "rr"]),
    "masters": st.lists(master, max_size=3) | junk,
    "slaves": st.lists(slave, max_size=3) | junk,
}))
def test_fuzzed_documents_validate_or_raise_spec_error(doc):
    try:
        spec = parse_spec(json.dumps(doc))
    except SpecError:
        return
    assert spec.masters and spec.slaves
    bases = sorted((s.base, s.end) for s in spec.slaves)
    assert all(a[1] <= b[0] for a, b in zip(bases, bases[1:]))


@given(st.lists(st.tuples(st.integers(1, 64), st.integers(0, 16)), min_size=1, max_size=8), st.data())
def test_route_property(layout, data):
    entries, base = [], 0
    for i, (words, gap) in enumerate(layout):
        entries.append(MapEntry(base, 4 * words, f"t{i}"))
        base += 4 * (words + gap)
    amap = AddressMap(entries)
    a = data.draw(st.integers(0, base + 64))
    hits = [Route(e.target, a - e.base) for e in entries if e.base <= a < e.end]
    assert route(amap, a) == (hits[0] if hits else None)


@given(st.integers(1, 6), st.data())
def test_rr_picks_first_after_last(n, data):
    order = list(range(n))
    req = data.draw(st.sets(st.sampled_from(order)))
    last = data.draw(st.none() | st.sampled_from(order))
    win = arbitrate_rr(req, last, order)
    if not req:
        assert win is None
        return
    start = 0 if last is None else last + 1
    dist = lambda m: (m - start) % n
    assert win in req and all(dist(win) <= dist(m) for m in req)


@given(seeds)
@slow
def test_levels_agree_on_race_free_specs(seed):
    spec = random_spec(random.Random(seed), unmapped=True)
    rep = compare(spec)
    assert rep.alpha == 0


@given(seeds)
@slow
def test_rtl_runs_obey_protocol(seed):
    spec = random_spec(random.Random(seed), race_free=False)
    _, system = simulate_rtl(spec)
    assert system.monitor.violations == []


@given(seeds)
@slow
def test_transform_isomorphic(seed):
    spec = random_spec(random.Random(seed), race_free=False)
    rtl, _ = transform(elaborate_tlm_netlist(spec), spec.bus)
    assert isomorphic(rtl, build_rtl(spec))


@given(seeds)
@slow
def test_deterministic(seed):
    spec = random_spec(random.Random(seed), race_free=False)
    assert diff_results(run_tlm(spec), run_tlm(spec)).alpha == 0
    a, _ = simulate_rtl(spec)
    b, _ = simulate_rtl(spec)
    assert (a.trace, a.final_state, a.grants) == (b.trace, b.final_state, b.grants)
