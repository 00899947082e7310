from fractions import Fraction

import pytest

from conftest import make_spec
from socsim.metrics import ComplexityCounts, compare, complexity, diff_results, race_flag, speedup, te_ratio
from socsim.netlist import Level, Netlist
from socsim.refine import elaborate_tlm_netlist
from socsim.fabric import build_rtl
from socsim.rtl import RtlStats
from socsim.spec import tier_spec
from socsim.tlm import Kind, ObservationRecord, SimResult, Status, TlmStats

# structural census of the canonical scenarios: (tlm total, rtl total)
GOLDEN = {
    ("avalon", 2): (11, 60), ("avalon", 3): (24, 127), ("avalon", 4): (39, 185), ("avalon", 5): (45, 287),
    ("wishbone", 2): (11, 63), ("wishbone", 3): (24, 126), ("wishbone", 4): (39, 162), ("wishbone", 5): (45, 188),
}


def records(n, master="m0", flip=None):
    out = []
    for i in range(n):
        data = i if i != flip else i ^ 0xFF
        out.append(ObservationRecord(i, master, Kind.READ, 4 * i, data, Status.OK))
    return out


def result(trace, state=None):
    return SimResult(trace, state or {"s0": bytes(16)}, TlmStats())


def test_identical_runs():
    rep = diff_results(result(records(10)), result(records(10)))
    assert rep.alpha == 0 and rep.equivalent and rep.record_diffs == []


def test_single_mismatch_is_one_tenth():
    rep = diff_results(result(records(10)), result(records(10, flip=3)))
    assert rep.alpha == pytest.approx(0.1)
    assert rep.record_diffs[0]["master"] == "m0" and rep.record_diffs[0]["seq"] == 3


def test_missing_records_and_state_diff():
    a = result(records(4), {"s0": bytes(16)})
    b = result(records(3), {"s0": bytes(12) + b"\x01\x00\x00\x00"})
    rep = diff_results(a, b)
    assert rep.mismatched_records == 1
    assert rep.alpha == pytest.approx(0.25)
    assert rep.final_state_diffs == [("s0", 12, 0, 1)]


def test_alpha_symmetric():
    a = result(records(7) + records(3, "m1"), {"s0": bytes(8)})
    b = result(records(5, flip=2) + records(4, "m1"), {"s0": b"\x00" * 4 + b"\x02" * 4})
    assert diff_results(a, b).alpha == diff_results(b, a).alpha


def test_race_flag():
    w = lambda m: ObservationRecord(0, m, Kind.WRITE, 0x10, 1, Status.OK)
    r = lambda m: ObservationRecord(0, m, Kind.READ, 0x10, 1, Status.OK)
    assert race_flag(result([w("a"), r("b")]))
    assert not race_flag(result([r("a"), r("b")]))
    assert not race_flag(result([w("a"), w("a")]))


@pytest.mark.parametrize("bus", ["avalon", "wishbone"])
@pytest.mark.parametrize("tiers", [2, 3, 4, 5])
def test_canonical_alpha_zero(tiers, bus):
    rep = compare(tier_spec(tiers, bus))
    assert rep.alpha == 0 and not rep.race_flag


def test_fault_gives_positive_alpha():
    rep = compare(tier_spec(4, "avalon"), fault=("cpu1", 2))
    assert rep.alpha > 0
    assert rep.record_diffs[0]["master"] == "cpu1"


def test_race_detected_by_compare():
    spec = make_spec([("a", 0, ["write 0 1"]), ("b", 0, ["read 0 r0"])], [("s0", 0, 0x100)])
    assert compare(spec).race_flag


def test_complexity_empty_and_consistency():
    c = complexity(Netlist(Level.RTL))
    assert c == ComplexityCounts() and c.total == 0
    c = complexity(build_rtl(tier_spec(5, "avalon")))
    assert c.man_days * 8 == c.total


def test_avalon_1m1s_module_count():
    assert complexity(build_rtl(tier_spec(3, "avalon"))).modules == 11


@pytest.mark.parametrize("key", sorted(GOLDEN))
def test_te_golden(key):
    bus, tiers = key
    res = te_ratio(tier_spec(tiers, bus), bus)
    assert (res.t_tlm.total, res.t_rtl.total) == GOLDEN[key]
    assert res.te == pytest.approx(float(Fraction(GOLDEN[key][1], GOLDEN[key][0])))
    assert res.te > 1
    assert res.t_tlm.total < res.t_rtl.total
    assert complexity(elaborate_tlm_netlist(tier_spec(tiers, bus))).total == res.t_tlm.total


def test_speedup():
    same = speedup(TlmStats(transactions_completed=5, wall_time=0.5), RtlStats(cycles_simulated=5, wall_time=0.5))
    assert (same.wall_ratio, same.event_ratio) == (1.0, 1.0)
    zero = speedup(TlmStats(), RtlStats())
    assert (zero.wall_ratio, zero.event_ratio) == (1.0, 1.0)
