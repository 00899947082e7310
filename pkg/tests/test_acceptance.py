"""Acceptance criteria, each checked at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line (visible even without
``-s``) before asserting.
"""
import csv
import itertools
import json
import random
import time
from collections import Counter

import pytest

from conftest import make_spec, random_spec
from socsim.cli import WALL_COLUMNS, main, run_sweep
from socsim.fabric import build_avalon, build_rtl, build_wishbone
from socsim.metrics import compare_runs, speedup
from socsim.netlist import isomorphic
from socsim.refine import elaborate_tlm_netlist, transform
from socsim.rtl import simulate_rtl
from socsim.spec import serialize_spec, tier_spec
from socsim.tlm import AddressMap, MapEntry, Route, Status, arbitrate_rr, route, run_tlm

BUSES = ("avalon", "wishbone")
CANONICAL = [(t, b) for t in range(2, 6) for b in BUSES]


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail=""):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else ""))
        assert ok, detail
    return emit


def test_criterion_1_equivalence(report, tmp_path):
    t0 = time.perf_counter()
    bad = []
    for tiers, bus in CANONICAL:
        spec = tmp_path / f"t{tiers}_{bus}.json"
        spec.write_text(serialize_spec(tier_spec(tiers, bus)))
        out = tmp_path / f"t{tiers}_{bus}.report.json"
        code = main(["compare", "--spec", str(spec), "--report", str(out)])
        alpha = json.loads(out.read_text())["alpha"]
        if code != 0 or alpha != 0:
            bad.append((tiers, bus, code, alpha))
    elapsed = time.perf_counter() - t0
    report(1, not bad and elapsed < 5, f"{len(CANONICAL)} scenarios, {elapsed:.2f}s, failures {bad}")


def test_criterion_2_te_trend(report):
    t0 = time.perf_counter()
    rows = run_sweep([3, 4, 5], list(BUSES))
    elapsed = time.perf_counter() - t0
    problems = []
    for bus in BUSES:
        te = [float(r["te"]) for r in rows if r["bus"] == bus]
        if not all(a < b for a, b in zip(te, te[1:])):
            problems.append(f"{bus} te not strictly increasing: {te}")
        if not all(x > 1 for x in te):
            problems.append(f"{bus} te <= 1: {te}")
    if elapsed >= 2:
        problems.append(f"runtime {elapsed:.2f}s")
    report(2, not problems, "; ".join(problems) or f"{elapsed:.2f}s")


def test_criterion_3_fabric_census(report):
    bad = []
    for m, s in itertools.product(range(1, 5), repeat=2):
        masters = [(f"m{i}", 0, []) for i in range(m)]
        slaves = [(f"s{j}", 0x100 * j, 0x100) for j in range(s)]
        c = build_avalon(make_spec(masters, slaves, "avalon")).census()
        got = (c["Master"], c["LogicRequest"], c["Slave"], c["LogicArbitrator"], c["Mux"])
        if got != (m, m, s, s, 5 * s + m):
            bad.append(("avalon", m, s, got))
        w = build_wishbone(make_spec(masters, slaves, "wishbone")).census()
        if (w["Decoder"], w["RrArbiter"]) != (1, 1):
            bad.append(("wishbone", m, s, dict(w)))
    report(3, not bad, f"grid 4x4, failures {bad}")


def test_criterion_4_isomorphism(report):
    specs = [tier_spec(t, b) for t, b in CANONICAL]
    rng = random.Random(20240601)
    specs += [random_spec(rng, race_free=False) for _ in range(20)]
    bad = [i for i, spec in enumerate(specs)
           if not isomorphic(transform(elaborate_tlm_netlist(spec), spec.bus)[0], build_rtl(spec))]
    report(4, not bad, f"{len(specs)} specs, non-isomorphic {bad}")


def _oracle_rr(req, last, order):
    start = 0 if last is None else order.index(last) + 1
    scan = [order[(start + k) % len(order)] for k in range(len(order))]
    return next((m for m in scan if m in req), None)


def test_criterion_5_round_robin(report):
    mism = 0
    for n in range(1, 5):
        order = [f"M{i}" for i in range(n)]
        for k in range(n + 1):
            for req in itertools.combinations(order, k):
                for last in [None, *order]:
                    mism += arbitrate_rr(set(req), last, order) != _oracle_rr(set(req), last, order)
    worst = 0
    for bus in BUSES:
        masters = [(f"m{i}", 0x40 * i, ["repeat 60", "write 0 1", "end"]) for i in range(4)]
        res, _ = simulate_rtl(make_spec(masters, [("s0", 0, 0x1000)], bus))
        seq = [g[2] for g in res.grants]
        for i in range(len(seq) - 99):
            c = Counter(seq[i:i + 100])
            worst = max(worst, max(c.values()) - min(c.get(f"m{j}", 0) for j in range(4)))
    report(5, mism == 0 and worst <= 1, f"oracle mismatches {mism}, worst window spread {worst}")


def test_criterion_6_protocol(report):
    total, viol = 0, []
    for tiers, bus in CANONICAL:
        res, system = simulate_rtl(tier_spec(tiers, bus))
        total += res.stats.cycles_simulated
        viol += [str(v) for v in system.monitor.violations]
        if system.monitor.completions != len(res.trace):
            viol.append(f"t{tiers} {bus}: completions {system.monitor.completions} != {len(res.trace)}")
    report(6, not viol, f"{total} cycles checked, violations {viol[:3]}")


def test_criterion_7_routing(report):
    rng = random.Random(99)
    mism = 0
    for n in range(1, 9):
        for _ in range(4):
            entries, base = [], rng.randrange(0, 0x100, 4)
            for i in range(n):
                size = rng.randrange(4, 0x800, 4)
                entries.append(MapEntry(base, size, f"t{i}"))
                base += size + rng.choice((0, rng.randrange(4, 0x400, 4)))
            amap = AddressMap(entries)
            probes = {a for e in entries for b in (e.base, e.end) for a in (b - 4, b, b + 4) if a >= 0}
            probes |= {rng.randrange(0, base + 0x400) & ~3 for _ in range(1000)}
            for a in probes:
                want = next((Route(e.target, a - e.base) for e in entries if e.base <= a < e.end), None)
                mism += route(amap, a) != want
    errors_ok = True
    for bus in BUSES:
        spec = make_spec([("m0", 0, ["read 0x8000 r1", "write 0x8000 r1"])], [("s0", 0, 0x100)], bus)
        rtl, _ = simulate_rtl(spec)
        for res in (run_tlm(spec), rtl):
            errors_ok &= [r.status for r in res.trace] == [Status.ERROR, Status.ERROR]
    report(7, mism == 0 and errors_ok, f"oracle mismatches {mism}, unmapped ERROR at both levels {errors_ok}")


def _strip_wall(path):
    with open(path, newline="") as fh:
        return [{k: v for k, v in row.items() if k not in WALL_COLUMNS} for row in csv.DictReader(fh)]


def test_criterion_8_determinism(report, tmp_path):
    for d in ("a", "b"):
        main(["sweep", "--tiers", "2..5", "--bus", "avalon,wishbone", "--out", str(tmp_path / d)])
    a, b = _strip_wall(tmp_path / "a" / "sweep.csv"), _strip_wall(tmp_path / "b" / "sweep.csv")
    dat_same = all((tmp_path / "a" / f.name).read_text() == f.read_text() for f in (tmp_path / "b").glob("*.dat"))
    report(8, a == b and len(a) == 8 and dat_same, f"{len(a)} rows compared")


def test_criterion_9_speedup_direction(report):
    ratios = {}
    for tiers, bus in CANONICAL:
        cmp = compare_runs(tier_spec(tiers, bus))
        sp = speedup(cmp.tlm.stats, cmp.rtl.stats)
        ratios[(tiers, bus)] = (sp.event_ratio, sp.wall_ratio)
    low = {k: v[0] for k, v in ratios.items() if not v[0] > 1}
    walls = ", ".join(f"t{t}/{b[0]}={w:.1f}" for (t, b), (_, w) in ratios.items())
    report(9, not low, f"min eventRatio {min(v[0] for v in ratios.values()):.3f}; wallRatio {walls}")
