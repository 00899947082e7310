from socsim.rtl import simulate_rtl
from socsim.spec import tier_spec
from socsim.tlm import run_tlm
from socsim.traceio import memory_dump, memory_from_dump, trace_from_csv, trace_to_csv, write_final_state, write_vcd


def test_trace_csv_roundtrip():
    res = run_tlm(tier_spec(4, "avalon"))
    text = trace_to_csv(res.trace)
    assert text.splitlines()[0] == "seq,master,kind,address,data,status"
    assert text.splitlines()[1] == "0,cpu0,W,0x00000000,0x000010a0,OK"
    assert trace_from_csv(text) == res.trace


def test_rtl_trace_csv_matches_tlm_format():
    spec = tier_spec(3, "wishbone")
    rtl, _ = simulate_rtl(spec)
    assert trace_to_csv(rtl.trace) == trace_to_csv(run_tlm(spec).trace)


def test_memory_dump(tmp_path):
    image = bytes(range(12))
    assert memory_dump(image) == "00010203\n04050607\n08090a0b\n"
    assert memory_from_dump(memory_dump(image)) == image
    paths = write_final_state({"ram0": image}, tmp_path / "x.tlm")
    assert [p.name for p in paths] == ["x.tlm.ram0.hex"]


def test_vcd(tmp_path):
    _, system = simulate_rtl(tier_spec(3, "wishbone"), record_history=True)
    path = tmp_path / "t.vcd"
    write_vcd(system, path)
    text = path.read_text()
    assert "$enddefinitions $end" in text
    assert "cpu0_cyc" in text
    assert f"#{2 * system.clock_cycle}" in text
