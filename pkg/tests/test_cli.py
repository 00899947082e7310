import csv
import json
import subprocess
import sys

import pytest

from socsim.cli import main
from socsim.spec import serialize_spec, tier_spec


@pytest.fixture
def t3(tmp_path):
    p = tmp_path / "t3.json"
    p.write_text(serialize_spec(tier_spec(3, "avalon")))
    return p


def test_run_tlm(t3, tmp_path):
    assert main(["run", "--spec", str(t3), "--model", "tlm", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "t3.tlm.trace.csv")))
    assert len(rows) == 11 and rows[0]["kind"] == "W"
    stats = json.loads((tmp_path / "t3.tlm.stats.json").read_text())
    assert stats["transactionsCompleted"] == 11
    assert (tmp_path / "t3.tlm.ram0.hex").exists()


def test_run_rtl_with_signal_dump(t3, tmp_path):
    vcd = tmp_path / "t3.vcd"
    assert main(["run", "--spec", str(t3), "--model", "rtl", "--out", str(tmp_path), "--dump-signals", str(vcd)]) == 0
    assert vcd.read_text().startswith("$timescale")
    assert (tmp_path / "t3.rtl.trace.csv").read_text() == _tlm_trace(t3, tmp_path)


def _tlm_trace(spec, out):
    main(["run", "--spec", str(spec), "--model", "tlm", "--out", str(out)])
    return (out / "t3.tlm.trace.csv").read_text()


def test_run_overlapping_slaves(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bus": "avalon", "masters": [{"name": "m", "program": []}],
                               "slaves": [{"name": "a", "base": 0, "size": 4096},
                                          {"name": "b", "base": 2048, "size": 4096}]}))
    assert main(["run", "--spec", str(bad), "--model", "rtl"]) == 2
    err = capsys.readouterr().err
    assert "[0x0000, 0x1000)" in err and "[0x0800, 0x1800)" in err


def test_run_cycle_limit(t3, tmp_path):
    assert main(["run", "--spec", str(t3), "--model", "rtl", "--max-cycles", "1", "--out", str(tmp_path)]) == 3


def test_run_missing_file(tmp_path):
    assert main(["run", "--spec", str(tmp_path / "nope.json"), "--model", "tlm"]) == 2


def test_compare_clean(tmp_path):
    spec = tmp_path / "t4.json"
    spec.write_text(serialize_spec(tier_spec(4, "wishbone")))
    report = tmp_path / "r.json"
    assert main(["compare", "--spec", str(spec), "--report", str(report)]) == 0
    assert json.loads(report.read_text())["alpha"] == 0


def test_compare_fault(t3, tmp_path):
    report = tmp_path / "r.json"
    assert main(["compare", "--spec", str(t3), "--report", str(report), "--inject-fault", "cpu0:0"]) == 1
    doc = json.loads(report.read_text())
    assert doc["alpha"] > 0 and doc["record_diffs"][0]["master"] == "cpu0"
    assert doc["record_diffs"][0]["seq"] == 4  # first read follows four writes


def test_compare_race(tmp_path):
    spec = tmp_path / "race.json"
    spec.write_text(json.dumps({"bus": "wishbone", "slaves": [{"name": "s", "base": 0, "size": 64}],
                                "masters": [{"name": "a", "program": ["write 0 1"]},
                                            {"name": "b", "program": ["write 0 2"]}]}))
    report = tmp_path / "r.json"
    assert main(["compare", "--spec", str(spec), "--report", str(report)]) == 5
    doc = json.loads(report.read_text())
    assert doc["race_flag"] is True and "advisory" in doc["note"]


def test_sweep_outputs(tmp_path):
    assert main(["sweep", "--tiers", "2..2", "--bus", "avalon", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    assert len(rows) == 1 and rows[0]["tiers"] == "2" and float(rows[0]["te"]) > 1
    assert rows[0]["alpha"] == "0" and rows[0]["status"] == "OK"
    assert (tmp_path / "te_avalon.dat").read_text().splitlines()[1].startswith("2 ")
    assert (tmp_path / "complexity_rtl_avalon.dat").exists()


def test_sweep_marks_failed_rows(tmp_path, monkeypatch):
    import socsim.cli as cli

    real = cli.compare_runs

    def flaky(spec, *a, **kw):
        if spec.bus.value == "wishbone":
            raise RuntimeError("boom")
        return real(spec, *a, **kw)

    monkeypatch.setattr(cli, "compare_runs", flaky)
    assert main(["sweep", "--tiers", "3", "--bus", "avalon,wishbone", "--out", str(tmp_path)]) == 1
    rows = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    assert [r["status"] for r in rows] == ["OK", "FAILED"]


def test_transform_report_and_tier_spec(tmp_path, capsys):
    spec = tmp_path / "t5.json"
    assert main(["tier-spec", "--tiers", "5", "--bus", "wishbone", "--out", str(spec)]) == 0
    assert main(["transform-report", "--spec", str(spec)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mux_plan"]["total"] == 5 and doc["arbiter_choice"] == "round_robin"


def test_bad_arguments():
    with pytest.raises(SystemExit):
        main(["sweep", "--tiers", "1..6"])


def test_module_entry_point(t3, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "socsim", "compare", "--spec", str(t3),
                           "--report", str(tmp_path / "r.json")], capture_output=True, text=True)
    assert proc.returncode == 0 and "alpha=0" in proc.stdout
