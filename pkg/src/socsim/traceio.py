"""File formats: trace CSV, per-slave memory dumps, VCD signal dumps."""
from __future__ import annotations

import csv
import io
from pathlib import Path

from .tlm import Kind, ObservationRecord, Status

TRACE_HEADER = ("seq", "master", "kind", "address", "data", "status")


def trace_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for r in records:
        w.writerow((r.seq, r.master, r.kind.value, f"{r.address:#010x}", f"{r.data:#010x}", r.status.value))
    return buf.getvalue()


def trace_from_csv(text: str) -> list[ObservationRecord]:
    rows = csv.DictReader(io.StringIO(text))
    if tuple(rows.fieldnames or ()) != TRACE_HEADER:
        raise ValueError(f"unexpected trace header {rows.fieldnames}")
    return [
        ObservationRecord(int(r["seq"]), r["master"], Kind(r["kind"]), int(r["address"], 16),
                          int(r["data"], 16), Status(r["status"]))
        for r in rows
    ]


def memory_dump(image: bytes) -> str:
    """One line per 4-byte word, bytes in address order as hex."""
    return "".join(image[i:i + 4].hex() + "\n" for i in range(0, len(image), 4))


def memory_from_dump(text: str) -> bytes:
    return b"".join(bytes.fromhex(line) for line in text.split())


def write_final_state(final_state: dict, prefix: Path) -> list[Path]:
    paths = []
    for slave, image in final_state.items():
        p = prefix.with_name(f"{prefix.name}.{slave}.hex")
        p.write_text(memory_dump(image), encoding="utf-8")
        paths.append(p)
    return paths


def write_vcd(system, path, timescale: str = "1ns") -> None:
    """Dump the recorded per-cycle signal history as a VCD file.

    Each cycle spans two time units so the clock shows a rising edge.
    """
    if system.history is None:
        raise ValueError("system was elaborated without history recording")
    names = list(system.signals)
    ids = {n: _vcd_id(i) for i, n in enumerate(names)}
    widths = {n: system.signals[n].width for n in names}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"$timescale {timescale} $end\n$scope module top $end\n")
        for n in names:
            fh.write(f"$var wire {widths[n]} {ids[n]} {n.replace('.', '_')} $end\n")
        fh.write("$upscope $end\n$enddefinitions $end\n")
        clk = ids.get("clock.clk")
        prev = None
        for cycle, values in enumerate(system.history):
            fh.write(f"#{2 * cycle}\n")
            for i, (n, v) in enumerate(zip(names, values)):
                if prev is None or prev[i] != v or n == "clock.clk":
                    fh.write(_vcd_value(v, widths[n], ids[n]))
            if clk is not None:
                fh.write(f"#{2 * cycle + 1}\n0{clk}\n")
            prev = values
        fh.write(f"#{2 * len(system.history)}\n")


def _vcd_id(i: int) -> str:
    chars = []
    i += 1
    while i:
        i, r = divmod(i - 1, 94)
        chars.append(chr(33 + r))
    return "".join(chars)


def _vcd_value(v: int, width: int, ident: str) -> str:
    if width == 1:
        return f"{v}{ident}\n"
    return f"b{v:b} {ident}\n"
