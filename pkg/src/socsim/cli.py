"""socsim command line: run, compare, sweep, transform-report, tier-spec, refine.

Exit codes: 0 ok, 1 mismatch or unmet requirement, 2 spec error,
3 limit exceeded, 4 elaboration or transform error, 5 race (advisory compare).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .errors import ElaborationError, LimitExceeded, RequirementsUnsatisfiable, SpecError, TransformError
from .metrics import compare_runs, complexity, speedup
from .fabric import build_rtl
from .refine import elaborate_tlm_netlist, parse_refinement, refine_loop, transform
from .rtl import DEFAULT_CYCLE_LIMIT, simulate_rtl
from .spec import BusKind, load_spec, serialize_spec, tier_spec
from .tlm import DEFAULT_TRANSACTION_LIMIT, run_tlm
from .traceio import trace_to_csv, write_final_state, write_vcd

log = logging.getLogger("socsim")

EXIT_OK, EXIT_MISMATCH, EXIT_SPEC, EXIT_LIMIT, EXIT_ELAB, EXIT_RACE = 0, 1, 2, 3, 4, 5

SWEEP_COLUMNS = ("scenario", "bus", "tiers", "tlmTotal", "rtlTotal", "te", "alpha",
                 "cycles", "transactions", "wallRatio", "eventRatio", "status")
WALL_COLUMNS = ("wallRatio",)


def _positive(text: str) -> int:
    v = int(text, 0)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _fault(text: str) -> tuple[str, int]:
    master, _, idx = text.rpartition(":")
    if not master:
        raise argparse.ArgumentTypeError("expected MASTER:READ_INDEX")
    return master, int(idx)


def _tier_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = (int(x) for x in text.split("..", 1))
        tiers = list(range(lo, hi + 1))
    else:
        tiers = [int(x) for x in text.split(",")]
    if not tiers or any(t < 2 or t > 5 for t in tiers):
        raise argparse.ArgumentTypeError("tiers must lie within 2..5")
    return tiers


def _bus_list(text: str) -> list[BusKind]:
    try:
        return [BusKind.parse(b.strip()) for b in text.split(",") if b.strip()]
    except SpecError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load(args):
    spec = load_spec(args.spec)
    return spec if args.bus is None else spec.with_bus(args.bus)


def _stem(path) -> str:
    return Path(path).stem


# -- run ---------------------------------------------------------------------

def cmd_run(args) -> int:
    spec = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prefix = out / f"{_stem(args.spec)}.{args.model}"
    system = None
    if args.model == "tlm":
        result = run_tlm(spec, args.max_transactions)
        stats = {"transactionsCompleted": result.stats.transactions_completed,
                 "waitEvents": result.stats.wait_events,
                 "schedulerRounds": result.stats.scheduler_rounds,
                 "wallTime": result.stats.wall_time}
    else:
        result, system = simulate_rtl(spec, max_cycles=args.max_cycles, fault=args.inject_fault,
                                      record_history=args.dump_signals is not None)
        stats = {"cyclesSimulated": result.stats.cycles_simulated,
                 "transfersCompleted": result.stats.transfers_completed,
                 "protocolViolations": result.stats.protocol_violations,
                 "wallTime": result.stats.wall_time}
    trace_path = Path(args.trace) if args.trace else prefix.with_name(prefix.name + ".trace.csv")
    trace_path.write_text(trace_to_csv(result.trace), encoding="utf-8")
    write_final_state(result.final_state, prefix)
    stats_path = prefix.with_name(prefix.name + ".stats.json")
    stats_path.write_text(json.dumps({"model": args.model, "bus": spec.bus.value, **stats}, indent=2) + "\n",
                          encoding="utf-8")
    if args.dump_signals:
        if system is None:
            log.warning("--dump-signals only applies to the rtl model; ignored")
        else:
            write_vcd(system, args.dump_signals)
    print(f"{args.model}: {len(result.trace)} transfers, trace {trace_path}")
    return EXIT_OK


# -- compare -----------------------------------------------------------------

def cmd_compare(args) -> int:
    spec = _load(args)
    cmp = compare_runs(spec, fault=args.inject_fault, max_transactions=args.max_transactions,
                       max_cycles=args.max_cycles)
    rep = cmp.report
    doc = {"spec": str(args.spec), "bus": spec.bus.value, **rep.to_dict()}
    if rep.race_flag:
        doc["note"] = "two masters share a written address; the comparison is advisory"
    report_path = Path(args.report or f"{_stem(args.spec)}.{spec.bus.value}.compare.json")
    report_path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"alpha={rep.alpha:g} race={str(rep.race_flag).lower()} report {report_path}")
    if rep.race_flag:
        return EXIT_RACE
    return EXIT_OK if rep.alpha == 0 else EXIT_MISMATCH


# -- sweep -------------------------------------------------------------------

def sweep_row(tiers: int, bus) -> dict:
    bus = BusKind.parse(bus)
    row = {"scenario": f"t{tiers}_{bus.value}", "bus": bus.value, "tiers": tiers}
    try:
        spec = tier_spec(tiers, bus)
        t_tlm = complexity(elaborate_tlm_netlist(spec))
        t_rtl = complexity(build_rtl(spec))
        cmp = compare_runs(spec)
        sp = speedup(cmp.tlm.stats, cmp.rtl.stats)
        row.update(
            tlmTotal=t_tlm.total, rtlTotal=t_rtl.total, te=f"{t_rtl.total / t_tlm.total:.6f}",
            alpha=f"{cmp.report.alpha:g}", cycles=cmp.rtl.stats.cycles_simulated,
            transactions=cmp.tlm.stats.transactions_completed,
            wallRatio=f"{sp.wall_ratio:.3f}", eventRatio=f"{sp.event_ratio:.6f}", status="OK",
        )
        row["_man_days"] = (t_tlm.man_days, t_rtl.man_days)
    except Exception as exc:  # a failed row must not stop the sweep
        log.error("%s failed: %s", row["scenario"], exc)
        row["status"] = "FAILED"
    return row


def write_plot_data(rows, out: Path):
    """Two-column whitespace data files, one per figure analog and bus."""
    by_bus: dict[str, list] = {}
    for r in rows:
        if r["status"] == "OK":
            by_bus.setdefault(r["bus"], []).append(r)
    files = []
    for bus, rs in by_bus.items():
        series = {
            f"complexity_tlm_{bus}.dat": ("tlm_total", [(r["tiers"], r["tlmTotal"]) for r in rs]),
            f"complexity_rtl_{bus}.dat": ("rtl_total", [(r["tiers"], r["rtlTotal"]) for r in rs]),
            f"design_time_tlm_{bus}.dat": ("tlm_man_days", [(r["tiers"], f"{r['_man_days'][0]:.3f}") for r in rs]),
            f"design_time_rtl_{bus}.dat": ("rtl_man_days", [(r["tiers"], f"{r['_man_days'][1]:.3f}") for r in rs]),
            f"te_{bus}.dat": ("te", [(r["tiers"], r["te"]) for r in rs]),
        }
        for name, (label, points) in series.items():
            body = "".join(f"{x} {y}\n" for x, y in points)
            (out / name).write_text(f"# tiers {label}\n{body}", encoding="utf-8")
            files.append(out / name)
    return files


def run_sweep(tiers, buses) -> list[dict]:
    rows = [sweep_row(t, b) for t in tiers for b in buses]
    return sorted(rows, key=lambda r: (r["tiers"], r["bus"]))


def cmd_sweep(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = run_sweep(args.tiers, args.bus)
    csv_path = out / "sweep.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    write_plot_data(rows, out)
    for r in rows:
        print(f"{r['scenario']}: te={r.get('te', '-')} alpha={r.get('alpha', '-')} {r['status']}")
    return EXIT_MISMATCH if any(r["status"] != "OK" for r in rows) else EXIT_OK


# -- transform-report / tier-spec / refine ------------------------------------

def cmd_transform_report(args) -> int:
    spec = _load(args)
    _, report = transform(elaborate_tlm_netlist(spec), spec.bus)
    text = report.to_text() if args.format == "text" else json.dumps(report.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_tier_spec(args) -> int:
    text = serialize_spec(tier_spec(args.tiers, args.bus))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_refine(args) -> int:
    spec, reqs, cands = parse_refinement(Path(args.spec).read_text(encoding="utf-8"))
    try:
        outcome = refine_loop(spec, reqs, cands, args.max_transactions)
    except RequirementsUnsatisfiable as exc:
        print(f"unsatisfied: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    for i, failed in outcome.failures:
        print(f"candidate {i}: failed {', '.join(failed)}")
    print(f"candidate {outcome.iterations}: accepted")
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="socsim", description="TLM and RTL bus simulator for Avalon and Wishbone")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def spec_args(sp):
        sp.add_argument("--spec", required=True, help="system description (JSON)")
        sp.add_argument("--bus", type=BusKind.parse, default=None, help="override the bus kind")

    def limits(sp):
        sp.add_argument("--max-cycles", type=_positive, default=DEFAULT_CYCLE_LIMIT)
        sp.add_argument("--max-transactions", type=_positive, default=DEFAULT_TRANSACTION_LIMIT)
        sp.add_argument("--inject-fault", type=_fault, default=None, help=argparse.SUPPRESS)

    r = sub.add_parser("run", help="simulate one model and write trace, memories and stats")
    spec_args(r)
    limits(r)
    r.add_argument("--model", choices=("tlm", "rtl"), required=True)
    r.add_argument("--out", default=".", help="output directory")
    r.add_argument("--trace", default=None, help="trace CSV path (default under --out)")
    r.add_argument("--dump-signals", metavar="VCD", default=None, help="write an RTL signal dump")
    r.add_argument("--seed", type=int, default=None, help="reserved; simulations are deterministic")
    r.set_defaults(fn=cmd_run)

    c = sub.add_parser("compare", help="run both models and report their distance")
    spec_args(c)
    limits(c)
    c.add_argument("--report", default=None, help="report JSON path")
    c.set_defaults(fn=cmd_compare)

    s = sub.add_parser("sweep", help="complexity, te, alpha and speedup over canonical tier specs")
    s.add_argument("--tiers", type=_tier_range, default=[3, 4, 5], help="e.g. 3..5 or 2,4")
    s.add_argument("--bus", type=_bus_list, default=[BusKind.AVALON, BusKind.WISHBONE])
    s.add_argument("--out", default=".", help="output directory")
    s.set_defaults(fn=cmd_sweep)

    t = sub.add_parser("transform-report", help="show what the TLM to RTL rewrite changes")
    spec_args(t)
    t.add_argument("--format", choices=("json", "text"), default="json")
    t.add_argument("--out", default=None)
    t.set_defaults(fn=cmd_transform_report)

    g = sub.add_parser("tier-spec", help="emit a canonical tier scenario")
    g.add_argument("--tiers", type=int, required=True, choices=range(2, 6))
    g.add_argument("--bus", type=BusKind.parse, default=BusKind.AVALON)
    g.add_argument("--out", default=None)
    g.set_defaults(fn=cmd_tier_spec)

    f = sub.add_parser("refine", help="check requirements at TLM, trying listed refinements in order")
    f.add_argument("--spec", required=True)
    f.add_argument("--max-transactions", type=_positive, default=DEFAULT_TRANSACTION_LIMIT)
    f.set_defaults(fn=cmd_refine)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.fn(args)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except LimitExceeded as exc:
        print(f"limit exceeded: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (ElaborationError, TransformError) as exc:
        print(f"elaboration error: {exc}", file=sys.stderr)
        return EXIT_ELAB


if __name__ == "__main__":
    sys.exit(main())
