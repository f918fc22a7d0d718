"""Command-line front end.

Exit codes: 0 reached, 1 bad input, 2 safety violation (J1 < C_s),
3 waypoint not reached, 4 a benchmark case faulted.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import InvalidArgument
from .metrics import compare_report, metrics, report_dict, write_report
from .scenario import Scenario, imazu_case, load_scenario, scenario_from_dict
from .sim import read_trace, simulate, write_trace

EXIT_OK, EXIT_BAD, EXIT_UNSAFE, EXIT_UNREACHED, EXIT_FAULT = 0, 1, 2, 3, 4

log = logging.getLogger("ptnav")

VO_NOTE = "VO: 1 deg heading grid, horizon = scenario horizon, starboard tie-break, re-plan every step"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD, f"{self.prog}: error: {message}\n")


def parse_cases(text: str) -> list:
    """``"1-4"``, ``"2,5,7-9"`` -> sorted case numbers in 1..22."""
    out = set()
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                a, b = part.split("-", 1)
                lo, hi = int(a), int(b)
                if lo > hi:
                    raise ValueError
                out.update(range(lo, hi + 1))
            else:
                out.add(int(part))
    except ValueError:
        raise InvalidArgument(f"bad case range {text!r}") from None
    if not out or min(out) < 1 or max(out) > 22:
        raise InvalidArgument(f"cases must lie in 1..22, got {text!r}")
    return sorted(out)


def _overrides(sc: Scenario, args) -> Scenario:
    kw = {}
    for name in ("switching", "side", "dt", "horizon"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    return dataclasses.replace(sc, **kw) if kw else sc


def _load(args) -> Scenario:
    sc = imazu_case(args.imazu) if args.imazu is not None else load_scenario(args.scenario)
    return _overrides(sc, args)


def _header(sc: Scenario, algs) -> dict:
    h = {"ptnav": __version__, "dt_s": sc.dt, "horizon_s": sc.horizon,
         "switching": sc.switching, "side": sc.side, "C_s_m": sc.C_s,
         "algorithms": ",".join(algs)}
    if "vo" in algs:
        h["vo"] = VO_NOTE
    return h


def _exit_for(m) -> int:
    if not m.safe:
        return EXIT_UNSAFE
    return EXIT_OK if m.reached else EXIT_UNREACHED


# -- export ------------------------------------------------------------------

def export_plot_data(trace, out_dir, stem: str) -> list:
    """Plot-ready CSV files: ship path, obstacle paths, mode segments, box outlines."""
    if len(trace.t) == 0:
        raise InvalidArgument("empty trace")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []

    def write(name, cols, rows):
        p = out / f"{stem}.{name}.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            w.writerows(rows)
        files.append(p)

    write("ship", ["t", "x", "y", "mode"],
          ([repr(float(t)), repr(float(x)), repr(float(y)), m]
           for t, x, y, m in zip(trace.t, trace.x, trace.y, trace.mode)))
    tracks = scenario_from_dict(trace.scenario).tracks if trace.scenario else []
    rows = []
    for tr in tracks:
        times = [0.0] if tr.is_static else trace.t
        for t in times:
            q = tr.position(float(t))
            rows.append([tr.id, repr(float(t)), repr(q[0]), repr(q[1])])
    write("obstacles", ["id", "t", "x", "y"], rows)
    segs = []
    start = 0
    for i in range(1, len(trace.t) + 1):
        if i == len(trace.t) or trace.mode[i] != trace.mode[start]:
            segs.append([len(segs), trace.mode[start], start, i - 1,
                         repr(float(trace.t[start])), repr(float(trace.t[i - 1]))])
            start = i
    write("segments", ["segment", "mode", "i0", "i1", "t0", "t1"], segs)
    rows = []
    for j, b in enumerate(trace.boxes):
        for k, (x, y) in enumerate(b["vertices"] + b["vertices"][:1]):
            rows.append([j, repr(float(b["t"])), "+".join(b["members"]), k, repr(x), repr(y)])
    write("boxes", ["box", "t", "members", "vertex", "x", "y"], rows)
    return files


# -- subcommands -------------------------------------------------------------

def cmd_run(args) -> int:
    sc = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tr = simulate(sc, args.algorithm)
    stem = f"{sc.name}-{args.algorithm}"
    write_trace(tr, out / f"{stem}.trace.csv")
    m = metrics(tr, sc.tracks)
    doc = {"header": _header(sc, [args.algorithm]), "status": tr.status, "metrics": report_dict(m)}
    (out / f"{stem}.metrics.json").write_text(json.dumps(doc, indent=1))
    if not args.no_figures:
        from .plotting import plot_trajectory
        plot_trajectory(tr, sc.tracks, out / f"{stem}.png", stem)
    code = EXIT_FAULT if tr.status == "fault" else _exit_for(m)
    print(f"{stem}: status={tr.status} J1={m.J1:.3f} m C_s={sc.C_s:.3f} m J5={m.J5:.1f} s "
          f"exit={code}")
    return code


def _run_cases(items, algs, out: Path, figures: bool):
    reports, faults, traces = {}, [], {}
    for key, sc in items:
        reports[key] = {}
        for alg in algs:
            tr = simulate(sc, alg)
            stem = f"{sc.name}-{alg}"
            write_trace(tr, out / f"{stem}.trace.csv")
            export_plot_data(tr, out / "plot", stem)
            reports[key][alg] = metrics(tr, sc.tracks)
            traces[(key, alg)] = tr
            if tr.status == "fault":
                faults.append(stem)
            if figures:
                from .plotting import plot_trajectory
                plot_trajectory(tr, sc.tracks, out / f"{stem}.png", stem)
    return reports, faults, traces


def cmd_bench(args) -> int:
    cases = parse_cases(args.cases)
    algs = ["proposed", "vo"] if args.algorithm == "both" else [args.algorithm]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    items = [(n, _overrides(imazu_case(n), args)) for n in cases]
    reports, faults, _ = _run_cases(items, algs, out, not args.no_figures)
    rows = compare_report(reports, algs)
    write_report(rows, out / "report", _header(items[0][1], algs))
    if not args.no_figures:
        from .plotting import plot_metric_bars
        plot_metric_bars(rows, out / "report.png", items[0][1].C_s)
    for r in rows:
        print(f"case {r['case']:>2} {r['algorithm']:<8} J1={r['J1']:.1f} m "
              f"safe={'pass' if r['safe'] else 'fail'} reached={r['reached']}")
    if faults:
        log.error("faulted runs: %s", ", ".join(faults))
        return EXIT_FAULT
    return EXIT_OK


def cmd_compare(args) -> int:
    sc = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    algs = ["proposed", "vo"]
    reports, faults, _ = _run_cases([(sc.name, sc)], algs, out, not args.no_figures)
    rows = compare_report(reports, algs)
    write_report(rows, out / f"{sc.name}-compare", _header(sc, algs))
    for r in rows:
        print(f"{r['algorithm']:<8} J1={r['J1']:.1f} J5={r['J5']:.1f} J6={r['J6']:.1f} "
              f"safe={'pass' if r['safe'] else 'fail'}")
    return EXIT_FAULT if faults else EXIT_OK


def cmd_export(args) -> int:
    tr = read_trace(args.trace)
    stem = Path(args.trace).name.removesuffix(".csv").removesuffix(".trace")
    files = export_plot_data(tr, args.out, stem)
    for f in files:
        print(f)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ptnav", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def scenario_args(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--imazu", type=int, metavar="N", help="Imazu case 1..22")
        g.add_argument("--scenario", metavar="PATH", help="YAML scenario file")

    def common(sp):
        sp.add_argument("--switching", choices=["binary", "risk"])
        sp.add_argument("--side", choices=["starboard", "port"])
        sp.add_argument("--dt", type=float)
        sp.add_argument("--horizon", type=float)
        sp.add_argument("--out", default="out", metavar="DIR")
        sp.add_argument("--no-figures", action="store_true", help="skip PNG output")

    r = sub.add_parser("run", help="simulate one scenario")
    scenario_args(r)
    r.add_argument("--algorithm", choices=["proposed", "vo"], default="proposed")
    common(r)
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="run the Imazu cases")
    b.add_argument("--algorithm", choices=["proposed", "vo", "both"], default="both")
    b.add_argument("--cases", default="1-22", metavar="RANGE")
    common(b)
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("compare", help="run both algorithms on one scenario")
    scenario_args(c)
    common(c)
    c.set_defaults(func=cmd_compare)

    e = sub.add_parser("export", help="convert a trace into plot-ready files")
    e.add_argument("--trace", required=True, metavar="PATH")
    e.add_argument("--out", default="out", metavar="DIR")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InvalidArgument, ValueError, OSError) as exc:
        print(f"ptnav: error: {exc}", file=sys.stderr)
        return EXIT_BAD


if __name__ == "__main__":
    sys.exit(main())
