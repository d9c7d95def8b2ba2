"""uam-landing command line.

Exit codes: 0 success / Landed, 1 run Aborted, 2 usage or config error,
3 telemetry schema error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .kinematics import sample_workspace, write_workspace_csv
from .sim.config import ConfigError, load_config, parse_config_text, parse_overrides
from .sim.pipeline import run_pipeline
from .sim.report import SUMMARY_COLUMNS, replay, report_text, summary_row, write_run
from .sim.telemetry import TelemetrySchemaError

EXIT_OK, EXIT_ABORTED, EXIT_CONFIG, EXIT_SCHEMA = 0, 1, 2, 3
OUT_ENV = "UAM_LANDING_OUT"
SET_KEYS = ("set.name", "set.incline_deg", "set.runs_per_incline", "set.seed_base",
            "set.config")

log = logging.getLogger("uam_landing")


def output_root(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUT_ENV) or "runs")


@dataclass
class ExperimentSet:
    name: str
    incline_deg: list
    runs_per_incline: int = 3
    seed_base: int = 0
    overrides: dict = field(default_factory=dict)
    base_config: str | None = None

    def __post_init__(self):
        if self.runs_per_incline < 1:
            raise ConfigError("set.runs_per_incline must be >= 1")
        if not self.incline_deg:
            raise ConfigError("set.incline_deg must list at least one incline")

    def grid(self):
        for inc in self.incline_deg:
            for i in range(self.runs_per_incline):
                yield inc, self.seed_base + i


def load_experiment_set(path) -> ExperimentSet:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read set file {p}: {exc.strerror or exc}") from None
    values, extra = parse_config_text(text, str(p), SET_KEYS)
    try:
        incs = [float(x) for x in extra.get("set.incline_deg", "").split(",") if x.strip()]
        runs = int(extra.get("set.runs_per_incline", "3"))
        seed = int(extra.get("set.seed_base", "0"))
    except ValueError as exc:
        raise ConfigError(f"{p}: bad set value ({exc})") from None
    base = extra.get("set.config")
    if base is not None and not Path(base).is_absolute():
        base = str(p.parent / base)
    return ExperimentSet(extra.get("set.name", p.stem), incs, runs, seed, values, base)


def _run_cell(args):
    """One grid cell; a config that cannot even be built becomes an Aborted row."""
    exp, inc, seed, root = args
    over = dict(exp.overrides)
    over.update({"world.incline_deg": inc, "sensor.seed": seed,
                 "name": f"{exp.name}-{inc:g}-{seed}"})
    try:
        cfg = load_config(exp.base_config, over)
    except ConfigError as exc:
        return inc, seed, None, str(exc)
    rep = run_pipeline(cfg)
    write_run(rep, root / exp.name / f"{inc:g}" / str(seed), cfg)
    return inc, seed, rep, None


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:+.2f}"


def experiment_table(exp: ExperimentSet, cells: dict) -> tuple[str, str]:
    """Per-set signed errors, set mean abs error and a Total row; plus the same as CSV."""
    n = exp.runs_per_incline
    head = ["Set"] + [f"Exp. {i + 1}" for i in range(n)] + ["Set avg. abs."]
    rows, csv_rows, all_abs = [], [], []
    for inc in exp.incline_deg:
        entries, abs_err = [], []
        for i in range(n):
            seed = exp.seed_base + i
            rep, reason = cells[(inc, seed)]
            if rep is None or rep.outcome != "Landed" or math.isnan(rep.error_deg):
                entries.append("Aborted")
                csv_rows.append([f"{inc:g}", seed, "Aborted", "", reason or rep.abort_reason])
            else:
                e = float(_fmt(rep.error_deg))
                entries.append(_fmt(e))
                abs_err.append(abs(e))
                csv_rows.append([f"{inc:g}", seed, "Landed", _fmt(e), ""])
        avg = _fmt(float(np.mean(abs_err))).lstrip("+") if abs_err else "n/a"
        all_abs += abs_err
        rows.append([f"{inc:g}"] + entries + [avg])
    total = _fmt(float(np.mean(all_abs))).lstrip("+") if all_abs else "n/a"
    rows.append([""] * n + ["Total", total])
    widths = [max(len(r[c]) for r in [head] + rows) for c in range(len(head))]
    lines = ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in [head] + rows]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["incline_deg", "seed", "outcome", "error_deg", "reason"])
    w.writerows(csv_rows)
    w.writerow(["total", "", "", total, ""])
    return "\n".join(lines) + "\n", buf.getvalue()


def parse_table(text: str) -> dict:
    """Read a printed experiment table back into {incline: [errors or None], 'total': x}."""
    out = {}
    for line in text.strip().splitlines()[1:]:
        cols = line.split()
        if cols[0] == "Total":
            out["total"] = float(cols[1])
            continue
        out[cols[0]] = [None if c == "Aborted" else float(c) for c in cols[1:-1]]
    return out


def cmd_run(args) -> int:
    cfg = load_config(args.config, parse_overrides(args.set or []))
    rep = run_pipeline(cfg)
    root = output_root(args.out)
    out = write_run(rep, root / cfg["name"] / f"{cfg['world.incline_deg']:g}" / str(rep.seed), cfg)
    print(report_text(rep), end="")
    print(f"artifacts: {out}")
    return EXIT_OK if rep.outcome == "Landed" else EXIT_ABORTED


def cmd_experiment(args) -> int:
    exp = load_experiment_set(args.set_file)
    root = output_root(args.out)
    jobs = [(exp, inc, seed, root) for inc, seed in exp.grid()]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_run_cell, jobs))
    else:
        results = [_run_cell(j) for j in jobs]
    cells = {(inc, seed): (rep, reason) for inc, seed, rep, reason in results}
    table, table_csv = experiment_table(exp, cells)
    d = root / exp.name
    d.mkdir(parents=True, exist_ok=True)
    (d / "table.txt").write_text(table)
    (d / "table.csv").write_text(table_csv)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["incline_deg", *SUMMARY_COLUMNS])
    for inc, seed, rep, reason in results:
        if rep is None:
            w.writerow([f"{inc:g}", exp.name, seed] + [""] * 4 + ["Aborted", 0, "", reason])
        else:
            w.writerow([f"{inc:g}", *summary_row(rep)])
    (d / "summary.csv").write_text(buf.getvalue())
    print(table, end="")
    print(f"artifacts: {d}")
    return EXIT_OK


def cmd_replay(args) -> int:
    cfg = load_config(args.config, parse_overrides(args.set or []))
    p = Path(args.log)
    try:
        with p.open() as fh:
            rep = replay(fh, cfg)
    except OSError as exc:
        raise ConfigError(f"cannot read log {p}: {exc.strerror or exc}") from None
    print(report_text(rep), end="")
    return EXIT_OK


def cmd_workspace(args) -> int:
    if args.resolution < 2:
        raise ConfigError("--resolution must be >= 2")
    cfg = load_config(args.config, parse_overrides(args.set or []))
    arm = cfg.arms()[0 if args.arm == "left" else 1]
    ws = sample_workspace(arm, args.resolution)
    out = output_root(args.out) / "workspace"
    out.mkdir(parents=True, exist_ok=True)
    write_workspace_csv(ws, out / "points.csv")
    for name, hull in (("hull_yz.csv", ws.hull_yz), ("hull_xz.csv", ws.hull_xz)):
        a, b = name[5], name[6]
        rows = "".join(f"{float(u)!r},{float(v)!r}\n" for u, v in hull)
        (out / name).write_text(f"{a},{b}\n" + rows)
    print(f"{len(ws.points)} points -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uam-landing",
                                 description="Contact-based slope estimation and landing simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, out=True):
        p.add_argument("--config", help="scenario config file (defaults apply underneath)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        if out:
            p.add_argument("--out", help=f"output root (default ${OUT_ENV} or ./runs)")

    p = sub.add_parser("run", help="run one scenario")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", help="run an incline x seed grid and print the error table")
    p.add_argument("--set-file", required=True)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("replay", help="re-run estimation over a telemetry log")
    p.add_argument("--log", required=True)
    common(p, out=False)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("workspace", help="sample an arm workspace to CSV")
    p.add_argument("--resolution", type=int, default=25)
    p.add_argument("--arm", choices=("left", "right"), default="left")
    common(p)
    p.set_defaults(func=cmd_workspace)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TelemetrySchemaError as exc:
        print(f"error: telemetry {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
