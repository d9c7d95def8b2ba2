"""Telemetry CSV schema (one row per step) and its reader."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .estimator import TelemetryInput

PHASES = ("Approach", "Probe", "RaiseArm", "Reposition", "PlanLanding", "Descend",
          "Landed", "Aborted")

COLUMNS = (
    ["t", "px", "py", "pz", "roll", "pitch", "yaw", "wx", "wy", "wz", "u1", "u2", "u3", "u4"]
    + [f"a{j}_{n}{k}" for j in (1, 2) for n in ("q", "qd") for k in (1, 2, 3)]
    + ["tau_x", "tau_y", "tau_z", "phase", "event_flag", "event_arm"]
)
HEADER = ",".join(COLUMNS)


class TelemetrySchemaError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def _f(x: float) -> str:
    return repr(float(x))


def format_row(row: TelemetryInput, tau, event_arm: int) -> str:
    vals = [row.t, *row.p, *row.rpy, *row.omega, *row.u]
    for q, qd in zip(row.q, row.qd):
        vals += [*q, *qd]
    vals += list(tau)
    return ",".join(_f(v) for v in vals) + f",{row.phase},{1 if event_arm else 0},{event_arm}"


@dataclass
class ParsedRow:
    inp: TelemetryInput
    tau: tuple
    event_arm: int


def parse_row(fields: list, line: int) -> ParsedRow:
    if len(fields) != len(COLUMNS):
        raise TelemetrySchemaError(line, f"expected {len(COLUMNS)} fields, got {len(fields)}")
    try:
        nums = [float(x) for x in fields[:-3]]
        flag = int(fields[-2])
        arm = int(fields[-1])
    except ValueError as exc:
        raise TelemetrySchemaError(line, f"bad number ({exc})") from None
    if not all(math.isfinite(v) for v in nums):
        raise TelemetrySchemaError(line, "non-finite value")
    phase = fields[-3]
    if phase not in PHASES:
        raise TelemetrySchemaError(line, f"unknown phase {phase!r}")
    if flag not in (0, 1) or arm not in (0, 1, 2) or (flag == 0) != (arm == 0):
        raise TelemetrySchemaError(line, "inconsistent event columns")
    a = nums[14:26]
    inp = TelemetryInput(
        nums[0], tuple(nums[1:4]), tuple(nums[4:7]), tuple(nums[7:10]), tuple(nums[10:14]),
        (tuple(a[0:3]), tuple(a[6:9])), (tuple(a[3:6]), tuple(a[9:12])), phase,
    )
    return ParsedRow(inp, tuple(nums[26:29]), arm)


def read_telemetry(lines):
    """Parse a telemetry stream.

    Returns (rows, truncated). A malformed *final* line is treated as a cut-off
    log and dropped; anything else malformed raises TelemetrySchemaError.
    """
    lines = list(lines)
    if not lines or lines[0].rstrip("\r\n") != HEADER:
        raise TelemetrySchemaError(1, "missing or wrong header")
    rows = []
    truncated = False
    last_t = -math.inf
    body = lines[1:]
    for i, raw in enumerate(body):
        n = i + 2
        text = raw.rstrip("\r\n")
        if not text:
            continue
        is_last = i == len(body) - 1
        try:
            row = parse_row(text.split(","), n)
        except TelemetrySchemaError:
            if is_last and not raw.endswith("\n"):
                truncated = True
                break
            raise
        if not row.inp.t > last_t:
            raise TelemetrySchemaError(n, f"timestamp {row.inp.t} not after {last_t}")
        last_t = row.inp.t
        rows.append(row)
    return rows, truncated
