"""Run traces and their CSV round-trip.

A RunRecord holds one row per optimization iteration and one row per
simulated time step. The CSV is append-ordered, versioned and fully
deterministic: floats are written with repr (shortest exact round-trip), so
export -> import -> export reproduces the file byte for byte. Per-iteration
wall-clock timings stay in memory only (they would break determinism of the
exported file); the stats harness reads them from the record object.
"""

from __future__ import annotations

from dataclasses import dataclass, field

FORMAT_TAG = "# v2g-run-record v1"
HEADER = (
    "kind,epoch,iteration,selected_index,best_rate_kw,best_total_cost,"
    "available,time_h,rate_kw,grid_power_kw,soc,note"
)
_N_COLS = len(HEADER.split(","))


@dataclass(frozen=True)
class IterationRow:
    """Optimizer state after one protocol iteration."""

    epoch: int
    k: int
    selected_index: int
    best_rate_kw: float
    best_total_cost: float
    n_available: int
    elapsed_ms: float = 0.0  # in-memory only, not exported


@dataclass(frozen=True)
class StepRow:
    """Fleet state at the start of one time step, before discharging."""

    time_h: float
    rate_kw: float
    grid_power_kw: float
    soc: tuple[float, ...]


@dataclass
class RunRecord:
    """Append-only trace of one run: iterations, time steps, call accounting."""

    iterations: list[IterationRow] = field(default_factory=list)
    steps: list[StepRow] = field(default_factory=list)
    empty_fleet: bool = False
    oracle_calls_ev: int = 0
    oracle_calls_agg: int = 0

    def extend(self, other: "RunRecord") -> None:
        self.iterations.extend(other.iterations)
        self.steps.extend(other.steps)
        self.oracle_calls_ev += other.oracle_calls_ev
        self.oracle_calls_agg += other.oracle_calls_agg
        self.empty_fleet = self.empty_fleet or other.empty_fleet


def export_run(record: RunRecord, path) -> None:
    """Write the record to a versioned CSV; see module docstring for format."""
    lines = [FORMAT_TAG, HEADER]
    if record.empty_fleet and not record.iterations and not record.steps:
        lines.append("flag,,,,,,,,,,,empty_fleet")
    for row in record.iterations:
        lines.append(
            f"iter,{row.epoch},{row.k},{row.selected_index},{row.best_rate_kw!r},"
            f"{row.best_total_cost!r},{row.n_available},,,,,"
        )
    for row in record.steps:
        soc = ";".join(repr(s) for s in row.soc)
        lines.append(
            f"step,,,,,,,{row.time_h!r},{row.rate_kw!r},{row.grid_power_kw!r},{soc},"
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def import_run(path) -> RunRecord:
    """Parse a CSV written by export_run back into a RunRecord."""
    with open(path, "r", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != FORMAT_TAG:
        raise ValueError(f"{path}: not a v2g run record")
    if len(lines) < 2 or lines[1] != HEADER:
        raise ValueError(f"{path}: unexpected header")
    record = RunRecord()
    for lineno, line in enumerate(lines[2:], start=3):
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != _N_COLS:
            raise ValueError(f"{path}:{lineno}: expected {_N_COLS} fields")
        kind = fields[0]
        if kind == "flag":
            if fields[11] == "empty_fleet":
                record.empty_fleet = True
            else:
                raise ValueError(f"{path}:{lineno}: unknown flag {fields[11]!r}")
        elif kind == "iter":
            record.iterations.append(
                IterationRow(
                    epoch=int(fields[1]),
                    k=int(fields[2]),
                    selected_index=int(fields[3]),
                    best_rate_kw=float(fields[4]),
                    best_total_cost=float(fields[5]),
                    n_available=int(fields[6]),
                )
            )
        elif kind == "step":
            soc = tuple(float(s) for s in fields[10].split(";")) if fields[10] else ()
            record.steps.append(
                StepRow(
                    time_h=float(fields[7]),
                    rate_kw=float(fields[8]),
                    grid_power_kw=float(fields[9]),
                    soc=soc,
                )
            )
        else:
            raise ValueError(f"{path}:{lineno}: unknown row kind {kind!r}")
    return record
