"""Experiment orchestration: generate instance grids, run solver batches,
aggregate benchmark summary tables, emit plot data.

Persistence layout (one directory per experiment):

    instances/   DIMACS files plus JSON sidecars (plant, seed, family)
    runs/        one JSON + CSV pair per run
    summary.json, summary.md

Seeds are derived from a single seed base by hashing it with the cell
coordinates (family, size, instance index, solver label), giving
independent but fully reproducible streams.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from statistics import median
from typing import Optional

from .cnf import count_unsatisfied, parse_dimacs, write_dimacs, assignment_to_bits
from .dynamics import AnalogOptions, MemOptions, MemParams
from .instances import BarthelParams, PlantedInstance, gen_barthel, gen_xorsat_3r
from .integrate import (
    ANALOG,
    CONVERGED_TO_ZERO,
    MEM,
    SOLVED,
    IntegratorConfig,
    RunRecord,
    load_run,
    run,
    save_run,
)

__all__ = [
    "FAMILIES",
    "derive_seed",
    "generate_instance",
    "save_instance",
    "SolverSpec",
    "ExperimentPlan",
    "CellSummary",
    "SummaryTable",
    "run_experiment",
    "emit_plot_data",
    "verify_run_dir",
]

FAMILIES = ("B4.3", "B7", "X")


def derive_seed(*parts) -> int:
    """Deterministic 63-bit seed from arbitrary labels (sha256 based)."""
    text = "\x1f".join(repr(p) for p in parts)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def generate_instance(family: str, size: int, seed: int) -> PlantedInstance:
    if family == "B7":
        return gen_barthel(BarthelParams(num_vars=size, ratio=7.0, p0=0.08, seed=seed))
    if family == "B4.3":
        return gen_barthel(BarthelParams(num_vars=size, ratio=4.3, p0=0.08, seed=seed))
    if family == "X":
        return gen_xorsat_3r(size, seed)
    raise ValueError(f"unknown family {family!r} (expected one of {FAMILIES})")


def save_instance(inst: PlantedInstance, directory, name: str,
                  family: str = "", seed: Optional[int] = None) -> Path:
    """Write DIMACS plus a JSON sidecar holding plant and seed."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    cnf_path = directory / f"{name}.cnf"
    cnf_path.write_text(write_dimacs(inst.problem, comments=[f"{family} instance {name}"]))
    sidecar = {
        "family": family,
        "num_vars": inst.problem.num_vars,
        "num_clauses": inst.problem.num_clauses,
        "seed": seed,
        "plant": assignment_to_bits(inst.plant),
        "dimacs": cnf_path.name,
    }
    (directory / f"{name}.json").write_text(json.dumps(sidecar, indent=1) + "\n")
    return cnf_path


@dataclass(frozen=True)
class SolverSpec:
    kind: str  # "analog" or "mem"
    label: str = ""
    analog_options: AnalogOptions = AnalogOptions()
    mem_options: MemOptions = MemOptions()
    mem_params: MemParams = MemParams()

    def __post_init__(self):
        if self.kind not in (ANALOG, MEM):
            raise ValueError(f"unknown solver kind {self.kind!r}")
        if not self.label:
            object.__setattr__(self, "label", self.kind)


@dataclass(frozen=True)
class ExperimentPlan:
    families: tuple[str, ...] = FAMILIES
    sizes: tuple[int, ...] = (10, 20, 30, 40, 50)
    instances_per_cell: int = 10
    solvers: tuple[SolverSpec, ...] = (SolverSpec(ANALOG), SolverSpec(MEM))
    config: IntegratorConfig = IntegratorConfig()
    seed_base: int = 0
    workers: int = 1

    def __post_init__(self):
        if not (self.families and self.sizes and self.solvers):
            raise ValueError("plan needs at least one family, size and solver")
        for fam in self.families:
            if fam not in FAMILIES:
                raise ValueError(f"unknown family {fam!r}")


@dataclass
class CellSummary:
    runs: int = 0
    unsolved: int = 0
    converged_to_zero: int = 0
    solve_times: list = field(default_factory=list)

    @property
    def median_time(self) -> Optional[float]:
        return median(self.solve_times) if self.solve_times else None


@dataclass
class SummaryTable:
    """Per (size, solver label, family) aggregate of run outcomes."""

    cells: dict

    @classmethod
    def from_records(cls, records: dict) -> "SummaryTable":
        cells: dict = {}
        for (family, size, _index, label), record in sorted(records.items()):
            cell = cells.setdefault((size, label, family), CellSummary())
            cell.runs += 1
            if record.outcome == SOLVED:
                cell.solve_times.append(record.t_solve)
            else:
                cell.unsolved += 1
                if record.outcome == CONVERGED_TO_ZERO:
                    cell.converged_to_zero += 1
        return cls(cells)

    def to_json_dict(self) -> dict:
        rows = []
        for (size, label, family), cell in sorted(self.cells.items()):
            rows.append({
                "size": size,
                "solver": label,
                "family": family,
                "runs": cell.runs,
                "unsolved": cell.unsolved,
                "converged_to_zero": cell.converged_to_zero,
                "median_t_solve": cell.median_time,
            })
        return {"cells": rows}

    def to_markdown(self) -> str:
        sizes = sorted({size for size, _, _ in self.cells})
        labels = sorted({label for _, label, _ in self.cells})
        families = [f for f in FAMILIES if any(k[2] == f for k in self.cells)]
        lines = ["| N | solver | " + " | ".join(families) + " |",
                 "|---|--------|" + "|".join("---" for _ in families) + "|"]
        for size in sizes:
            for label in labels:
                row = [str(size), label]
                for family in families:
                    cell = self.cells.get((size, label, family))
                    if cell is None:
                        row.append("-")
                    elif cell.converged_to_zero:
                        row.append(f"{cell.unsolved} ({cell.converged_to_zero})")
                    else:
                        row.append(str(cell.unsolved))
                lines.append("| " + " | ".join(row) + " |")
        lines.append("")
        lines.append("unsolved out of runs per cell; parentheses = converged to zero")
        return "\n".join(lines) + "\n"


def _run_one(args):
    key, problem, spec, config, seed = args
    record = run(
        problem,
        spec.kind,
        seed=seed,
        config=config,
        analog_options=spec.analog_options,
        mem_options=spec.mem_options,
        mem_params=spec.mem_params,
    )
    return key, record


def run_experiment(plan: ExperimentPlan, out_dir=None):
    """Generate the instance grid, run every solver once per instance, and
    aggregate.  Returns (SummaryTable, records) with records keyed by
    (family, size, instance index, solver label).

    With out_dir set, instances, runs and the summary are persisted.
    Individual aborted runs (step-size underflow) are recorded as timeouts,
    not fatal.
    """
    out_dir = Path(out_dir) if out_dir is not None else None
    instances: dict = {}
    for family in plan.families:
        for size in plan.sizes:
            for index in range(plan.instances_per_cell):
                seed = derive_seed(plan.seed_base, "instance", family, size, index)
                inst = generate_instance(family, size, seed)
                name = f"{family}_N{size}_{index:02d}"
                instances[(family, size, index)] = (name, inst)
                if out_dir is not None:
                    save_instance(inst, out_dir / "instances", name, family, seed)

    tasks = []
    for (family, size, index), (name, inst) in sorted(instances.items()):
        for spec in plan.solvers:
            seed = derive_seed(plan.seed_base, "run", family, size, index, spec.label)
            key = (family, size, index, spec.label)
            tasks.append((key, inst.problem, spec, plan.config, seed))

    records: dict = {}
    if plan.workers > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            for key, record in pool.map(_run_one, tasks, chunksize=1):
                records[key] = record
    else:
        for task in tasks:
            key, record = _run_one(task)
            records[key] = record

    for (family, size, index, label), record in sorted(records.items()):
        name = f"{family}_N{size}_{index:02d}"
        record.instance = f"instances/{name}.cnf"
        if out_dir is not None:
            save_run(record, out_dir / "runs", f"{name}_{label}")

    table = SummaryTable.from_records(records)
    if out_dir is not None:
        (out_dir / "summary.json").write_text(
            json.dumps({"plan": _plan_dict(plan), **table.to_json_dict()}, indent=1) + "\n"
        )
        (out_dir / "summary.md").write_text(table.to_markdown())
    return table, records


def _plan_dict(plan: ExperimentPlan) -> dict:
    payload = asdict(plan)
    payload["solvers"] = [asdict(s) for s in plan.solvers]
    return payload


def _series_columns(columns, token: str):
    if token in ("contra", "contrd"):
        return [token]
    if ":" not in token:
        raise ValueError(f"unknown selection {token!r}")
    prefix, which = token.split(":", 1)
    matching = []
    for name in columns:
        alpha = name.rstrip("0123456789")
        if alpha != prefix:
            continue
        if which == "*" or name == f"{prefix}{which}":
            matching.append(name)
    if not matching:
        raise ValueError(f"selection {token!r} matches no series")
    return matching


def emit_plot_data(record, selection: str) -> str:
    """Tidy CSV (t, series, value) for the selected series of a run.

    record is a RunRecord or a dict loaded by integrate.load_run.
    Selections are comma-separated tokens: 'contra', 'contrd', or
    '<prefix>:<index or *>' over the state columns (e.g. 's:*', 'a:3',
    'v:1', 'xs:*', 'xl:2'); indices are 1-based as in the column names.
    """
    if isinstance(record, RunRecord):
        columns = record.state_columns
        times, states = record.times, record.states
        extra = {"contra": record.contra, "contrd": record.contrd}
    else:
        columns = record["state_columns"]
        times, states = record["times"], record["states"]
        extra = {"contra": record["contra"], "contrd": record["contrd"]}

    selected: list[str] = []
    for token in selection.split(","):
        token = token.strip()
        if token:
            selected.extend(_series_columns(columns, token))

    lines = ["t,series,value"]
    col_index = {name: i for i, name in enumerate(columns)}
    for name in selected:
        values = extra[name] if name in extra else states[:, col_index[name]]
        for t, v in zip(times, values):
            lines.append(f"{float(t)!r},{name},{float(v)!r}")
    return "\n".join(lines) + "\n"


def verify_run_dir(out_dir) -> int:
    """Re-verify every persisted Solved run against its instance file.

    Returns the number of solved records checked; raises on any mismatch.
    """
    out_dir = Path(out_dir)
    checked = 0
    for json_path in sorted((out_dir / "runs").glob("*.json")):
        payload = load_run(json_path)
        if payload["outcome"] != SOLVED:
            continue
        problem = parse_dimacs((out_dir / payload["instance"]).read_text())
        witness = payload["assignment_array"]
        if count_unsatisfied(problem, witness) != 0:
            raise AssertionError(f"{json_path.name}: recorded assignment does not satisfy")
        checked += 1
    return checked
