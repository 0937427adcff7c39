"""Networks of solver instances coupled through shared variables.

Nodes advance on a common macro clock given by the sampling grid.  Before
each macro step every node's input variables are overwritten with their
source's current value and their own derivatives are forced to zero;
outputs are read after the step and feed the partners' inputs of the next
step (a one-macro-step delay, which resolves cyclic wirings
deterministically).  Within a macro step each node runs the same adaptive
micro-stepper as a stand-alone run, so a network without inter-node edges
reproduces independent runs exactly.

External square-wave drives are piecewise constant; micro-steps never
straddle a transition, so a driven variable tracks its source exactly.

The network counts as solved when every node's contrd is simultaneously 0
and stays so for the confirmation window; per-node records then carry the
node's own entry time into that window.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .cnf import Problem, count_unsatisfied, parse_dimacs
from .dynamics import AnalogOptions, MemOptions, MemParams, control_signals, readout
from .integrate import (
    ANALOG,
    MEM,
    SOLVED,
    TIMEOUT,
    IntegratorConfig,
    RunRecord,
    SegmentIntegrator,
    StepSizeUnderflow,
    _sample_times,
    init_analog,
    init_mem,
    make_system,
)

__all__ = [
    "SquareWave",
    "SolverNode",
    "Wiring",
    "eval_drive",
    "simulate_network",
    "load_network_config",
]


@dataclass(frozen=True)
class SquareWave:
    """Periodic two-level drive.  The value at a transition instant is the
    new level: high on [phase, phase + duty*period), low until the period
    ends, repeating."""

    period: float
    duty: float = 0.5
    phase: float = 0.0
    low: float = -1.0
    high: float = 1.0

    def __post_init__(self):
        if self.period <= 0 or not 0.0 < self.duty < 1.0:
            raise ValueError("need period > 0 and duty in (0, 1)")
        if not self.low < self.high:
            raise ValueError("need low < high")

    def value(self, t: float) -> float:
        tau = (t - self.phase) % self.period
        return self.high if tau < self.duty * self.period else self.low

    def next_transition(self, t: float) -> float:
        tau = (t - self.phase) % self.period
        base = t - tau
        if tau < self.duty * self.period:
            return base + self.duty * self.period
        return base + self.period


def eval_drive(drive, t: float) -> float:
    """Drive value at time t (value-at-transition = new level)."""
    return drive.value(t)


@dataclass(frozen=True)
class SolverNode:
    """One solver instance in a network.

    input_vars / output_vars are 1-based variable indices (disjoint sets);
    input variables are pinned by the wiring, outputs are readable by other
    nodes.
    """

    problem: Problem
    solver: str = MEM
    input_vars: tuple[int, ...] = ()
    output_vars: tuple[int, ...] = ()
    expose_contrd: bool = True
    analog_options: AnalogOptions = AnalogOptions()
    mem_options: MemOptions = MemOptions()
    mem_params: MemParams = MemParams()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "input_vars", tuple(self.input_vars))
        object.__setattr__(self, "output_vars", tuple(self.output_vars))
        pins = (*self.input_vars, *self.output_vars)
        if len(set(pins)) != len(pins):
            raise ValueError("input and output variable sets must be disjoint")
        for i in pins:
            if not 1 <= i <= self.problem.num_vars:
                raise ValueError(f"variable index {i} out of range")


# A signal source is ("drive", drive_index) or ("node", node_index, var_index);
# an edge feeds a source into (node_index, input_var_index).  Variable
# indices are 1-based throughout.
Source = Union[tuple[str, int], tuple[str, int, int]]


@dataclass(frozen=True)
class Wiring:
    edges: tuple[tuple[Source, tuple[int, int]], ...] = ()
    drives: tuple[SquareWave, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((tuple(s), tuple(t)) for s, t in self.edges))
        object.__setattr__(self, "drives", tuple(self.drives))


def _validate(nodes: Sequence[SolverNode], wiring: Wiring):
    fed: dict[tuple[int, int], Source] = {}
    for source, target in wiring.edges:
        t_node, t_var = target
        if not 0 <= t_node < len(nodes):
            raise ValueError(f"edge targets unknown node {t_node}")
        if t_var not in nodes[t_node].input_vars:
            raise ValueError(f"edge targets non-input variable {t_var} of node {t_node}")
        if target in fed:
            raise ValueError(f"input {target} fed by more than one source")
        if source[0] == "drive":
            if not 0 <= source[1] < len(wiring.drives):
                raise ValueError(f"edge references unknown drive {source[1]}")
        elif source[0] == "node":
            s_node, s_var = source[1], source[2]
            if not 0 <= s_node < len(nodes):
                raise ValueError(f"edge sources unknown node {s_node}")
            if s_var not in nodes[s_node].output_vars:
                raise ValueError(f"edge sources non-output variable {s_var} of node {s_node}")
        else:
            raise ValueError(f"unknown source kind {source[0]!r}")
        fed[target] = source
    for i, node in enumerate(nodes):
        for var in node.input_vars:
            if (i, var) not in fed:
                raise ValueError(f"input variable {var} of node {i} is unwired")
    return fed


def simulate_network(nodes: Sequence[SolverNode], wiring: Wiring,
                     config: IntegratorConfig = IntegratorConfig(),
                     seeds: Sequence[int] = (), *,
                     stop_on_solve: bool = True) -> list[RunRecord]:
    """Advance all nodes on a common clock and return per-node records.

    seeds gives one initial-condition seed per node.  With
    stop_on_solve=False the network integrates the full t_ev even after a
    joint solve (useful for drive-response studies).
    """
    nodes = list(nodes)
    if len(seeds) != len(nodes):
        raise ValueError("need exactly one seed per node")
    fed = _validate(nodes, wiring)

    systems = []
    for node, seed in zip(nodes, seeds):
        rhs, project, columns = make_system(
            node.problem, node.solver, node.analog_options, node.mem_options,
            node.mem_params,
        )
        if node.solver == ANALOG:
            st = init_analog(node.problem, seed)
            y = np.concatenate((st.s, st.a))
        else:
            st = init_mem(node.problem, seed)
            y = np.concatenate((st.v, st.x_s, st.x_l))
        pins = np.array(sorted(v - 1 for v in node.input_vars), dtype=int)

        def pinned_rhs(t, yy, _rhs=rhs, _pins=pins):
            d = _rhs(t, yy)
            d[_pins] = 0.0
            return d

        systems.append({
            "node": node,
            "y": y,
            "pins": pins,
            "project": project,
            "columns": columns,
            "integrator": SegmentIntegrator(pinned_rhs, project, config),
            "times": [], "states": [], "contra": [], "contrd": [],
        })

    def apply_node_pins():
        """Overwrite inputs fed by other nodes with the partner's value."""
        values = {}
        for (t_node, t_var), source in fed.items():
            if source[0] == "node":
                values[(t_node, t_var)] = systems[source[1]]["y"][source[2] - 1]
        for (t_node, t_var), val in values.items():
            systems[t_node]["y"][t_var - 1] = val

    def apply_drive_pins(t):
        for (t_node, t_var), source in fed.items():
            if source[0] == "drive":
                systems[t_node]["y"][t_var - 1] = wiring.drives[source[1]].value(t)

    joint_enter: Optional[float] = None
    per_node_enter: list[Optional[float]] = [None] * len(nodes)
    per_node_assign: list = [None] * len(nodes)
    solved_at: Optional[float] = None
    solve_times: list[Optional[float]] = [None] * len(nodes)
    solutions: list = [None] * len(nodes)
    aborted = None
    wall_start = time.perf_counter()

    def record(t) -> bool:
        nonlocal joint_enter, solved_at
        all_zero = True
        for i, sys_i in enumerate(systems):
            n = sys_i["node"].problem.num_vars
            contra, contrd = control_signals(sys_i["node"].problem, sys_i["y"][:n])
            sys_i["times"].append(t)
            sys_i["states"].append(sys_i["y"].copy())
            sys_i["contra"].append(contra)
            sys_i["contrd"].append(contrd)
            if contrd == 0:
                if per_node_enter[i] is None:
                    per_node_enter[i] = t
                    per_node_assign[i] = readout(sys_i["y"][:n]).copy()
            else:
                per_node_enter[i] = None
                per_node_assign[i] = None
                all_zero = False
        if all_zero:
            if joint_enter is None:
                joint_enter = t
            if t - joint_enter >= config.window_confirm - 1e-9 and solved_at is None:
                solved_at = t
                solve_times[:] = per_node_enter
                solutions[:] = per_node_assign
                return True
        else:
            joint_enter = None
        return False

    apply_node_pins()
    apply_drive_pins(0.0)
    confirmed = record(0.0)
    grid = _sample_times(config)
    if not confirmed:
        for t_prev, t_next in zip(grid[:-1], grid[1:]):
            # split the macro step at drive transitions so drives stay
            # piecewise constant within every micro step
            cuts = [t_prev]
            for drive in wiring.drives:
                t_cut = drive.next_transition(t_prev)
                while t_cut < t_next - 1e-12:
                    cuts.append(t_cut)
                    t_cut = drive.next_transition(t_cut)
            cuts = sorted(set(cuts)) + [t_next]
            try:
                for c_prev, c_next in zip(cuts[:-1], cuts[1:]):
                    apply_drive_pins(c_prev)
                    for sys_i in systems:
                        sys_i["y"] = sys_i["integrator"].advance(c_prev, sys_i["y"], c_next)
            except StepSizeUnderflow as exc:
                aborted = str(exc)
                break
            apply_node_pins()
            apply_drive_pins(t_next)
            confirmed = record(t_next)
            if confirmed and stop_on_solve:
                break

    wall = time.perf_counter() - wall_start
    records = []
    for i, sys_i in enumerate(systems):
        node = sys_i["node"]
        solved = solved_at is not None
        assignment = solutions[i] if solved else None
        if solved:
            assert assignment is not None
            assert count_unsatisfied(node.problem, assignment) == 0
        stats = dict(sys_i["integrator"].stats)
        if stats["dt_smallest"] is np.inf:
            stats["dt_smallest"] = None
        stats["wall_time"] = wall
        stats["dt_underflow"] = aborted is not None
        if aborted:
            stats["abort_message"] = aborted
        if node.solver == ANALOG:
            options = {"analog": asdict(node.analog_options)}
        else:
            options = {"mem": asdict(node.mem_options), "params": asdict(node.mem_params)}
        options["network"] = {
            "inputs": list(node.input_vars),
            "outputs": list(node.output_vars),
            "joint_solve_time": solved_at,
        }
        records.append(RunRecord(
            solver=node.solver,
            seed=int(seeds[i]),
            outcome=SOLVED if solved else TIMEOUT,
            t_solve=solve_times[i] if solved else None,
            t_detect=None,
            assignment=assignment,
            times=np.asarray(sys_i["times"]),
            states=np.asarray(sys_i["states"]),
            contra=np.asarray(sys_i["contra"]),
            contrd=np.asarray(sys_i["contrd"], dtype=int),
            state_columns=sys_i["columns"],
            config=config,
            options=options,
            stats=stats,
            instance=node.label or f"node{i}",
        ))
    return records


def load_network_config(path) -> tuple[list[SolverNode], Wiring, IntegratorConfig,
                                       list[int], bool]:
    """Parse the JSON network description (see README for the schema).

    Returns (nodes, wiring, config, seeds, stop_on_solve).  CNF paths are
    resolved relative to the config file.
    """
    path = Path(path)
    spec = json.loads(path.read_text())
    base = path.parent

    cfg_kwargs = {
        key: spec[key]
        for key in ("t_ev", "sample_interval", "error_tol", "method", "dt_init",
                    "dt_min", "dt_max", "eps_zero", "window_zero", "window_confirm")
        if key in spec
    }
    config = IntegratorConfig(**cfg_kwargs)

    nodes = []
    seeds = []
    for i, node_spec in enumerate(spec["nodes"]):
        problem = parse_dimacs((base / node_spec["cnf"]).read_text())
        solver = node_spec.get("solver", MEM)
        mem_params = MemParams(**node_spec.get("mem_params", {}))
        mem_options = MemOptions(**node_spec.get("mem_options", {}))
        analog_options = AnalogOptions(**node_spec.get("analog_options", {}))
        nodes.append(SolverNode(
            problem=problem,
            solver=solver,
            input_vars=tuple(node_spec.get("inputs", ())),
            output_vars=tuple(node_spec.get("outputs", ())),
            expose_contrd=node_spec.get("expose_contrd", True),
            analog_options=analog_options,
            mem_options=mem_options,
            mem_params=mem_params,
            label=node_spec.get("label", node_spec["cnf"]),
        ))
        seeds.append(int(node_spec.get("seed", spec.get("seed", 0) + i)))

    drives = tuple(
        SquareWave(
            period=d["period"],
            duty=d.get("duty", 0.5),
            phase=d.get("phase", 0.0),
            low=d.get("low", -1.0),
            high=d.get("high", 1.0),
        )
        for d in spec.get("drives", ())
        if d.get("kind", "square") == "square"
    )

    def parse_ref(ref: str):
        parts = ref.split(":")
        if parts[0] == "drive":
            return ("drive", int(parts[1]))
        if parts[0] == "node":
            return ("node", int(parts[1]), int(parts[2]))
        raise ValueError(f"bad signal reference {ref!r}")

    edges = []
    for edge in spec.get("edges", ()):
        source = parse_ref(edge["from"])
        target = parse_ref(edge["to"])
        if target[0] != "node":
            raise ValueError("edge targets must be node inputs")
        edges.append((source, (target[1], target[2])))
    wiring = Wiring(tuple(edges), drives)

    stop_on_solve = bool(spec.get("stop_on_solve", True))
    return nodes, wiring, config, seeds, stop_on_solve
