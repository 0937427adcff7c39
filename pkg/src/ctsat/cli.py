"""Command line interface.

Subcommands: gen, solve, netlist, oracle, network, bench, plotdata.
Global flags --seed, --out-dir and --config (a JSON file overriding
integrator defaults) apply to every subcommand; solver parameters are
exposed as flags with their standard defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from .cnf import parse_dimacs, assignment_to_bits
from .dynamics import AUX_MODES, AnalogOptions, MemOptions, MemParams
from .harness import (
    ExperimentPlan,
    SolverSpec,
    emit_plot_data,
    run_experiment,
    save_instance,
)
from .instances import BarthelParams, gen_barthel, gen_xorsat_3r
from .integrate import ANALOG, MEM, IntegratorConfig, load_run, run, save_run
from .netlist import (
    NetlistOptions,
    SubcircuitSpec,
    emit_analog,
    emit_mem,
    emit_subcircuit,
    serialize,
)
from .network import load_network_config, simulate_network
from .oracle import solve_dpll, solve_exhaustive


def _add_mem_param_flags(parser):
    defaults = MemParams()
    for f in fields(MemParams):
        parser.add_argument(
            f"--{f.name}", type=float, default=getattr(defaults, f.name),
            help=f"memcomputing parameter {f.name} (default {getattr(defaults, f.name)})",
        )


def _mem_params(args) -> MemParams:
    return MemParams(**{f.name: getattr(args, f.name) for f in fields(MemParams)})


def _add_integrator_flags(parser):
    parser.add_argument("--t-ev", type=float, default=None,
                        help="evolution time budget (default 300)")
    parser.add_argument("--method", choices=("rk23", "euler"), default=None)
    parser.add_argument("--error-tol", type=float, default=None)
    parser.add_argument("--dt-init", type=float, default=None)
    parser.add_argument("--sample-interval", type=float, default=None)


def _integrator_config(args) -> IntegratorConfig:
    overrides = {}
    if args.config:
        overrides.update(json.loads(Path(args.config).read_text()))
    flag_map = {
        "t_ev": args.t_ev,
        "method": args.method,
        "error_tol": args.error_tol,
        "dt_init": args.dt_init,
        "sample_interval": args.sample_interval,
    }
    for key, value in flag_map.items():
        if value is not None:
            overrides[key] = value
    valid = {f.name for f in fields(IntegratorConfig)}
    unknown = set(overrides) - valid
    if unknown:
        raise SystemExit(f"unknown config keys: {sorted(unknown)}")
    return IntegratorConfig(**overrides)


def _analog_options(args) -> AnalogOptions:
    return AnalogOptions(
        one_eighth_factor=not getattr(args, "no_one_eighth", False),
        aux_mode=getattr(args, "aux_mode", "aK2"),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctsat",
        description="continuous-time SAT solver laboratory",
    )
    parser.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    parser.add_argument("--out-dir", default="ctsat-out",
                        help="output directory for runs/experiments")
    parser.add_argument("--config", default=None,
                        help="JSON file overriding integrator defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a planted instance")
    gen_sub = p_gen.add_subparsers(dest="family", required=True)
    p_barthel = gen_sub.add_parser("barthel", help="planted ensemble instance")
    p_barthel.add_argument("--n", type=int, required=True)
    p_barthel.add_argument("--ratio", type=float, default=4.3,
                           help="clause ratio M/N (7 easy, 4.3 difficult)")
    p_barthel.add_argument("--p0", type=float, default=0.08)
    p_barthel.add_argument("--out", required=True, help="output .cnf path")
    p_xorsat = gen_sub.add_parser("xorsat", help="3-regular 3-XORSAT instance")
    p_xorsat.add_argument("--n", type=int, required=True)
    p_xorsat.add_argument("--out", required=True)

    p_solve = sub.add_parser("solve", help="integrate one solver on a CNF file")
    p_solve.add_argument("--in", dest="infile", required=True)
    p_solve.add_argument("--solver", choices=(ANALOG, MEM), default=MEM)
    p_solve.add_argument("--aux-mode", choices=AUX_MODES, default="aK2")
    p_solve.add_argument("--no-one-eighth", action="store_true",
                         help="drop the 1/2^3 prefactor from the clause products")
    p_solve.add_argument("--no-clamp-v", action="store_true",
                         help="remove the voltage bounds of the memcomputing solver")
    p_solve.add_argument("--name", default="run", help="basename for saved record")
    _add_integrator_flags(p_solve)
    _add_mem_param_flags(p_solve)

    p_net = sub.add_parser("netlist", help="emit a SPICE netlist for a CNF file")
    p_net.add_argument("--in", dest="infile", required=True)
    p_net.add_argument("--solver", choices=(ANALOG, MEM), default=MEM)
    p_net.add_argument("--out", required=True, help="output netlist path (.cir/.net)")
    p_net.add_argument("--aux-mode", choices=AUX_MODES, default="aK2")
    p_net.add_argument("--no-one-eighth", action="store_true")
    p_net.add_argument("--no-clamp-v", action="store_true")
    p_net.add_argument("--shunt", type=float, default=1e9,
                       help="shunt resistance in ohms (default 1e9)")
    p_net.add_argument("--random-ic", action="store_true",
                       help="emit simulator-side random initial conditions "
                            "({flat(1)}) instead of explicit seeded values")
    p_net.add_argument("--subckt", default=None, help="wrap the deck as .subckt NAME")
    p_net.add_argument("--inputs", default="", help="comma list of input variables (1-based)")
    p_net.add_argument("--outputs", default="", help="comma list of output variables")
    p_net.add_argument("--no-contrd-pin", action="store_true")
    p_net.add_argument("--t-ev", type=float, default=300.0)
    _add_mem_param_flags(p_net)

    p_oracle = sub.add_parser("oracle", help="decide satisfiability exactly")
    p_oracle.add_argument("--in", dest="infile", required=True)
    p_oracle.add_argument("--method", choices=("dpll", "exhaustive"), default="dpll")

    p_network = sub.add_parser("network", help="simulate a solver network")
    p_network.add_argument("--config", "--network-config", dest="network_config",
                           required=True, help="JSON network description")

    p_bench = sub.add_parser("bench", help="run a benchmark grid and summarize")
    p_bench.add_argument("--families", default="B4.3,B7,X")
    p_bench.add_argument("--sizes", default="10,20,30,40,50")
    p_bench.add_argument("--instances", type=int, default=10)
    p_bench.add_argument("--solvers", default="analog,mem")
    p_bench.add_argument("--workers", type=int, default=1)
    _add_integrator_flags(p_bench)

    p_plot = sub.add_parser("plotdata", help="tidy CSV from a saved run")
    p_plot.add_argument("--run", required=True, help="run JSON path")
    p_plot.add_argument("--select", required=True,
                        help="comma list: contra, contrd, s:*, a:3, v:1, xs:*, xl:2")
    p_plot.add_argument("--out", default=None, help="output CSV (default stdout)")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out_dir)

    if args.command == "gen":
        if args.family == "barthel":
            params = BarthelParams(num_vars=args.n, ratio=args.ratio,
                                   p0=args.p0, seed=args.seed)
            inst = gen_barthel(params)
            family = f"B{args.ratio:g}"
        else:
            inst = gen_xorsat_3r(args.n, args.seed)
            family = "X"
        out = Path(args.out)
        save_instance(inst, out.parent, out.stem, family=family, seed=args.seed)
        print(f"wrote {out} (N={inst.problem.num_vars}, M={inst.problem.num_clauses})")
        return 0

    if args.command == "solve":
        problem = parse_dimacs(Path(args.infile).read_text())
        config = _integrator_config(args)
        record = run(
            problem, args.solver, seed=args.seed, config=config,
            analog_options=_analog_options(args),
            mem_options=MemOptions(clamp_v=not args.no_clamp_v),
            mem_params=_mem_params(args),
        )
        record.instance = args.infile
        save_run(record, out_dir, args.name)
        t = record.t_solve if record.t_solve is not None else record.t_detect
        print(f"{record.outcome}" + (f" at t={t:g}" if t is not None else ""))
        if record.assignment is not None:
            print(assignment_to_bits(record.assignment))
        return 0

    if args.command == "netlist":
        problem = parse_dimacs(Path(args.infile).read_text())
        subckt = None
        if args.subckt:
            def _ints(text):
                return tuple(int(x) for x in text.split(",") if x.strip())
            subckt = SubcircuitSpec(
                name=args.subckt,
                inputs=_ints(args.inputs),
                outputs=_ints(args.outputs),
                expose_contrd=not args.no_contrd_pin,
            )
        options = NetlistOptions(
            t_ev=args.t_ev,
            shunt_resistance=args.shunt,
            analog=_analog_options(args),
            mem_options=MemOptions(clamp_v=not args.no_clamp_v),
            mem_params=_mem_params(args),
            ic_seed=None if args.random_ic else args.seed,
            subcircuit=subckt,
        )
        if subckt is not None:
            doc = emit_subcircuit(problem, options, solver=args.solver)
        elif args.solver == ANALOG:
            doc = emit_analog(problem, options)
        else:
            doc = emit_mem(problem, options)
        Path(args.out).write_text(serialize(doc))
        print(f"wrote {args.out} ({len(doc.elements)} cards)")
        return 0

    if args.command == "oracle":
        problem = parse_dimacs(Path(args.infile).read_text())
        solver = solve_dpll if args.method == "dpll" else solve_exhaustive
        result = solver(problem)
        if result.satisfiable:
            print("SATISFIABLE")
            print(assignment_to_bits(result.witness))
        else:
            print("UNSATISFIABLE")
        return 0 if result.satisfiable else 1

    if args.command == "network":
        nodes, wiring, config, seeds, stop_on_solve = load_network_config(args.network_config)
        records = simulate_network(nodes, wiring, config, seeds,
                                   stop_on_solve=stop_on_solve)
        out_dir.mkdir(parents=True, exist_ok=True)
        for i, record in enumerate(records):
            save_run(record, out_dir, f"node{i}")
            t = f" t_solve={record.t_solve:g}" if record.t_solve is not None else ""
            print(f"node {i}: {record.outcome}{t}")
        return 0

    if args.command == "bench":
        plan = ExperimentPlan(
            families=tuple(args.families.split(",")),
            sizes=tuple(int(s) for s in args.sizes.split(",")),
            instances_per_cell=args.instances,
            solvers=tuple(SolverSpec(kind) for kind in args.solvers.split(",")),
            config=_integrator_config(args),
            seed_base=args.seed,
            workers=args.workers,
        )
        table, _records = run_experiment(plan, out_dir)
        print(table.to_markdown())
        return 0

    if args.command == "plotdata":
        payload = load_run(Path(args.run))
        csv_text = emit_plot_data(payload, args.select)
        if args.out:
            Path(args.out).write_text(csv_text)
            print(f"wrote {args.out}")
        else:
            sys.stdout.write(csv_text)
        return 0

    raise SystemExit(f"unhandled command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())
