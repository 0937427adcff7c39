import json

import numpy as np
import pytest

from ctsat.cnf import count_unsatisfied, parse_dimacs, assignment_from_bits
from ctsat.harness import (
    ExperimentPlan,
    SolverSpec,
    SummaryTable,
    derive_seed,
    emit_plot_data,
    generate_instance,
    run_experiment,
    save_instance,
    verify_run_dir,
)
from ctsat.integrate import MEM, SOLVED, IntegratorConfig, load_run, run


def tiny_plan(**overrides):
    defaults = dict(
        families=("B7",),
        sizes=(10,),
        instances_per_cell=2,
        solvers=(SolverSpec(MEM),),
        config=IntegratorConfig(t_ev=60.0),
        seed_base=42,
    )
    defaults.update(overrides)
    return ExperimentPlan(**defaults)


def test_derive_seed_stable_and_distinct():
    a = derive_seed(0, "run", "B7", 10, 0, "mem")
    b = derive_seed(0, "run", "B7", 10, 0, "mem")
    c = derive_seed(0, "run", "B7", 10, 1, "mem")
    assert a == b
    assert a != c
    assert 0 <= a < 2 ** 63


def test_generate_instance_families():
    b7 = generate_instance("B7", 10, 1)
    assert b7.problem.num_clauses == 70
    b43 = generate_instance("B4.3", 10, 1)
    assert b43.problem.num_clauses == 43
    x = generate_instance("X", 10, 1)
    assert x.problem.num_clauses == 40
    with pytest.raises(ValueError):
        generate_instance("Z", 10, 1)


def test_save_instance_sidecar(tmp_path):
    inst = generate_instance("B7", 10, 7)
    path = save_instance(inst, tmp_path, "demo", family="B7", seed=7)
    assert path.exists()
    sidecar = json.loads((tmp_path / "demo.json").read_text())
    assert sidecar["family"] == "B7"
    assert sidecar["seed"] == 7
    plant = assignment_from_bits(sidecar["plant"])
    problem = parse_dimacs(path.read_text())
    assert count_unsatisfied(problem, plant) == 0


def test_run_experiment_all_solved(tmp_path):
    table, records = run_experiment(tiny_plan(), tmp_path)
    assert len(records) == 2
    cell = table.cells[(10, "mem", "B7")]
    assert cell.runs == 2
    assert cell.unsolved == 0
    assert cell.median_time is not None
    # persistence
    assert (tmp_path / "summary.json").exists()
    assert (tmp_path / "summary.md").exists()
    assert len(list((tmp_path / "instances").glob("*.cnf"))) == 2
    assert len(list((tmp_path / "runs").glob("*.json"))) == 2
    assert verify_run_dir(tmp_path) == 2


def test_run_experiment_reproducible(tmp_path):
    table1, _ = run_experiment(tiny_plan(), tmp_path / "one")
    table2, _ = run_experiment(tiny_plan(), tmp_path / "two")
    assert table1.to_json_dict() == table2.to_json_dict()
    assert (tmp_path / "one" / "summary.md").read_text() == (
        tmp_path / "two" / "summary.md"
    ).read_text()


def test_run_experiment_workers_match_sequential(tmp_path):
    seq_table, seq_records = run_experiment(tiny_plan())
    par_table, par_records = run_experiment(tiny_plan(workers=2))
    assert seq_table.to_json_dict() == par_table.to_json_dict()
    for key in seq_records:
        assert np.array_equal(seq_records[key].states, par_records[key].states)


def test_summary_counts_equal_recount(tmp_path):
    table, records = run_experiment(tiny_plan())
    recount = SummaryTable.from_records(records)
    assert table.to_json_dict() == recount.to_json_dict()


def test_summary_markdown_layout():
    table, _ = run_experiment(tiny_plan())
    text = table.to_markdown()
    assert "| N | solver |" in text
    assert "| 10 | mem |" in text


def test_solved_records_reverify_on_reload(tmp_path):
    run_experiment(tiny_plan(), tmp_path)
    for json_path in (tmp_path / "runs").glob("*.json"):
        payload = load_run(json_path)
        assert payload["outcome"] == SOLVED
        problem = parse_dimacs((tmp_path / payload["instance"]).read_text())
        assert count_unsatisfied(problem, payload["assignment_array"]) == 0


# ---------------------------------------------------------------- emit_plot_data

def test_emit_plot_data_selections():
    inst = generate_instance("B7", 10, 3)
    record = run(inst.problem, MEM, seed=1, config=IntegratorConfig(t_ev=5.0))
    csv_text = emit_plot_data(record, "v:*")
    lines = csv_text.strip().splitlines()
    assert lines[0] == "t,series,value"
    names = {line.split(",")[1] for line in lines[1:]}
    assert names == {f"v{i}" for i in range(1, 11)}

    single = emit_plot_data(record, "contrd")
    assert {line.split(",")[1] for line in single.strip().splitlines()[1:]} == {"contrd"}

    combo = emit_plot_data(record, "contra, xs:2")
    names = {line.split(",")[1] for line in combo.strip().splitlines()[1:]}
    assert names == {"contra", "xs2"}


def test_emit_plot_data_star_does_not_mix_prefixes():
    inst = generate_instance("B7", 10, 3)
    record = run(inst.problem, MEM, seed=1, config=IntegratorConfig(t_ev=2.0))
    xs = emit_plot_data(record, "xs:*")
    names = {line.split(",")[1] for line in xs.strip().splitlines()[1:]}
    assert all(name.startswith("xs") for name in names)
    # 'x' alone matches nothing (columns are xs/xl)
    with pytest.raises(ValueError):
        emit_plot_data(record, "x:*")


def test_emit_plot_data_unknown_selection():
    inst = generate_instance("B7", 10, 3)
    record = run(inst.problem, MEM, seed=1, config=IntegratorConfig(t_ev=2.0))
    with pytest.raises(ValueError):
        emit_plot_data(record, "bogus")
    with pytest.raises(ValueError):
        emit_plot_data(record, "s:999")


def test_emit_plot_data_from_loaded_payload(tmp_path):
    inst = generate_instance("B7", 10, 3)
    record = run(inst.problem, MEM, seed=1, config=IntegratorConfig(t_ev=2.0))
    from ctsat.integrate import save_run

    json_path, _ = save_run(record, tmp_path, "r")
    payload = load_run(json_path)
    direct = emit_plot_data(record, "contrd,v:1")
    loaded = emit_plot_data(payload, "contrd,v:1")
    assert direct == loaded
