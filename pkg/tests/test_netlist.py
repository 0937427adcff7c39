import numpy as np
import pytest

from ctsat.cnf import Problem
from ctsat.dynamics import (
    AnalogOptions,
    AnalogState,
    MemOptions,
    MemParams,
    MemState,
    analog_rhs,
    control_signals,
    mem_rhs,
)
from ctsat.instances import BarthelParams, gen_barthel
from ctsat.integrate import init_analog, init_mem
from ctsat.netlist import (
    LINE_WIDTH,
    NetlistOptions,
    SubcircuitSpec,
    card_histogram,
    compose_ring_deck,
    emit_analog,
    emit_mem,
    emit_subcircuit,
    evaluate_deck_rhs,
    serialize,
    undeclared_references,
)
from ctsat import spice_expr

TINY = Problem.from_dimacs_clauses(3, [(1, -2, 3)])


def sample_problem(seed=11, n=8):
    return gen_barthel(BarthelParams(num_vars=n, ratio=4.3, seed=seed)).problem


def analog_voltages(problem, s, a):
    volts = {f"s{i + 1}": s[i] for i in range(problem.num_vars)}
    volts |= {f"a{j + 1}": a[j] for j in range(problem.num_clauses)}
    return volts | {"contra": 0.0, "contrd": 0.0}


def mem_voltages(problem, v, x_s, x_l):
    volts = {f"v{i + 1}": v[i] for i in range(problem.num_vars)}
    volts |= {f"xs{j + 1}": x_s[j] for j in range(problem.num_clauses)}
    volts |= {f"xl{j + 1}": x_l[j] for j in range(problem.num_clauses)}
    return volts | {"contra": 0.0, "contrd": 0.0}


# ------------------------------------------------------------------- structure

def test_analog_capacitor_count():
    doc = emit_analog(TINY)
    hist = card_histogram(doc)
    assert hist["C"] == 3 + 1          # N + M
    assert hist["R"] == 3 + 1          # every capacitor shunted
    assert hist["B"] == 3 + 1 + 2      # one per state variable + contra/contrd


def test_mem_capacitor_count():
    doc = emit_mem(TINY)
    hist = card_histogram(doc)
    assert hist["C"] == 3 + 2 * 1      # N + 2M
    assert hist["R"] == 3 + 2 * 1
    assert hist["B"] == 3 + 2 * 1 + 2


def test_counts_scale_with_problem():
    problem = sample_problem()
    n, m = problem.num_vars, problem.num_clauses
    assert card_histogram(emit_analog(problem))["C"] == n + m
    assert card_histogram(emit_mem(problem))["C"] == n + 2 * m


def test_factor_flag_strips_prefactor():
    on = serialize(emit_analog(TINY, NetlistOptions(analog=AnalogOptions())))
    off = serialize(
        emit_analog(TINY, NetlistOptions(analog=AnalogOptions(one_eighth_factor=False)))
    )
    assert "0.125" in on
    assert "0.125" not in off


def test_clamp_flag_changes_only_v_source_cards():
    problem = sample_problem()
    with_clamp = emit_mem(problem, NetlistOptions(mem_options=MemOptions(clamp_v=True)))
    without = emit_mem(problem, NetlistOptions(mem_options=MemOptions(clamp_v=False)))
    assert with_clamp.functions == without.functions
    diff = [
        (a, b) for a, b in zip(with_clamp.elements, without.elements) if a != b
    ]
    assert diff
    for a, b in diff:
        assert a.name.startswith("Bv") and b.name.startswith("Bv")
        assert b.value == f"I=fv{b.name[2:]}()"


def test_unclamped_v_sources_are_bare_functions():
    doc = emit_mem(TINY, NetlistOptions(mem_options=MemOptions(clamp_v=False)))
    for card in doc.elements:
        if card.name.startswith("Bv"):
            assert card.value == f"I=fv{card.name[2:]}()"


def test_serialization_deterministic():
    problem = sample_problem()
    options = NetlistOptions()
    assert serialize(emit_analog(problem, options)) == serialize(emit_analog(problem, options))
    assert serialize(emit_mem(problem, options)) == serialize(emit_mem(problem, options))


def test_line_width_and_continuations():
    problem = sample_problem(n=12)
    text = serialize(emit_mem(problem))
    for line in text.splitlines():
        assert len(line) <= LINE_WIDTH
    assert any(line.startswith("+ ") for line in text.splitlines())


def test_deck_is_ascii_and_ends_with_end():
    text = serialize(emit_analog(sample_problem()))
    text.encode("ascii")
    assert text.rstrip().endswith(".end")


def test_closed_name_check():
    assert undeclared_references(emit_analog(sample_problem())) == []
    assert undeclared_references(emit_mem(sample_problem())) == []


def test_ic_cards_match_seeded_initial_conditions():
    problem = sample_problem()
    seed = 77
    doc = emit_analog(problem, NetlistOptions(ic_seed=seed))
    state = init_analog(problem, seed)
    ics = {d.split("=")[0]: d.split("=")[1] for d in doc.directives if d.startswith(".ic")}
    for i in range(problem.num_vars):
        assert float(ics[f".ic V(s{i + 1})"]) == state.s[i]
    for j in range(problem.num_clauses):
        assert float(ics[f".ic V(a{j + 1})"]) == 1.0
    mem_doc = emit_mem(problem, NetlistOptions(ic_seed=seed))
    mem_state = init_mem(problem, seed)
    mem_ics = {d.split("=")[0]: d.split("=")[1] for d in mem_doc.directives if d.startswith(".ic")}
    for i in range(problem.num_vars):
        assert float(mem_ics[f".ic V(v{i + 1})"]) == mem_state.v[i]


def test_random_ic_mode_uses_simulator_random():
    doc = emit_analog(TINY, NetlistOptions(ic_seed=None))
    ic_s = [d for d in doc.directives if d.startswith(".ic V(s")]
    assert all(d.endswith("={flat(1)}") for d in ic_s)
    # weights still start at 1 exactly
    assert ".ic V(a1)=1" in doc.directives


def test_tran_directive_uses_uic():
    doc = emit_mem(TINY, NetlistOptions(t_ev=120.0))
    tran = [d for d in doc.directives if d.startswith(".tran")]
    assert tran == [".tran 0 120.0 0 uic"]


# ------------------------------------------------------------ engine consistency

@pytest.mark.parametrize("options", [
    AnalogOptions(),
    AnalogOptions(one_eighth_factor=False),
    AnalogOptions(aux_mode="aK"),
    AnalogOptions(aux_mode="K"),
    AnalogOptions(aux_mode="K2"),
])
def test_analog_deck_matches_engine(options):
    problem = sample_problem()
    n, m = problem.num_vars, problem.num_clauses
    doc = emit_analog(problem, NetlistOptions(analog=options))
    rng = np.random.default_rng(5)
    for trial in range(10):
        s = rng.uniform(-1, 1, n)
        a = rng.uniform(0.5, 4.0, m)
        got = evaluate_deck_rhs(doc, analog_voltages(problem, s, a))
        ds, da = analog_rhs(problem, AnalogState(s, a), options)
        for i in range(n):
            assert got[f"s{i + 1}"] == pytest.approx(ds[i], rel=1e-9, abs=1e-9)
        for j in range(m):
            assert got[f"a{j + 1}"] == pytest.approx(da[j], rel=1e-9, abs=1e-9)
        contra, contrd = control_signals(problem, s)
        assert got["contra"] == pytest.approx(contra, rel=1e-9, abs=1e-9)
        assert got["contrd"] == contrd


@pytest.mark.parametrize("mem_options", [MemOptions(), MemOptions(clamp_v=False)])
def test_mem_deck_matches_engine(mem_options):
    problem = sample_problem()
    n, m = problem.num_vars, problem.num_clauses
    params = MemParams()
    doc = emit_mem(problem, NetlistOptions(mem_options=mem_options, mem_params=params))
    rng = np.random.default_rng(6)
    for trial in range(10):
        v = rng.uniform(-1, 1, n)
        x_s = rng.uniform(0, 1, m)
        x_l = rng.uniform(1, 20, m)
        got = evaluate_deck_rhs(doc, mem_voltages(problem, v, x_s, x_l))
        dv, dx_s, dx_l = mem_rhs(problem, MemState(v, x_s, x_l), params, mem_options)
        for i in range(n):
            assert got[f"v{i + 1}"] == pytest.approx(dv[i], rel=1e-9, abs=1e-9)
        for j in range(m):
            assert got[f"xs{j + 1}"] == pytest.approx(dx_s[j], rel=1e-9, abs=1e-9)
            assert got[f"xl{j + 1}"] == pytest.approx(dx_l[j], rel=1e-9, abs=1e-9)


def test_deck_matches_engine_on_boundaries():
    problem = sample_problem()
    n, m = problem.num_vars, problem.num_clauses
    doc = emit_mem(problem, NetlistOptions())
    rng = np.random.default_rng(7)
    v = np.sign(rng.standard_normal(n))  # all voltages exactly at poles
    x_s = np.zeros(m)
    x_l = np.ones(m)
    got = evaluate_deck_rhs(doc, mem_voltages(problem, v, x_s, x_l))
    dv, dx_s, dx_l = mem_rhs(problem, MemState(v, x_s, x_l))
    vals = np.array([got[f"v{i + 1}"] for i in range(n)]
                    + [got[f"xs{j + 1}"] for j in range(m)]
                    + [got[f"xl{j + 1}"] for j in range(m)])
    ref = np.concatenate([dv, dx_s, dx_l])
    assert np.max(np.abs(vals - ref)) <= 1e-9


def test_non_eighth_mem_params_round_trip():
    params = MemParams(alpha=0.0, beta=12.5, gamma=0.3, delta=0.01, epsilon=0.002, zeta=0.05)
    problem = TINY
    doc = emit_mem(problem, NetlistOptions(mem_params=params))
    rng = np.random.default_rng(8)
    v = rng.uniform(-1, 1, 3)
    got = evaluate_deck_rhs(doc, mem_voltages(problem, v, np.array([0.4]), np.array([2.0])))
    dv, dx_s, dx_l = mem_rhs(problem, MemState(v, np.array([0.4]), np.array([2.0])), params)
    assert got["xs1"] == pytest.approx(dx_s[0], rel=1e-12, abs=1e-12)
    assert got["xl1"] == pytest.approx(dx_l[0], rel=1e-12, abs=1e-12)
    assert got["v1"] == pytest.approx(dv[0], rel=1e-12, abs=1e-12)


# ------------------------------------------------------------------ subcircuits

def test_subcircuit_pins_and_omitted_cells():
    problem = sample_problem()
    spec = SubcircuitSpec(name="solva", inputs=(1,), outputs=(2,), expose_contrd=True)
    doc = emit_subcircuit(problem, NetlistOptions(subcircuit=spec))
    name, pins = doc.subckt
    assert name == "solva"
    assert pins == ("v1", "v2", "contrd")
    names = {card.name for card in doc.elements}
    assert "Cv1" not in names and "Bv1" not in names and "Rv1" not in names
    assert "Cv2" in names and "Bv2" in names
    assert undeclared_references(doc) == []
    text = serialize(doc)
    assert text.splitlines()[1].startswith(".subckt solva v1 v2 contrd")
    assert text.rstrip().endswith(".ends solva")
    assert ".tran" not in text and ".ic" not in text


def test_subcircuit_without_inputs_equals_plain_deck_cells():
    problem = TINY
    spec = SubcircuitSpec(name="plain", inputs=(), outputs=(1,), expose_contrd=False)
    sub = emit_subcircuit(problem, NetlistOptions(subcircuit=spec))
    full = emit_mem(problem, NetlistOptions())
    strip = lambda text: text.replace("plain_", "")
    assert [strip(c.value) for c in sub.elements] == [c.value for c in full.elements]
    assert [c.name for c in sub.elements] == [c.name for c in full.elements]
    assert [(f.name.replace("plain_", ""), strip(f.body)) for f in sub.functions] == [
        (f.name, f.body) for f in full.functions
    ]


def test_subcircuit_rejects_overlap_and_range():
    with pytest.raises(ValueError):
        SubcircuitSpec(name="x", inputs=(1,), outputs=(1,))
    with pytest.raises(ValueError):
        SubcircuitSpec(name="x", inputs=(1, 1), outputs=(2,))
    problem = TINY
    spec = SubcircuitSpec(name="x", inputs=(1,), outputs=(9,))
    with pytest.raises(ValueError):
        emit_subcircuit(problem, NetlistOptions(subcircuit=spec))


def test_subcircuit_analog_variant():
    problem = TINY
    spec = SubcircuitSpec(name="asat", inputs=(1,), outputs=(3,))
    doc = emit_subcircuit(problem, NetlistOptions(subcircuit=spec), solver="analog")
    assert doc.subckt[1] == ("s1", "s3", "contrd")
    assert "Cs1" not in {c.name for c in doc.elements}


def test_ring_deck_instantiates_twice_with_cross_wiring():
    problem = sample_problem(n=6)
    make = lambda name: emit_subcircuit(
        problem,
        NetlistOptions(subcircuit=SubcircuitSpec(name=name, inputs=(1,), outputs=(2,))),
    )
    text = compose_ring_deck(make("solva"), make("solvb"), t_ev=300.0)
    lines = text.splitlines()
    assert "XA net_ba net_ab contrda solva" in lines
    assert "XB net_ab net_ba contrdb solvb" in lines
    assert sum(1 for line in lines if line.startswith(".subckt")) == 2
    assert lines[-1] == ".end"


# -------------------------------------------------------------- expression parser

def test_expression_parser_basics():
    ast = spice_expr.parse_expression("1+2*3")
    assert spice_expr.evaluate(ast, {}) == 7.0
    ast = spice_expr.parse_expression("if(2>1,min(3,4),9)")
    assert spice_expr.evaluate(ast, {}) == 3.0
    ast = spice_expr.parse_expression("u(0)*5 + u(-1)*7")
    assert spice_expr.evaluate(ast, {}) == 5.0  # u(0) = 1, u(-1) = 0
    ast = spice_expr.parse_expression("V(a)*(1-V(b))")
    assert spice_expr.evaluate(ast, {"a": 2.0, "b": 0.5}) == 1.0


def test_expression_parser_user_functions_and_errors():
    ast = spice_expr.parse_expression("f()+1")
    assert spice_expr.evaluate(ast, {}, {"f": "2*2"}) == 5.0
    with pytest.raises(spice_expr.ExprError):
        spice_expr.evaluate(spice_expr.parse_expression("g()"), {}, {})
    with pytest.raises(spice_expr.ExprError):
        spice_expr.parse_expression("1 +")
    with pytest.raises(spice_expr.ExprError):
        spice_expr.evaluate(spice_expr.parse_expression("V(zz)"), {})


def test_expression_reference_walkers():
    ast = spice_expr.parse_expression("f()*V(s1) + if(V(a2)>0, g(), 0)")
    assert spice_expr.referenced_nodes(ast) == {"s1", "a2"}
    assert spice_expr.referenced_functions(ast) == {"f", "if", "g"}
