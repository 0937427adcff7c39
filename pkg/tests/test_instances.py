import itertools

import numpy as np
import pytest

from ctsat.cnf import count_unsatisfied, write_dimacs
from ctsat.instances import (
    BarthelParams,
    XorEquation,
    barthel_type_weights,
    gen_barthel,
    gen_xorsat_3r,
    xor_to_cnf,
)
from ctsat.oracle import solve_dpll


def clause_satisfies(clause, assignment):
    return any(
        (lit.sign > 0) == bool(assignment[lit.index]) for lit in clause.literals
    )


# ---------------------------------------------------------------------- barthel

def test_barthel_easy_shape():
    inst = gen_barthel(BarthelParams(num_vars=10, ratio=7.0, p0=0.08, seed=0))
    assert inst.problem.num_clauses == 70
    assert count_unsatisfied(inst.problem, inst.plant) == 0


def test_barthel_difficult_shape():
    inst = gen_barthel(BarthelParams(num_vars=40, ratio=4.3, p0=0.08, seed=0))
    assert inst.problem.num_clauses == 172
    assert count_unsatisfied(inst.problem, inst.plant) == 0


def test_barthel_rejects_bad_params():
    with pytest.raises(ValueError):
        BarthelParams(num_vars=2, ratio=7.0)
    with pytest.raises(ValueError):
        BarthelParams(num_vars=10, ratio=-1.0)
    with pytest.raises(ValueError):
        BarthelParams(num_vars=10, ratio=7.0, p0=0.3)


def test_barthel_weights_constraints():
    p0, p1, p2 = barthel_type_weights(0.08)
    assert p0 + 3 * p1 + 3 * p2 == pytest.approx(1.0, abs=1e-15)   # normalization
    assert p2 == pytest.approx(p0 + p1, abs=1e-15)                  # sign balance
    assert p1 == pytest.approx(0.68 / 6)
    assert p2 == pytest.approx(1.16 / 6)


def test_barthel_determinism():
    a = gen_barthel(BarthelParams(num_vars=20, ratio=4.3, seed=99))
    b = gen_barthel(BarthelParams(num_vars=20, ratio=4.3, seed=99))
    assert write_dimacs(a.problem) == write_dimacs(b.problem)
    assert np.array_equal(a.plant, b.plant)
    c = gen_barthel(BarthelParams(num_vars=20, ratio=4.3, seed=100))
    assert write_dimacs(c.problem) != write_dimacs(a.problem)


def test_barthel_type_frequencies_within_three_sigma():
    # 1e5 clauses at p0 = 0.08: per-type counts against the configured
    # weights, three-sigma multinomial bounds
    m_target = 100_000
    params = BarthelParams(num_vars=30, ratio=m_target / 30, p0=0.08, seed=123)
    inst = gen_barthel(params)
    problem, plant = inst.problem, inst.plant
    sat = plant[problem.var_index] == (problem.sign > 0)
    types = sat.sum(axis=1)
    assert (types == 0).sum() == 0  # the fully violated pattern never appears
    p0, p1, p2 = barthel_type_weights(0.08)
    m = problem.num_clauses
    for t_count, prob in ((3, p0), (2, 3 * p1), (1, 3 * p2)):
        observed = int((types == t_count).sum())
        expected = m * prob
        sigma = np.sqrt(m * prob * (1 - prob))
        assert abs(observed - expected) <= 3 * sigma, (t_count, observed, expected)


def test_barthel_per_pattern_frequencies():
    # finer check: each of the 7 allowed sign-pattern classes individually
    params = BarthelParams(num_vars=25, ratio=4000, p0=0.08, seed=321)
    inst = gen_barthel(params)
    problem, plant = inst.problem, inst.plant
    sat = plant[problem.var_index] == (problem.sign > 0)
    masks = sat @ np.array([1, 2, 4])
    p0, p1, p2 = barthel_type_weights(0.08)
    m = problem.num_clauses
    weight_by_popcount = {3: p0, 2: p1, 1: p2}
    for mask in range(1, 8):
        prob = weight_by_popcount[bin(mask).count("1")]
        observed = int((masks == mask).sum())
        sigma = np.sqrt(m * prob * (1 - prob))
        assert abs(observed - m * prob) <= 3 * sigma


# ----------------------------------------------------------------------- xorsat

def test_xorsat_shape_n10():
    inst = gen_xorsat_3r(10, seed=1)
    assert len(inst.equations) == 10
    assert inst.problem.num_clauses == 40
    counts = np.bincount(inst.problem.var_index.ravel(), minlength=10)
    assert (counts == 12).all()  # 3 equations x 4 clauses each
    eq_counts = np.zeros(10, dtype=int)
    for eq in inst.equations:
        for var in eq.variable_indices:
            eq_counts[var] += 1
    assert (eq_counts == 3).all()


def test_xorsat_n20_plant_satisfies():
    inst = gen_xorsat_3r(20, seed=2)
    assert inst.problem.num_clauses == 80
    assert count_unsatisfied(inst.problem, inst.plant) == 0


def test_xorsat_equations_hold_at_plant():
    inst = gen_xorsat_3r(14, seed=3)
    for eq in inst.equations:
        assert eq.holds(inst.plant)


def test_xorsat_determinism_and_seed_sensitivity():
    a = gen_xorsat_3r(12, seed=7)
    b = gen_xorsat_3r(12, seed=7)
    assert write_dimacs(a.problem) == write_dimacs(b.problem)
    c = gen_xorsat_3r(12, seed=8)
    assert write_dimacs(c.problem) != write_dimacs(a.problem)


def test_xorsat_rejects_small_n():
    with pytest.raises(ValueError):
        gen_xorsat_3r(3, seed=0)


def test_xorsat_satisfiable_by_oracle():
    inst = gen_xorsat_3r(16, seed=11)
    assert solve_dpll(inst.problem).satisfiable


# ------------------------------------------------------------------- xor_to_cnf

def xor_satisfied(eq, values):
    total = False
    for value, neg in zip(values, eq.negation_mask):
        total ^= value ^ neg
    return total == eq.rhs


def test_xor_to_cnf_true_rhs_matches_enumeration():
    eq = XorEquation((0, 1, 2), (False, False, False), True)
    clauses = xor_to_cnf(eq)
    got = {tuple(sorted(c.to_dimacs())) for c in clauses}
    expected = {
        tuple(sorted(c))
        for c in [(1, 2, 3), (1, -2, -3), (-1, 2, -3), (-1, -2, 3)]
    }
    assert got == expected


def test_xor_to_cnf_false_rhs_is_complement():
    eq = XorEquation((0, 1, 2), (False, False, False), False)
    got = {tuple(sorted(c.to_dimacs())) for c in xor_to_cnf(eq)}
    expected = {
        tuple(sorted(c))
        for c in [(-1, -2, -3), (-1, 2, 3), (1, -2, 3), (1, 2, -3)]
    }
    assert got == expected


@pytest.mark.parametrize("negations", list(itertools.product((False, True), repeat=3)))
@pytest.mark.parametrize("rhs", (False, True))
def test_xor_to_cnf_exhaustive_equivalence(negations, rhs):
    # for all 8 assignments: clause-set satisfaction <=> XOR satisfaction
    eq = XorEquation((0, 1, 2), negations, rhs)
    clauses = xor_to_cnf(eq)
    assert len(clauses) == 4
    for values in itertools.product((False, True), repeat=3):
        assignment = np.array(values)
        cnf_ok = all(clause_satisfies(c, assignment) for c in clauses)
        assert cnf_ok == xor_satisfied(eq, values)
