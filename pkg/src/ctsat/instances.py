"""Planted 3-SAT benchmark generators.

Three families, all built around a hidden satisfying assignment (the plant):

* easy planted instances (Barthel-style ensemble, clause ratio M/N = 7),
* difficult planted instances (same ensemble at M/N = 4.3),
* 3-regular 3-XORSAT: N parity equations, three variables each, every
  variable in exactly three equations, each equation expanded into the four
  CNF clauses that forbid its violating assignments (M = 4N).

All randomness comes from numpy's PCG64 generator seeded explicitly, so an
identical seed reproduces the instance byte-for-byte on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cnf import Assignment, Clause, Problem, count_unsatisfied

__all__ = [
    "BarthelParams",
    "XorEquation",
    "PlantedInstance",
    "barthel_type_weights",
    "gen_barthel",
    "gen_xorsat_3r",
    "xor_to_cnf",
    "XORSAT_RETRY_BUDGET",
]

XORSAT_RETRY_BUDGET = 10_000


@dataclass(frozen=True)
class BarthelParams:
    """Parameters of the Barthel-style planted ensemble.

    p0 is the probability of drawing the one sign pattern whose three
    literals are all satisfied by the plant; it controls how well the plant
    is hidden. p0 = 0.08 with M/N = 7 gives easy instances, with M/N = 4.3
    difficult ones.
    """

    num_vars: int
    ratio: float
    p0: float = 0.08
    seed: int = 0

    def __post_init__(self):
        if self.num_vars < 3:
            raise ValueError("Barthel generator needs N >= 3")
        if self.ratio <= 0:
            raise ValueError("clause ratio must be positive")
        if not 0.0 <= self.p0 <= 0.25:
            raise ValueError("p0 must lie in [0, 0.25]")
        if self.num_clauses < 1:
            raise ValueError("round(ratio * N) must be >= 1")

    @property
    def num_clauses(self) -> int:
        return int(round(self.ratio * self.num_vars))


@dataclass(frozen=True)
class XorEquation:
    """x_a (+) x_b (+) x_c = rhs over GF(2), with per-variable negations.

    variable_indices are 0-based; a True negation flips that variable before
    it enters the parity sum.
    """

    variable_indices: tuple[int, int, int]
    negation_mask: tuple[bool, bool, bool]
    rhs: bool

    def __post_init__(self):
        if len(set(self.variable_indices)) != 3:
            raise ValueError("XOR equation variables must be distinct")

    def holds(self, assignment: Assignment) -> bool:
        total = False
        for var, neg in zip(self.variable_indices, self.negation_mask):
            total ^= bool(assignment[var]) ^ neg
        return total == self.rhs


@dataclass(frozen=True)
class PlantedInstance:
    problem: Problem
    plant: Assignment
    equations: tuple[XorEquation, ...] = field(default=())

    def __post_init__(self):
        plant = np.asarray(self.plant, dtype=bool)
        plant.setflags(write=False)
        object.__setattr__(self, "plant", plant)
        if count_unsatisfied(self.problem, plant) != 0:
            raise ValueError("plant does not satisfy the generated instance")


def barthel_type_weights(p0: float) -> tuple[float, float, float]:
    """Per-pattern weights (p0, p1, p2) for clause types with 3, 2, 1
    literals satisfied by the plant.  The fully violated type has weight 0.

    The two defining constraints of the ensemble are normalization,
    p0 + 3 p1 + 3 p2 = 1, and the per-literal sign balance p2 = p0 + p1
    (each literal is satisfied by the plant with probability 1/2, which
    hides the plant from majority voting).  Solving them gives
    p1 = (1 - 4 p0) / 6 and p2 = (1 + 2 p0) / 6.
    """
    p1 = (1.0 - 4.0 * p0) / 6.0
    p2 = (1.0 + 2.0 * p0) / 6.0
    return p0, p1, p2


# The 8 sign patterns of a clause are indexed by a 3-bit mask whose bit j is
# set when literal j is satisfied by the plant.  Mask 0 is the forbidden,
# fully violated pattern.
def _pattern_probabilities(p0: float) -> np.ndarray:
    w0, w1, w2 = barthel_type_weights(p0)
    probs = np.empty(8)
    for mask in range(8):
        t = bin(mask).count("1")
        probs[mask] = (0.0, w2, w1, w0)[t]
    return probs


def gen_barthel(params: BarthelParams) -> PlantedInstance:
    """Draw a planted instance from the Barthel-style ensemble.

    A uniformly random plant is fixed first.  Each clause independently
    picks 3 distinct variables uniformly and a sign pattern drawn by the
    type weights of `barthel_type_weights`; the pattern says which literals
    the plant satisfies, so the plant satisfies every clause by
    construction.  Duplicate clauses across the instance are allowed.
    """
    n, m = params.num_vars, params.num_clauses
    rng = np.random.Generator(np.random.PCG64(params.seed))
    plant = rng.random(n) < 0.5

    # 3 distinct variables per clause: first 3 entries of a per-row shuffle
    variables = rng.permuted(np.tile(np.arange(n), (m, 1)), axis=1)[:, :3]
    masks = rng.choice(8, size=m, p=_pattern_probabilities(params.p0))

    satisfied = ((masks[:, None] >> np.arange(3)[None, :]) & 1).astype(bool)
    plant_sign = np.where(plant[variables], 1, -1)
    signs = np.where(satisfied, plant_sign, -plant_sign)

    clauses = tuple(
        Clause.from_dimacs(tuple(signs[i] * (variables[i] + 1)))
        for i in range(m)
    )
    return PlantedInstance(Problem(n, clauses), plant)


def xor_to_cnf(eq: XorEquation) -> tuple[Clause, Clause, Clause, Clause]:
    """Expand one parity equation into the 4 clauses that forbid exactly
    its 4 violating assignments.  An assignment satisfies all 4 clauses iff
    it satisfies the equation.
    """
    clauses = []
    for bits in range(8):
        values = [(bits >> j) & 1 == 1 for j in range(3)]
        parity = False
        for value, neg in zip(values, eq.negation_mask):
            parity ^= value ^ neg
        if parity == eq.rhs:
            continue
        # forbid `values`: each literal is false exactly there
        codes = tuple(
            (-(var + 1)) if value else (var + 1)
            for var, value in zip(eq.variable_indices, values)
        )
        clauses.append(Clause.from_dimacs(codes))
    assert len(clauses) == 4
    return tuple(clauses)


def gen_xorsat_3r(num_vars: int, seed: int = 0) -> PlantedInstance:
    """Generate a 3-regular 3-XORSAT instance with a planted solution.

    The variable-to-equation incidence comes from the configuration model:
    three stubs per variable are matched uniformly into triples, rejecting
    and re-matching whenever a triple repeats a variable.  Negations are
    random and each right-hand side is computed from a random plant, so the
    parity system is consistent.  Expansion gives exactly M = 4N clauses
    and 12 clause occurrences per variable.
    """
    if num_vars < 4:
        raise ValueError("3-regular 3-XORSAT generator needs N >= 4")
    rng = np.random.Generator(np.random.PCG64(seed))

    stubs = np.repeat(np.arange(num_vars), 3)
    for _ in range(XORSAT_RETRY_BUDGET):
        rng.shuffle(stubs)
        triples = stubs.reshape(num_vars, 3)
        distinct = (
            (triples[:, 0] != triples[:, 1])
            & (triples[:, 0] != triples[:, 2])
            & (triples[:, 1] != triples[:, 2])
        )
        if distinct.all():
            break
    else:
        raise RuntimeError(
            f"no valid 3-regular configuration found for N={num_vars} "
            f"after {XORSAT_RETRY_BUDGET} matchings"
        )

    negations = rng.random((num_vars, 3)) < 0.5
    plant = rng.random(num_vars) < 0.5

    equations = []
    clauses: list[Clause] = []
    for row in range(num_vars):
        variables = tuple(int(v) for v in triples[row])
        mask = tuple(bool(b) for b in negations[row])
        rhs = False
        for var, neg in zip(variables, mask):
            rhs ^= bool(plant[var]) ^ neg
        eq = XorEquation(variables, mask, rhs)
        equations.append(eq)
        clauses.extend(xor_to_cnf(eq))

    problem = Problem(num_vars, tuple(clauses))
    return PlantedInstance(problem, plant, tuple(equations))
