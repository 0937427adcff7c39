"""3-SAT problems in DIMACS CNF form: parse, validate, evaluate, serialize.

Every clause has exactly three literals over three distinct variables.
Variable indices are 0-based inside the library; the 1-based DIMACS
convention exists only at the parse/write boundary (and in file formats,
SPICE node names and CLI arguments derived from them).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DimacsError",
    "Literal",
    "Clause",
    "Problem",
    "Assignment",
    "assignment_from_bits",
    "assignment_to_bits",
    "parse_dimacs",
    "write_dimacs",
    "count_unsatisfied",
]

# An assignment is a boolean vector of length Problem.num_vars.
Assignment = np.ndarray


class DimacsError(ValueError):
    """Raised for malformed DIMACS input."""


@dataclass(frozen=True)
class Literal:
    """One variable occurrence: 0-based variable index plus +1/-1 polarity."""

    index: int
    sign: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"variable index must be >= 0, got {self.index}")
        if self.sign not in (1, -1):
            raise ValueError(f"literal sign must be +1 or -1, got {self.sign}")

    @classmethod
    def from_dimacs(cls, code: int) -> "Literal":
        if code == 0:
            raise DimacsError("0 is a clause terminator, not a literal")
        return cls(abs(code) - 1, 1 if code > 0 else -1)

    def to_dimacs(self) -> int:
        return self.sign * (self.index + 1)


@dataclass(frozen=True)
class Clause:
    """Disjunction of exactly three literals over distinct variables."""

    literals: tuple[Literal, Literal, Literal]

    def __post_init__(self):
        if len(self.literals) != 3:
            raise ValueError(f"clause must have exactly 3 literals, got {len(self.literals)}")
        indices = [lit.index for lit in self.literals]
        if len(set(indices)) != 3:
            raise ValueError(f"clause variables must be distinct, got {indices}")

    @classmethod
    def from_dimacs(cls, codes: Sequence[int]) -> "Clause":
        return cls(tuple(Literal.from_dimacs(c) for c in codes))

    def to_dimacs(self) -> tuple[int, int, int]:
        return tuple(lit.to_dimacs() for lit in self.literals)


@dataclass(frozen=True)
class Problem:
    """A 3-SAT instance: N variables and an ordered list of M clauses.

    Clause order is part of the identity of the instance; it defines the
    clause index m used by the dynamics, netlists and trajectory records.
    Instances are immutable and safe to share between concurrent runs.
    """

    num_vars: int
    clauses: tuple[Clause, ...]

    # Derived dense (M, 3) arrays used by the dynamics: var_index holds
    # 0-based variable indices, sign holds +-1 as float64.
    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("num_vars must be >= 1")
        clauses = tuple(self.clauses)
        if not clauses:
            raise ValueError("a problem needs at least one clause")
        object.__setattr__(self, "clauses", clauses)
        for clause in clauses:
            for lit in clause.literals:
                if lit.index >= self.num_vars:
                    raise ValueError(
                        f"variable {lit.index + 1} out of range (num_vars={self.num_vars})"
                    )
        var_index = np.array(
            [[lit.index for lit in c.literals] for c in clauses], dtype=np.int64
        )
        sign = np.array(
            [[lit.sign for lit in c.literals] for c in clauses], dtype=np.float64
        )
        var_index.setflags(write=False)
        sign.setflags(write=False)
        object.__setattr__(self, "var_index", var_index)
        object.__setattr__(self, "sign", sign)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @classmethod
    def from_dimacs_clauses(cls, num_vars: int, clauses: Iterable[Sequence[int]]) -> "Problem":
        """Build from clauses given as triples of signed 1-based integers."""
        return cls(num_vars, tuple(Clause.from_dimacs(c) for c in clauses))


def assignment_from_bits(bits: str) -> Assignment:
    """Decode a '0101...' string (x1 leftmost) into a boolean vector."""
    if not bits or any(b not in "01" for b in bits):
        raise ValueError(f"not a bit string: {bits!r}")
    return np.array([b == "1" for b in bits], dtype=bool)


def assignment_to_bits(assignment: Assignment) -> str:
    return "".join("1" if v else "0" for v in np.asarray(assignment, dtype=bool))


def parse_dimacs(text) -> Problem:
    """Parse DIMACS CNF text into a Problem.

    Accepts a string or a file-like object. The format is strict: optional
    'c' comment lines, a single 'p cnf N M' header, then M clause lines of
    exactly three distinct literals terminated by 0. Legacy SATLIB '%' / '0'
    trailer lines after the clauses are tolerated and ignored.
    """
    if hasattr(text, "read"):
        text = text.read()

    num_vars = None
    declared_clauses = None
    clauses: list[Clause] = []
    in_trailer = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line == "%":
            in_trailer = True
            continue
        if in_trailer:
            if line == "0":
                continue
            raise DimacsError(f"line {lineno}: unexpected content after '%' trailer: {line!r}")
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError(f"line {lineno}: duplicate problem header")
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header: {line!r}")
            try:
                num_vars = int(parts[2])
                declared_clauses = int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header: {line!r}") from None
            if num_vars < 1 or declared_clauses < 1:
                raise DimacsError(f"line {lineno}: header declares empty problem: {line!r}")
            continue
        if num_vars is None:
            raise DimacsError(f"line {lineno}: clause before 'p cnf' header")
        if len(clauses) == declared_clauses and line == "0":
            # some writers emit a lone trailing 0
            continue
        try:
            codes = [int(tok) for tok in line.split()]
        except ValueError:
            raise DimacsError(f"line {lineno}: non-integer token in clause: {line!r}") from None
        if not codes or codes[-1] != 0:
            raise DimacsError(f"line {lineno}: clause line must end with 0: {line!r}")
        codes = codes[:-1]
        if 0 in codes:
            raise DimacsError(f"line {lineno}: literal 0 inside clause: {line!r}")
        if len(codes) != 3:
            raise DimacsError(
                f"line {lineno}: clause has {len(codes)} literals, exactly 3 required"
            )
        if len({abs(c) for c in codes}) != 3:
            raise DimacsError(f"line {lineno}: repeated variable within clause: {line!r}")
        for c in codes:
            if abs(c) > num_vars:
                raise DimacsError(
                    f"line {lineno}: variable {abs(c)} out of range (header N={num_vars})"
                )
        clauses.append(Clause.from_dimacs(codes))

    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if len(clauses) != declared_clauses:
        raise DimacsError(
            f"header declares {declared_clauses} clauses, file has {len(clauses)}"
        )
    return Problem(num_vars, tuple(clauses))


def write_dimacs(problem: Problem, comments: Sequence[str] = ()) -> str:
    """Serialize a Problem to canonical DIMACS text (newline line endings)."""
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {problem.num_vars} {problem.num_clauses}")
    for clause in problem.clauses:
        lines.append(" ".join(str(code) for code in clause.to_dimacs()) + " 0")
    return "\n".join(lines) + "\n"


def count_unsatisfied(problem: Problem, assignment: Assignment) -> int:
    """Number of clauses with no satisfied literal; 0 iff the formula holds."""
    assignment = np.asarray(assignment, dtype=bool)
    if assignment.shape != (problem.num_vars,):
        raise ValueError(
            f"assignment length {assignment.shape} does not match N={problem.num_vars}"
        )
    want_true = problem.sign > 0  # literal satisfied when value matches polarity
    lit_sat = assignment[problem.var_index] == want_true
    return int(problem.num_clauses - np.count_nonzero(lit_sat.any(axis=1)))
