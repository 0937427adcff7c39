"""Generate the three planted benchmark families and inspect them.

Creates one instance of each family, verifies the plant, and writes the
DIMACS files (plus plant sidecars) under ./demo-out/instances.
"""

import numpy as np

from ctsat import count_unsatisfied
from ctsat.harness import save_instance
from ctsat.instances import BarthelParams, gen_barthel, gen_xorsat_3r

OUT = "demo-out/instances"

easy = gen_barthel(BarthelParams(num_vars=40, ratio=7.0, p0=0.08, seed=1))
difficult = gen_barthel(BarthelParams(num_vars=40, ratio=4.3, p0=0.08, seed=1))
very_difficult = gen_xorsat_3r(20, seed=1)

for name, family, inst in (
    ("easy_b7", "B7", easy),
    ("difficult_b43", "B4.3", difficult),
    ("xorsat_3r", "X", very_difficult),
):
    problem = inst.problem
    assert count_unsatisfied(problem, inst.plant) == 0
    path = save_instance(inst, OUT, name, family=family, seed=1)
    print(f"{name}: N={problem.num_vars} M={problem.num_clauses} -> {path}")

# the 3-regular structure: every variable sits in exactly 3 equations,
# hence 12 clauses
counts = np.bincount(very_difficult.problem.var_index.ravel(), minlength=20)
print("clause occurrences per variable (3R3X):", sorted(set(counts.tolist())))
