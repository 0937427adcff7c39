"""Right-hand sides of the two continuous-time SAT solver dynamical systems.

Analog SAT: continuous spins s in [-1, 1]^N descend the clause-weighted
energy V(s, a) = sum_m a_m K_m(s)^2 while the auxiliary clause weights a_m
grow on unsatisfied clauses:

    ds_i/dt = sum_m 2 a_m c_mi K_mi(s) K_m(s)        (= -dV/ds_i)
    da_m/dt = a_m K_m(s)^2                            (default aux mode)

with K_m(s) = (1/2^3) prod_j (1 - c_mj s_j) over the clause's three
literals and K_mi = K_m with literal i's factor removed.  K_mi is always
computed as the product of the other two factors, never as a division, so
states with s_i exactly at a satisfying pole stay finite.

Digital memcomputing: voltages v in [-1, 1]^N plus per-clause short and
long memories x_s in [0, 1], x_l in [1, 1e4*M]:

    dv_n/dt   = sum_m  x_lm x_sm G_nm + (1 + zeta x_lm)(1 - x_sm) R_nm
    dx_sm/dt  = beta (x_sm + eps) (C_m - gamma)
    dx_lm/dt  = alpha (C_m - delta)

where C_m = (1/2) min over the clause's literals of (1 - q v), the
gradient-like term G_nm = (1/2) q_nm min of the other two literals' terms,
and the rigidity term R_nm = (1/2)(q_nm - v_n) for every literal achieving
the clause minimum (zero otherwise).

All functions are pure; derivative outputs already include the boundary
masks that keep bounded variables from being pushed outward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cnf import Assignment, Problem, count_unsatisfied

__all__ = [
    "AUX_MODES",
    "AnalogOptions",
    "MemOptions",
    "MemParams",
    "AnalogState",
    "MemState",
    "k_m",
    "clause_products",
    "analog_rhs",
    "energy",
    "clause_value",
    "clause_values",
    "mem_clause_quantities",
    "mem_rhs",
    "clamp_mask",
    "control_signals",
    "readout",
    "x_long_upper_bound",
]

# Auxiliary-variable growth laws for the analog solver.
AUX_MODES = ("aK2", "aK", "K", "K2")


@dataclass(frozen=True)
class AnalogOptions:
    one_eighth_factor: bool = True  # keep the 1/2^3 prefactor in K_m and K_mi
    aux_mode: str = "aK2"

    def __post_init__(self):
        if self.aux_mode not in AUX_MODES:
            raise ValueError(f"aux_mode must be one of {AUX_MODES}, got {self.aux_mode!r}")


@dataclass(frozen=True)
class MemOptions:
    clamp_v: bool = True


@dataclass(frozen=True)
class MemParams:
    alpha: float = 5.0
    beta: float = 20.0
    gamma: float = 0.25
    delta: float = 0.05
    epsilon: float = 0.001
    zeta: float = 0.01


@dataclass(frozen=True)
class AnalogState:
    s: np.ndarray  # (N,) spins in [-1, 1]
    a: np.ndarray  # (M,) positive clause weights


@dataclass(frozen=True)
class MemState:
    v: np.ndarray    # (N,) voltages in [-1, 1]
    x_s: np.ndarray  # (M,) short memory in [0, 1]
    x_l: np.ndarray  # (M,) long memory in [1, 1e4*M]


def x_long_upper_bound(problem: Problem) -> float:
    return 1e4 * problem.num_clauses


def clamp_mask(value, lower, upper, derivative):
    """Zero the derivative where it would push value past [lower, upper].

    Scalar or elementwise on arrays.  Inward pushes at the boundary pass
    through unchanged.
    """
    value = np.asarray(value, dtype=float)
    derivative = np.asarray(derivative, dtype=float)
    blocked = ((value >= upper) & (derivative > 0)) | ((value <= lower) & (derivative < 0))
    masked = np.where(blocked, 0.0, derivative)
    if masked.ndim == 0:
        return float(masked)
    return masked


def _literal_factors(problem: Problem, s: np.ndarray) -> np.ndarray:
    """(M, 3) array of the per-literal factors 1 - c s."""
    return 1.0 - problem.sign * np.asarray(s, dtype=float)[problem.var_index]


def clause_products(problem: Problem, s, options: AnalogOptions = AnalogOptions()):
    """K_m and K_mi for all clauses: shapes (M,) and (M, 3).

    K_mi is formed from the other two literal factors (division-free).
    """
    f = _literal_factors(problem, s)
    pref = 0.125 if options.one_eighth_factor else 1.0
    km = pref * (f[:, 0] * f[:, 1] * f[:, 2])
    kmi = np.empty_like(f)
    kmi[:, 0] = f[:, 1] * f[:, 2]
    kmi[:, 1] = f[:, 0] * f[:, 2]
    kmi[:, 2] = f[:, 0] * f[:, 1]
    kmi *= pref
    return km, kmi


def k_m(problem: Problem, m: int, s, options: AnalogOptions = AnalogOptions()) -> float:
    """Violation measure of clause m: 0 when some literal is fully
    satisfied, 1 (with the 1/2^3 factor) at maximal violation."""
    f = 1.0 - problem.sign[m] * np.asarray(s, dtype=float)[problem.var_index[m]]
    k = f[0] * f[1] * f[2]
    return float(0.125 * k if options.one_eighth_factor else k)


def analog_rhs(problem: Problem, state: AnalogState,
               options: AnalogOptions = AnalogOptions()):
    """Time derivatives (ds, da) of the analog SAT system, with the spin
    derivatives boundary-masked at s = +-1."""
    s = np.asarray(state.s, dtype=float)
    a = np.asarray(state.a, dtype=float)
    km, kmi = clause_products(problem, s, options)
    contrib = (2.0 * a * km)[:, None] * problem.sign * kmi
    ds = np.bincount(
        problem.var_index.ravel(), weights=contrib.ravel(), minlength=problem.num_vars
    )
    mode = options.aux_mode
    if mode == "aK2":
        da = a * km * km
    elif mode == "aK":
        da = a * km
    elif mode == "K":
        da = km.copy()
    else:  # "K2"
        da = km * km
    ds = clamp_mask(s, -1.0, 1.0, ds)
    return ds, da


def energy(problem: Problem, state: AnalogState,
           options: AnalogOptions = AnalogOptions()) -> float:
    """Clause-weighted energy V(s, a) = sum_m a_m K_m(s)^2 (>= 0)."""
    km, _ = clause_products(problem, state.s, options)
    return float(np.dot(np.asarray(state.a, dtype=float), km * km))


def clause_values(problem: Problem, v) -> np.ndarray:
    """C_m for all clauses: half the minimum literal slack, in [0, 1]."""
    t = _literal_factors(problem, v)
    return 0.5 * t.min(axis=1)


def clause_value(problem: Problem, m: int, v) -> float:
    t = 1.0 - problem.sign[m] * np.asarray(v, dtype=float)[problem.var_index[m]]
    return float(0.5 * t.min())


def mem_clause_quantities(problem: Problem, v):
    """Per-clause quantities of the memcomputing dynamics.

    Returns (C, G, R): C is (M,), G and R are (M, 3) aligned with the
    clause literal slots.  R is assigned to every literal whose slack term
    equals the clause minimum, so exact ties all receive the rigidity
    contribution.
    """
    v = np.asarray(v, dtype=float)
    t = _literal_factors(problem, v)          # (M, 3), t = 1 - q v
    tmin = t.min(axis=1)
    c = 0.5 * tmin
    other_min = np.empty_like(t)
    other_min[:, 0] = np.minimum(t[:, 1], t[:, 2])
    other_min[:, 1] = np.minimum(t[:, 0], t[:, 2])
    other_min[:, 2] = np.minimum(t[:, 0], t[:, 1])
    g = 0.5 * problem.sign * other_min
    at_min = t == tmin[:, None]
    r = np.where(at_min, 0.5 * (problem.sign - v[problem.var_index]), 0.0)
    return c, g, r


def mem_rhs(problem: Problem, state: MemState,
            params: MemParams = MemParams(),
            options: MemOptions = MemOptions()):
    """Time derivatives (dv, dx_s, dx_l) of the memcomputing system.

    Boundary masks are applied to x_s and x_l always, and to v unless
    options.clamp_v is False (the unconstrained-voltage variant).
    """
    v = np.asarray(state.v, dtype=float)
    x_s = np.asarray(state.x_s, dtype=float)
    x_l = np.asarray(state.x_l, dtype=float)
    c, g, r = mem_clause_quantities(problem, v)
    coef_g = (x_l * x_s)[:, None]
    coef_r = ((1.0 + params.zeta * x_l) * (1.0 - x_s))[:, None]
    contrib = coef_g * g + coef_r * r
    dv = np.bincount(
        problem.var_index.ravel(), weights=contrib.ravel(), minlength=problem.num_vars
    )
    dx_s = params.beta * (x_s + params.epsilon) * (c - params.gamma)
    dx_l = params.alpha * (c - params.delta)
    if options.clamp_v:
        dv = clamp_mask(v, -1.0, 1.0, dv)
    dx_s = clamp_mask(x_s, 0.0, 1.0, dx_s)
    dx_l = clamp_mask(x_l, 1.0, x_long_upper_bound(problem), dx_l)
    return dv, dx_s, dx_l


def readout(values) -> Assignment:
    """Digitize a continuous vector: TRUE iff strictly positive (0 -> FALSE)."""
    return np.asarray(values, dtype=float) > 0.0


def control_signals(problem: Problem, v) -> tuple[float, int]:
    """The two solver-progress signals.

    contra sums the clause functions C_m over all clauses (continuous);
    contrd counts clauses unsatisfied by the sign readout of v (integer).
    """
    contra = float(clause_values(problem, v).sum())
    contrd = count_unsatisfied(problem, readout(v))
    return contra, contrd
