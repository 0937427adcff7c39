"""LTspice-compatible netlist emission for both solvers.

Every dynamical variable becomes the voltage on a 1 F capacitor driven by
a behavioral current source whose expression is the variable's right-hand
side; each capacitor is shunted by a high-resistance resistor to provide a
DC path to ground.  Analog decks use N+M capacitors (nodes s1..sN,
a1..aM), memcomputing decks N+2M (v1..vN, xs1..xsM, xl1..xlM).  Two extra
behavioral voltage sources expose the control signals: node "contra" sums
the clause functions, node "contrd" counts clauses unsatisfied by the sign
readout (built from unit step functions).

Boundary clamping appears in the source expressions as unit-step masks
that suppress only outward pushes, mirroring the native dynamics:

    f()*(1-u(V(x)-hi)*u(f()))*(1-u(lo-V(x))*u(-f()))

The deck as emitted is self-contained ASCII text with deterministic card
ordering (variables ascending, then clauses ascending, then directives),
so emitting twice yields byte-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cnf import Problem
from .dynamics import AnalogOptions, MemOptions, MemParams, x_long_upper_bound
from .integrate import init_analog, init_mem
from . import spice_expr

__all__ = [
    "Card",
    "FuncDef",
    "NetlistDocument",
    "SubcircuitSpec",
    "NetlistOptions",
    "emit_analog",
    "emit_mem",
    "emit_subcircuit",
    "serialize",
    "card_histogram",
    "undeclared_references",
    "evaluate_deck_rhs",
    "compose_ring_deck",
    "LINE_WIDTH",
]

LINE_WIDTH = 120


@dataclass(frozen=True)
class Card:
    """One element card: name, node tuple, value/expression field."""

    name: str
    nodes: tuple[str, ...]
    value: str

    def line(self) -> str:
        return " ".join((self.name, *self.nodes, self.value))


@dataclass(frozen=True)
class FuncDef:
    name: str  # without the () suffix
    body: str

    def line(self) -> str:
        return f".func {self.name}() {{{self.body}}}"


@dataclass(frozen=True)
class NetlistDocument:
    title: str
    functions: tuple[FuncDef, ...]
    elements: tuple[Card, ...]
    directives: tuple[str, ...]
    subckt: Optional[tuple[str, tuple[str, ...]]] = None  # (name, pins)


@dataclass(frozen=True)
class SubcircuitSpec:
    """P input pins and Q output pins over the deck's variable nodes.

    Indices are 1-based (variable i <-> node v<i> / s<i>).  Input variables
    lose their capacitor cell; the node becomes a pin whose voltage the
    surrounding circuit dictates.  Output pins simply alias internal nodes.
    """

    name: str
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    expose_contrd: bool = True

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        pins = (*self.inputs, *self.outputs)
        if len(set(pins)) != len(pins):
            raise ValueError("subcircuit input and output variables must be disjoint")


@dataclass(frozen=True)
class NetlistOptions:
    t_ev: float = 300.0
    shunt_resistance: float = 1e9
    analog: AnalogOptions = AnalogOptions()
    mem_options: MemOptions = MemOptions()
    mem_params: MemParams = MemParams()
    # Seed for explicit .ic values (reproducible decks).  None emits the
    # simulator-side random form {flat(1)} instead; that variant needs the
    # "Use the clock to reseed the MC generator" option enabled in LTspice
    # for run-to-run randomness.
    ic_seed: Optional[int] = 0
    subcircuit: Optional[SubcircuitSpec] = None


def _fmt(x: float) -> str:
    """Shortest exact decimal for a float (SPICE-parsable, no SI suffixes)."""
    return repr(float(x))


def _factor(node: str, sign: float) -> str:
    """The literal slack term 1 - q*V(node) with the sign folded in."""
    return f"(1-V({node}))" if sign > 0 else f"(1+V({node}))"


def _masked(d: str, node: str, lo: float, hi: float) -> str:
    """Direction-sensitive boundary mask around derivative expression d."""
    return (
        f"{d}*(1-u(V({node})-{_fmt(hi)})*u({d}))"
        f"*(1-u({_fmt(lo)}-V({node}))*u(-{d}))"
    )


def _clause_function_defs(problem: Problem, node: str, fn) -> list[FuncDef]:
    """Per-clause defs: c<m>() clause function, d<m>() unsat indicator."""
    defs = []
    for m in range(problem.num_clauses):
        terms = [
            _factor(f"{node}{problem.var_index[m, j] + 1}", problem.sign[m, j])
            for j in range(3)
        ]
        defs.append(FuncDef(fn(f"c{m + 1}"), f"0.5*min({terms[0]},min({terms[1]},{terms[2]}))"))
    for m in range(problem.num_clauses):
        parts = []
        for j in range(3):
            v = f"V({node}{problem.var_index[m, j] + 1})"
            # literal unsatisfied by the sign readout: v <= 0 for a positive
            # literal, v > 0 for a negated one (readout maps 0 to FALSE)
            parts.append(f"u(-{v})" if problem.sign[m, j] > 0 else f"(1-u(-{v}))")
        defs.append(FuncDef(fn(f"d{m + 1}"), "*".join(parts)))
    return defs


def _control_cards(problem: Problem, fn) -> list[Card]:
    contra = " + ".join(fn(f"c{m + 1}") + "()" for m in range(problem.num_clauses))
    contrd = " + ".join(fn(f"d{m + 1}") + "()" for m in range(problem.num_clauses))
    return [
        Card("Bcontra", ("contra", "0"), f"V={contra}"),
        Card("Bcontrd", ("contrd", "0"), f"V={contrd}"),
    ]


def _ic_value(value: Optional[float]) -> str:
    return "{flat(1)}" if value is None else _fmt(value)


def _build(problem: Problem, options: NetlistOptions, solver: str) -> NetlistDocument:
    n, m = problem.num_vars, problem.num_clauses
    sub = options.subcircuit
    prefix = f"{sub.name}_" if sub is not None else ""

    def fn(name: str) -> str:
        return prefix + name

    if sub is not None:
        bad = [i for i in (*sub.inputs, *sub.outputs) if not 1 <= i <= n]
        if bad:
            raise ValueError(f"subcircuit variable indices out of range: {bad}")
        if len(sub.inputs) + len(sub.outputs) > n:
            raise ValueError("subcircuit needs P + Q <= N")
    omitted = set(sub.inputs) if sub is not None else set()

    var_node = "s" if solver == "analog" else "v"
    functions: list[FuncDef] = []
    elements: list[Card] = []
    ic: list[str] = []
    shunt = f"{options.shunt_resistance:g}"  # component value, e.g. 1e+09

    if solver == "analog":
        opts = options.analog
        pref = "0.125*" if opts.one_eighth_factor else ""
        state0 = init_analog(problem, options.ic_seed or 0)
        s0 = None if options.ic_seed is None else state0.s

        for m_i in range(m):
            terms = [
                _factor(f"s{problem.var_index[m_i, j] + 1}", problem.sign[m_i, j])
                for j in range(3)
            ]
            functions.append(
                FuncDef(fn(f"km{m_i + 1}"), f"{pref}{terms[0]}*{terms[1]}*{terms[2]}")
            )
        for i in range(n):
            terms = []
            for m_i in range(m):
                slots = np.flatnonzero(problem.var_index[m_i] == i)
                for j in slots:
                    others = [k for k in range(3) if k != j]
                    factors = "*".join(
                        _factor(f"s{problem.var_index[m_i, k] + 1}", problem.sign[m_i, k])
                        for k in others
                    )
                    coeff = "2" if problem.sign[m_i, j] > 0 else "(-2)"
                    terms.append(
                        f"{coeff}*V(a{m_i + 1})*({pref}{factors})*{fn(f'km{m_i + 1}')}()"
                    )
            functions.append(FuncDef(fn(f"fs{i + 1}"), " + ".join(terms) if terms else "0"))
        for m_i in range(m):
            km = f"{fn(f'km{m_i + 1}')}()"
            body = {
                "aK2": f"V(a{m_i + 1})*{km}*{km}",
                "aK": f"V(a{m_i + 1})*{km}",
                "K": km,
                "K2": f"{km}*{km}",
            }[opts.aux_mode]
            functions.append(FuncDef(fn(f"fa{m_i + 1}"), body))
        functions.extend(_clause_function_defs(problem, "s", fn))

        for i in range(n):
            node = f"s{i + 1}"
            if (i + 1) in omitted:
                continue
            d = f"{fn(f'fs{i + 1}')}()"
            elements.append(Card(f"C{node}", (node, "0"), "1"))
            elements.append(Card(f"R{node}", (node, "0"), shunt))
            elements.append(Card(f"B{node}", ("0", node), f"I={_masked(d, node, -1.0, 1.0)}"))
            ic.append(f".ic V({node})={_ic_value(None if s0 is None else s0[i])}")
        for m_i in range(m):
            node = f"a{m_i + 1}"
            elements.append(Card(f"C{node}", (node, "0"), "1"))
            elements.append(Card(f"R{node}", (node, "0"), shunt))
            elements.append(Card(f"B{node}", ("0", node), f"I={fn(f'fa{m_i + 1}')}()"))
            ic.append(f".ic V({node})=1")
    else:
        params = options.mem_params
        mo = options.mem_options
        state0 = init_mem(problem, options.ic_seed or 0)
        v0 = None if options.ic_seed is None else state0.v
        xl_max = x_long_upper_bound(problem)

        functions.extend(_clause_function_defs(problem, "v", fn))
        for i in range(n):
            terms = []
            for m_i in range(m):
                slots = np.flatnonzero(problem.var_index[m_i] == i)
                for j in slots:
                    others = [k for k in range(3) if k != j]
                    t_other = ",".join(
                        _factor(f"v{problem.var_index[m_i, k] + 1}", problem.sign[m_i, k])
                        for k in others
                    )
                    other_min = f"min({t_other})"
                    q = problem.sign[m_i, j]
                    g = f"0.5*{other_min}" if q > 0 else f"(-0.5)*{other_min}"
                    node = f"v{i + 1}"
                    t_self = _factor(node, q)
                    r_val = f"0.5*(1-V({node}))" if q > 0 else f"0.5*(-1-V({node}))"
                    r = f"if({t_self}<={other_min},{r_val},0)"
                    xl = f"V(xl{m_i + 1})"
                    xs = f"V(xs{m_i + 1})"
                    terms.append(
                        f"{xl}*{xs}*{g} + (1+{_fmt(params.zeta)}*{xl})*(1-{xs})*{r}"
                    )
            functions.append(FuncDef(fn(f"fv{i + 1}"), " + ".join(terms) if terms else "0"))
        for m_i in range(m):
            c = f"{fn(f'c{m_i + 1}')}()"
            functions.append(
                FuncDef(
                    fn(f"fxs{m_i + 1}"),
                    f"{_fmt(params.beta)}*(V(xs{m_i + 1})+{_fmt(params.epsilon)})"
                    f"*({c}-{_fmt(params.gamma)})",
                )
            )
            functions.append(
                FuncDef(fn(f"fxl{m_i + 1}"), f"{_fmt(params.alpha)}*({c}-{_fmt(params.delta)})")
            )

        for i in range(n):
            node = f"v{i + 1}"
            if (i + 1) in omitted:
                continue
            d = f"{fn(f'fv{i + 1}')}()"
            expr = _masked(d, node, -1.0, 1.0) if mo.clamp_v else d
            elements.append(Card(f"C{node}", (node, "0"), "1"))
            elements.append(Card(f"R{node}", (node, "0"), shunt))
            elements.append(Card(f"B{node}", ("0", node), f"I={expr}"))
            ic.append(f".ic V({node})={_ic_value(None if v0 is None else v0[i])}")
        for m_i in range(m):
            for kind, lo, hi, x0 in (("xs", 0.0, 1.0, 0.5), ("xl", 1.0, xl_max, 1.0)):
                node = f"{kind}{m_i + 1}"
                d = f"{fn(f'f{kind}{m_i + 1}')}()"
                elements.append(Card(f"C{node}", (node, "0"), "1"))
                elements.append(Card(f"R{node}", (node, "0"), shunt))
                elements.append(Card(f"B{node}", ("0", node), f"I={_masked(d, node, lo, hi)}"))
                ic.append(f".ic V({node})={_fmt(x0)}")

    elements.extend(_control_cards(problem, fn))

    title = (
        f"* {'analog SAT' if solver == 'analog' else 'digital memcomputing'} solver, "
        f"N={n} M={m}"
    )
    if sub is not None:
        pins = tuple(f"{var_node}{i}" for i in (*sub.inputs, *sub.outputs))
        if sub.expose_contrd:
            pins = pins + ("contrd",)
        return NetlistDocument(
            title=title,
            functions=tuple(functions),
            elements=tuple(elements),
            directives=(),
            subckt=(sub.name, pins),
        )
    directives = tuple(ic) + (f".tran 0 {_fmt(options.t_ev)} 0 uic",)
    return NetlistDocument(
        title=title,
        functions=tuple(functions),
        elements=tuple(elements),
        directives=directives,
    )


def emit_analog(problem: Problem, options: NetlistOptions = NetlistOptions()) -> NetlistDocument:
    """Netlist integrating the analog SAT equations (N+M capacitors)."""
    return _build(problem, options, "analog")


def emit_mem(problem: Problem, options: NetlistOptions = NetlistOptions()) -> NetlistDocument:
    """Netlist integrating the memcomputing equations (N+2M capacitors)."""
    return _build(problem, options, "mem")


def emit_subcircuit(problem: Problem, options: NetlistOptions,
                    solver: str = "mem") -> NetlistDocument:
    """A .subckt wrapping of the solver deck per options.subcircuit.

    Input variables lose their capacitor/source cell and become pins driven
    from outside; output pins alias internal variable nodes; contrd can be
    exposed as an extra pin.  The block carries no .ic/.tran directives --
    those belong to the instantiating deck.
    """
    if options.subcircuit is None:
        raise ValueError("options.subcircuit must be set")
    return _build(problem, options, solver)


def _wrap_line(line: str, width: int = LINE_WIDTH) -> list[str]:
    out = []
    current = line
    while len(current) > width:
        cut = current.rfind(" ", 1, width)
        if cut <= 0:
            break
        out.append(current[:cut])
        current = "+ " + current[cut + 1:]
    out.append(current)
    return out


def _fragment_lines(document: NetlistDocument) -> list[str]:
    lines: list[str] = []
    if document.subckt is not None:
        name, pins = document.subckt
        lines.extend(_wrap_line(f".subckt {name} " + " ".join(pins)))
    for func in document.functions:
        lines.extend(_wrap_line(func.line()))
    for card in document.elements:
        lines.extend(_wrap_line(card.line()))
    for directive in document.directives:
        lines.extend(_wrap_line(directive))
    if document.subckt is not None:
        lines.append(f".ends {document.subckt[0]}")
    return lines


def serialize(document: NetlistDocument) -> str:
    """Deterministic ASCII text of the deck, newline-terminated.

    Long cards are split with '+' continuation lines.  Stand-alone decks end
    with .end; subcircuit documents end with .ends so they can be embedded.
    """
    lines = [document.title]
    lines.extend(_fragment_lines(document))
    if document.subckt is None:
        lines.append(".end")
    text = "\n".join(lines) + "\n"
    text.encode("ascii")  # emitted decks are ASCII by construction
    return text


def card_histogram(document: NetlistDocument) -> dict[str, int]:
    """Count element cards by SPICE element letter."""
    hist: dict[str, int] = {}
    for card in document.elements:
        key = card.name[0]
        hist[key] = hist.get(key, 0) + 1
    return hist


def _source_expressions(document: NetlistDocument):
    for card in document.elements:
        if card.name.startswith("B"):
            kind, expr = card.value.split("=", 1)
            target = card.nodes[1] if kind == "I" else card.nodes[0]
            yield target, expr


def undeclared_references(document: NetlistDocument) -> list[str]:
    """Names referenced by expressions but not declared in the deck.

    Checks every behavioral-source expression and function body against the
    deck's node set and function table; returns a list of problems (empty
    when the deck is closed).
    """
    declared_nodes = {"0"}
    for card in document.elements:
        declared_nodes.update(card.nodes)
    if document.subckt is not None:
        declared_nodes.update(document.subckt[1])
    declared_funcs = {f.name for f in document.functions}
    builtin = {"u", "min", "max", "if"}

    problems = []
    sources = [(f"func {f.name}", f.body) for f in document.functions]
    sources.extend((f"source {node}", expr) for node, expr in _source_expressions(document))
    for label, text in sources:
        ast = spice_expr.parse_expression(text)
        for node in sorted(spice_expr.referenced_nodes(ast) - declared_nodes):
            problems.append(f"{label}: undeclared node {node}")
        for fname in sorted(
            spice_expr.referenced_functions(ast) - declared_funcs - builtin
        ):
            problems.append(f"{label}: undeclared function {fname}")
    return problems


def evaluate_deck_rhs(document: NetlistDocument, voltages: dict[str, float]) -> dict[str, float]:
    """Evaluate every behavioral source at the given node voltages.

    Returns {target node: value}; for state nodes this is the would-be
    capacitor charging current, i.e. the netlist's claim about the
    right-hand side at that state.
    """
    functions = {f.name: f.body for f in document.functions}
    out = {}
    for target, expr in _source_expressions(document):
        ast = spice_expr.parse_expression(expr)
        out[target] = spice_expr.evaluate(ast, voltages, functions)
    return out


def compose_ring_deck(sub_a: NetlistDocument, sub_b: NetlistDocument,
                      t_ev: float = 300.0) -> str:
    """Top-level deck instantiating two one-input/one-output subcircuits in
    a ring: A's output feeds B's input and vice versa."""
    for sub in (sub_a, sub_b):
        if sub.subckt is None:
            raise ValueError("compose_ring_deck needs subcircuit documents")
    name_a, pins_a = sub_a.subckt
    name_b, pins_b = sub_b.subckt
    lines = [f"* ring network: {name_a} <-> {name_b}"]
    lines.extend(_fragment_lines(sub_a))
    lines.extend(_fragment_lines(sub_b))
    net_ab, net_ba = "net_ab", "net_ba"

    def instance_nodes(pins, inbound, outbound, contrd_node):
        nodes = [inbound, outbound]
        if pins[-1] == "contrd":
            nodes.append(contrd_node)
        return " ".join(nodes)

    lines.append(f"XA {instance_nodes(pins_a, net_ba, net_ab, 'contrda')} {name_a}")
    lines.append(f"XB {instance_nodes(pins_b, net_ab, net_ba, 'contrdb')} {name_b}")
    lines.append(f".tran 0 {_fmt(t_ev)} 0 uic")
    lines.append(".end")
    return "\n".join(lines) + "\n"
