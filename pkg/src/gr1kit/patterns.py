"""Compile pattern instances and past operators into GR(1) constraints.

Every pattern becomes a small deterministic monitor automaton over the
instance's parameter expressions: fresh `aux_` bits encode the monitor
state, initial/safety constraints pin the (unique) run, and a single
justice constraint carries the acceptance condition. Monitors read only
current-state values, so assumption-side instances may mention system
variables without constraining primed system bits.

Past operators compile to the textbook monitor forms:
  PREV(f):     init !a,      G(next(a) <-> f)
  p SINCE q:   init a <-> q, G(next(a) <-> (next(q) | next(p) & a))
  ONCE(q)          = TRUE SINCE q
  HISTORICALLY(q)  = !ONCE(!q)
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .parser import SpecError
from .syntax import (
    And,
    BoolLit,
    BoolType,
    Constraint,
    Expr,
    Historically,
    Iff,
    Kind,
    Name,
    Next,
    Not,
    Once,
    Or,
    Owner,
    PatternInstance,
    Prev,
    Side,
    Since,
    Span,
    SpecDocument,
    VarDecl,
    children,
    conj,
    disj,
    rebuild,
)


class CompileError(SpecError):
    pass


@dataclass
class TemplateExpansion:
    """GR(1) constraints replacing one pattern instance or past subtree."""

    new_aux_vars: list[VarDecl]
    side: Side
    initial: list[Expr]
    safety: list[Expr]
    justice: list[Expr]
    attributed_to: str
    span: Span | None = field(default=None)

    @property
    def aux_bits(self) -> int:
        return sum(d.bit_width for d in self.new_aux_vars)


class FreshNames:
    """Deterministic fresh-name source for generated monitor variables."""

    def __init__(self, taken):
        self.taken = set(taken)

    def fresh(self, base: str) -> str:
        name = f"aux_{base}"
        k = 1
        while name in self.taken:
            k += 1
            name = f"aux_{base}{k}"
        self.taken.add(name)
        return name


# ---------------------------------------------------------------------------
# Pattern monitors


@dataclass
class Monitor:
    """Explicit deterministic monitor over parameter valuations."""

    params: tuple[str, ...]
    states: list
    init: object
    delta: object  # (state, valuation dict) -> state
    accept: object  # (state, valuation dict) -> bool


def monitor_for(pattern_id: str, bound: int | None = None) -> Monitor:
    if pattern_id == "P26":
        # response: s responds to p, globally. State = pending obligation
        # carried over from earlier steps.
        def delta(m, v):
            return 1 if (v["p"] or m) and not v["s"] else 0

        def accept(m, v):
            return v["s"] or (not v["p"] and not m)

        return Monitor(("p", "s"), [0, 1], 0, delta, accept)

    if pattern_id == "P20":
        # universality of p after q until r
        IDLE, ACTIVE, TRAP = "idle", "active", "trap"

        def delta(m, v):
            if m == TRAP:
                return TRAP
            if v["r"]:
                return IDLE
            obligated = m == ACTIVE or v["q"]
            if obligated and not v["p"]:
                return TRAP
            return ACTIVE if obligated else IDLE

        def accept(m, v):
            return m != TRAP

        return Monitor(("p", "q", "r"), [IDLE, ACTIVE, TRAP], IDLE, delta, accept)

    if pattern_id == "P09":
        # existence of p between q and r (p strictly before the closing r)
        IDLE, WAIT, TRAP = "idle", "wait", "trap"

        def delta(m, v):
            if m == TRAP:
                return TRAP
            if m == WAIT and v["r"]:
                return TRAP
            if not v["r"] and not v["p"] and (m == WAIT or v["q"]):
                return WAIT
            return IDLE

        def accept(m, v):
            return m != TRAP

        return Monitor(("p", "q", "r"), [IDLE, WAIT, TRAP], IDLE, delta, accept)

    if pattern_id == "P15":
        # bounded existence: at most `bound` p-stretches inside each closed
        # q..r segment; an over-budget open segment only traps if it closes
        assert bound is not None and bound >= 1
        IDLE, EXC, TRAP = ("idle",), ("exceeded",), ("trap",)
        states = [IDLE]
        states += [("armed", c, inp) for c in range(bound + 1)
                   for inp in ((False, True) if c else (False,))]
        states += [EXC, TRAP]

        def delta(m, v):
            if m == TRAP:
                return TRAP
            if m == EXC:
                return TRAP if v["r"] else EXC
            if m == IDLE:
                if v["q"] and not v["r"]:
                    return ("armed", 1, True) if v["p"] else ("armed", 0, False)
                return IDLE
            _, c, inp = m
            if v["r"]:
                return IDLE
            if not v["p"]:
                return ("armed", c, False)
            if inp:
                return m
            return EXC if c + 1 > bound else ("armed", c + 1, True)

        def accept(m, v):
            return m != TRAP

        return Monitor(("p", "q", "r"), states, IDLE, delta, accept)

    raise ValueError(f"unknown pattern {pattern_id!r}")


def _bit_literal(var: str, value: bool) -> Expr:
    ref = Name(var)
    return ref if value else Not(ref)


def _valuation_expr(params: dict[str, Expr], valuation: dict[str, bool]) -> Expr:
    terms = []
    for name, pexpr in params.items():
        terms.append(pexpr if valuation[name] else Not(pexpr))
    return conj(terms)


def expand_pattern(inst: PatternInstance, fresh: FreshNames, side: Side,
                   label: str, span: Span = None) -> TemplateExpansion:
    """Build the monitor expansion for one typechecked pattern instance."""
    monitor = monitor_for(inst.pattern_id, inst.bound)
    params = {k: v for k, v in inst.params}
    nbits = max(1, (len(monitor.states) - 1).bit_length())
    bit_vars = [fresh.fresh(f"{label}_b{i}") for i in range(nbits)]
    decls = [VarDecl(v, BoolType(), Owner.AUX) for v in bit_vars]

    index = {s: i for i, s in enumerate(monitor.states)}
    trap_like = monitor.states[-1]  # totalize spare codes onto the sink

    def code_state(code: int):
        return monitor.states[code] if code < len(monitor.states) else trap_like

    def guard(code: int) -> Expr:
        return conj(
            _bit_literal(bit_vars[i], bool(code >> i & 1)) for i in range(nbits)
        )

    valuations = [
        dict(zip(monitor.params, bits))
        for bits in itertools.product([False, True], repeat=len(monitor.params))
    ]

    init_code = index[monitor.init]
    initial = [_bit_literal(bit_vars[i], bool(init_code >> i & 1))
               for i in range(nbits)]

    safety = []
    for i in range(nbits):
        terms = []
        for code in range(1 << nbits):
            state = code_state(code)
            for v in valuations:
                target = index[monitor.delta(state, v)]
                if target >> i & 1:
                    terms.append(And(guard(code), _valuation_expr(params, v)))
        safety.append(Iff(Next(Name(bit_vars[i])), disj(terms)))

    # acceptance: prefer a state-only expression when letters don't matter
    state_only = all(
        len({monitor.accept(s, v) for v in valuations}) == 1
        for s in monitor.states
    )
    if state_only:
        acc_terms = [
            guard(index[s]) for s in monitor.states
            if monitor.accept(s, valuations[0])
        ]
    else:
        acc_terms = [
            And(guard(index[s]), _valuation_expr(params, v))
            for s in monitor.states
            for v in valuations
            if monitor.accept(s, v)
        ]
    justice = [disj(acc_terms)]

    return TemplateExpansion(
        new_aux_vars=decls,
        side=side,
        initial=initial,
        safety=safety,
        justice=justice,
        attributed_to=label,
        span=span,
    )


# ---------------------------------------------------------------------------
# Past-operator compilation


def compile_past(expr: Expr, fresh: FreshNames, side: Side, label: str,
                 owner_of=None, span: Span = None) -> tuple[Expr, TemplateExpansion]:
    """Replace past subformulas (innermost first) with monitor variables."""
    expansion = TemplateExpansion(
        new_aux_vars=[], side=side, initial=[], safety=[], justice=[],
        attributed_to=label, span=span,
    )
    counter = itertools.count(1)

    def check_env_only(e: Expr, op: str):
        if side is not Side.ASSUMPTION or owner_of is None:
            return
        from .typecheck import referenced_vars

        doc = owner_of
        for v in referenced_vars(e, doc):
            d = doc.var(v)
            if d is not None and d.owner is not Owner.ENV:
                raise CompileError(
                    f"assumption-side {op} over non-environment variable "
                    f"'{v}' would constrain primed system values",
                    span,
                )

    def new_aux(base_hint: str) -> str:
        name = fresh.fresh(f"{label}_{base_hint}{next(counter)}")
        expansion.new_aux_vars.append(VarDecl(name, BoolType(), Owner.AUX))
        return name

    def go(e: Expr) -> Expr:
        kids = tuple(go(c) for c in children(e))
        e = rebuild(e, kids)
        if isinstance(e, Prev):
            aux = new_aux("prev")
            expansion.initial.append(Not(Name(aux)))
            expansion.safety.append(Iff(Next(Name(aux)), e.operand))
            return Name(aux)
        if isinstance(e, Since):
            check_env_only(e, "SINCE")
            aux = new_aux("since")
            expansion.initial.append(Iff(Name(aux), e.right))
            expansion.safety.append(
                Iff(Next(Name(aux)),
                    Or(Next(e.right), And(Next(e.left), Name(aux))))
            )
            return Name(aux)
        if isinstance(e, Once):
            return go(Since(BoolLit(True), e.operand))
        if isinstance(e, Historically):
            return Not(go(Once(Not(e.operand))))
        return e

    return go(expr), expansion


# ---------------------------------------------------------------------------
# Whole-document normalization


@dataclass(frozen=True)
class Conjunct:
    """One game-level conjunct with provenance to a declared constraint."""

    label: str
    expr: Expr
    source_kind: Kind


@dataclass
class CompiledSpec:
    """A specification with defines, past operators, and patterns gone."""

    doc: SpecDocument
    env_decls: list[VarDecl]
    sys_decls: list[VarDecl]
    aux_decls: list[VarDecl]  # manual first, then generated, creation order
    aux_side: dict[str, Side]
    init_env: list[Conjunct]
    init_sys: list[Conjunct]
    safety_env: list[Conjunct]
    safety_sys: list[Conjunct]
    justice_env: list[Conjunct]
    justice_sys: list[Conjunct]
    expansions: list[TemplateExpansion]

    @property
    def manual_aux_bits(self) -> int:
        return sum(d.bit_width for d in self.doc.aux_vars)

    @property
    def pattern_aux_bits(self) -> int:
        return sum(e.aux_bits for e in self.expansions)

    def all_decls(self) -> list[VarDecl]:
        return self.env_decls + self.sys_decls + self.aux_decls

    def constraint_text(self) -> dict[str, str]:
        return {c.label: f"{c.side.value} {c.render()}"
                for c in self.doc.constraints()}


def compile_spec(doc: SpecDocument) -> CompiledSpec:
    """Normalize a typechecked document into pure GR(1) conjuncts.

    `doc` must have passed typecheck; defines are expanded here.
    """
    from .typecheck import expand_defines

    doc_x = expand_defines(doc)
    taken = {d.name for d in doc_x.declared_vars()} | set(doc_x.defines)
    fresh = FreshNames(taken)

    out = CompiledSpec(
        doc=doc,
        env_decls=list(doc_x.env_vars),
        sys_decls=list(doc_x.sys_vars),
        aux_decls=list(doc_x.aux_vars),
        aux_side={d.name: Side.GUARANTEE for d in doc_x.aux_vars},
        init_env=[], init_sys=[], safety_env=[], safety_sys=[],
        justice_env=[], justice_sys=[], expansions=[],
    )

    def sink(side: Side, kind: Kind):
        if kind is Kind.INITIAL:
            return out.init_env if side is Side.ASSUMPTION else out.init_sys
        if kind is Kind.SAFETY:
            return out.safety_env if side is Side.ASSUMPTION else out.safety_sys
        return out.justice_env if side is Side.ASSUMPTION else out.justice_sys

    def adopt(exp: TemplateExpansion, source_kind: Kind, label: str):
        out.expansions.append(exp)
        for d in exp.new_aux_vars:
            out.aux_decls.append(d)
            out.aux_side[d.name] = exp.side
        for e in exp.initial:
            sink(exp.side, Kind.INITIAL).append(Conjunct(label, e, source_kind))
        for e in exp.safety:
            sink(exp.side, Kind.SAFETY).append(Conjunct(label, e, source_kind))
        for e in exp.justice:
            sink(exp.side, Kind.JUSTICE).append(Conjunct(label, e, source_kind))

    def strip_past(expr: Expr, side: Side, label: str, span) -> Expr:
        new_expr, exp = compile_past(expr, fresh, side, label,
                                     owner_of=doc_x, span=span)
        if exp.new_aux_vars:
            adopt(exp, Kind.SAFETY, label)
        return new_expr

    for c in doc_x.constraints():
        if c.kind is Kind.PATTERN:
            inst = c.expr
            assert isinstance(inst, PatternInstance)
            params = tuple(
                (k, strip_past(v, c.side, c.label, c.span))
                for k, v in inst.params
            )
            inst = PatternInstance(inst.pattern_id, params, inst.bound)
            adopt(expand_pattern(inst, fresh, c.side, c.label, c.span),
                  Kind.PATTERN, c.label)
            continue
        expr = c.expr
        assert isinstance(expr, Expr)
        if c.kind in (Kind.SAFETY, Kind.JUSTICE):
            expr = strip_past(expr, c.side, c.label, c.span)
        sink(c.side, c.kind).append(Conjunct(c.label, expr, c.kind))

    return out
