"""AST for the `.gr1spec` language: expressions, constraints, documents.

Expressions are immutable and structurally hashable; source spans are
excluded from equality so that parse -> print -> parse round-trips to an
equal tree.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


NO_SPAN = Span(0, 0)


class Owner(enum.Enum):
    ENV = "env"
    SYS = "sys"
    AUX = "aux"


class Side(enum.Enum):
    ASSUMPTION = "assumption"
    GUARANTEE = "guarantee"


class Kind(enum.Enum):
    INITIAL = "initial"
    SAFETY = "safety"
    JUSTICE = "justice"
    PATTERN = "pattern"


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class BoolType:
    def __str__(self):
        return "boolean"


@dataclass(frozen=True)
class EnumType:
    values: tuple[str, ...]

    def __str__(self):
        return "{" + ", ".join(self.values) + "}"


VarType = BoolType | EnumType


# ---------------------------------------------------------------------------
# Expressions


class Expr:
    """Base class; all nodes are frozen dataclasses."""

    def __str__(self) -> str:
        return format_expr(self)


@dataclass(frozen=True)
class Name(Expr):
    """Unresolved identifier: a variable, a DEFINE, or an enum literal."""

    name: str
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Or(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Implies(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Iff(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Eq(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neq(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Next(Expr):
    operand: Expr


@dataclass(frozen=True)
class Prev(Expr):
    operand: Expr


@dataclass(frozen=True)
class Since(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Once(Expr):
    operand: Expr


@dataclass(frozen=True)
class Historically(Expr):
    operand: Expr


PAST_OPS = (Prev, Since, Once, Historically)


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Name, BoolLit)):
        return ()
    if isinstance(e, (Not, Next, Prev, Once, Historically)):
        return (e.operand,)
    return (e.left, e.right)


def rebuild(e: Expr, kids: tuple[Expr, ...]) -> Expr:
    if isinstance(e, (Name, BoolLit)):
        return e
    if isinstance(e, (Not, Next, Prev, Once, Historically)):
        return type(e)(kids[0])
    return type(e)(kids[0], kids[1])


def walk(e: Expr):
    """Yield every node of the tree, pre-order."""
    yield e
    for c in children(e):
        yield from walk(c)


def contains_past(e: Expr) -> bool:
    return any(isinstance(n, PAST_OPS) for n in walk(e))


def contains_next(e: Expr) -> bool:
    return any(isinstance(n, Next) for n in walk(e))


def contains_temporal(e: Expr) -> bool:
    return any(isinstance(n, (Next,) + PAST_OPS) for n in walk(e))


# precedence levels, loosest binds first
_PREC = {
    Iff: 1,
    Implies: 2,
    Or: 3,
    And: 4,
    Since: 5,
    Eq: 6,
    Neq: 6,
}
_ATOM_PREC = 9


def _prec(e: Expr) -> int:
    if isinstance(e, Not):
        return 7
    return _PREC.get(type(e), _ATOM_PREC)


def format_expr(e: Expr) -> str:
    """Render an expression with minimal parentheses.

    Guaranteed to re-parse to an equal tree (the round-trip property).
    """

    def wrap(child: Expr, minimum: int) -> str:
        s = format_expr(child)
        if _prec(child) < minimum:
            return f"({s})"
        return s

    if isinstance(e, Name):
        return e.name
    if isinstance(e, BoolLit):
        return "TRUE" if e.value else "FALSE"
    if isinstance(e, Not):
        return "!" + wrap(e.operand, 7)
    if isinstance(e, Next):
        return f"next({format_expr(e.operand)})"
    if isinstance(e, Prev):
        return f"PREV({format_expr(e.operand)})"
    if isinstance(e, Once):
        return f"ONCE({format_expr(e.operand)})"
    if isinstance(e, Historically):
        return f"HISTORICALLY({format_expr(e.operand)})"
    if isinstance(e, Since):
        # left-associative
        return f"{wrap(e.left, 5)} SINCE {wrap(e.right, 6)}"
    if isinstance(e, Eq):
        return f"{wrap(e.left, 7)} = {wrap(e.right, 7)}"
    if isinstance(e, Neq):
        return f"{wrap(e.left, 7)} != {wrap(e.right, 7)}"
    if isinstance(e, And):
        return f"{wrap(e.left, 4)} & {wrap(e.right, 5)}"
    if isinstance(e, Or):
        return f"{wrap(e.left, 3)} | {wrap(e.right, 4)}"
    if isinstance(e, Implies):
        # right-associative
        return f"{wrap(e.left, 3)} -> {wrap(e.right, 2)}"
    if isinstance(e, Iff):
        return f"{wrap(e.left, 2)} <-> {wrap(e.right, 2)}"
    raise TypeError(f"not an expression node: {e!r}")


def conj(exprs) -> Expr:
    exprs = list(exprs)
    if not exprs:
        return BoolLit(True)
    out = exprs[0]
    for e in exprs[1:]:
        out = And(out, e)
    return out


def disj(exprs) -> Expr:
    exprs = list(exprs)
    if not exprs:
        return BoolLit(False)
    out = exprs[0]
    for e in exprs[1:]:
        out = Or(out, e)
    return out


# ---------------------------------------------------------------------------
# Declarations and constraints


@dataclass(frozen=True)
class VarDecl:
    name: str
    domain: VarType
    owner: Owner
    span: Span = field(default=NO_SPAN, compare=False)

    @property
    def bit_width(self) -> int:
        if isinstance(self.domain, BoolType):
            return 1
        return max(1, (len(self.domain.values) - 1).bit_length())


PATTERN_IDS = ("P09", "P15", "P20", "P26")


@dataclass(frozen=True)
class PatternInstance:
    """An LTL specification-pattern instance (Dwyer numbering).

    P26 uses params (p, s); P20/P09 use (p, q, r); P15 uses (p, q, r)
    plus an occurrence bound.
    """

    pattern_id: str
    params: tuple[tuple[str, Expr], ...]
    bound: int | None = None

    def param(self, name: str) -> Expr:
        for k, v in self.params:
            if k == name:
                return v
        raise KeyError(name)

    def __str__(self) -> str:
        p = dict(self.params)
        if self.pattern_id == "P26":
            return f"Globally ({p['p']}) leads to ({p['s']})"
        if self.pattern_id == "P20":
            return f"Globally ({p['p']}) after ({p['q']}) until ({p['r']})"
        if self.pattern_id == "P09":
            return f"({p['p']}) becomes true between ({p['q']}) and ({p['r']})"
        if self.pattern_id == "P15":
            return (
                f"({p['p']}) occurs at most {self.bound} times "
                f"between ({p['q']}) and ({p['r']})"
            )
        raise ValueError(self.pattern_id)


@dataclass(frozen=True)
class Constraint:
    kind: Kind
    side: Side
    expr: Expr | PatternInstance
    label: str = ""
    span: Span = field(default=NO_SPAN, compare=False)
    # set for constraints that define an auxiliary variable's value
    aux_var: str | None = None

    def render(self) -> str:
        if self.kind is Kind.INITIAL:
            return f"{self.expr}"
        if self.kind is Kind.SAFETY:
            return f"G ({self.expr})"
        if self.kind is Kind.JUSTICE:
            return f"G F ({self.expr})"
        return str(self.expr)


@dataclass
class SpecDocument:
    """A parsed (and possibly typechecked/expanded) specification."""

    name: str
    env_vars: list[VarDecl]
    sys_vars: list[VarDecl]
    aux_vars: list[VarDecl]
    defines: dict[str, Expr]
    assumptions: list[Constraint]
    guarantees: list[Constraint]
    # definitional constraints for manually declared aux variables; kept
    # out of `assumptions`/`guarantees` so declared-constraint accounting
    # matches the reporting conventions
    aux_constraints: list[Constraint] = field(default_factory=list)

    def declared_vars(self) -> list[VarDecl]:
        return self.env_vars + self.sys_vars + self.aux_vars

    def var(self, name: str) -> VarDecl | None:
        for d in self.declared_vars():
            if d.name == name:
                return d
        return None

    def constraints(self) -> list[Constraint]:
        return self.assumptions + self.guarantees + self.aux_constraints


def format_document(doc: SpecDocument) -> str:
    """Pretty-print a document back into concrete `.gr1spec` syntax."""
    out = [f"-- specification {doc.name}"]

    def decls(decl_list):
        return [f"  {d.name} : {d.domain};" for d in decl_list]

    if doc.env_vars:
        out.append("VARENV")
        out += decls(doc.env_vars)
    if doc.sys_vars or doc.aux_vars:
        out.append("VAR")
        out += decls(doc.sys_vars)
        out += decls(doc.aux_vars)
    if doc.defines:
        out.append("DEFINE")
        for name, body in doc.defines.items():
            out.append(f"  {name} := {body};")
    by_aux: dict[str, list[Constraint]] = {}
    for c in doc.aux_constraints:
        by_aux.setdefault(c.aux_var or "", []).append(c)
    for aux_name, cs in by_aux.items():
        out.append(f"AUX {aux_name} {{")
        for c in cs:
            out.append(f"  {c.render()};")
        out.append("}")
    for c in doc.assumptions:
        out.append(f"ASM {c.label + ': ' if c.label else ''}{c.render()};")
    for c in doc.guarantees:
        out.append(f"GAR {c.label + ': ' if c.label else ''}{c.render()};")
    return "\n".join(out) + "\n"
