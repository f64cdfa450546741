"""Type checking, constraint-placement rules, and DEFINE expansion."""
from __future__ import annotations

from dataclasses import dataclass

from .parser import SpecError
from .syntax import (
    And,
    BoolLit,
    BoolType,
    Constraint,
    EnumType,
    Eq,
    Expr,
    Historically,
    Iff,
    Implies,
    Kind,
    Name,
    Neq,
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
    contains_next,
    rebuild,
    walk,
)


class TypeCheckError(SpecError):
    pass


@dataclass
class _Ctx:
    doc: SpecDocument
    vars: dict[str, VarDecl]
    filename: str = ""

    def var_owner(self, name: str) -> Owner | None:
        d = self.vars.get(name)
        return d.owner if d else None


def _build_ctx(doc: SpecDocument, filename: str = "") -> _Ctx:
    return _Ctx(doc, {d.name: d for d in doc.declared_vars()}, filename)


def _define_order(doc: SpecDocument, errors: list[TypeCheckError]) -> list[str]:
    """Topologically order defines; report cycles."""
    order: list[str] = []
    state: dict[str, int] = {}  # 1 = visiting, 2 = done

    def visit(name: str, chain: tuple[str, ...]):
        if state.get(name) == 2:
            return
        if state.get(name) == 1:
            cycle = " -> ".join(chain[chain.index(name):] + (name,))
            errors.append(TypeCheckError(f"cyclic DEFINE reference: {cycle}"))
            state[name] = 2
            return
        state[name] = 1
        for node in walk(doc.defines[name]):
            if isinstance(node, Name) and node.name in doc.defines:
                visit(node.name, chain + (name,))
        state[name] = 2
        order.append(name)

    for name in doc.defines:
        visit(name, ())
    return order


def referenced_vars(expr: Expr, doc: SpecDocument) -> set[str]:
    """Declared variables referenced by expr, looking through defines."""
    out: set[str] = set()
    seen_defs: set[str] = set()

    def go(e: Expr):
        for node in walk(e):
            if isinstance(node, Name):
                if node.name in doc.defines:
                    if node.name not in seen_defs:
                        seen_defs.add(node.name)
                        go(doc.defines[node.name])
                elif doc.var(node.name) is not None:
                    out.add(node.name)

    go(expr)
    return out


def typecheck(doc: SpecDocument, filename: str = "") -> list[TypeCheckError]:
    """Check the document; returns [] when well-typed.

    On success, constraints without an explicit label get a deterministic
    generated one (asm_1, ..., gar_1, ...), assigned in place.
    """
    errors: list[TypeCheckError] = []
    ctx = _build_ctx(doc, filename)
    order = _define_order(doc, errors)
    if errors:
        return errors

    define_types: dict[str, object] = {}
    for name in order:
        body = doc.defines[name]
        for node in walk(body):
            if isinstance(node, (Next, Prev, Since, Once, Historically)):
                errors.append(
                    TypeCheckError(
                        f"DEFINE '{name}' may not contain temporal operators"
                    )
                )
                break
        t = _infer(doc.defines[name], ctx, define_types, errors)
        define_types[name] = t

    def check_expr(expr: Expr, *, allow_next: bool, allow_past: bool,
                   what: str, span: Span):
        if not allow_next and contains_next(expr):
            errors.append(
                TypeCheckError(f"{what} may not use next()", span, filename)
            )
            return
        if not allow_past:
            for node in walk(expr):
                if isinstance(node, (Prev, Since, Once, Historically)):
                    errors.append(
                        TypeCheckError(
                            f"{what} may not use past operators", span, filename
                        )
                    )
                    return
        t = _infer(expr, ctx, define_types, errors)
        if t is not None and not isinstance(t, BoolType):
            errors.append(
                TypeCheckError(f"{what} must be boolean-valued", span, filename)
            )
        _check_nesting(expr, errors, span, filename)

    def check_assumption_primed(expr: Expr, span: Span):
        # env moves first: an assumption may constrain next values of
        # environment variables only
        for node in walk(expr):
            if isinstance(node, Next):
                for v in referenced_vars(node.operand, doc):
                    if ctx.var_owner(v) is not Owner.ENV:
                        errors.append(
                            TypeCheckError(
                                f"assumption references next({v}) but '{v}' "
                                "is not an environment variable",
                                span,
                                filename,
                            )
                        )

    def check_constraint(c: Constraint):
        if c.kind is Kind.PATTERN:
            assert isinstance(c.expr, PatternInstance)
            for pname, pexpr in c.expr.params:
                # past operands are allowed (compiled to monitors); next is not
                check_expr(
                    pexpr,
                    allow_next=False,
                    allow_past=True,
                    what=f"pattern parameter '{pname}'",
                    span=c.span,
                )
            return
        assert isinstance(c.expr, Expr)
        if c.kind is Kind.INITIAL:
            check_expr(c.expr, allow_next=False, allow_past=False,
                       what="initial constraint", span=c.span)
            if c.side is Side.ASSUMPTION:
                for v in referenced_vars(c.expr, doc):
                    if ctx.var_owner(v) is not Owner.ENV:
                        errors.append(
                            TypeCheckError(
                                f"initial assumption references '{v}' which is "
                                "not an environment variable",
                                c.span,
                                filename,
                            )
                        )
        elif c.kind is Kind.SAFETY:
            check_expr(c.expr, allow_next=True, allow_past=True,
                       what="safety constraint", span=c.span)
            if c.side is Side.ASSUMPTION and c.aux_var is None:
                check_assumption_primed(c.expr, c.span)
        elif c.kind is Kind.JUSTICE:
            check_expr(c.expr, allow_next=False, allow_past=True,
                       what="justice constraint", span=c.span)
        if c.aux_var is not None:
            decl = doc.var(c.aux_var)
            if decl is None or decl.owner is not Owner.AUX:
                errors.append(
                    TypeCheckError(
                        f"AUX block for undeclared auxiliary variable "
                        f"'{c.aux_var}'",
                        c.span,
                        filename,
                    )
                )
            else:
                for node in walk(c.expr):
                    if isinstance(node, Next):
                        for v in referenced_vars(node.operand, doc):
                            if ctx.var_owner(v) is Owner.AUX and v != c.aux_var:
                                errors.append(
                                    TypeCheckError(
                                        f"definition of '{c.aux_var}' may not "
                                        f"reference next({v}) of another "
                                        "auxiliary variable",
                                        c.span,
                                        filename,
                                    )
                                )

    for c in doc.constraints():
        check_constraint(c)

    # every declared aux var needs an AUX block (completeness itself is
    # validate_aux's job, but a var with no block at all is always wrong)
    if not errors:
        _assign_labels(doc, errors)
    return errors


def _check_nesting(expr: Expr, errors, span, filename, in_next=False,
                   in_past=False):
    if isinstance(expr, Next):
        if in_next:
            errors.append(
                TypeCheckError("next() may not be nested inside next()",
                               span, filename)
            )
            return
        if in_past:
            errors.append(
                TypeCheckError("next() may not occur inside a past operator",
                               span, filename)
            )
            return
        _check_nesting(expr.operand, errors, span, filename, True, in_past)
        return
    inside_past = in_past or isinstance(expr, (Prev, Since, Once, Historically))
    for c in children(expr):
        _check_nesting(c, errors, span, filename, in_next, inside_past)


def _infer(expr: Expr, ctx: _Ctx, define_types, errors) -> object | None:
    """Infer the type of expr; None on error (already reported)."""

    def resolve(e: Expr):
        """Type of e, or ('lit', name) for a would-be enum literal."""
        if isinstance(e, Name):
            d = ctx.vars.get(e.name)
            if d is not None:
                return d.domain
            if e.name in ctx.doc.defines:
                return define_types.get(e.name)
            return ("lit", e.name, e.span)
        if isinstance(e, Next):
            return resolve(e.operand)
        return go(e)

    def go(e: Expr):
        if isinstance(e, Name):
            r = resolve(e)
            if isinstance(r, tuple):
                errors.append(
                    TypeCheckError(f"unknown identifier '{e.name}'", e.span,
                                   ctx.filename)
                )
                return None
            return r
        if isinstance(e, BoolLit):
            return BoolType()
        if isinstance(e, (Eq, Neq)):
            lt = resolve(e.left)
            rt = resolve(e.right)
            return _check_cmp(e, lt, rt, ctx, errors)
        if isinstance(e, (Not, Once, Historically, Prev)):
            t = go(e.operand)
            if t is not None and not isinstance(t, BoolType):
                errors.append(
                    TypeCheckError("operand must be boolean", _span_of(e.operand),
                                   ctx.filename)
                )
            return BoolType()
        if isinstance(e, Next):
            t = resolve(e.operand)
            if isinstance(t, tuple):
                errors.append(
                    TypeCheckError(f"unknown identifier '{t[1]}'", t[2],
                                   ctx.filename)
                )
                return None
            if isinstance(t, EnumType):
                return t
            return go(e.operand)
        if isinstance(e, (And, Or, Implies, Iff, Since)):
            for side in (e.left, e.right):
                t = go(side)
                if t is not None and not isinstance(t, BoolType):
                    errors.append(
                        TypeCheckError("operand must be boolean",
                                       _span_of(side), ctx.filename)
                    )
            return BoolType()
        raise TypeError(f"unexpected node {e!r}")

    return go(expr)


def _check_cmp(e, lt, rt, ctx: _Ctx, errors):
    span = _span_of(e.left)

    def domain_has(domain: EnumType, name: str) -> bool:
        return name in domain.values

    if isinstance(lt, tuple) and isinstance(rt, tuple):
        errors.append(
            TypeCheckError(
                f"unknown identifier '{lt[1]}' (a comparison needs at least "
                "one declared variable side)",
                lt[2],
                ctx.filename,
            )
        )
        return None
    if isinstance(lt, tuple) or isinstance(rt, tuple):
        lit = lt if isinstance(lt, tuple) else rt
        other = rt if isinstance(lt, tuple) else lt
        if isinstance(other, EnumType):
            if not domain_has(other, lit[1]):
                errors.append(
                    TypeCheckError(
                        f"'{lit[1]}' is not a value of enumeration "
                        f"{other}",
                        lit[2],
                        ctx.filename,
                    )
                )
                return None
            return BoolType()
        errors.append(
            TypeCheckError(f"unknown identifier '{lit[1]}'", lit[2],
                           ctx.filename)
        )
        return None
    if lt is None or rt is None:
        return None
    if isinstance(lt, BoolType) and isinstance(rt, BoolType):
        return BoolType()
    if isinstance(lt, EnumType) and isinstance(rt, EnumType):
        if lt != rt:
            errors.append(
                TypeCheckError(
                    f"comparison between distinct enumerations {lt} and {rt}",
                    span,
                    ctx.filename,
                )
            )
            return None
        return BoolType()
    errors.append(
        TypeCheckError("comparison between boolean and enumeration operands",
                       span, ctx.filename)
    )
    return None


def _span_of(e: Expr) -> Span:
    for node in walk(e):
        if isinstance(node, Name):
            return node.span
    return Span(0, 0)


def _assign_labels(doc: SpecDocument, errors):
    used: set[str] = set()
    for c in doc.constraints():
        if c.label:
            if c.label in used:
                errors.append(TypeCheckError(f"duplicate label '{c.label}'",
                                             c.span))
            used.add(c.label)

    def fill(constraints: list[Constraint], prefix: str):
        for i, c in enumerate(constraints):
            if not c.label:
                label = f"{prefix}_{i + 1}"
                while label in used:
                    label += "_"
                used.add(label)
                constraints[i] = Constraint(c.kind, c.side, c.expr,
                                            label=label, span=c.span,
                                            aux_var=c.aux_var)

    fill(doc.assumptions, "asm")
    fill(doc.guarantees, "gar")
    fill(doc.aux_constraints, "aux")


def expand_defines(doc: SpecDocument) -> SpecDocument:
    """Replace every DEFINE reference in constraints by its body.

    Expansion is capture-free AST substitution; idempotent. The defines
    table itself is kept for reporting.
    """
    expanded: dict[str, Expr] = {}

    def expand(e: Expr) -> Expr:
        if isinstance(e, Name) and e.name in doc.defines:
            if e.name not in expanded:
                expanded[e.name] = expand(doc.defines[e.name])
            return expanded[e.name]
        kids = tuple(expand(c) for c in children(e))
        return rebuild(e, kids)

    def expand_constraint(c: Constraint) -> Constraint:
        if isinstance(c.expr, PatternInstance):
            inst = PatternInstance(
                c.expr.pattern_id,
                tuple((k, expand(v)) for k, v in c.expr.params),
                bound=c.expr.bound,
            )
            return Constraint(c.kind, c.side, inst, c.label, c.span, c.aux_var)
        return Constraint(c.kind, c.side, expand(c.expr), c.label, c.span,
                          c.aux_var)

    return SpecDocument(
        name=doc.name,
        env_vars=list(doc.env_vars),
        sys_vars=list(doc.sys_vars),
        aux_vars=list(doc.aux_vars),
        defines=dict(doc.defines),
        assumptions=[expand_constraint(c) for c in doc.assumptions],
        guarantees=[expand_constraint(c) for c in doc.guarantees],
        aux_constraints=[expand_constraint(c) for c in doc.aux_constraints],
    )
