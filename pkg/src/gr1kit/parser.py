"""Lexer and recursive-descent parser for `.gr1spec` files.

Concrete syntax (sections may repeat and interleave):

    VARENV  <name> : boolean | {A, B, ...} ;  ...
    VAR     ...                         -- spec_-prefixed names are aux vars
    DEFINE  <name> := <expr> ;  ...
    AUX <name> { <initial or safety constraint> ; ... }
    ASM [label:] <constraint> ;
    GAR [label:] <constraint> ;

Constraints: bare expression (initial), `G (expr)` (safety),
`G F (expr)` (justice), or one of the four pattern phrases:

    Globally (p) leads to (s)                         -- P26 response
    Globally (p) after (q) until (r)                  -- P20 universality
    (p) becomes true between (q) and (r)              -- P09 existence
    (p) occurs at most <n> times between (q) and (r)  -- P15 bounded existence

Comments run from `--` to end of line.
"""
from __future__ import annotations

from dataclasses import dataclass

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
)

AUX_PREFIX = "spec_"
GENERATED_PREFIX = "aux_"

_KEYWORDS = {
    "VARENV", "VAR", "DEFINE", "AUX", "ASM", "GAR",
    "boolean", "TRUE", "FALSE", "next", "PREV", "SINCE", "ONCE",
    "HISTORICALLY", "G", "F",
    "Globally", "leads", "to", "after", "until", "occurs", "at", "most",
    "times", "between", "and", "becomes", "true",
}

_PUNCT = ["<->", "->", ":=", "!=", "{", "}", "(", ")", ";", ":", ",",
          "=", "!", "&", "|"]


class SpecError(Exception):
    """Base for all user-facing specification errors."""

    def __init__(self, message: str, span: Span | None = None, filename: str = ""):
        self.message = message
        self.span = span
        self.filename = filename
        super().__init__(str(self))

    def __str__(self):
        loc = ""
        if self.span is not None:
            loc = f"{self.filename or '<spec>'}:{self.span.line}:{self.span.col}: "
        return loc + self.message


class ParseError(SpecError):
    pass


@dataclass
class Token:
    kind: str  # "ident", "number", "keyword", or the punct itself
    text: str
    span: Span


def tokenize(text: str, filename: str = "") -> list[Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = Span(line, col)
        matched = None
        for p in _PUNCT:
            if text.startswith(p, i):
                matched = p
                break
        if matched:
            tokens.append(Token(matched, matched, span))
            i += len(matched)
            col += len(matched)
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("number", text[i:j], span))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in _KEYWORDS else "ident"
            tokens.append(Token(kind, word, span))
            col += j - i
            i = j
            continue
        raise ParseError(f"illegal character {ch!r}", span, filename)
    tokens.append(Token("eof", "", Span(line, col)))
    return tokens


_SECTION_STARTS = {"VARENV", "VAR", "DEFINE", "AUX", "ASM", "GAR"}


class Parser:
    def __init__(self, text: str, filename: str = "", name: str = ""):
        self.filename = filename
        self.tokens = tokenize(text, filename)
        self.pos = 0
        self.name = name or (filename.rsplit("/", 1)[-1].split(".")[0] or "spec")

    # -- token helpers

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def check(self, text: str) -> bool:
        tok = self.peek()
        return tok.text == text and tok.kind in ("keyword", text)

    def accept(self, text: str) -> Token | None:
        if self.check(text):
            return self.advance()
        return None

    def expect(self, *alternatives: str) -> Token:
        tok = self.peek()
        for text in alternatives:
            if self.check(text):
                return self.advance()
        expected = " or ".join(f"'{a}'" for a in alternatives)
        raise ParseError(
            f"expected {expected}, found {tok.text!r}", tok.span, self.filename
        )

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            raise ParseError(
                f"expected identifier, found {tok.text!r}", tok.span, self.filename
            )
        return self.advance()

    # -- document structure

    def parse_document(self) -> SpecDocument:
        doc = SpecDocument(
            name=self.name,
            env_vars=[],
            sys_vars=[],
            aux_vars=[],
            defines={},
            assumptions=[],
            guarantees=[],
        )
        seen: dict[str, Span] = {}

        def declare(name: str, span: Span):
            if name in seen:
                raise ParseError(
                    f"duplicate identifier '{name}' (first declared at "
                    f"{seen[name]})",
                    span,
                    self.filename,
                )
            seen[name] = span

        while self.peek().kind != "eof":
            tok = self.peek()
            if self.accept("VARENV"):
                for d in self.parse_decls(Owner.ENV):
                    declare(d.name, d.span)
                    doc.env_vars.append(d)
            elif self.accept("VAR"):
                for d in self.parse_decls(Owner.SYS):
                    declare(d.name, d.span)
                    (doc.aux_vars if d.owner is Owner.AUX else doc.sys_vars).append(d)
            elif self.accept("DEFINE"):
                for name_tok, body in self.parse_defines():
                    declare(name_tok.text, name_tok.span)
                    doc.defines[name_tok.text] = body
            elif self.check("AUX"):
                doc.aux_constraints.extend(self.parse_aux_block())
            elif self.check("ASM") or self.check("GAR"):
                side = Side.ASSUMPTION if self.check("ASM") else Side.GUARANTEE
                self.advance()
                c = self.parse_labeled_constraint(side)
                (doc.assumptions if side is Side.ASSUMPTION else doc.guarantees).append(c)
            else:
                raise ParseError(
                    f"expected 'VARENV', 'VAR', 'DEFINE', 'AUX', 'ASM' or 'GAR', "
                    f"found {tok.text!r}",
                    tok.span,
                    self.filename,
                )
        return doc

    def parse_decls(self, default_owner: Owner) -> list[VarDecl]:
        decls = []
        while self.peek().kind == "ident":
            name_tok = self.expect_ident()
            self.expect(":")
            domain = self.parse_type()
            self.expect(";")
            owner = default_owner
            if name_tok.text.startswith(AUX_PREFIX):
                if default_owner is Owner.ENV:
                    raise ParseError(
                        f"auxiliary variable '{name_tok.text}' must be declared "
                        "in VAR, not VARENV",
                        name_tok.span,
                        self.filename,
                    )
                owner = Owner.AUX
            if name_tok.text.startswith(GENERATED_PREFIX):
                raise ParseError(
                    f"the '{GENERATED_PREFIX}' name prefix is reserved for "
                    "generated monitor variables",
                    name_tok.span,
                    self.filename,
                )
            decls.append(VarDecl(name_tok.text, domain, owner, name_tok.span))
        return decls

    def parse_type(self):
        if self.accept("boolean"):
            return BoolType()
        tok = self.expect("{")
        values = [self.expect_ident().text]
        while self.accept(","):
            values.append(self.expect_ident().text)
        self.expect("}")
        if len(set(values)) < 2:
            raise ParseError(
                "enumeration needs at least 2 distinct value names",
                tok.span,
                self.filename,
            )
        if len(set(values)) != len(values):
            raise ParseError("duplicate enumeration value", tok.span, self.filename)
        return EnumType(tuple(values))

    def parse_defines(self):
        out = []
        while self.peek().kind == "ident" and self.peek(1).text == ":=":
            name_tok = self.expect_ident()
            self.expect(":=")
            body = self.parse_expr()
            self.expect(";")
            out.append((name_tok, body))
        return out

    def parse_aux_block(self) -> list[Constraint]:
        self.expect("AUX")
        name_tok = self.expect_ident()
        if not name_tok.text.startswith(AUX_PREFIX):
            raise ParseError(
                f"AUX block requires a '{AUX_PREFIX}'-prefixed variable, "
                f"got '{name_tok.text}'",
                name_tok.span,
                self.filename,
            )
        self.expect("{")
        constraints = []
        idx = 1
        while not self.check("}"):
            span = self.peek().span
            c = self.parse_constraint(Side.GUARANTEE)
            if c.kind not in (Kind.INITIAL, Kind.SAFETY):
                raise ParseError(
                    "AUX blocks may contain only initial and safety constraints",
                    span,
                    self.filename,
                )
            constraints.append(
                Constraint(
                    c.kind,
                    c.side,
                    c.expr,
                    label=f"{name_tok.text}_{idx}",
                    span=c.span,
                    aux_var=name_tok.text,
                )
            )
            idx += 1
        self.expect("}")
        return constraints

    def parse_labeled_constraint(self, side: Side) -> Constraint:
        label = ""
        if self.peek().kind == "ident" and self.peek(1).text == ":":
            label = self.advance().text
            self.advance()
        c = self.parse_constraint(side)
        if label:
            c = Constraint(c.kind, c.side, c.expr, label=label, span=c.span,
                           aux_var=c.aux_var)
        return c

    def parse_constraint(self, side: Side) -> Constraint:
        span = self.peek().span
        if self.check("Globally"):
            self.advance()
            self.expect("(")
            p = self.parse_expr()
            self.expect(")")
            if self.accept("leads"):
                self.expect("to")
                self.expect("(")
                s = self.parse_expr()
                self.expect(")")
                self.expect(";")
                inst = PatternInstance("P26", (("p", p), ("s", s)))
            else:
                self.expect("after")
                self.expect("(")
                q = self.parse_expr()
                self.expect(")")
                self.expect("until")
                self.expect("(")
                r = self.parse_expr()
                self.expect(")")
                self.expect(";")
                inst = PatternInstance("P20", (("p", p), ("q", q), ("r", r)))
            return Constraint(Kind.PATTERN, side, inst, span=span)
        if self.check("G"):
            self.advance()
            if self.accept("F"):
                self.expect("(")
                body = self.parse_expr()
                self.expect(")")
                self.expect(";")
                return Constraint(Kind.JUSTICE, side, body, span=span)
            self.expect("(")
            body = self.parse_expr()
            self.expect(")")
            self.expect(";")
            return Constraint(Kind.SAFETY, side, body, span=span)
        # bare expression: either an initial constraint or the head of a
        # P09/P15 pattern phrase
        expr = self.parse_expr()
        if self.check("becomes"):
            self.advance()
            self.expect("true")
            self.expect("between")
            self.expect("(")
            q = self.parse_expr()
            self.expect(")")
            self.expect("and")
            self.expect("(")
            r = self.parse_expr()
            self.expect(")")
            self.expect(";")
            inst = PatternInstance("P09", (("p", expr), ("q", q), ("r", r)))
            return Constraint(Kind.PATTERN, side, inst, span=span)
        if self.check("occurs"):
            self.advance()
            self.expect("at")
            self.expect("most")
            num = self.peek()
            if num.kind != "number":
                raise ParseError(
                    f"expected occurrence bound, found {num.text!r}",
                    num.span,
                    self.filename,
                )
            self.advance()
            bound = int(num.text)
            if bound < 1:
                raise ParseError("occurrence bound must be >= 1", num.span,
                                 self.filename)
            self.expect("times")
            self.expect("between")
            self.expect("(")
            q = self.parse_expr()
            self.expect(")")
            self.expect("and")
            self.expect("(")
            r = self.parse_expr()
            self.expect(")")
            self.expect(";")
            inst = PatternInstance(
                "P15", (("p", expr), ("q", q), ("r", r)), bound=bound
            )
            return Constraint(Kind.PATTERN, side, inst, span=span)
        self.expect(";")
        return Constraint(Kind.INITIAL, side, expr, span=span)

    # -- expressions (precedence climbing)

    def parse_expr(self) -> Expr:
        return self.parse_iff()

    def parse_iff(self) -> Expr:
        left = self.parse_implies()
        while self.accept("<->"):
            right = self.parse_implies()
            left = Iff(left, right)
        return left

    def parse_implies(self) -> Expr:
        left = self.parse_or()
        if self.accept("->"):
            right = self.parse_implies()  # right-associative
            return Implies(left, right)
        return left

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.accept("|"):
            left = Or(left, self.parse_and())
        return left

    def parse_and(self) -> Expr:
        left = self.parse_since()
        while self.accept("&"):
            left = And(left, self.parse_since())
        return left

    def parse_since(self) -> Expr:
        left = self.parse_cmp()
        while self.accept("SINCE"):
            left = Since(left, self.parse_cmp())
        return left

    def parse_cmp(self) -> Expr:
        left = self.parse_unary()
        if self.accept("="):
            return Eq(left, self.parse_unary())
        if self.accept("!="):
            return Neq(left, self.parse_unary())
        return left

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if self.accept("!"):
            return Not(self.parse_unary())
        for kw, cls in (("next", Next), ("PREV", Prev), ("ONCE", Once),
                        ("HISTORICALLY", Historically)):
            if self.check(kw):
                self.advance()
                self.expect("(")
                inner = self.parse_expr()
                self.expect(")")
                return cls(inner)
        if self.accept("("):
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if self.accept("TRUE"):
            return BoolLit(True)
        if self.accept("FALSE"):
            return BoolLit(False)
        if tok.kind == "ident":
            self.advance()
            return Name(tok.text, tok.span)
        raise ParseError(
            f"expected expression, found {tok.text!r}", tok.span, self.filename
        )


def parse(text: str, filename: str = "", name: str = "") -> SpecDocument:
    """Parse specification text into a SpecDocument (no typechecking)."""
    return Parser(text, filename, name).parse_document()


def parse_file(path: str) -> SpecDocument:
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    return parse(text, filename=path)
