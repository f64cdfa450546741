"""LTL semantics on lasso words and the template equivalence oracle.

The pattern templates are monitor automata produced by `patterns`; this
module checks, for a concrete parameter instantiation, that the template
accepts exactly the lasso words satisfying the pattern's LTL formula, up
to a bounded lasso size. The two sides are computed through different
machinery on purpose: the template side steps the emitted constraint
expressions, the formula side evaluates LTL directly on the lasso.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .patterns import TemplateExpansion
from .syntax import (
    And,
    BoolLit,
    Eq,
    Expr,
    Iff,
    Implies,
    Name,
    Neq,
    Next,
    Not,
    Or,
)

# ---------------------------------------------------------------------------
# LTL formulas (future fragment used by the pattern catalog)


@dataclass(frozen=True)
class L:
    pass


@dataclass(frozen=True)
class LVar(L):
    name: str


@dataclass(frozen=True)
class LTrue(L):
    pass


@dataclass(frozen=True)
class LNot(L):
    operand: L


@dataclass(frozen=True)
class LAnd(L):
    left: L
    right: L


@dataclass(frozen=True)
class LOr(L):
    left: L
    right: L


@dataclass(frozen=True)
class LX(L):
    operand: L


@dataclass(frozen=True)
class LU(L):
    left: L
    right: L


@dataclass(frozen=True)
class LG(L):
    operand: L


def limplies(a: L, b: L) -> L:
    return LOr(LNot(a), b)


def lf(a: L) -> L:
    return LU(LTrue(), a)


def lw(a: L, b: L) -> L:
    # weak until: a W b == (a U b) | G a
    return LOr(LU(a, b), LG(a))


def pattern_formula(pattern_id: str, bound: int | None = None) -> L:
    """The catalog LTL semantics of a pattern, over its parameter names."""
    p, q, r, s = LVar("p"), LVar("q"), LVar("r"), LVar("s")
    if pattern_id == "P26":
        return LG(limplies(p, lf(s)))
    if pattern_id == "P20":
        return LG(limplies(LAnd(q, LNot(r)), lw(p, r)))
    if pattern_id == "P09":
        return LG(limplies(LAnd(q, LNot(r)), lw(LNot(r), LAnd(p, LNot(r)))))
    if pattern_id == "P15":
        assert bound is not None and bound >= 1
        # guarded alternating until-chain; obligations apply only to
        # segments that actually close (F r in the antecedent)
        chain: L = LU(LNot(p), r)
        for _ in range(bound):
            chain = LU(LAnd(p, LNot(r)), LOr(r, chain))
            chain = LU(LAnd(LNot(p), LNot(r)), LOr(r, chain))
        return LG(limplies(LAnd(q, LAnd(LNot(r), lf(r))), chain))
    raise ValueError(pattern_id)


def eval_lasso(formula: L, word: list[dict[str, bool]], loop: int) -> bool:
    """Truth of `formula` at position 0 of word[0:loop] (word[loop:])^w."""
    n = len(word)
    assert 0 <= loop < n
    nxt = [i + 1 for i in range(n)]
    nxt[n - 1] = loop
    cache: dict[L, list[bool]] = {}

    def vals(f: L) -> list[bool]:
        if f in cache:
            return cache[f]
        if isinstance(f, LVar):
            v = [bool(word[i][f.name]) for i in range(n)]
        elif isinstance(f, LTrue):
            v = [True] * n
        elif isinstance(f, LNot):
            v = [not x for x in vals(f.operand)]
        elif isinstance(f, LAnd):
            a, b = vals(f.left), vals(f.right)
            v = [x and y for x, y in zip(a, b)]
        elif isinstance(f, LOr):
            a, b = vals(f.left), vals(f.right)
            v = [x or y for x, y in zip(a, b)]
        elif isinstance(f, LX):
            c = vals(f.operand)
            v = [c[nxt[i]] for i in range(n)]
        elif isinstance(f, LU):
            a, b = vals(f.left), vals(f.right)
            v = [False] * n
            # least fixpoint: two backward sweeps suffice on a lasso
            for _ in range(2):
                for i in reversed(range(n)):
                    v[i] = b[i] or (a[i] and v[nxt[i]])
        elif isinstance(f, LG):
            c = vals(f.operand)
            v = [True] * n
            for _ in range(2):
                for i in reversed(range(n)):
                    v[i] = c[i] and v[nxt[i]]
        else:
            raise TypeError(f)
        cache[f] = v
        return v

    return vals(formula)[0]


# ---------------------------------------------------------------------------
# Stepping a template expansion directly through its emitted constraints


def eval_expr_bool(expr: Expr, env: dict[str, bool],
                   primed: dict[str, bool] | None = None) -> bool:
    """Evaluate a boolean expression over concrete variable values.

    `primed` supplies values for next(...) references.
    """
    if isinstance(expr, Name):
        return bool(env[expr.name])
    if isinstance(expr, BoolLit):
        return expr.value
    if isinstance(expr, Not):
        return not eval_expr_bool(expr.operand, env, primed)
    if isinstance(expr, And):
        return (eval_expr_bool(expr.left, env, primed)
                and eval_expr_bool(expr.right, env, primed))
    if isinstance(expr, Or):
        return (eval_expr_bool(expr.left, env, primed)
                or eval_expr_bool(expr.right, env, primed))
    if isinstance(expr, Implies):
        return (not eval_expr_bool(expr.left, env, primed)
                or eval_expr_bool(expr.right, env, primed))
    if isinstance(expr, Iff):
        return (eval_expr_bool(expr.left, env, primed)
                == eval_expr_bool(expr.right, env, primed))
    if isinstance(expr, Eq):
        return (eval_expr_bool(expr.left, env, primed)
                == eval_expr_bool(expr.right, env, primed))
    if isinstance(expr, Neq):
        return (eval_expr_bool(expr.left, env, primed)
                != eval_expr_bool(expr.right, env, primed))
    if isinstance(expr, Next):
        if primed is None:
            raise ValueError("next() not allowed here")
        inner = expr.operand
        if not isinstance(inner, Name):
            raise ValueError("only next(<name>) supported in monitor updates")
        return bool(primed[inner.name])
    raise TypeError(f"cannot evaluate {expr!r}")


class ExpansionAutomaton:
    """Deterministic automaton reconstructed from a TemplateExpansion.

    Built by brute force over monitor-bit codes against the expansion's
    emitted initial/safety/justice expressions, so it exercises exactly
    what the synthesizer will see.
    """

    def __init__(self, exp: TemplateExpansion, letters: list[dict[str, bool]]):
        self.bits = [d.name for d in exp.new_aux_vars]
        self.nbits = len(self.bits)
        self.letters = letters
        nstates = 1 << self.nbits

        def env_of(code: int, letter: dict[str, bool]):
            env = dict(letter)
            for i, b in enumerate(self.bits):
                env[b] = bool(code >> i & 1)
            return env

        inits = [
            code
            for code in range(nstates)
            if all(eval_expr_bool(e, env_of(code, letters[0]))
                   for e in exp.initial)
        ]
        # pattern monitors have letter-independent initial constraints
        if len(inits) != 1:
            raise ValueError(f"initial monitor state not unique: {inits}")
        self.init = inits[0]

        self.delta = np.zeros((nstates, len(letters)), dtype=np.uint8)
        self.accept = np.zeros((nstates, len(letters)), dtype=bool)
        for code in range(nstates):
            for li, letter in enumerate(letters):
                env = env_of(code, letter)
                succs = []
                for nxt_code in range(nstates):
                    primed = {b: bool(nxt_code >> i & 1)
                              for i, b in enumerate(self.bits)}
                    if all(eval_expr_bool(e, env, primed) for e in exp.safety):
                        succs.append(nxt_code)
                if len(succs) != 1:
                    raise ValueError(
                        f"monitor update not deterministic at code={code}: "
                        f"{succs}"
                    )
                self.delta[code, li] = succs[0]
                self.accept[code, li] = all(
                    eval_expr_bool(e, env) for e in exp.justice
                )

    def accepts_lasso(self, letter_idx: list[int], loop: int) -> bool:
        """Run on prefix + cycle; accept iff the justice fires in the
        run's recurrent part."""
        state = self.init
        for li in letter_idx[:loop]:
            state = int(self.delta[state, li])
        cycle = letter_idx[loop:]
        seen: dict[int, int] = {}
        fired: list[bool] = []
        states: list[int] = []
        while state not in seen:
            seen[state] = len(states)
            states.append(state)
            hit = False
            for li in cycle:
                hit = hit or bool(self.accept[state, li])
                state = int(self.delta[state, li])
            fired.append(hit)
        return any(fired[seen[state]:])


# ---------------------------------------------------------------------------
# Equivalence checking


@dataclass
class Counterexample:
    """A lasso accepted by exactly one side."""

    word: list[dict[str, bool]]
    loop: int
    formula_accepts: bool

    def __str__(self):
        def letter(d):
            return "{" + ",".join(k for k, v in sorted(d.items()) if v) + "}"

        u = "".join(letter(d) for d in self.word[:self.loop])
        v = "".join(letter(d) for d in self.word[self.loop:])
        side = "formula" if self.formula_accepts else "template"
        return f"{u}({v})^w accepted only by the {side}"


def feasible_letters(params: dict[str, Expr], atoms: list[str]):
    """Representative atom valuations, one per feasible parameter valuation.

    Both sides only read the parameter expressions, so words over the
    deduplicated alphabet decide equivalence over the full atom alphabet.
    """
    letters: list[dict[str, bool]] = []
    seen = set()
    for bits in itertools.product([False, True], repeat=len(atoms)):
        env = dict(zip(atoms, bits))
        proj = tuple(sorted(
            (k, eval_expr_bool(v, env)) for k, v in params.items()
        ))
        if proj in seen:
            continue
        seen.add(proj)
        letters.append(env | dict(proj))
    return letters


def check_template_equivalence(
    pattern_id: str,
    params: dict[str, Expr],
    atoms: list[str],
    bound: int | None = None,
    lasso_bound: int = 8,
    expansion: TemplateExpansion | None = None,
    chunk: int = 1 << 15,
) -> Counterexample | None:
    """Compare template language against the pattern's LTL formula on all
    lassos with |prefix| + |cycle| <= lasso_bound; None means equivalent."""
    from .patterns import FreshNames, expand_pattern
    from .syntax import PatternInstance, Side

    if expansion is None:
        inst = PatternInstance(pattern_id, tuple(params.items()), bound)
        expansion = expand_pattern(inst, FreshNames(atoms), Side.GUARANTEE,
                                   "equiv")
    letters = feasible_letters(params, atoms)
    auto = ExpansionAutomaton(expansion, letters)
    formula = pattern_formula(pattern_id, bound)

    for n in range(1, lasso_bound + 1):
        hit = _scan_length(auto, formula, letters, n, chunk)
        if hit is not None:
            word_idx, k = hit
            word = _decode_word(word_idx, n, letters)
            accepts_f = eval_lasso(
                formula, [{p: w[p] for p in ("p", "q", "r", "s") if p in w}
                          for w in word], k)
            return Counterexample(word, k, accepts_f)
    return None


def _decode_word(idx: int, n: int, letters) -> list[dict[str, bool]]:
    out = []
    for _ in range(n):
        out.append(letters[idx % len(letters)])
        idx //= len(letters)
    return out


def _scan_length(auto: ExpansionAutomaton, formula: L, letters, n: int,
                 chunk: int):
    """Vectorized scan of every (word, loop) of total length n; returns the
    first mismatch as (word index, loop) or None."""
    nletters = len(letters)
    total = nletters ** n
    param_names = [p for p in ("p", "q", "r", "s") if p in letters[0]]
    luts = {
        p: np.array([bool(letter[p]) for letter in letters]) for p in param_names
    }
    nstates = auto.delta.shape[0]

    for start in range(0, total, chunk):
        count = min(chunk, total - start)
        idx = np.arange(start, start + count, dtype=np.int64)
        words = np.empty((count, n), dtype=np.uint8)
        scratch = idx.copy()
        for i in range(n):
            words[:, i] = scratch % nletters
            scratch //= nletters
        # forward monitor states over the whole word
        fwd = np.empty((count, n + 1), dtype=np.uint8)
        fwd[:, 0] = auto.init
        for i in range(n):
            fwd[:, i + 1] = auto.delta[fwd[:, i], words[:, i]]
        rows = np.arange(count)
        for k in range(n):
            accept_t = _accept_vec(auto, words, fwd, k, rows, nstates)
            accept_f = _formula_vec(formula, words, luts, k)
            bad = accept_t != accept_f
            if bad.any():
                w = int(np.argmax(bad))
                return start + w, k
    return None


def _accept_vec(auto, words, fwd, k, rows, nstates):
    count, n = words.shape
    cyc = words[:, k:]
    # one-cycle-pass end state and justice-fired flag, per start state
    endmap = np.empty((count, nstates), dtype=np.uint8)
    firemap = np.empty((count, nstates), dtype=bool)
    for s in range(nstates):
        cur = np.full(count, s, dtype=np.uint8)
        fired = np.zeros(count, dtype=bool)
        for i in range(cyc.shape[1]):
            fired |= auto.accept[cur, cyc[:, i]]
            cur = auto.delta[cur, cyc[:, i]]
        endmap[:, s] = cur
        firemap[:, s] = fired
    state = fwd[:, k].copy()
    for _ in range(nstates):  # skip the transient
        state = endmap[rows, state]
    acc = np.zeros(count, dtype=bool)
    for _ in range(nstates):  # one full plateau period is covered
        acc |= firemap[rows, state]
        state = endmap[rows, state]
    return acc


def _formula_vec(formula: L, words, luts, k: int):
    count, n = words.shape
    nxt = list(range(1, n)) + [k]
    cache: dict[L, np.ndarray] = {}

    def vals(f: L) -> np.ndarray:
        if f in cache:
            return cache[f]
        if isinstance(f, LVar):
            v = luts[f.name][words]
        elif isinstance(f, LTrue):
            v = np.ones((count, n), dtype=bool)
        elif isinstance(f, LNot):
            v = ~vals(f.operand)
        elif isinstance(f, LAnd):
            v = vals(f.left) & vals(f.right)
        elif isinstance(f, LOr):
            v = vals(f.left) | vals(f.right)
        elif isinstance(f, LX):
            c = vals(f.operand)
            v = c[:, nxt]
        elif isinstance(f, LU):
            a, b = vals(f.left), vals(f.right)
            v = np.zeros((count, n), dtype=bool)
            for _ in range(2):
                for i in reversed(range(n)):
                    v[:, i] = b[:, i] | (a[:, i] & v[:, nxt[i]])
        elif isinstance(f, LG):
            c = vals(f.operand)
            v = np.ones((count, n), dtype=bool)
            for _ in range(2):
                for i in reversed(range(n)):
                    v[:, i] = c[:, i] & v[:, nxt[i]]
        else:
            raise TypeError(f)
        cache[f] = v
        return v

    return vals(formula)[:, 0].copy()
