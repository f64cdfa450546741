"""Reduced ordered binary decision diagrams.

Hash-consed nodes, an ITE/apply operation cache, quantification, and a
monotone variable-substitution operation. No complement edges and no
dynamic reordering; canonical form means semantic equality is handle
equality within one manager.
"""
from __future__ import annotations

from dataclasses import dataclass

FALSE = 0
TRUE = 1
_TERMINAL_VAR = 1 << 30


class BddManager:
    """Owns the node store; all diagrams from one manager share it."""

    def __init__(self, num_vars: int = 0):
        self.num_vars = num_vars
        # node id -> (var, lo, hi); ids 0/1 are the terminals
        self._var = [_TERMINAL_VAR, _TERMINAL_VAR]
        self._lo = [0, 0]
        self._hi = [0, 0]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._cache: dict[tuple, int] = {}
        self.cache_enabled = True

    # -- node plumbing

    def __len__(self):
        return len(self._var)

    def _mk(self, var: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (var, lo, hi)
        found = self._unique.get(key)
        if found is not None:
            return found
        idx = len(self._var)
        self._var.append(var)
        self._lo.append(lo)
        self._hi.append(hi)
        self._unique[key] = idx
        return idx

    def _cached(self, key):
        if self.cache_enabled:
            return self._cache.get(key)
        return None

    def _store(self, key, value: int) -> int:
        if self.cache_enabled:
            self._cache[key] = value
        return value

    def clear_cache(self):
        self._cache.clear()

    # -- constructors

    @property
    def false(self) -> Bdd:
        return Bdd(self, FALSE)

    @property
    def true(self) -> Bdd:
        return Bdd(self, TRUE)

    def var(self, v: int) -> Bdd:
        if not 0 <= v < self.num_vars:
            raise ValueError(f"variable {v} out of range")
        return Bdd(self, self._mk(v, FALSE, TRUE))

    def nvar(self, v: int) -> Bdd:
        return Bdd(self, self._mk(v, TRUE, FALSE))

    def _wrap(self, idx: int) -> Bdd:
        return Bdd(self, idx)

    # -- core operations on raw indices

    def _not(self, a: int) -> int:
        if a == FALSE:
            return TRUE
        if a == TRUE:
            return FALSE
        key = ("not", a)
        hit = self._cached(key)
        if hit is not None:
            return hit
        r = self._mk(self._var[a], self._not(self._lo[a]), self._not(self._hi[a]))
        return self._store(key, r)

    def _apply(self, op: str, a: int, b: int) -> int:
        if op == "and":
            if a == FALSE or b == FALSE:
                return FALSE
            if a == TRUE:
                return b
            if b == TRUE:
                return a
            if a == b:
                return a
        elif op == "or":
            if a == TRUE or b == TRUE:
                return TRUE
            if a == FALSE:
                return b
            if b == FALSE:
                return a
            if a == b:
                return a
        elif op == "xor":
            if a == FALSE:
                return b
            if b == FALSE:
                return a
            if a == TRUE:
                return self._not(b)
            if b == TRUE:
                return self._not(a)
            if a == b:
                return FALSE
        elif op == "imp":
            if a == FALSE or b == TRUE:
                return TRUE
            if a == TRUE:
                return b
            if a == b:
                return TRUE
        else:
            raise ValueError(f"unknown operator {op!r}")
        if op in ("and", "or", "xor") and a > b:
            a, b = b, a
        key = (op, a, b)
        hit = self._cached(key)
        if hit is not None:
            return hit
        va, vb = self._var[a], self._var[b]
        v = min(va, vb)
        a0, a1 = (self._lo[a], self._hi[a]) if va == v else (a, a)
        b0, b1 = (self._lo[b], self._hi[b]) if vb == v else (b, b)
        r = self._mk(v, self._apply(op, a0, b0), self._apply(op, a1, b1))
        return self._store(key, r)

    def _ite(self, c: int, t: int, e: int) -> int:
        if c == TRUE:
            return t
        if c == FALSE:
            return e
        if t == e:
            return t
        if t == TRUE and e == FALSE:
            return c
        key = ("ite", c, t, e)
        hit = self._cached(key)
        if hit is not None:
            return hit
        v = min(self._var[c], self._var[t], self._var[e])

        def co(x: int, high: bool) -> int:
            if self._var[x] != v:
                return x
            return self._hi[x] if high else self._lo[x]

        r = self._mk(v, self._ite(co(c, False), co(t, False), co(e, False)),
                     self._ite(co(c, True), co(t, True), co(e, True)))
        return self._store(key, r)

    def _exists(self, a: int, vs: tuple[int, ...]) -> int:
        if a in (FALSE, TRUE) or not vs:
            return a
        v = self._var[a]
        # drop quantified vars above the node's level
        i = 0
        while i < len(vs) and vs[i] < v:
            i += 1
        vs = vs[i:]
        if not vs:
            return a
        key = ("exists", a, vs)
        hit = self._cached(key)
        if hit is not None:
            return hit
        lo, hi = self._lo[a], self._hi[a]
        if v == vs[0]:
            rest = vs[1:]
            r = self._apply("or", self._exists(lo, rest),
                            self._exists(hi, rest))
        else:
            r = self._mk(v, self._exists(lo, vs), self._exists(hi, vs))
        return self._store(key, r)

    def _and_exists(self, a: int, b: int, vs: tuple[int, ...]) -> int:
        """exists vs. (a & b), fused to avoid the intermediate product."""
        if a == FALSE or b == FALSE:
            return FALSE
        if a == TRUE and b == TRUE:
            return TRUE
        if a > b:
            a, b = b, a
        v = min(self._var[a], self._var[b])
        i = 0
        while i < len(vs) and vs[i] < v:
            i += 1
        vs = vs[i:]
        if not vs:
            return self._apply("and", a, b)
        key = ("andex", a, b, vs)
        hit = self._cached(key)
        if hit is not None:
            return hit

        def co(x: int, high: bool) -> int:
            if self._var[x] != v:
                return x
            return self._hi[x] if high else self._lo[x]

        lo = self._and_exists(co(a, False), co(b, False), vs)
        if v == vs[0]:
            if lo == TRUE:
                r = TRUE
            else:
                r = self._apply("or", lo,
                                self._and_exists(co(a, True), co(b, True), vs))
        else:
            r = self._mk(v, lo, self._and_exists(co(a, True), co(b, True), vs))
        return self._store(key, r)

    def _compose(self, a: int, mapping: dict[int, int]) -> int:
        if a in (FALSE, TRUE):
            return a
        key = ("compose", a, tuple(sorted(mapping.items())))
        hit = self._cached(key)
        if hit is not None:
            return hit
        v = self._var[a]
        r = self._mk(mapping.get(v, v), self._compose(self._lo[a], mapping),
                     self._compose(self._hi[a], mapping))
        return self._store(key, r)


@dataclass(frozen=True)
class Bdd:
    """A handle to a diagram inside a manager."""

    mgr: BddManager
    idx: int

    def _check(self, other: "Bdd"):
        if other.mgr is not self.mgr:
            raise ValueError("operands belong to different BDD managers")

    # -- boolean algebra

    def __invert__(self) -> "Bdd":
        return Bdd(self.mgr, self.mgr._not(self.idx))

    def __and__(self, other: "Bdd") -> "Bdd":
        self._check(other)
        return Bdd(self.mgr, self.mgr._apply("and", self.idx, other.idx))

    def __or__(self, other: "Bdd") -> "Bdd":
        self._check(other)
        return Bdd(self.mgr, self.mgr._apply("or", self.idx, other.idx))

    def __xor__(self, other: "Bdd") -> "Bdd":
        self._check(other)
        return Bdd(self.mgr, self.mgr._apply("xor", self.idx, other.idx))

    def implies(self, other: "Bdd") -> "Bdd":
        self._check(other)
        return Bdd(self.mgr, self.mgr._apply("imp", self.idx, other.idx))

    def iff(self, other: "Bdd") -> "Bdd":
        return ~(self ^ other)

    def ite(self, then: "Bdd", els: "Bdd") -> "Bdd":
        self._check(then)
        self._check(els)
        return Bdd(self.mgr, self.mgr._ite(self.idx, then.idx, els.idx))

    @property
    def is_false(self) -> bool:
        return self.idx == FALSE

    @property
    def is_true(self) -> bool:
        return self.idx == TRUE

    def __bool__(self):
        raise TypeError("use .is_true / .is_false; Bdd truthiness is ambiguous")

    # -- quantification and substitution

    def exists(self, variables) -> "Bdd":
        vs = tuple(sorted(set(variables)))
        return Bdd(self.mgr, self.mgr._exists(self.idx, vs))

    def forall(self, variables) -> "Bdd":
        return ~((~self).exists(variables))

    def and_exists(self, other: "Bdd", variables) -> "Bdd":
        self._check(other)
        vs = tuple(sorted(set(variables)))
        return Bdd(self.mgr, self.mgr._and_exists(self.idx, other.idx, vs))

    def rename(self, mapping: dict[int, int]) -> "Bdd":
        """Substitute variables; the mapping must be strictly monotone on
        the diagram's support (order is preserved, no reordering done)."""
        support = sorted(self.support())
        mapped = [mapping.get(v, v) for v in support]
        if any(lo >= hi for lo, hi in zip(mapped, mapped[1:])):
            raise ValueError("rename mapping must preserve variable order")
        return Bdd(self.mgr, self.mgr._compose(self.idx, mapping))

    # -- inspection

    def support(self) -> set[int]:
        mgr = self.mgr
        seen = set()
        out: set[int] = set()
        stack = [self.idx]
        while stack:
            n = stack.pop()
            if n in (FALSE, TRUE) or n in seen:
                continue
            seen.add(n)
            out.add(mgr._var[n])
            stack.append(mgr._lo[n])
            stack.append(mgr._hi[n])
        return out

    def node_count(self) -> int:
        seen = set()
        stack = [self.idx]
        while stack:
            n = stack.pop()
            if n in (FALSE, TRUE) or n in seen:
                continue
            seen.add(n)
            stack.append(self.mgr._lo[n])
            stack.append(self.mgr._hi[n])
        return len(seen) + 1

    def eval(self, assignment: dict[int, bool]) -> bool:
        mgr = self.mgr
        n = self.idx
        while n not in (FALSE, TRUE):
            n = mgr._hi[n] if assignment.get(mgr._var[n], False) else mgr._lo[n]
        return n == TRUE

    def sat_count(self, variables) -> int:
        """Number of satisfying assignments over exactly `variables`."""
        vs = sorted(set(variables))
        missing = self.support() - set(vs)
        if missing:
            raise ValueError(f"function depends on uncounted variables {missing}")
        pos = {v: i for i, v in enumerate(vs)}
        memo: dict[int, int] = {}
        mgr = self.mgr

        def count(n: int) -> int:
            # assignments over variables strictly below n's level handled
            # by the caller's weighting
            if n == FALSE:
                return 0
            if n == TRUE:
                return 1
            if n in memo:
                return memo[n]
            v = pos[mgr._var[n]]

            def sub(child: int) -> int:
                c = count(child)
                if child in (FALSE, TRUE):
                    gap = len(vs) - v - 1
                else:
                    gap = pos[mgr._var[child]] - v - 1
                return c << gap

            r = sub(mgr._lo[n]) + sub(mgr._hi[n])
            memo[n] = r
            return r

        if self.idx in (FALSE, TRUE):
            return (1 << len(vs)) if self.idx == TRUE else 0
        return count(self.idx) << pos[self.mgr._var[self.idx]]

    def pick(self, variables) -> dict[int, bool] | None:
        """Lexicographically smallest satisfying assignment (low bits first
        preferring False), or None when unsatisfiable."""
        if self.idx == FALSE:
            return None
        vs = sorted(set(variables) | self.support())
        out: dict[int, bool] = {}
        mgr = self.mgr
        n = self.idx
        for v in vs:
            if n not in (FALSE, TRUE) and mgr._var[n] == v:
                if mgr._lo[n] != FALSE:
                    out[v] = False
                    n = mgr._lo[n]
                else:
                    out[v] = True
                    n = mgr._hi[n]
            else:
                out[v] = False
        return {v: out.get(v, False) for v in variables}

    def assignments(self, variables):
        """Yield all satisfying assignments over `variables`, in
        lexicographic order (False < True, lowest variable first)."""
        vs = sorted(set(variables))
        extra = self.support() - set(vs)
        if extra:
            raise ValueError(f"function depends on unlisted variables {extra}")
        mgr = self.mgr

        def rec(n: int, i: int, acc: dict[int, bool]):
            if n == FALSE:
                return
            if i == len(vs):
                yield dict(acc)
                return
            v = vs[i]
            if n not in (FALSE, TRUE) and mgr._var[n] == v:
                branches = ((False, mgr._lo[n]), (True, mgr._hi[n]))
            else:
                branches = ((False, n), (True, n))
            for val, child in branches:
                acc[v] = val
                yield from rec(child, i + 1, acc)
            del acc[v]

        yield from rec(self.idx, 0, {})

    def to_dot(self, var_names: dict[int, str] | None = None) -> str:
        """GraphViz rendering for debugging."""
        mgr = self.mgr
        lines = ["digraph bdd {", '  f [shape=box,label="false"];',
                 '  t [shape=box,label="true"];']
        seen = set()

        def name(n: int) -> str:
            if n == FALSE:
                return "f"
            if n == TRUE:
                return "t"
            return f"n{n}"

        def rec(n: int):
            if n in (FALSE, TRUE) or n in seen:
                return
            seen.add(n)
            v = mgr._var[n]
            label = var_names.get(v, f"x{v}") if var_names else f"x{v}"
            lines.append(f'  n{n} [label="{label}"];')
            lines.append(f"  n{n} -> {name(mgr._lo[n])} [style=dashed];")
            lines.append(f"  n{n} -> {name(mgr._hi[n])};")
            rec(mgr._lo[n])
            rec(mgr._hi[n])

        rec(self.idx)
        lines.append("}")
        return "\n".join(lines)
