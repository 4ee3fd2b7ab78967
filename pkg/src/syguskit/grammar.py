"""Grammar representation and engine: membership, sized enumeration, counting.

A production is a term-shaped template whose leaves may be concrete symbols
(the unknown's parameters), literals, nonterminal placeholders, or constant
holes. Constant holes never invent constants: every engine entry point takes
an explicit pool, and a hole in the divisor slot of div/mod draws from the
pool minus zero.

`let` templates are matched structurally (no unfolding): the bound variable
is aliased to the candidate's bound variable for the scope of the body.

Unit productions (a bare nonterminal on the right-hand side) are resolved
through a precomputed closure, so unit cycles terminate and each reachable
production contributes exactly once to counts and enumeration.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence, Union

from .terms import (Apply, FunSort, Let, Lit, Sort, SortError, SygusError,
                    Term, UndeclaredSymbol, Value, Var, infer_sort,
                    value_sort)

log = logging.getLogger(__name__)


class UnknownNonterminal(SygusError):
    pass


# ---------------------------------------------------------------------------
# Templates


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TLit:
    value: Value


@dataclass(frozen=True)
class TNT:
    nt: str


@dataclass(frozen=True)
class THole:
    sort: Sort


@dataclass(frozen=True)
class TApp:
    op: str
    children: tuple["Template", ...]


@dataclass(frozen=True)
class TLet:
    bindings: tuple[tuple[str, "Template"], ...]
    body: "Template"


Template = Union[TVar, TLit, TNT, THole, TApp, TLet]


@dataclass(frozen=True)
class Rule:
    sort: Sort
    productions: tuple[Template, ...]


@dataclass
class Grammar:
    start: str
    rules: dict[str, Rule]
    var_sorts: dict[str, Sort] = field(default_factory=dict)
    _min_sizes: dict[str, float] | None = field(
        default=None, compare=False, repr=False)
    _closures: dict[str, tuple[str, ...]] | None = field(
        default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.start not in self.rules:
            raise UnknownNonterminal(self.start)

    def rule(self, nt: str) -> Rule:
        try:
            return self.rules[nt]
        except KeyError:
            raise UnknownNonterminal(nt) from None

    @property
    def start_sort(self) -> Sort:
        return self.rules[self.start].sort

    def min_sizes(self) -> dict[str, float]:
        """Least derivable term size per nonterminal (math.inf if unproductive)."""
        if self._min_sizes is None:
            sizes = {nt: math.inf for nt in self.rules}
            changed = True
            while changed:
                changed = False
                for nt, rule in self.rules.items():
                    best = min((template_min_size(p, sizes) for p in rule.productions),
                               default=math.inf)
                    if best < sizes[nt]:
                        sizes[nt] = best
                        changed = True
            self._min_sizes = sizes
        return self._min_sizes

    def unit_closure(self, nt: str) -> tuple[str, ...]:
        """nt plus every nonterminal reachable through unit productions, BFS order."""
        if self._closures is None:
            self._closures = {}
        hit = self._closures.get(nt)
        if hit is None:
            self.rule(nt)
            order = [nt]
            seen = {nt}
            i = 0
            while i < len(order):
                for p in self.rule(order[i]).productions:
                    if isinstance(p, TNT) and p.nt not in seen:
                        seen.add(p.nt)
                        order.append(p.nt)
                i += 1
            hit = self._closures[nt] = tuple(order)
        return hit

    def closed_productions(self, nt: str) -> Iterator[Template]:
        """Non-unit productions of nt's unit closure, in deterministic order."""
        for m in self.unit_closure(nt):
            for p in self.rule(m).productions:
                if not isinstance(p, TNT):
                    yield p


def template_min_size(tpl: Template, nt_sizes: Mapping[str, float]) -> float:
    if isinstance(tpl, (TVar, TLit, THole)):
        return 1
    if isinstance(tpl, TNT):
        return nt_sizes.get(tpl.nt, math.inf)
    if isinstance(tpl, TApp):
        return 1 + sum(template_min_size(c, nt_sizes) for c in tpl.children)
    return (1 + len(tpl.bindings)
            + sum(template_min_size(d, nt_sizes) for _, d in tpl.bindings)
            + template_min_size(tpl.body, nt_sizes))


def min_derivable_size(g: Grammar, nt: str) -> float:
    if nt not in g.rules:
        raise UnknownNonterminal(nt)
    return g.min_sizes()[nt]


def check_template(tpl: Template, g: Grammar,
                   funs: Mapping[str, FunSort] | None = None,
                   let_env: Mapping[str, Sort] | None = None) -> Sort:
    """Sort of a template; raises SortError/UndeclaredSymbol on ill-typed ones."""
    funs = funs or {}
    let_env = let_env or {}
    if isinstance(tpl, TVar):
        s = let_env.get(tpl.name) or g.var_sorts.get(tpl.name)
        if s is None:
            raise UndeclaredSymbol(tpl.name)
        return s
    if isinstance(tpl, TLit):
        return value_sort(tpl.value)
    if isinstance(tpl, TNT):
        return g.rule(tpl.nt).sort
    if isinstance(tpl, THole):
        return tpl.sort
    if isinstance(tpl, TLet):
        inner = dict(let_env)
        for name, d in tpl.bindings:
            inner[name] = check_template(d, g, funs, let_env)
        return check_template(tpl.body, g, funs, inner)
    # An application: type it by pretending each child is a variable of its sort.
    child_sorts = [check_template(c, g, funs, let_env) for c in tpl.children]
    ctx: dict[str, Sort | FunSort] = {f"·{i}": s for i, s in enumerate(child_sorts)}
    ctx.update(funs)
    probe = Apply(tpl.op, tuple(Var(f"·{i}") for i in range(len(child_sorts))))
    return infer_sort(probe, ctx)


def make_grammar(start: str, rules: Sequence[tuple[str, Sort, Sequence[Template]]],
                 var_sorts: Mapping[str, Sort],
                 funs: Mapping[str, FunSort] | None = None) -> Grammar:
    """Validated construction: sort-checks every production, de-duplicates
    structural duplicates with a warning, and warns about unproductive
    nonterminals once, at load."""
    g = Grammar(start, {name: Rule(sort, tuple(prods)) for name, sort, prods in rules},
                dict(var_sorts))
    for name, rule in g.rules.items():
        seen: dict[Template, None] = {}
        for p in rule.productions:
            if p in seen:
                log.warning("duplicate production for %s dropped: %r", name, p)
                continue
            seen[p] = None
            got = check_template(p, g, funs)
            if got != rule.sort:
                raise SortError(f"production of {name} has sort {got}, "
                                f"rule declares {rule.sort}")
        g.rules[name] = Rule(rule.sort, tuple(seen))
    for nt, size in g.min_sizes().items():
        if size == math.inf:
            log.warning("nonterminal %s derives no finite term", nt)
    return g


# ---------------------------------------------------------------------------
# Membership


def derives(g: Grammar, nt: str, t: Term) -> bool:
    """True iff t is derivable from nt; constant holes accept any literal of
    their sort. Memoized on (nonterminal, subterm identity)."""
    if nt not in g.rules:
        raise UnknownNonterminal(nt)
    memo: dict[tuple[str, int], bool] = {}

    def from_nt(nt: str, t: Term) -> bool:
        key = (nt, id(t))
        hit = memo.get(key)
        if hit is None:
            hit = memo[key] = any(match(p, t, {})
                                  for p in g.closed_productions(nt))
        return hit

    def match(tpl: Template, t: Term, env: dict[str, str]) -> bool:
        if isinstance(tpl, TNT):
            return from_nt(tpl.nt, t)
        if isinstance(tpl, TVar):
            want = env.get(tpl.name, tpl.name)
            return isinstance(t, Var) and t.name == want
        if isinstance(tpl, TLit):
            return isinstance(t, Lit) and t.value == tpl.value
        if isinstance(tpl, THole):
            return isinstance(t, Lit) and value_sort(t.value) == tpl.sort
        if isinstance(tpl, TApp):
            return (isinstance(t, Apply) and t.op == tpl.op
                    and len(t.args) == len(tpl.children)
                    and all(match(c, a, env)
                            for c, a in zip(tpl.children, t.args)))
        if not (isinstance(t, Let) and len(t.bindings) == len(tpl.bindings)):
            return False
        inner = dict(env)
        for (tn, td), (cn, cd) in zip(tpl.bindings, t.bindings):
            if not match(td, cd, env):
                return False
            inner[tn] = cn
        return match(tpl.body, t.body, inner)

    return from_nt(nt, t)


# ---------------------------------------------------------------------------
# Sized enumeration, counting, uniform sampling

# Paths locate a slot's subterm inside its parent instance's term:
# int = Apply argument index, ("d", i) = i-th let binding, ("b",) = let body.
Path = tuple


def term_replace(t: Term, path: Path, sub: Term) -> Term:
    if not path:
        return sub
    step, rest = path[0], path[1:]
    if isinstance(step, int):
        args = list(t.args)
        args[step] = term_replace(args[step], rest, sub)
        return Apply(t.op, tuple(args))
    if step[0] == "d":
        bindings = list(t.bindings)
        name, d = bindings[step[1]]
        bindings[step[1]] = (name, term_replace(d, rest, sub))
        return Let(tuple(bindings), t.body)
    return Let(t.bindings, term_replace(t.body, rest, sub))


@dataclass
class SlotNode:
    """One production instance in a sampled derivation.

    own_nodes counts the term nodes this instance's template contributed, so
    choosing a slot with probability proportional to own_nodes is a uniform
    choice over parse-tree nodes.
    """
    nt: str
    term: Term
    size: int
    no_zero: bool
    own_nodes: int
    children: list[tuple[Path, "SlotNode"]]


def _divisor_child(op: str, index: int) -> bool:
    return op in ("div", "mod") and index == 1


class Enumerator:
    """Memoizing engine over one (grammar, constant pool) pair.

    enumerate() materializes de-duplicated term lists per (nonterminal, size)
    and is meant for small sizes; count() and sample() use raw derivation
    counts and stay cheap at any size.
    """

    def __init__(self, g: Grammar, pool: Sequence[Value] = ()):
        self.g = g
        self.pool = tuple(dict.fromkeys(pool))
        self._terms: dict[tuple[str, int, bool], tuple[Term, ...]] = {}
        self._counts: dict[tuple[str, int, bool], int] = {}

    def _hole_pool(self, sort: Sort, no_zero: bool) -> list[Value]:
        if sort.is_bv:
            return [v for v in self.pool if value_sort(v) == sort]
        if sort.name == "Bool":
            return [v for v in self.pool if isinstance(v, bool)]
        vals = [v for v in self.pool
                if isinstance(v, int) and not isinstance(v, bool)]
        if no_zero:
            vals = [v for v in vals if v != 0]
        return vals

    # -- counting ----------------------------------------------------------

    def count(self, nt: str, size: int, no_zero: bool = False) -> int:
        key = (nt, size, no_zero)
        hit = self._counts.get(key)
        if hit is None:
            hit = 0
            if size >= 1:
                for p in self.g.closed_productions(nt):
                    hit += self._count_tpl(p, size, no_zero)
            self._counts[key] = hit
        return hit

    def _count_tpl(self, tpl: Template, size: int, no_zero: bool) -> int:
        if isinstance(tpl, (TVar, TLit)):
            return 1 if size == 1 else 0
        if isinstance(tpl, THole):
            return len(self._hole_pool(tpl.sort, no_zero)) if size == 1 else 0
        if isinstance(tpl, TNT):
            return self.count(tpl.nt, size, no_zero)
        if isinstance(tpl, TApp):
            parts = [(c, _divisor_child(tpl.op, i))
                     for i, c in enumerate(tpl.children)]
            return self._count_seq(parts, size - 1)
        parts = [(d, False) for _, d in tpl.bindings] + [(tpl.body, False)]
        return self._count_seq(parts, size - 1 - len(tpl.bindings))

    def _count_seq(self, parts: list[tuple[Template, bool]], budget: int) -> int:
        if not parts:
            return 1 if budget == 0 else 0
        mins = [template_min_size(p, self.g.min_sizes()) for p, _ in parts]
        if math.inf in mins or sum(mins) > budget:
            return 0
        (tpl, nz), rest = parts[0], parts[1:]
        rest_min = int(sum(mins[1:]))
        total = 0
        for s in range(int(mins[0]), budget - rest_min + 1):
            c = self._count_tpl(tpl, s, nz)
            if c:
                total += c * self._count_seq(rest, budget - s)
        return total

    # -- enumeration -------------------------------------------------------

    def enumerate(self, nt: str, size: int, no_zero: bool = False) -> tuple[Term, ...]:
        """Every derivable term of exactly `size` nodes, production order then
        lexicographic size splits, structurally de-duplicated."""
        key = (nt, size, no_zero)
        hit = self._terms.get(key)
        if hit is None:
            out: dict[Term, None] = {}
            if size >= 1:
                for p in self.g.closed_productions(nt):
                    for t in self._enum_tpl(p, size, no_zero):
                        out.setdefault(t, None)
            hit = self._terms[key] = tuple(out)
        return hit

    def _enum_tpl(self, tpl: Template, size: int, no_zero: bool) -> Iterator[Term]:
        if isinstance(tpl, TVar):
            if size == 1:
                yield Var(tpl.name)
        elif isinstance(tpl, TLit):
            if size == 1:
                yield Lit(tpl.value)
        elif isinstance(tpl, THole):
            if size == 1:
                for v in self._hole_pool(tpl.sort, no_zero):
                    yield Lit(v)
        elif isinstance(tpl, TNT):
            yield from self.enumerate(tpl.nt, size, no_zero)
        elif isinstance(tpl, TApp):
            parts = [(c, _divisor_child(tpl.op, i))
                     for i, c in enumerate(tpl.children)]
            for combo in self._enum_seq(parts, size - 1):
                yield Apply(tpl.op, tuple(combo))
        else:
            parts = [(d, False) for _, d in tpl.bindings] + [(tpl.body, False)]
            names = [n for n, _ in tpl.bindings]
            for combo in self._enum_seq(parts, size - 1 - len(tpl.bindings)):
                yield Let(tuple(zip(names, combo[:-1])), combo[-1])

    def _enum_seq(self, parts: list[tuple[Template, bool]],
                  budget: int) -> Iterator[list[Term]]:
        if not parts:
            if budget == 0:
                yield []
            return
        mins = [template_min_size(p, self.g.min_sizes()) for p, _ in parts]
        if math.inf in mins or sum(mins) > budget:
            return
        (tpl, nz), rest = parts[0], parts[1:]
        rest_min = int(sum(mins[1:]))
        for s in range(int(mins[0]), budget - rest_min + 1):
            for first in self._enum_tpl(tpl, s, nz):
                for others in self._enum_seq(rest, budget - s):
                    yield [first] + others

    # -- uniform sampling (by derivation count) -----------------------------

    def sample(self, nt: str, size: int, rng: random.Random,
               no_zero: bool = False) -> SlotNode:
        total = self.count(nt, size, no_zero)
        if total == 0:
            raise SygusError(f"no derivation of {nt} at size {size}")
        pick = rng.randrange(total)
        for p in self.g.closed_productions(nt):
            c = self._count_tpl(p, size, no_zero)
            if pick < c:
                term, slots, own = self._sample_tpl(p, size, no_zero, rng, ())
                return SlotNode(nt, term, size, no_zero, own, slots)
            pick -= c
        raise AssertionError("count/sample recurrences disagree")

    def _sample_tpl(self, tpl: Template, size: int, no_zero: bool,
                    rng: random.Random, path: Path):
        if isinstance(tpl, TVar):
            return Var(tpl.name), [], 1
        if isinstance(tpl, TLit):
            return Lit(tpl.value), [], 1
        if isinstance(tpl, THole):
            vals = self._hole_pool(tpl.sort, no_zero)
            return Lit(vals[rng.randrange(len(vals))]), [], 1
        if isinstance(tpl, TNT):
            node = self.sample(tpl.nt, size, rng, no_zero)
            return node.term, [(path, node)], 0
        if isinstance(tpl, TApp):
            parts = [(c, _divisor_child(tpl.op, i))
                     for i, c in enumerate(tpl.children)]
            sizes = self._sample_split(parts, size - 1, rng)
            args, slots, own = [], [], 1
            for i, ((c, nz), s) in enumerate(zip(parts, sizes)):
                t, sub, o = self._sample_tpl(c, s, nz, rng, path + (i,))
                args.append(t)
                slots.extend(sub)
                own += o
            return Apply(tpl.op, tuple(args)), slots, own
        parts = [(d, False) for _, d in tpl.bindings] + [(tpl.body, False)]
        sizes = self._sample_split(parts, size - 1 - len(tpl.bindings), rng)
        pieces, slots, own = [], [], 1 + len(tpl.bindings)
        for i, ((c, nz), s) in enumerate(zip(parts, sizes)):
            sub_path = (path + (("d", i),) if i < len(tpl.bindings)
                        else path + (("b",),))
            t, sub, o = self._sample_tpl(c, s, nz, rng, sub_path)
            pieces.append(t)
            slots.extend(sub)
            own += o
        names = [n for n, _ in tpl.bindings]
        return Let(tuple(zip(names, pieces[:-1])), pieces[-1]), slots, own

    def _sample_split(self, parts: list[tuple[Template, bool]], budget: int,
                      rng: random.Random) -> list[int]:
        sizes = []
        for i, (tpl, nz) in enumerate(parts):
            rest = parts[i + 1:]
            lo = template_min_size(tpl, self.g.min_sizes())
            rest_min = int(sum(template_min_size(p, self.g.min_sizes())
                               for p, _ in rest))
            choices, weights = [], []
            for s in range(int(lo), budget - rest_min + 1):
                w = self._count_tpl(tpl, s, nz) * self._count_seq(rest, budget - s)
                if w:
                    choices.append(s)
                    weights.append(w)
            s = choices[0] if len(choices) == 1 else rng.choices(choices, weights)[0]
            sizes.append(s)
            budget -= s
        return sizes


def enumerate_terms(g: Grammar, nt: str, size: int,
                    pool: Sequence[Value] = ()) -> tuple[Term, ...]:
    """One-shot sized enumeration (see Enumerator for repeated use)."""
    return Enumerator(g, pool).enumerate(nt, size)
