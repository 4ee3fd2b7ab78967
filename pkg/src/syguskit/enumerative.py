"""Enumerative CEGIS: size-ordered search with observational-equivalence
pruning against the current counterexample set.

Banks of representative subterms are grown bottom-up per (nonterminal, size);
a new term is kept only if its output vector over the induced parameter
bindings is unseen within that (nonterminal, size). Candidates are tried in
nondecreasing total size (joint size over the unknowns, compositions in
lexicographic order); the first candidate consistent with every example goes
to the verifier, a counterexample restarts enumeration from size 1 with the
refreshed pool, and Valid wins. Unpruned mode keeps every term, which makes
the returned solution minimal outright.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Mapping, Sequence

from .cegis import (ERR, Deadline, ExampleSet, Exhausted, Solved,
                    SolveOutcome, TimedOut, base_constant_pool,
                    has_nested_unknown_args, induced_bindings, is_consistent,
                    make_solution, pool_with_examples, unknown_invocations)
from .checker import (CheckStrategy, CounterExample, Valid, check_semantic,
                      default_strategy, falsified)
from .frontend import SynthProblem
from .grammar import (Enumerator, TApp, THole, TLet, TLit, TNT, TVar,
                      Template, _divisor_child, template_min_size)
from .terms import (Apply, DivisionByZero, FunDef, Let, Lit, Term, Value, Var,
                    evaluate)


@dataclass
class EnumConfig:
    max_size: int = 12
    budget_s: float = 60.0
    verifier: CheckStrategy | None = None
    prune: bool = True
    extra_pool: tuple[Value, ...] = ()


def _apply_pointwise(op: str, sigs: Sequence[tuple],
                     defs: Mapping[str, FunDef] = {}) -> tuple:
    """Compose output vectors through one operator, with the evaluator's
    laziness for ite/and/or/=> so untaken branches swallow errors."""
    n = len(sigs[0]) if sigs else 0
    out = []
    for i in range(n):
        vals = [s[i] for s in sigs]
        if op == "ite":
            c = vals[0]
            v = ERR if c is ERR else (vals[1] if c else vals[2])
        elif op == "and":
            v = True
            for x in vals:
                if x is ERR or x is False:
                    v = x
                    break
        elif op == "or":
            v = False
            for x in vals:
                if x is ERR or x is True:
                    v = x
                    break
        elif op == "=>":
            v = None
            for x in vals[:-1]:
                if x is ERR or x is False:
                    v = ERR if x is ERR else True
                    break
            if v is None:
                v = vals[-1]
        elif any(x is ERR for x in vals):
            v = ERR
        else:
            try:
                v = evaluate(Apply(op, tuple(Lit(x) for x in vals)), {}, defs)
            except DivisionByZero:
                v = ERR
        out.append(v)
    return tuple(out)


class BudgetExpired(Exception):
    pass


class Bank:
    """Per-unknown banks of (term, signature) per (nonterminal, size)."""

    def __init__(self, grammar, bindings: Sequence[Mapping[str, Value]],
                 pool: Sequence[Value], prune: bool,
                 defs: Mapping[str, FunDef] | None = None):
        self.g = grammar
        self.bindings = list(bindings)
        self.enumr = Enumerator(grammar, pool)
        self.prune = prune
        self.defs = dict(defs or {})
        self.terms: dict[str, dict[int, list[tuple[Term, tuple]]]] = {
            nt: {} for nt in grammar.rules}
        self.built_to = 0

    def build_to(self, size: int, deadline: Deadline | None = None):
        for s in range(self.built_to + 1, size + 1):
            for nt in self.g.rules:
                kept: list[tuple[Term, tuple]] = []
                seen_terms: set[Term] = set()
                seen_sigs: set[tuple] = set()
                n = 0
                for p in self.g.closed_productions(nt):
                    for term, sig in self._inst(p, s, False, {}):
                        n += 1
                        if n % 4096 == 0 and deadline is not None \
                                and deadline.expired():
                            raise BudgetExpired
                        if term in seen_terms:
                            continue
                        seen_terms.add(term)
                        if self.prune:
                            if sig in seen_sigs:
                                continue
                            seen_sigs.add(sig)
                        kept.append((term, sig))
                self.terms[nt][s] = kept
            self.built_to = s

    def start_terms(self, size: int) -> list[tuple[Term, tuple]]:
        return self.terms[self.g.start].get(size, [])

    def _leaf_sig(self, value_fn) -> tuple:
        return tuple(value_fn(b) for b in self.bindings)

    def _inst(self, tpl: Template, size: int, no_zero: bool,
              let_env: Mapping[str, tuple]) -> Iterator[tuple[Term, tuple]]:
        if isinstance(tpl, TVar):
            if size == 1:
                sig = (let_env[tpl.name] if tpl.name in let_env
                       else self._leaf_sig(lambda b: b[tpl.name]))
                yield Var(tpl.name), sig
        elif isinstance(tpl, TLit):
            if size == 1:
                yield Lit(tpl.value), self._leaf_sig(lambda b: tpl.value)
        elif isinstance(tpl, THole):
            if size == 1:
                for v in self.enumr._hole_pool(tpl.sort, no_zero):
                    yield Lit(v), self._leaf_sig(lambda b, v=v: v)
        elif isinstance(tpl, TNT):
            yield from self.terms[tpl.nt].get(size, [])
        elif isinstance(tpl, TApp):
            parts = [(c, _divisor_child(tpl.op, i))
                     for i, c in enumerate(tpl.children)]
            for combo in self._inst_seq(parts, size - 1, let_env):
                yield (Apply(tpl.op, tuple(t for t, _ in combo)),
                       _apply_pointwise(tpl.op, [s for _, s in combo],
                                        self.defs))
        else:
            yield from self._inst_let(tpl, size, let_env)

    def _inst_let(self, tpl: TLet, size: int, let_env):
        names = [n for n, _ in tpl.bindings]
        defs = [(d, False) for _, d in tpl.bindings]
        budget = size - 1 - len(tpl.bindings)
        for dcombo_budget in range(len(defs), budget):
            for dcombo in self._inst_seq(defs, dcombo_budget, let_env):
                inner = dict(let_env)
                inner.update({n: s for n, (_, s) in zip(names, dcombo)})
                for body, bsig in self._inst(tpl.body, budget - dcombo_budget,
                                             False, inner):
                    term = Let(tuple(zip(names, (t for t, _ in dcombo))), body)
                    yield term, bsig

    def _inst_seq(self, parts, budget: int, let_env) -> Iterator[list]:
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
            for first in self._inst(tpl, s, nz, let_env):
                for others in self._inst_seq(rest, budget - s, let_env):
                    yield [first] + others


def grow(grammar, bindings: Sequence[Mapping[str, Value]],
         pool: Sequence[Value], size_limit: int, prune: bool = True,
         defs: Mapping[str, FunDef] | None = None,
         ) -> dict[str, dict[int, list[tuple[Term, tuple]]]]:
    """One-shot bank construction for sizes 1..size_limit."""
    bank = Bank(grammar, bindings, pool, prune, defs)
    bank.build_to(size_limit)
    return bank.terms


# ---------------------------------------------------------------------------
# Constraint skeletons: unknown applications become slot variables so a
# candidate's consistency with E follows from its signatures alone.


class _Skeletons:
    def __init__(self, p: SynthProblem):
        self.p = p
        self.tuples = unknown_invocations(p)
        self.slot_of: dict[tuple[str, int], str] = {}
        for name, tuples in self.tuples.items():
            for ti in range(len(tuples)):
                self.slot_of[(name, ti)] = f"·{name}@{ti}"
        self.skeletons = [self._rewrite(c) for c in p.constraints]

    def _rewrite(self, t: Term) -> Term:
        if isinstance(t, Apply):
            if t.op in self.tuples:
                ti = self.tuples[t.op].index(t.args)
                return Var(self.slot_of[(t.op, ti)])
            return Apply(t.op, tuple(self._rewrite(a) for a in t.args))
        if isinstance(t, Let):
            return Let(tuple((n, self._rewrite(d)) for n, d in t.bindings),
                       self._rewrite(t.body))
        return t

    def consistent(self, E: ExampleSet,
                   sigs: Mapping[str, tuple],
                   index: Mapping[str, Mapping[tuple[int, int], int]]) -> bool:
        defs = self.p.defined_funs
        for ei, point in enumerate(E):
            env = dict(point)
            bad = False
            for name, tuples in self.tuples.items():
                for ti in range(len(tuples)):
                    k = index[name].get((ei, ti))
                    v = sigs[name][k] if k is not None else ERR
                    if v is ERR:
                        bad = True
                        break
                    env[self.slot_of[(name, ti)]] = v
                if bad:
                    break
            if bad or any(falsified(c, env, defs) for c in self.skeletons):
                return False
        return True


def _compositions(total: int, mins: Sequence[int]) -> Iterator[tuple[int, ...]]:
    if len(mins) == 1:
        if total >= mins[0]:
            yield (total,)
        return
    head_max = total - sum(mins[1:])
    for s in range(mins[0], head_max + 1):
        for rest in _compositions(total - s, mins[1:]):
            yield (s,) + rest


def solve_enumerative(p: SynthProblem, cfg: EnumConfig) -> SolveOutcome:
    deadline = Deadline(cfg.budget_s)
    verifier = cfg.verifier if cfg.verifier is not None else default_strategy(p)
    names = list(p.unknowns)
    mins = []
    for n in names:
        g = p.unknowns[n].grammar
        m = g.min_sizes()[g.start]
        if m == math.inf:
            return Exhausted(cfg.max_size)
        mins.append(int(m))

    naive = has_nested_unknown_args(p)
    skel = None if naive else _Skeletons(p)
    base_pool = tuple(base_constant_pool(p)) + tuple(cfg.extra_pool)
    E = ExampleSet()

    while True:
        pool = pool_with_examples(base_pool, E)
        banks: dict[str, Bank] = {}
        index: dict[str, dict] = {}
        for n in names:
            bindings, idx = induced_bindings(p, n, E)
            banks[n] = Bank(p.unknowns[n].grammar, bindings, pool,
                            cfg.prune and not naive, p.defined_funs)
            index[n] = idx

        restart = False
        poll = 0
        for total in range(sum(mins), cfg.max_size + 1):
            try:
                for n, m in zip(names, mins):
                    banks[n].build_to(total - (sum(mins) - m), deadline)
            except BudgetExpired:
                return TimedOut(cfg.budget_s)
            if deadline.expired():
                return TimedOut(cfg.budget_s)
            for split in _compositions(total, mins):
                pieces = [banks[n].terms[banks[n].g.start].get(s, [])
                          for n, s in zip(names, split)]
                if any(not piece for piece in pieces):
                    continue
                for combo in product(*pieces):
                    poll += 1
                    if poll % 256 == 0 and deadline.expired():
                        return TimedOut(cfg.budget_s)
                    bodies = {n: t for n, (t, _) in zip(names, combo)}
                    if naive:
                        sol = make_solution(p, bodies)
                        ok = is_consistent(p, sol.funcs, E)
                    else:
                        sigs = {n: s for n, (_, s) in zip(names, combo)}
                        ok = skel.consistent(E, sigs, index)
                        sol = None
                    if not ok:
                        continue
                    if deadline.expired():
                        return TimedOut(cfg.budget_s)
                    if sol is None:
                        sol = make_solution(p, bodies)
                    verdict = check_semantic(p, sol, verifier)
                    if isinstance(verdict, Valid):
                        sizes = dict(zip(names, split))
                        return Solved(sol, deadline.elapsed(), sizes)
                    if isinstance(verdict, CounterExample):
                        if E.add(verdict.valuation):
                            restart = True
                            break
                        continue  # stale point; keep enumerating
                if restart:
                    break
            if restart:
                break
        if not restart:
            return Exhausted(cfg.max_size)
        if deadline.expired():
            return TimedOut(cfg.budget_s)
