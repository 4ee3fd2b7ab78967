"""Typed terms over Int/Bool/BitVec: sorts, values, sort inference, evaluation.

Terms are immutable and hashable; structural equality is the only equality.
Evaluation follows SMT-LIB semantics: Euclidean integer div/mod, total
bit-vector division (udiv by zero = all ones, urem by zero = dividend),
shifts saturating at the width, and lazy ite/and/or/=>.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping, Union


class SygusError(Exception):
    """Base class for everything this package raises on bad input."""


class SortError(SygusError):
    def __init__(self, msg: str, term=None, expected=None, found=None):
        super().__init__(msg)
        self.term = term
        self.expected = expected
        self.found = found


class UndeclaredSymbol(SygusError):
    pass


class DivisionByZero(SygusError, ArithmeticError):
    """Integer division by zero; the valuation is outside the term's safe domain."""


class UnboundUnknown(SygusError):
    pass


# ---------------------------------------------------------------------------
# Sorts and values


@dataclass(frozen=True)
class Sort:
    name: str
    width: int | None = None

    @property
    def is_bv(self) -> bool:
        return self.name == "BitVec"

    def __repr__(self):
        if self.is_bv:
            return f"(BitVec {self.width})"
        return self.name


INT = Sort("Int")
BOOL = Sort("Bool")


def bitvec(width: int) -> Sort:
    if width < 1:
        raise SortError(f"bit-vector width must be >= 1, got {width}")
    return Sort("BitVec", width)


@dataclass(frozen=True)
class BV:
    """Fixed-width unsigned bit-vector value; magnitude reduced mod 2**width."""

    width: int
    value: int

    def __post_init__(self):
        if self.width < 1:
            raise SortError(f"bit-vector width must be >= 1, got {self.width}")
        object.__setattr__(self, "value", self.value & ((1 << self.width) - 1))

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    @property
    def signed(self) -> int:
        if self.value & (1 << (self.width - 1)):
            return self.value - (1 << self.width)
        return self.value

    def __repr__(self):
        if self.width % 4 == 0:
            return "#x%0*x" % (self.width // 4, self.value)
        return "#b" + format(self.value, f"0{self.width}b")


# bool must be tested before int everywhere: bool subclasses int in Python.
Value = Union[bool, int, BV]

Valuation = Mapping[str, Value]


def value_sort(v: Value) -> Sort:
    if isinstance(v, bool):
        return BOOL
    if isinstance(v, BV):
        return bitvec(v.width)
    return INT


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    value: Value


@dataclass(frozen=True)
class Apply:
    op: str
    args: tuple["Term", ...]


@dataclass(frozen=True)
class Let:
    bindings: tuple[tuple[str, "Term"], ...]
    body: "Term"


Term = Union[Var, Lit, Apply, Let]


@dataclass(frozen=True)
class FunDef:
    """A named function: define-fun, candidate body, or unknown signature."""

    name: str
    params: tuple[tuple[str, Sort], ...]
    ret: Sort
    body: Term

    @property
    def param_sorts(self) -> tuple[Sort, ...]:
        return tuple(s for _, s in self.params)


@dataclass(frozen=True)
class FunSort:
    params: tuple[Sort, ...]
    ret: Sort


def term_size(t: Term) -> int:
    """Node count of the parse tree; a let costs 1 + one node per binding site."""
    if isinstance(t, (Var, Lit)):
        return 1
    if isinstance(t, Apply):
        return 1 + sum(term_size(a) for a in t.args)
    if isinstance(t, Let):
        return (1 + len(t.bindings)
                + sum(term_size(d) for _, d in t.bindings)
                + term_size(t.body))
    raise TypeError(f"not a term: {t!r}")


def free_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Lit):
        return frozenset()
    if isinstance(t, Apply):
        out: frozenset[str] = frozenset()
        for a in t.args:
            out |= free_vars(a)
        return out
    bound = frozenset(n for n, _ in t.bindings)
    out = free_vars(t.body) - bound
    for _, d in t.bindings:
        out |= free_vars(d)
    return out


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Apply):
        for a in t.args:
            yield from subterms(a)
    elif isinstance(t, Let):
        for _, d in t.bindings:
            yield from subterms(d)
        yield from subterms(t.body)


# ---------------------------------------------------------------------------
# Operator table

INT_NARY = {"+", "-", "*"}          # arity >= 1; unary "-" is negation
INT_DIV = {"div", "mod"}
INT_CMP = {"<", "<=", ">", ">="}
BOOL_NARY = {"and", "or"}           # arity >= 1 (the max2 listing has a 1-ary or)
BOOL_BIN = {"xor", "xnor", "nand", "nor", "iff"}
# bvshr: legacy spelling of logical shift right found in older files.
BV_BIN = {"bvand", "bvor", "bvxor", "bvadd", "bvsub", "bvmul", "bvudiv",
          "bvurem", "bvsdiv", "bvsrem", "bvshl", "bvlshr", "bvshr", "bvashr"}
BV_UN = {"bvnot", "bvneg"}
BV_CMP = {"bvult", "bvule", "bvugt", "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge"}

OPERATORS = (INT_NARY | INT_DIV | INT_CMP | BOOL_NARY | BOOL_BIN
             | BV_BIN | BV_UN | BV_CMP | {"=>", "not", "=", "ite", "true", "false"})


def _check_arity(op: str, n: int, lo: int, hi: int | None, term=None):
    if n < lo or (hi is not None and n > hi):
        raise SortError(f"{op} applied to {n} arguments", term=term)


def infer_sort(t: Term, ctx: Mapping[str, Sort | FunSort]) -> Sort:
    """Unique sort of t under ctx (variables and function signatures)."""
    if isinstance(t, Var):
        s = ctx.get(t.name)
        if s is None:
            raise UndeclaredSymbol(t.name)
        if isinstance(s, FunSort):
            raise SortError(f"{t.name} is a function, not a variable", term=t)
        return s
    if isinstance(t, Lit):
        return value_sort(t.value)
    if isinstance(t, Let):
        inner = dict(ctx)
        for name, d in t.bindings:
            inner[name] = infer_sort(d, ctx)
        return infer_sort(t.body, inner)

    op, args = t.op, t.args
    sorts = None

    def arg_sorts():
        nonlocal sorts
        if sorts is None:
            sorts = [infer_sort(a, ctx) for a in args]
        return sorts

    def require(sort: Sort):
        for a, s in zip(args, arg_sorts()):
            if s != sort:
                raise SortError(f"{op} expects {sort}", term=a, expected=sort, found=s)

    def require_bv() -> Sort:
        ss = arg_sorts()
        if not ss[0].is_bv:
            raise SortError(f"{op} expects bit-vectors", term=args[0],
                            found=ss[0])
        for a, s in zip(args, ss):
            if s != ss[0]:
                raise SortError(f"{op} operand widths differ", term=a,
                                expected=ss[0], found=s)
        return ss[0]

    if op in INT_NARY:
        _check_arity(op, len(args), 1, None, t)
        require(INT)
        return INT
    if op in INT_DIV:
        _check_arity(op, len(args), 2, 2, t)
        require(INT)
        return INT
    if op in INT_CMP:
        _check_arity(op, len(args), 2, 2, t)
        require(INT)
        return BOOL
    if op in BOOL_NARY:
        _check_arity(op, len(args), 1, None, t)
        require(BOOL)
        return BOOL
    if op == "=>":
        _check_arity(op, len(args), 2, None, t)
        require(BOOL)
        return BOOL
    if op in BOOL_BIN:
        _check_arity(op, len(args), 2, 2, t)
        require(BOOL)
        return BOOL
    if op == "not":
        _check_arity(op, len(args), 1, 1, t)
        require(BOOL)
        return BOOL
    if op == "=":
        _check_arity(op, len(args), 2, 2, t)
        ss = arg_sorts()
        if ss[0] != ss[1]:
            raise SortError("= operand sorts differ", term=t,
                            expected=ss[0], found=ss[1])
        return BOOL
    if op == "ite":
        _check_arity(op, len(args), 3, 3, t)
        ss = arg_sorts()
        if ss[0] != BOOL:
            raise SortError("ite condition must be Bool", term=args[0],
                            expected=BOOL, found=ss[0])
        if ss[1] != ss[2]:
            raise SortError("ite branch sorts differ", term=t,
                            expected=ss[1], found=ss[2])
        return ss[1]
    if op in BV_BIN:
        _check_arity(op, len(args), 2, 2, t)
        return require_bv()
    if op in BV_UN:
        _check_arity(op, len(args), 1, 1, t)
        return require_bv()
    if op in BV_CMP:
        _check_arity(op, len(args), 2, 2, t)
        require_bv()
        return BOOL

    sig = ctx.get(op)
    if isinstance(sig, FunSort):
        if len(args) != len(sig.params):
            raise SortError(f"{op} expects {len(sig.params)} arguments, got {len(args)}",
                            term=t)
        for a, s, want in zip(args, arg_sorts(), sig.params):
            if s != want:
                raise SortError(f"argument of {op} has wrong sort", term=a,
                                expected=want, found=s)
        return sig.ret
    raise UndeclaredSymbol(op)


# ---------------------------------------------------------------------------
# Evaluation


def euclidean_div(x: int, d: int) -> int:
    if d == 0:
        raise DivisionByZero("div by zero")
    r = x % abs(d)
    return (x - r) // d


def euclidean_mod(x: int, d: int) -> int:
    if d == 0:
        raise DivisionByZero("mod by zero")
    return x % abs(d)


def _bv_udiv(a: int, b: int, mask: int) -> int:
    return mask if b == 0 else a // b


def _bv_urem(a: int, b: int) -> int:
    return a if b == 0 else a % b


def evaluate(t: Term, v: Valuation, defs: Mapping[str, FunDef] | None = None) -> Value:
    """Evaluate a sort-correct term; v must cover its free variables.

    defs resolves applied functions (non-recursive, fully applied); candidate
    bodies for unknowns can be passed the same way.
    """
    defs = defs or {}

    def ev(t: Term, env: Valuation) -> Value:
        if isinstance(t, Var):
            try:
                return env[t.name]
            except KeyError:
                raise UndeclaredSymbol(t.name) from None
        if isinstance(t, Lit):
            return t.value
        if isinstance(t, Let):
            inner = dict(env)
            for name, d in t.bindings:
                inner[name] = ev(d, env)  # parallel: defs see the outer env
            return ev(t.body, inner)

        op, args = t.op, t.args
        if op == "ite":
            return ev(args[1], env) if ev(args[0], env) else ev(args[2], env)
        if op == "and":
            return all(ev(a, env) for a in args)
        if op == "or":
            return any(ev(a, env) for a in args)
        if op == "=>":
            # right-associative: any false premise settles it
            for a in args[:-1]:
                if not ev(a, env):
                    return True
            return bool(ev(args[-1], env))
        if op == "not":
            return not ev(args[0], env)

        xs = [ev(a, env) for a in args]
        if op == "+":
            return sum(xs)
        if op == "-":
            if len(xs) == 1:
                return -xs[0]
            acc = xs[0]
            for x in xs[1:]:
                acc -= x
            return acc
        if op == "*":
            acc = 1
            for x in xs:
                acc *= x
            return acc
        if op == "div":
            return euclidean_div(xs[0], xs[1])
        if op == "mod":
            return euclidean_mod(xs[0], xs[1])
        if op == "<":
            return xs[0] < xs[1]
        if op == "<=":
            return xs[0] <= xs[1]
        if op == ">":
            return xs[0] > xs[1]
        if op == ">=":
            return xs[0] >= xs[1]
        if op == "=":
            return xs[0] == xs[1]
        if op == "xor":
            return xs[0] != xs[1]
        if op in ("xnor", "iff"):
            return xs[0] == xs[1]
        if op == "nand":
            return not (xs[0] and xs[1])
        if op == "nor":
            return not (xs[0] or xs[1])

        if op in BV_UN or op in BV_BIN or op in BV_CMP:
            a = xs[0]
            w, mask = a.width, a.mask
            if op == "bvnot":
                return BV(w, a.value ^ mask)
            if op == "bvneg":
                return BV(w, -a.value)
            b = xs[1]
            if op == "bvand":
                return BV(w, a.value & b.value)
            if op == "bvor":
                return BV(w, a.value | b.value)
            if op == "bvxor":
                return BV(w, a.value ^ b.value)
            if op == "bvadd":
                return BV(w, a.value + b.value)
            if op == "bvsub":
                return BV(w, a.value - b.value)
            if op == "bvmul":
                return BV(w, a.value * b.value)
            if op == "bvudiv":
                return BV(w, _bv_udiv(a.value, b.value, mask))
            if op == "bvurem":
                return BV(w, _bv_urem(a.value, b.value))
            if op == "bvsdiv":
                neg_a, neg_b = a.signed < 0, b.signed < 0
                ua = (-a.value) & mask if neg_a else a.value
                ub = (-b.value) & mask if neg_b else b.value
                q = _bv_udiv(ua, ub, mask)
                return BV(w, -q if neg_a != neg_b else q)
            if op == "bvsrem":
                neg_a, neg_b = a.signed < 0, b.signed < 0
                ua = (-a.value) & mask if neg_a else a.value
                ub = (-b.value) & mask if neg_b else b.value
                r = _bv_urem(ua, ub)
                return BV(w, -r if neg_a else r)
            if op == "bvshl":
                return BV(w, 0 if b.value >= w else a.value << b.value)
            if op in ("bvlshr", "bvshr"):
                return BV(w, 0 if b.value >= w else a.value >> b.value)
            if op == "bvashr":
                if b.value >= w:
                    return BV(w, mask if a.signed < 0 else 0)
                return BV(w, a.signed >> b.value)
            if op == "bvult":
                return a.value < b.value
            if op == "bvule":
                return a.value <= b.value
            if op == "bvugt":
                return a.value > b.value
            if op == "bvuge":
                return a.value >= b.value
            if op == "bvslt":
                return a.signed < b.signed
            if op == "bvsle":
                return a.signed <= b.signed
            if op == "bvsgt":
                return a.signed > b.signed
            if op == "bvsge":
                return a.signed >= b.signed

        f = defs.get(op)
        if f is not None:
            bound = {name: x for (name, _), x in zip(f.params, xs)}
            return ev(f.body, bound)
        raise UndeclaredSymbol(op)

    return ev(t, v)


# ---------------------------------------------------------------------------
# Substitution

_fresh_counter = itertools.count()


def _fresh(name: str) -> str:
    return f"{name}~{next(_fresh_counter)}"


def substitute(t: Term, mapping: Mapping[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution of variables."""
    if not mapping:
        return t
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if isinstance(t, Lit):
        return t
    if isinstance(t, Apply):
        return Apply(t.op, tuple(substitute(a, mapping) for a in t.args))

    new_defs = [(n, substitute(d, mapping)) for n, d in t.bindings]
    body_map = {k: v for k, v in mapping.items()
                if k not in {n for n, _ in t.bindings}}
    clash = set()
    for repl in body_map.values():
        clash |= free_vars(repl)
    renames: dict[str, Term] = {}
    bindings = []
    for n, d in new_defs:
        if n in clash:
            n2 = _fresh(n)
            renames[n] = Var(n2)
            bindings.append((n2, d))
        else:
            bindings.append((n, d))
    body = substitute(t.body, renames) if renames else t.body
    return Let(tuple(bindings), substitute(body, body_map))


def apply_fundef(f: FunDef, args: tuple[Term, ...]) -> Term:
    if len(args) != len(f.params):
        raise SortError(f"{f.name} expects {len(f.params)} arguments, got {len(args)}")
    return substitute(f.body, {name: a for (name, _), a in zip(f.params, args)})


def substitute_unknowns(t: Term, funcs: Mapping[str, FunDef],
                        unknown_names: frozenset[str] | None = None) -> Term:
    """Replace every unknown application by its candidate body (beta-reduced)."""
    names = unknown_names if unknown_names is not None else frozenset(funcs)

    def go(t: Term) -> Term:
        if isinstance(t, (Var, Lit)):
            return t
        if isinstance(t, Let):
            return Let(tuple((n, go(d)) for n, d in t.bindings), go(t.body))
        args = tuple(go(a) for a in t.args)
        if t.op in names:
            f = funcs.get(t.op)
            if f is None:
                raise UnboundUnknown(t.op)
            return apply_fundef(f, args)
        return Apply(t.op, args)

    return go(t)


def inline_defs(t: Term, defs: Mapping[str, FunDef]) -> Term:
    """Expand applications of defined functions until none remain."""
    def go(t: Term) -> Term:
        if isinstance(t, (Var, Lit)):
            return t
        if isinstance(t, Let):
            return Let(tuple((n, go(d)) for n, d in t.bindings), go(t.body))
        args = tuple(go(a) for a in t.args)
        f = defs.get(t.op)
        if f is not None:
            return go(apply_fundef(f, args))
        return Apply(t.op, args)

    return go(t)
