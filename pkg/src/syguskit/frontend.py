"""SyGuS-IF v1 frontend: problems in, canonical text out.

Parses the three competition tracks (general, conditional linear arithmetic,
invariant synthesis), desugars the invariant-track constructs into the three
verification conditions, attaches the track-default grammar to grammarless
unknowns, and prints problems and solutions back to canonical text.

Integer literals are coerced to bit-vector literals where the context fixes a
width (a grammar rule of bit-vector sort, an operand position of a bv
operator, either side of `=`/`ite` against a bit-vector), so listings like
`(bvult 0 x)` parse as written. `let` in constraint and definition bodies is
desugared by substitution; inside grammar productions it is kept structurally.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

from .grammar import (Grammar, Template, TApp, THole, TLet, TLit, TNT, TVar,
                      make_grammar)
from .sexpr import BV, SExpr, print_sexpr, read_sexprs
from .terms import (BOOL, INT, Apply, FunDef, FunSort, Lit, Sort,
                    SortError, SygusError, Term, UndeclaredSymbol, Var,
                    apply_fundef, bitvec, inline_defs, substitute)


class UnknownCommand(SygusError):
    pass


class DuplicateDeclaration(SygusError):
    pass


class MissingCheckSynth(SygusError):
    pass


class ArityMismatch(SygusError):
    pass


class MissingComponent(SygusError):
    pass


class UnsupportedDefaultSort(SygusError):
    pass


class MissingUnknown(SygusError):
    pass


class SignatureMismatch(SygusError):
    pass


class Track(enum.Enum):
    GENERAL = "general"
    LIA = "lia"
    INV = "inv"


class GrammarOrigin(enum.Enum):
    EXPLICIT = "explicit"
    DEFAULT_LIA = "default-lia"
    DEFAULT_INV_BOOL = "default-inv-bool"


Params = tuple[tuple[str, Sort], ...]


@dataclass
class UnknownFun:
    name: str
    params: Params
    ret: Sort
    grammar: Grammar | None
    origin: GrammarOrigin

    @property
    def fun_sort(self) -> FunSort:
        return FunSort(tuple(s for _, s in self.params), self.ret)


@dataclass
class SynthProblem:
    logic: str
    defined_funs: dict[str, FunDef]
    unknowns: dict[str, UnknownFun]
    universals: dict[str, Sort]
    constraints: list[Term]
    track: Track
    primed: tuple[str, ...] = ()
    inv_components: tuple[str, str, str, str] | None = None  # inv pre trans post

    def fun_sorts(self) -> dict[str, FunSort]:
        out = {n: FunSort(f.param_sorts, f.ret) for n, f in self.defined_funs.items()}
        out.update({n: u.fun_sort for n, u in self.unknowns.items()})
        return out

    def term_ctx(self) -> dict[str, Sort | FunSort]:
        ctx: dict[str, Sort | FunSort] = dict(self.universals)
        ctx.update(self.fun_sorts())
        return ctx


@dataclass
class CandidateSolution:
    funcs: dict[str, FunDef]

    def sizes(self) -> dict[str, int]:
        from .terms import term_size
        return {n: term_size(f.body) for n, f in self.funcs.items()}

    def total_size(self) -> int:
        return sum(self.sizes().values())


# ---------------------------------------------------------------------------
# Sorts


def parse_sort(sx: SExpr) -> Sort:
    if sx == "Int":
        return INT
    if sx == "Bool":
        return BOOL
    if (isinstance(sx, list) and len(sx) == 2 and sx[0] == "BitVec"
            and isinstance(sx[1], int) and not isinstance(sx[1], bool)):
        return bitvec(sx[1])
    raise SortError(f"unknown sort {print_sexpr(sx)}")


def sort_to_sexpr(s: Sort) -> SExpr:
    if s.is_bv:
        return ["BitVec", s.width]
    return s.name


# ---------------------------------------------------------------------------
# Typed term construction

from .terms import (BOOL_BIN, BOOL_NARY, BV_BIN, BV_CMP, BV_UN, INT_CMP,
                    INT_DIV, INT_NARY)


def _coercible(sort: Sort) -> bool:
    return sort == INT


def _coerce_lit(term: Term, sort: Sort, sx: SExpr) -> Term:
    # only plain Int literals adapt to a bit-vector context
    if isinstance(term, Lit) and isinstance(term.value, int) \
            and not isinstance(term.value, bool):
        v = term.value
        if 0 <= v < (1 << sort.width):
            return Lit(BV(sort.width, v))
        raise SortError(f"literal {v} does not fit in {sort}", found=INT,
                        expected=sort)
    raise SortError(f"expected {sort}, got Int: {print_sexpr(sx)}",
                    expected=sort, found=INT)


def parse_term(sx: SExpr, variables: Mapping[str, Sort],
               funs: Mapping[str, FunSort],
               expected: Sort | None = None) -> tuple[Term, Sort]:
    """Build a typed term from concrete syntax; returns (term, sort)."""

    def go(sx: SExpr, expected: Sort | None) -> tuple[Term, Sort]:
        if isinstance(sx, bool):
            return _done(Lit(sx), BOOL, expected, sx)
        if isinstance(sx, BV):
            return _done(Lit(sx), bitvec(sx.width), expected, sx)
        if isinstance(sx, int):
            if expected is not None and expected.is_bv:
                return _coerce_lit(Lit(sx), expected, sx), expected
            return _done(Lit(sx), INT, expected, sx)
        if isinstance(sx, str):
            s = variables.get(sx)
            if s is not None:
                return _done(Var(sx), s, expected, sx)
            f = funs.get(sx)
            if f is not None and not f.params:
                return _done(Apply(sx, ()), f.ret, expected, sx)
            raise UndeclaredSymbol(sx)
        if not sx or not isinstance(sx[0], str):
            raise SortError(f"cannot apply {print_sexpr(sx)}")
        return app(sx, expected)

    def _done(t: Term, s: Sort, expected: Sort | None, sx: SExpr):
        if expected is not None and s != expected:
            raise SortError(f"expected {expected}, got {s}: {print_sexpr(sx)}",
                            expected=expected, found=s)
        return t, s

    def unify_bv(items: list[tuple[SExpr, Term, Sort]], width_hint: Sort | None):
        """Re-parse Int-literal operands once some operand fixes a width."""
        w = next((s for _, _, s in items if s.is_bv), None) or width_hint
        if w is None or not w.is_bv:
            raise SortError("cannot determine bit-vector width of "
                            + " ".join(print_sexpr(x) for x, _, _ in items))
        out = []
        for sx, t, s in items:
            if s.is_bv:
                if s != w:
                    raise SortError(f"operand widths differ: {s} vs {w}",
                                    expected=w, found=s)
                out.append(t)
            elif _coercible(s):
                t2, _ = go(sx, w)
                out.append(t2)
            else:
                raise SortError(f"expected {w}, got {s}: {print_sexpr(sx)}",
                                expected=w, found=s)
        return out, w

    def unify_pair(a, b):
        (sxa, ta, sa), (sxb, tb, sb) = a, b
        if sa == sb:
            return ta, tb, sa
        if sa.is_bv and _coercible(sb):
            tb, _ = go(sxb, sa)
            return ta, tb, sa
        if sb.is_bv and _coercible(sa):
            ta, _ = go(sxa, sb)
            return ta, tb, sb
        raise SortError(f"operand sorts differ: {sa} vs {sb}",
                        expected=sa, found=sb)

    def app(sx: list, expected: Sort | None) -> tuple[Term, Sort]:
        op, raw = sx[0], sx[1:]

        if op == "let":
            if len(sx) != 3 or not isinstance(sx[1], list):
                raise SortError(f"malformed let: {print_sexpr(sx)}")
            binds = []
            for b in sx[1]:
                if not (isinstance(b, list) and len(b) == 2
                        and isinstance(b[0], str)):
                    raise SortError(f"malformed let binding: {print_sexpr(b)}")
                d, ds = go(b[1], None)
                binds.append((b[0], d, ds))
            inner = dict(variables)
            inner.update({n: s for n, _, s in binds})
            body, bs = parse_term(sx[2], inner, funs, expected)
            return substitute(body, {n: d for n, d, _ in binds}), bs

        def arity(lo, hi=None):
            if len(raw) < lo or (hi is not None and len(raw) > hi):
                raise SortError(f"{op} applied to {len(raw)} arguments: "
                                + print_sexpr(sx))

        if op in INT_NARY:
            arity(1)
            args = [go(a, INT)[0] for a in raw]
            if op == "-" and len(args) == 1 and isinstance(args[0], Lit):
                return _done(Lit(-args[0].value), INT, expected, sx)
            return _done(Apply(op, tuple(args)), INT, expected, sx)
        if op in INT_DIV:
            arity(2, 2)
            return _done(Apply(op, tuple(go(a, INT)[0] for a in raw)),
                         INT, expected, sx)
        if op in INT_CMP:
            arity(2, 2)
            return _done(Apply(op, tuple(go(a, INT)[0] for a in raw)),
                         BOOL, expected, sx)
        if op in BOOL_NARY or op == "=>" or op in BOOL_BIN or op == "not":
            if op in BOOL_NARY:
                arity(1)
            elif op == "=>":
                arity(2)
            elif op == "not":
                arity(1, 1)
            else:
                arity(2, 2)
            return _done(Apply(op, tuple(go(a, BOOL)[0] for a in raw)),
                         BOOL, expected, sx)
        if op in BV_BIN or op in BV_UN or op in BV_CMP:
            arity(1, 1) if op in BV_UN else arity(2, 2)
            hint = expected if (expected is not None and expected.is_bv
                                and op not in BV_CMP) else None
            items = [(a, *go(a, None)) for a in raw]
            args, w = unify_bv(items, hint)
            out_sort = BOOL if op in BV_CMP else w
            return _done(Apply(op, tuple(args)), out_sort, expected, sx)
        if op == "=":
            arity(2, 2)
            ta, tb, _ = unify_pair((raw[0], *go(raw[0], None)),
                                   (raw[1], *go(raw[1], None)))
            return _done(Apply("=", (ta, tb)), BOOL, expected, sx)
        if op == "ite":
            arity(3, 3)
            cond = go(raw[0], BOOL)[0]
            ta, tb, s = unify_pair((raw[1], *go(raw[1], expected)),
                                   (raw[2], *go(raw[2], None)))
            return _done(Apply("ite", (cond, ta, tb)), s, expected, sx)

        f = funs.get(op)
        if f is None:
            raise UndeclaredSymbol(op)
        if len(raw) != len(f.params):
            raise SortError(f"{op} expects {len(f.params)} arguments, "
                            f"got {len(raw)}: {print_sexpr(sx)}")
        args = tuple(go(a, want)[0] for a, want in zip(raw, f.params))
        return _done(Apply(op, args), f.ret, expected, sx)

    return go(sx, expected)


# ---------------------------------------------------------------------------
# Grammar concrete syntax


def parse_grammar(sx: SExpr, params: Params,
                  funs: Mapping[str, FunSort]) -> Grammar:
    if not (isinstance(sx, list) and sx
            and all(isinstance(r, list) and len(r) == 3 for r in sx)):
        raise SortError(f"malformed grammar: {print_sexpr(sx)}")
    nt_sorts: dict[str, Sort] = {}
    for r in sx:
        if not isinstance(r[0], str):
            raise SortError(f"malformed nonterminal: {print_sexpr(r)}")
        if r[0] in nt_sorts:
            raise DuplicateDeclaration(f"nonterminal {r[0]}")
        nt_sorts[r[0]] = parse_sort(r[1])
    param_sorts = dict(params)
    rules = []
    for r in sx:
        nt, sort = r[0], nt_sorts[r[0]]
        if not isinstance(r[2], list):
            raise SortError(f"malformed production list: {print_sexpr(r)}")
        prods = [parse_template(p, nt_sorts, param_sorts, funs, {}, sort)[0]
                 for p in r[2]]
        rules.append((nt, sort, prods))
    return make_grammar(sx[0][0], rules, param_sorts, funs)


def parse_template(sx: SExpr, nts: Mapping[str, Sort],
                   params: Mapping[str, Sort], funs: Mapping[str, FunSort],
                   let_env: Mapping[str, Sort],
                   expected: Sort | None) -> tuple[Template, Sort]:
    def done(tpl: Template, s: Sort):
        if expected is not None and s != expected:
            if (s == INT and expected.is_bv and isinstance(tpl, TLit)
                    and not isinstance(tpl.value, bool)
                    and 0 <= tpl.value < (1 << expected.width)):
                return TLit(BV(expected.width, tpl.value)), expected
            raise SortError(f"expected {expected}, got {s}: {print_sexpr(sx)}",
                            expected=expected, found=s)
        return tpl, s

    if isinstance(sx, bool):
        return done(TLit(sx), BOOL)
    if isinstance(sx, BV):
        return done(TLit(sx), bitvec(sx.width))
    if isinstance(sx, int):
        return done(TLit(sx), INT)
    if isinstance(sx, str):
        if sx in let_env:
            return done(TVar(sx), let_env[sx])
        if sx in nts:
            return done(TNT(sx), nts[sx])
        if sx in params:
            return done(TVar(sx), params[sx])
        f = funs.get(sx)
        if f is not None and not f.params:
            return done(TApp(sx, ()), f.ret)
        raise UndeclaredSymbol(sx)
    if not sx or not isinstance(sx[0], str):
        raise SortError(f"malformed production: {print_sexpr(sx)}")

    op = sx[0]
    if op == "Constant":
        if len(sx) != 2:
            raise SortError(f"malformed constant hole: {print_sexpr(sx)}")
        s = parse_sort(sx[1])
        return done(THole(s), s)
    if op == "Variable":
        raise UnknownCommand("(Variable ...) grammar terminals are not supported")
    if op == "let":
        if len(sx) != 3 or not isinstance(sx[1], list):
            raise SortError(f"malformed let production: {print_sexpr(sx)}")
        binds = []
        inner = dict(let_env)
        for b in sx[1]:
            if not (isinstance(b, list) and len(b) == 2 and isinstance(b[0], str)):
                raise SortError(f"malformed let binding: {print_sexpr(b)}")
            d, ds = parse_template(b[1], nts, params, funs, let_env, None)
            binds.append((b[0], d))
            inner[b[0]] = ds
        body, bs = parse_template(sx[2], nts, params, funs, inner, expected)
        return TLet(tuple(binds), body), bs

    raw = sx[1:]
    children = [parse_template(a, nts, params, funs, let_env, None) for a in raw]
    if op in BV_BIN or op in BV_UN or op in BV_CMP:
        w = next((s for _, s in children if s.is_bv), None)
        if w is None and expected is not None and expected.is_bv \
                and op not in BV_CMP:
            w = expected
        if w is None:
            raise SortError(f"cannot determine width: {print_sexpr(sx)}")
        fixed = []
        for (tpl, s), a in zip(children, raw):
            if s == INT:
                tpl, s = parse_template(a, nts, params, funs, let_env, w)
            if s != w:
                raise SortError(f"operand widths differ in {print_sexpr(sx)}",
                                expected=w, found=s)
            fixed.append(tpl)
        return done(TApp(op, tuple(fixed)),
                    BOOL if op in BV_CMP else w)
    if op in ("=", "ite"):
        idx = (0, 1) if op == "=" else (1, 2)
        a, b = children[idx[0]], children[idx[1]]
        if a[1] != b[1]:
            if a[1].is_bv and b[1] == INT:
                children[idx[1]] = parse_template(raw[idx[1]], nts, params,
                                                  funs, let_env, a[1])
            elif b[1].is_bv and a[1] == INT:
                children[idx[0]] = parse_template(raw[idx[0]], nts, params,
                                                  funs, let_env, b[1])
    tpl = TApp(op, tuple(t for t, _ in children))
    return done(tpl, _template_result_sort(op, [s for _, s in children], funs, sx))


def _template_result_sort(op: str, child_sorts: list[Sort],
                          funs: Mapping[str, FunSort], sx: SExpr) -> Sort:
    from .terms import infer_sort
    ctx: dict[str, Sort | FunSort] = {f"·{i}": s for i, s in enumerate(child_sorts)}
    ctx.update(funs)
    probe = Apply(op, tuple(Var(f"·{i}") for i in range(len(child_sorts))))
    try:
        return infer_sort(probe, ctx)
    except SortError as e:
        raise SortError(f"{e} in {print_sexpr(sx)}") from None


# ---------------------------------------------------------------------------
# Default grammar (conditional linear integer arithmetic)


def default_grammar(params: Params, ret: Sort) -> Grammar:
    """The LIA/INV-track grammar: linear arithmetic with ite, a constant hole,
    and the full set of Boolean connectives."""
    if ret not in (INT, BOOL):
        raise UnsupportedDefaultSort(f"default grammar cannot produce {ret}")
    bad = [n for n, s in params if s != INT]
    if bad:
        raise UnsupportedDefaultSort(
            f"default grammar requires Int parameters, got {bad}")
    si, sb, ci = TNT("StartInt"), TNT("StartBool"), TNT("ConstantInt")
    int_prods: list[Template] = [TVar(n) for n, _ in params]
    int_prods += [
        ci,
        TApp("+", (si, si)),
        TApp("-", (si, si)),
        TApp("*", (si, ci)),
        TApp("*", (ci, si)),
        TApp("div", (si, ci)),
        TApp("mod", (si, ci)),
        TApp("ite", (sb, si, si)),
    ]
    bool_prods: list[Template] = [
        TLit(True),
        TLit(False),
        TApp("and", (sb, sb)),
        TApp("or", (sb, sb)),
        TApp("=>", (sb, sb)),
        TApp("xor", (sb, sb)),
        TApp("xnor", (sb, sb)),
        TApp("nand", (sb, sb)),
        TApp("nor", (sb, sb)),
        TApp("iff", (sb, sb)),
        TApp("not", (sb,)),
        TApp("=", (sb, sb)),
        TApp("<=", (si, si)),
        TApp("=", (si, si)),
        TApp(">=", (si, si)),
        TApp(">", (si, si)),
        TApp("<", (si, si)),
    ]
    rules = [("StartInt", INT, int_prods),
             ("ConstantInt", INT, [THole(INT)]),
             ("StartBool", BOOL, bool_prods)]
    start = "StartInt" if ret == INT else "StartBool"
    return make_grammar(start, rules, dict(params))


def attach_default_grammar(u: UnknownFun, track: Track) -> UnknownFun:
    """Fill in the track-default grammar for a grammarless unknown."""
    if u.grammar is not None:
        return u
    origin = (GrammarOrigin.DEFAULT_INV_BOOL if u.ret == BOOL
              else GrammarOrigin.DEFAULT_LIA)
    g = default_grammar(u.params, u.ret)
    return UnknownFun(u.name, u.params, u.ret, g, origin)


# ---------------------------------------------------------------------------
# Problem parsing


def _parse_params(sx: SExpr) -> Params:
    if not isinstance(sx, list):
        raise SortError(f"malformed parameter list: {print_sexpr(sx)}")
    out = []
    for p in sx:
        if not (isinstance(p, list) and len(p) == 2 and isinstance(p[0], str)):
            raise SortError(f"malformed parameter: {print_sexpr(p)}")
        out.append((p[0], parse_sort(p[1])))
    names = [n for n, _ in out]
    if len(set(names)) != len(names):
        raise DuplicateDeclaration(f"repeated parameter in {print_sexpr(sx)}")
    return tuple(out)


def parse_problem(cmds: Sequence[SExpr]) -> SynthProblem:
    logic: str | None = None
    defined: dict[str, FunDef] = {}
    unknowns: dict[str, UnknownFun] = {}
    universals: dict[str, Sort] = {}
    constraints: list[Term] = []
    primed: list[str] = []
    inv_name: str | None = None
    inv_constraint: tuple[str, str, str, str] | None = None
    saw_check = False

    def declare(name: str):
        if name in defined or name in unknowns or name in universals:
            raise DuplicateDeclaration(name)

    def fun_sorts() -> dict[str, FunSort]:
        out = {n: FunSort(f.param_sorts, f.ret) for n, f in defined.items()}
        out.update({n: u.fun_sort for n, u in unknowns.items()})
        return out

    for cmd in cmds:
        if saw_check:
            raise MissingCheckSynth("(check-synth) must be the final command")
        if not (isinstance(cmd, list) and cmd and isinstance(cmd[0], str)):
            raise UnknownCommand(print_sexpr(cmd))
        head = cmd[0]

        if head == "set-logic":
            if logic is not None:
                raise DuplicateDeclaration("set-logic")
            if len(cmd) != 2 or not isinstance(cmd[1], str):
                raise UnknownCommand(print_sexpr(cmd))
            logic = cmd[1]
        elif head == "define-fun":
            if len(cmd) != 5 or not isinstance(cmd[1], str):
                raise UnknownCommand(print_sexpr(cmd))
            name, params, ret = cmd[1], _parse_params(cmd[2]), parse_sort(cmd[3])
            declare(name)
            body, _ = parse_term(cmd[4], dict(params), fun_sorts(), ret)
            defined[name] = FunDef(name, params, ret, body)
        elif head in ("declare-var", "declare-primed-var"):
            if len(cmd) != 3 or not isinstance(cmd[1], str):
                raise UnknownCommand(print_sexpr(cmd))
            name, sort = cmd[1], parse_sort(cmd[2])
            declare(name)
            universals[name] = sort
            if head == "declare-primed-var":
                declare(name + "!")
                universals[name + "!"] = sort
                primed.append(name)
        elif head == "synth-fun":
            if len(cmd) not in (4, 5) or not isinstance(cmd[1], str):
                raise UnknownCommand(print_sexpr(cmd))
            name, params, ret = cmd[1], _parse_params(cmd[2]), parse_sort(cmd[3])
            declare(name)
            grammar = None
            if len(cmd) == 5:
                grammar = parse_grammar(cmd[4], params, fun_sorts())
                if grammar.start_sort != ret:
                    raise SortError(f"grammar of {name} starts at "
                                    f"{grammar.start_sort}, function returns {ret}")
            unknowns[name] = UnknownFun(name, params, ret, grammar,
                                        GrammarOrigin.EXPLICIT if grammar
                                        else GrammarOrigin.DEFAULT_LIA)
        elif head == "synth-inv":
            if len(cmd) != 3 or not isinstance(cmd[1], str):
                raise UnknownCommand(print_sexpr(cmd))
            if inv_name is not None:
                raise DuplicateDeclaration("synth-inv")
            name, params = cmd[1], _parse_params(cmd[2])
            declare(name)
            inv_name = name
            # invariants are predicates: Bool return, default grammar
            unknowns[name] = UnknownFun(name, params, BOOL, None,
                                        GrammarOrigin.DEFAULT_INV_BOOL)
        elif head == "constraint":
            if len(cmd) != 2:
                raise UnknownCommand(print_sexpr(cmd))
            term, _ = parse_term(cmd[1], universals, fun_sorts(), BOOL)
            constraints.append(term)
        elif head == "inv-constraint":
            if len(cmd) != 5 or not all(isinstance(a, str) for a in cmd[1:]):
                raise UnknownCommand(print_sexpr(cmd))
            if inv_constraint is not None:
                raise DuplicateDeclaration("inv-constraint")
            inv_constraint = (cmd[1], cmd[2], cmd[3], cmd[4])
        elif head == "check-synth":
            saw_check = True
        else:
            raise UnknownCommand(head)

    if not saw_check:
        raise MissingCheckSynth("input does not end with (check-synth)")
    if logic is None:
        logic = "LIA" if inv_name or inv_constraint else "ALL"

    if inv_name or inv_constraint:
        track = Track.INV
        constraints.extend(
            _desugar_inv_constraint(inv_constraint, inv_name, defined,
                                    unknowns, universals))
    elif logic == "LIA" and any(u.grammar is None for u in unknowns.values()):
        track = Track.LIA
    else:
        track = Track.GENERAL

    for name, u in unknowns.items():
        if u.grammar is None:
            if track == Track.GENERAL:
                raise UnsupportedDefaultSort(
                    f"{name} has no grammar and the logic is not LIA")
            unknowns[name] = attach_default_grammar(u, track)

    return SynthProblem(logic, defined, unknowns, universals, constraints,
                        track, tuple(primed), inv_constraint)


def _desugar_inv_constraint(names, inv_name, defined, unknowns,
                            universals) -> list[Term]:
    """Expand (inv-constraint inv pre trans post) into the three verification
    conditions, with the component bodies inlined."""
    if names is None:
        raise MissingComponent("inv-constraint")
    if inv_name is None or names[0] != inv_name:
        raise MissingComponent(names[0] if names else "synth-inv")
    inv = unknowns[inv_name]
    comps = []
    for cname in names[1:]:
        f = defined.get(cname)
        if f is None:
            raise MissingComponent(cname)
        comps.append(f)
    pre, trans, post = comps
    n = len(inv.params)
    for f, want in ((pre, n), (trans, 2 * n), (post, n)):
        if len(f.params) != want:
            raise ArityMismatch(f"{f.name} takes {len(f.params)} arguments, "
                                f"expected {want}")
    for p, _ in inv.params:
        if p not in universals:
            raise UndeclaredSymbol(p)
        if p + "!" not in universals:
            raise UndeclaredSymbol(p + "!")
    v = tuple(Var(p) for p, _ in inv.params)
    vp = tuple(Var(p + "!") for p, _ in inv.params)
    inv_v = Apply(inv_name, v)
    inv_vp = Apply(inv_name, vp)
    return [
        Apply("=>", (apply_fundef(pre, v), inv_v)),
        Apply("=>", (Apply("and", (inv_v, apply_fundef(trans, v + vp))), inv_vp)),
        Apply("=>", (inv_v, apply_fundef(post, v))),
    ]


def read_problem(text: str) -> SynthProblem:
    return parse_problem(read_sexprs(text))


def load_problem(path) -> SynthProblem:
    with open(path, "r", encoding="utf-8") as fh:
        return read_problem(fh.read())


# ---------------------------------------------------------------------------
# Printing


def term_to_sexpr(t: Term) -> SExpr:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Lit):
        return t.value
    if isinstance(t, Apply):
        if not t.args:
            return t.op
        return [t.op, *(term_to_sexpr(a) for a in t.args)]
    return ["let", [[n, term_to_sexpr(d)] for n, d in t.bindings],
            term_to_sexpr(t.body)]


def template_to_sexpr(tpl: Template) -> SExpr:
    if isinstance(tpl, TVar):
        return tpl.name
    if isinstance(tpl, TLit):
        return tpl.value
    if isinstance(tpl, TNT):
        return tpl.nt
    if isinstance(tpl, THole):
        return ["Constant", sort_to_sexpr(tpl.sort)]
    if isinstance(tpl, TApp):
        if not tpl.children:
            return tpl.op
        return [tpl.op, *(template_to_sexpr(c) for c in tpl.children)]
    return ["let", [[n, template_to_sexpr(d)] for n, d in tpl.bindings],
            template_to_sexpr(tpl.body)]


def grammar_to_sexpr(g: Grammar) -> SExpr:
    return [[nt, sort_to_sexpr(rule.sort),
             [template_to_sexpr(p) for p in rule.productions]]
            for nt, rule in g.rules.items()]


def _params_to_sexpr(params: Params) -> SExpr:
    return [[n, sort_to_sexpr(s)] for n, s in params]


def print_problem(p: SynthProblem) -> str:
    """Canonical text; INV problems are printed back in sugared form."""
    lines = [f"(set-logic {p.logic})"]
    for f in p.defined_funs.values():
        lines.append(print_sexpr(["define-fun", f.name, _params_to_sexpr(f.params),
                                  sort_to_sexpr(f.ret), term_to_sexpr(f.body)]))
    for u in p.unknowns.values():
        if u.origin == GrammarOrigin.DEFAULT_INV_BOOL:
            lines.append(print_sexpr(["synth-inv", u.name,
                                      _params_to_sexpr(u.params)]))
        elif u.origin == GrammarOrigin.DEFAULT_LIA:
            lines.append(print_sexpr(["synth-fun", u.name,
                                      _params_to_sexpr(u.params),
                                      sort_to_sexpr(u.ret)]))
        else:
            lines.append(print_sexpr(["synth-fun", u.name,
                                      _params_to_sexpr(u.params),
                                      sort_to_sexpr(u.ret),
                                      grammar_to_sexpr(u.grammar)]))
    primed_names = {n for b in p.primed for n in (b, b + "!")}
    for base in p.primed:
        lines.append(print_sexpr(["declare-primed-var", base,
                                  sort_to_sexpr(p.universals[base])]))
    for name, sort in p.universals.items():
        if name not in primed_names:
            lines.append(print_sexpr(["declare-var", name, sort_to_sexpr(sort)]))
    if p.inv_components is not None:
        lines.append(print_sexpr(["inv-constraint", *p.inv_components]))
    else:
        for c in p.constraints:
            lines.append(print_sexpr(["constraint", term_to_sexpr(c)]))
    lines.append("(check-synth)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Solutions


def parse_solution(text: str, problem: SynthProblem) -> CandidateSolution:
    """Read `define-fun`s into a solution covering every unknown exactly once.

    Extra helper define-funs are accepted and inlined into candidate bodies.
    """
    funcs: dict[str, FunDef] = {}
    helpers: dict[str, FunDef] = {}
    base_funs = {n: FunSort(f.param_sorts, f.ret)
                 for n, f in problem.defined_funs.items()}
    for sx in read_sexprs(text):
        if not (isinstance(sx, list) and len(sx) == 5 and sx[0] == "define-fun"
                and isinstance(sx[1], str)):
            raise UnknownCommand(print_sexpr(sx))
        name, params, ret = sx[1], _parse_params(sx[2]), parse_sort(sx[3])
        ctx_funs = dict(base_funs)
        ctx_funs.update({n: FunSort(f.param_sorts, f.ret)
                         for n, f in helpers.items()})
        body, _ = parse_term(sx[4], dict(params), ctx_funs, ret)
        body = inline_defs(body, helpers)
        u = problem.unknowns.get(name)
        if u is None:
            if name in helpers or name in problem.defined_funs:
                raise DuplicateDeclaration(name)
            helpers[name] = FunDef(name, params, ret, body)
            continue
        if name in funcs:
            raise DuplicateDeclaration(name)
        if params != u.params or ret != u.ret:
            raise SignatureMismatch(
                f"{name} declared as {_params_to_sexpr(params)} -> "
                f"{sort_to_sexpr(ret)}, problem wants "
                f"{_params_to_sexpr(u.params)} -> {sort_to_sexpr(u.ret)}")
        funcs[name] = FunDef(name, params, ret, body)
    for name in problem.unknowns:
        if name not in funcs:
            raise MissingUnknown(name)
    return CandidateSolution({n: funcs[n] for n in problem.unknowns})


def print_solution(sol: CandidateSolution) -> str:
    lines = []
    for f in sol.funcs.values():
        lines.append(print_sexpr(["define-fun", f.name, _params_to_sexpr(f.params),
                                  sort_to_sexpr(f.ret), term_to_sexpr(f.body)]))
    return "\n".join(lines) + "\n"
