"""The two solution post-processors: grammar adherence, then semantics.

The semantic check substitutes the candidate into every constraint and either
searches for a counterexample internally (exhaustive over a small grid, or
seeded random sampling) or asks an external SMT solver to refute the negated
conjunction. Internal Valid verdicts are only valid-on-budget and are never
silently upgraded: VerificationResult.Valid carries a `certified` flag that
only an external `unsat` sets.

A point where evaluation raises (Int division by zero) counts as falsified.
"""

from __future__ import annotations

import enum
import itertools
import random
import shlex
import subprocess
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence, Union

from .frontend import (CandidateSolution, GrammarOrigin, SynthProblem, Track,
                       term_to_sexpr)
from .grammar import derives
from .sexpr import BV, SExpr, print_sexpr, read_sexprs
from .terms import (BOOL, INT, Apply, DivisionByZero, FunDef, Lit, Sort,
                    SygusError, Term, Value, Var, evaluate,
                    substitute_unknowns)


class UnsupportedLogic(SygusError):
    pass


# ---------------------------------------------------------------------------
# Verdicts


class UnknownReason(enum.Enum):
    BUDGET = "budget"
    SOLVER_UNAVAILABLE = "external solver unavailable"
    SOLVER_UNKNOWN = "external solver answered unknown"


@dataclass(frozen=True)
class Valid:
    certified: bool = False  # True only for an external solver's unsat


@dataclass(frozen=True)
class CounterExample:
    valuation: dict
    constraint_index: int

    def __iter__(self):  # convenient unpacking in tests
        return iter((self.valuation, self.constraint_index))


@dataclass(frozen=True)
class Unknown:
    reason: UnknownReason


VerificationResult = Union[Valid, CounterExample, Unknown]


# ---------------------------------------------------------------------------
# Strategies


@dataclass(frozen=True)
class ExhaustiveSmall:
    int_lo: int = -8
    int_hi: int = 8
    bv_width_cap: int = 10


@dataclass(frozen=True)
class RandomSample:
    count: int
    seed: int
    # narrow enough that equality-guarded premises get hit by collisions
    int_lo: int = -20
    int_hi: int = 20


@dataclass(frozen=True)
class ExternalSMT:
    command: str
    timeout_s: float = 60.0


@dataclass(frozen=True)
class Layered:
    stages: tuple["CheckStrategy", ...]


CheckStrategy = Union[ExhaustiveSmall, RandomSample, ExternalSMT, Layered]


def grid_points(universals: Mapping[str, Sort], strat: ExhaustiveSmall) -> int | None:
    """Number of grid points, or None if some domain exceeds the caps."""
    total = 1
    for sort in universals.values():
        if sort == INT:
            total *= strat.int_hi - strat.int_lo + 1
        elif sort == BOOL:
            total *= 2
        elif sort.is_bv and sort.width <= strat.bv_width_cap:
            total *= 1 << sort.width
        else:
            return None
    return total


def default_strategy(p: SynthProblem, smt_command: str | None = None,
                     max_grid: int = 300_000, samples: int = 20_000,
                     seed: int = 0) -> CheckStrategy:
    """Exhaustive when the default grid is small, else seeded sampling; an
    external solver, when configured, is layered last.

    Sampling runs twice: over a tiny domain first (collisions refute the
    equality-guarded premises invariant problems are full of), then wide.
    """
    small = ExhaustiveSmall()
    stages: list[CheckStrategy] = []
    pts = grid_points(p.universals, small)
    if pts is not None and pts <= max_grid:
        stages.append(small)
    else:
        stages.append(RandomSample(samples, seed, int_lo=-2, int_hi=2))
        stages.append(RandomSample(samples, seed + 1))
    if smt_command:
        stages.append(ExternalSMT(smt_command))
    return stages[0] if len(stages) == 1 else Layered(tuple(stages))


# ---------------------------------------------------------------------------
# Post-processor 1: grammar adherence


def check_syntactic(p: SynthProblem, s: CandidateSolution) -> dict[str, bool]:
    out = {}
    for name, u in p.unknowns.items():
        body = s.funcs[name].body
        out[name] = derives(u.grammar, u.grammar.start, body)
    return out


# ---------------------------------------------------------------------------
# Post-processor 2: semantics


def falsified(constraint: Term, valuation: Mapping[str, Value],
              defs: Mapping[str, FunDef]) -> bool:
    """False result or an evaluation error both count against the candidate."""
    try:
        return evaluate(constraint, valuation, defs) is False
    except DivisionByZero:
        return True


def _violated_index(constraints: Sequence[Term], valuation, defs) -> int | None:
    for i, c in enumerate(constraints):
        if falsified(c, valuation, defs):
            return i
    return None


def substituted_constraints(p: SynthProblem, s: CandidateSolution) -> list[Term]:
    names = frozenset(p.unknowns)
    return [substitute_unknowns(c, s.funcs, names) for c in p.constraints]


def _int_domain(lo: int, hi: int) -> list[int]:
    return list(range(lo, hi + 1))


def _grid(universals: Mapping[str, Sort],
          strat: ExhaustiveSmall) -> Iterator[dict] | None:
    domains = []
    for name, sort in universals.items():
        if sort == INT:
            domains.append([(name, v) for v in _int_domain(strat.int_lo, strat.int_hi)])
        elif sort == BOOL:
            domains.append([(name, False), (name, True)])
        elif sort.is_bv and sort.width <= strat.bv_width_cap:
            domains.append([(name, BV(sort.width, v)) for v in range(1 << sort.width)])
        else:
            return None
    return (dict(combo) for combo in itertools.product(*domains))


def _draw(sort: Sort, rng: random.Random, strat: RandomSample) -> Value:
    if sort == INT:
        return rng.randint(strat.int_lo, strat.int_hi)
    if sort == BOOL:
        return rng.random() < 0.5
    return BV(sort.width, rng.getrandbits(sort.width))


def check_semantic(p: SynthProblem, s: CandidateSolution,
                   strat: CheckStrategy) -> VerificationResult:
    constraints = substituted_constraints(p, s)
    return _check_constraints(p, constraints, strat)


def _check_constraints(p: SynthProblem, constraints: Sequence[Term],
                       strat: CheckStrategy) -> VerificationResult:
    defs = p.defined_funs

    if isinstance(strat, ExhaustiveSmall):
        grid = _grid(p.universals, strat)
        if grid is None:
            return Unknown(UnknownReason.BUDGET)
        for point in grid:
            idx = _violated_index(constraints, point, defs)
            if idx is not None:
                return CounterExample(point, idx)
        return Valid(certified=False)

    if isinstance(strat, RandomSample):
        rng = random.Random(strat.seed)
        names = list(p.universals)
        for _ in range(strat.count):
            point = {n: _draw(p.universals[n], rng, strat) for n in names}
            idx = _violated_index(constraints, point, defs)
            if idx is not None:
                return CounterExample(point, idx)
        return Valid(certified=False)

    if isinstance(strat, ExternalSMT):
        return _check_external(p, constraints, strat)

    provisional: Valid | None = None
    unknown = Unknown(UnknownReason.BUDGET)
    for stage in strat.stages:
        r = _check_constraints(p, constraints, stage)
        if isinstance(r, CounterExample):
            return r
        if isinstance(r, Valid):
            if r.certified:
                return r
            provisional = r
        else:
            unknown = r
    return provisional if provisional is not None else unknown


# ---------------------------------------------------------------------------
# SMT-LIB emission and the external solver


_SMT_LOGICS = {"LIA": "LIA", "BV": "QF_BV"}


def _smt_sort(s: Sort) -> SExpr:
    if s.is_bv:
        return ["_", "BitVec", s.width]
    return s.name


def _smt_term(t: Term) -> SExpr:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Lit):
        v = t.value
        if isinstance(v, bool) or isinstance(v, BV):
            return v
        return ["-", -v] if v < 0 else v
    if isinstance(t, Apply):
        op, args = t.op, t.args
        if op in ("and", "or", "+", "*") and len(args) == 1:
            return _smt_term(args[0])
        if op == "bvshr":
            op = "bvlshr"
        elif op in ("iff", "xnor"):
            return ["=", *(_smt_term(a) for a in args)]
        elif op == "nand":
            return ["not", ["and", *(_smt_term(a) for a in args)]]
        elif op == "nor":
            return ["not", ["or", *(_smt_term(a) for a in args)]]
        if not args:
            return op
        return [op, *(_smt_term(a) for a in args)]
    return ["let", [[n, _smt_term(d)] for n, d in t.bindings], _smt_term(t.body)]


def _emit_script(p: SynthProblem, constraints: Sequence[Term]) -> str:
    logic = _SMT_LOGICS.get(p.logic)
    if logic is None:
        raise UnsupportedLogic(p.logic)
    from .terms import inline_defs
    inlined = [inline_defs(c, p.defined_funs) for c in constraints]
    lines = [f"(set-logic {logic})"]
    for name, sort in p.universals.items():
        lines.append(print_sexpr(["declare-fun", name, [], _smt_sort(sort)]))
    body: SExpr = (_smt_term(inlined[0]) if len(inlined) == 1
                   else ["and", *(_smt_term(c) for c in inlined)])
    lines.append(print_sexpr(["assert", ["not", body]]))
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


def emit_smtlib(p: SynthProblem, s: CandidateSolution) -> str:
    """A complete SMT-LIB 2 script asserting the negated conjunction of the
    substituted constraints; `unsat` certifies validity for all inputs."""
    return _emit_script(p, substituted_constraints(p, s))


def _parse_model_value(sx: SExpr) -> Value | None:
    if isinstance(sx, (bool, BV)):
        return sx
    if isinstance(sx, int):
        return sx
    if isinstance(sx, list):
        if len(sx) == 2 and sx[0] == "-" and isinstance(sx[1], int):
            return -sx[1]
        if (len(sx) == 3 and sx[0] == "_" and isinstance(sx[1], str)
                and sx[1].startswith("bv") and sx[1][2:].isdigit()
                and isinstance(sx[2], int)):
            return BV(sx[2], int(sx[1][2:]))
    return None


def parse_model(text: str, universals: Mapping[str, Sort]) -> dict | None:
    """Extract a valuation from get-model output.

    Accepts define-fun entries and ((name value) ...) pair lists; unmentioned
    universals default to zero. Returns None if nothing usable was found.
    """
    try:
        top = read_sexprs(text)
    except SygusError:
        return None
    found: dict[str, Value] = {}

    def visit(sx: SExpr):
        if not isinstance(sx, list):
            return
        if (len(sx) == 5 and sx[0] == "define-fun" and isinstance(sx[1], str)
                and sx[1] in universals and sx[2] == []):
            v = _parse_model_value(sx[4])
            if v is not None:
                found[sx[1]] = v
            return
        if (len(sx) == 2 and isinstance(sx[0], str) and sx[0] in universals
                and not isinstance(sx[1], list)):
            v = _parse_model_value(sx[1])
            if v is not None:
                found[sx[0]] = v
            return
        for item in sx:
            visit(item)

    for sx in top:
        visit(sx)
    if not found:
        return None
    out: dict[str, Value] = {}
    for name, sort in universals.items():
        v = found.get(name)
        if v is None:
            v = BV(sort.width, 0) if sort.is_bv else (False if sort == BOOL else 0)
        elif sort.is_bv and isinstance(v, int) and not isinstance(v, bool):
            v = BV(sort.width, v)
        if sort.is_bv and isinstance(v, BV) and v.width != sort.width:
            return None
        out[name] = v
    return out


def run_solver(command: str, script: str, timeout_s: float) -> tuple[str, str] | Unknown:
    """Run the solver over stdin/stdout; first output line is the verdict."""
    try:
        proc = subprocess.run(shlex.split(command), input=script.encode(),
                              stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
                              timeout=timeout_s)
    except (FileNotFoundError, PermissionError, OSError):
        return Unknown(UnknownReason.SOLVER_UNAVAILABLE)
    except subprocess.TimeoutExpired:
        return Unknown(UnknownReason.BUDGET)
    text = proc.stdout.decode("utf-8", errors="replace")
    first = text.strip().splitlines()[0].strip() if text.strip() else ""
    return first, text


def _check_external(p: SynthProblem, constraints: Sequence[Term],
                    strat: ExternalSMT) -> VerificationResult:
    script = _emit_script(p, constraints)
    res = run_solver(strat.command, script, strat.timeout_s)
    if isinstance(res, Unknown):
        return res
    first, text = res
    if first == "unsat":
        return Valid(certified=True)
    if first != "sat":
        return Unknown(UnknownReason.SOLVER_UNKNOWN)
    model = parse_model(text.split("\n", 1)[1] if "\n" in text else "",
                        p.universals)
    if model is None:
        return Unknown(UnknownReason.SOLVER_UNKNOWN)
    idx = _violated_index(constraints, model, p.defined_funs)
    if idx is None:
        # model does not actually falsify anything we can evaluate
        return Unknown(UnknownReason.SOLVER_UNKNOWN)
    return CounterExample(model, idx)


# ---------------------------------------------------------------------------
# Feature classification


class Invocation(enum.Enum):
    SINGLE = "single"
    MULTIPLE = "multiple"


@dataclass
class FeatureSet:
    invocation: Invocation
    unknown_count: int
    grammar_origins: dict[str, GrammarOrigin]
    track: Track


def _application_tuples(p: SynthProblem) -> dict[str, set[tuple[Term, ...]]]:
    apps: dict[str, set[tuple[Term, ...]]] = {n: set() for n in p.unknowns}

    def walk(t: Term):
        if isinstance(t, Apply):
            if t.op in apps:
                apps[t.op].add(t.args)
            for a in t.args:
                walk(a)
        elif hasattr(t, "bindings"):
            for _, d in t.bindings:
                walk(d)
            walk(t.body)

    for c in p.constraints:
        walk(c)
    return apps


def classify_features(p: SynthProblem) -> FeatureSet:
    apps = _application_tuples(p)
    single = all(len(tuples) <= 1 for tuples in apps.values())
    return FeatureSet(
        invocation=Invocation.SINGLE if single else Invocation.MULTIPLE,
        unknown_count=len(p.unknowns),
        grammar_origins={n: u.origin for n, u in p.unknowns.items()},
        track=p.track,
    )
