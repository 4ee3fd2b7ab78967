from conftest import load, term
from syguskit.cegis import (ERR, ExampleSet, Exhausted, Solved, TimedOut,
                            base_constant_pool, induced_bindings,
                            pool_with_examples, signature,
                            unknown_invocations)
from syguskit.checker import (ExhaustiveSmall, Valid, check_semantic,
                              check_syntactic)
from syguskit.enumerative import EnumConfig, grow, solve_enumerative
from syguskit.frontend import read_problem
from syguskit.terms import BV, INT, Apply, Lit, Var

EX8 = ExhaustiveSmall()


# ---------------------------------------------------------------------------
# signatures and induced bindings


def test_signature_of_variable(max2):
    E = ExampleSet([{"x": 1, "y": 2}, {"x": 3, "y": 0}])
    bindings, _ = induced_bindings(max2, "max2", E)
    assert signature(Var("x"), bindings, {}) == (1, 3)


def test_signature_error_token(max2):
    E = ExampleSet([{"x": 1, "y": 2}, {"x": 3, "y": 0}])
    bindings, _ = induced_bindings(max2, "max2", E)
    t = term("(div x 0)", {"x": INT})
    assert signature(t, bindings, {}) == (ERR, ERR)


def test_commutative_terms_share_signatures(max2):
    E = ExampleSet([{"x": 1, "y": 2}, {"x": -3, "y": 7}, {"x": 0, "y": 0}])
    bindings, _ = induced_bindings(max2, "max2", E)
    ctx = {"x": INT, "y": INT}
    assert signature(term("(+ x y)", ctx), bindings, {}) == \
        signature(term("(+ y x)", ctx), bindings, {})


def test_bindings_follow_invocations():
    icfp = load("icfp_7_10.sl")
    assert len(unknown_invocations(icfp)["f"]) == 5
    E = ExampleSet([{}])  # ground constraints: the empty valuation
    bindings, index = induced_bindings(icfp, "f", E)
    assert len(bindings) == 5
    assert bindings[0] == {"x": BV(64, 0x1BE88589BA201842)}
    assert index[(0, 4)] == 4


def test_constant_pool_policy(max2, qm_loop):
    assert base_constant_pool(max2) == (-1, 0, 1, 2)
    assert base_constant_pool(qm_loop) == (-1, 0, 1, 2, 3)
    E = ExampleSet([{"x": -8, "y": 5}])
    assert pool_with_examples(base_constant_pool(max2), E) == \
        (-1, 0, 1, 2, -8, 5)


# ---------------------------------------------------------------------------
# grow / observational equivalence


def test_grow_merges_by_signature(max2):
    E = ExampleSet([{"x": 0, "y": 1}])
    bindings, _ = induced_bindings(max2, "max2", E)
    g = max2.unknowns["max2"].grammar
    banks = grow(g, bindings, pool=[0, 1], size_limit=1)
    # x evaluates to 0 (merging the constant 0), y to 1 (merging constant 1)
    assert banks["StartInt"][1] == [(Var("x"), (0,)), (Var("y"), (1,))]


def test_grow_with_no_examples_keeps_one_per_size(max2):
    g = max2.unknowns["max2"].grammar
    banks = grow(g, bindings=[], pool=[0, 1], size_limit=4)
    for nt, by_size in banks.items():
        for size, entries in by_size.items():
            if entries:
                assert len(entries) == 1, (nt, size)


def test_grow_lsz_size_two(lsz32):
    g = lsz32.unknowns["f"].grammar
    # distinct outputs at x=5 keep all three bvnot terms apart
    banks = grow(g, bindings=[{"x": BV(32, 5)}], pool=[], size_limit=2)
    assert [t for t, _ in banks["Start"][2]] == [
        Apply("bvnot", (Var("x"),)),
        Apply("bvnot", (Lit(BV(32, 0)),)),
        Apply("bvnot", (Lit(BV(32, 1)),))]
    # with no examples the three collapse into one representative
    banks0 = grow(g, bindings=[], pool=[], size_limit=2)
    assert len(banks0["Start"][2]) == 1


def test_unpruned_grow_matches_enumeration(qm_loop):
    from syguskit.grammar import Enumerator
    g = qm_loop.unknowns["qm-loop"].grammar
    banks = grow(g, bindings=[{"x": 3}], pool=[], size_limit=5, prune=False,
                 defs=qm_loop.defined_funs)
    e = Enumerator(g)
    for size in range(1, 6):
        assert [t for t, _ in banks["Start"].get(size, [])] == \
            list(e.enumerate("Start", size))


def test_bank_signatures_agree_with_direct_evaluation(qm_loop):
    from syguskit.terms import evaluate
    bindings = [{"x": v} for v in (-2, 0, 3)]
    g = qm_loop.unknowns["qm-loop"].grammar
    banks = grow(g, bindings, pool=[], size_limit=5, prune=False,
                 defs=qm_loop.defined_funs)
    for size, entries in banks["Start"].items():
        for t, sig in entries:
            direct = tuple(evaluate(t, b, qm_loop.defined_funs)
                           for b in bindings)
            assert sig == direct


# ---------------------------------------------------------------------------
# solving


def test_solves_max2_with_minimal_size(max2):
    out = solve_enumerative(max2, EnumConfig(max_size=8, budget_s=30))
    assert isinstance(out, Solved)
    assert out.total_size == 6
    assert check_syntactic(max2, out.solution) == {"max2": True}
    assert check_semantic(max2, out.solution, EX8) == Valid(False)


def test_contradictory_constraints_exhaust():
    p = read_problem("""(set-logic LIA)
    (synth-fun f ((x Int)) Int)
    (declare-var x Int)
    (constraint (= (f x) (+ x 1)))
    (constraint (= (f x) x))
    (check-synth)""")
    out = solve_enumerative(p, EnumConfig(max_size=5, budget_s=30))
    assert out == Exhausted(5)


def test_budget_exhaustion():
    p = load("inv_loop_fixed.sl")
    out = solve_enumerative(p, EnumConfig(max_size=12, budget_s=0.05))
    assert isinstance(out, TimedOut)


def test_solves_scaled_lsz_width8(lsz8_fixed):
    out = solve_enumerative(lsz8_fixed, EnumConfig(max_size=7, budget_s=120))
    assert isinstance(out, Solved)
    assert out.total_size == 6
    assert check_semantic(lsz8_fixed, out.solution, EX8) == Valid(False)


def test_joint_enumeration_for_multiple_unknowns():
    s8 = load("s8.sl")
    out = solve_enumerative(s8, EnumConfig(max_size=9, budget_s=60))
    assert isinstance(out, Solved)
    assert set(out.sizes) == {"f1", "f2", "f3"}
    assert out.total_size == 7
    # f2 is forced pointwise; check it on a few points
    from syguskit.terms import evaluate
    f2 = out.solution.funcs["f2"]
    for x, y, z in [(0, 0, 0), (1, 5, -2), (-4, 7, 9)]:
        assert evaluate(f2.body, {"x": x, "y": y, "z": z}) == y - 1


def test_pruned_and_unpruned_sizes_agree(max2, qm_loop):
    for p in (max2, qm_loop):
        pruned = solve_enumerative(p, EnumConfig(max_size=6, budget_s=60))
        plain = solve_enumerative(p, EnumConfig(max_size=6, budget_s=120,
                                                prune=False))
        assert isinstance(pruned, Solved) and isinstance(plain, Solved)
        assert pruned.total_size == plain.total_size


def test_verifier_submissions_are_consistent_with_examples(max2, monkeypatch):
    import syguskit.enumerative as en
    from syguskit.cegis import count_wrong
    seen_points: list[dict] = []
    submissions = []
    real = en.check_semantic

    def spy(p, sol, strat):
        verdict = real(p, sol, strat)
        E = ExampleSet(seen_points)
        submissions.append(count_wrong(p, sol.funcs, E))
        if hasattr(verdict, "valuation"):
            seen_points.append(verdict.valuation)
        return verdict

    monkeypatch.setattr(en, "check_semantic", spy)
    out = solve_enumerative(max2, EnumConfig(max_size=6, budget_s=30))
    assert isinstance(out, Solved)
    assert submissions and all(w == 0 for w in submissions)


def test_first_verified_candidate_is_trivially_smallest(max2, monkeypatch):
    import syguskit.enumerative as en
    sizes = []
    real = en.check_semantic

    def spy(p, sol, strat):
        sizes.append(sol.total_size())
        return real(p, sol, strat)

    monkeypatch.setattr(en, "check_semantic", spy)
    out = solve_enumerative(max2, EnumConfig(max_size=6, budget_s=30))
    assert isinstance(out, Solved)
    g = max2.unknowns["max2"].grammar
    assert sizes[0] == g.min_sizes()[g.start] == 1
