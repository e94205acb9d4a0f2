"""Root extraction, triangular extension, Pareto filtering, and the four
end-to-end pipelines against the brute-force oracle."""

import json

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mopip.groebner import GroebnerBasis, Ideal, buchberger
from mopip.poly import (
    BLOCK_SLACK,
    BLOCK_X,
    BLOCK_Y,
    make_context,
    parse_polynomial,
)
from mopip.problems import generate
from mopip.solver import (
    AmbiguousExtensionError,
    BruteForceCapExceeded,
    PartialSolution,
    SolverIntegrityError,
    brute_force,
    check_feasible,
    enumerate_variety,
    evaluate_objectives,
    extend,
    pareto_filter,
    rational_roots,
    run_algorithm,
    solve_alg1,
    solve_via_conditions,
)
from mopip.systems import (
    SLACK_LINEAR,
    TransformedSystem,
    build_alg1,
    instance_from_expressions,
)

F = Fraction


def knapsack22():
    return instance_from_expressions(
        2, ["3*x1 + x2", "x1 + 2*x2"], ["1 - x1 - x2"]
    )


def infeasible22():
    # x1 + x2 >= 3 has no binary solutions
    return instance_from_expressions(2, ["x1 + x2"], ["3 - x1 - x2"])


def _univar(expr):
    ctx = make_context([("y1", BLOCK_Y)])
    return parse_polynomial(ctx, expr)


# -- rational roots --------------------------------------------------------------

def test_rational_roots_quadratics():
    assert rational_roots(_univar("y1^2 - 5*y1 + 4")) == {1, 4}
    assert rational_roots(_univar("y1^2 - y1")) == {0, 1}
    assert rational_roots(_univar("y1^2 + 1")) == frozenset()


def test_rational_roots_linear_fraction():
    assert rational_roots(_univar("2*y1 - 3")) == {F(3, 2)}


def test_rational_roots_nonzero_constant_has_none():
    assert rational_roots(_univar("7")) == frozenset()


def test_rational_roots_rejects_zero_and_multivariate():
    ctx = make_context([("x1", BLOCK_X), ("x2", BLOCK_X)])
    with pytest.raises(ValueError):
        rational_roots(parse_polynomial(ctx, "0"))
    with pytest.raises(ValueError):
        rational_roots(parse_polynomial(ctx, "x1*x2 - 1"))


def test_rational_roots_squarefree_and_mixed_factors():
    # (2y - 3)^2 (y - 1) (y^2 + 1): a repeated factor and a rootless one
    p = _univar("2*y1 - 3")
    p = p * p * _univar("y1 - 1") * _univar("y1^2 + 1")
    assert rational_roots(p) == {F(3, 2), 1}


def test_rational_roots_zero_root_factored_out():
    assert rational_roots(_univar("y1^3 - y1^2 - 2*y1")) == {-1, 0, 2}


@given(
    st.lists(
        st.tuples(st.integers(1, 5), st.integers(-6, 6)),
        min_size=1,
        max_size=4,
    ),
    st.booleans(),
)
@settings(max_examples=60, deadline=None)
def test_rational_roots_recovers_constructed_roots(factors, with_irreducible):
    ctx = make_context([("y1", BLOCK_Y)])
    y = parse_polynomial(ctx, "y1")
    p = parse_polynomial(ctx, "1")
    for q, num in factors:
        p = p * (q * y - num)
    if with_irreducible:
        p = p * parse_polynomial(ctx, "y1^2 + 1")
    assert rational_roots(p) == {F(num, q) for q, num in factors}


# -- extend ----------------------------------------------------------------------

def _tiny_system(var_blocks, exprs, sign_filters=()):
    ctx = make_context(var_blocks)
    gens = tuple(parse_polynomial(ctx, e) for e in exprs)
    ts = TransformedSystem(
        context=ctx,
        generators=gens,
        solve_order=tuple(nm for nm, _ in reversed(var_blocks)),
        sign_filters=frozenset(sign_filters),
        kind="TEST",
    )
    return ts, GroebnerBasis(ctx, gens, reduced=True)


def test_extend_splits_on_quadratic():
    ts, G = _tiny_system([("y2", BLOCK_Y)], ["y2^2 - 5*y2 + 4"])
    out = extend(ts, G, PartialSolution(), "y2")
    assert [pt.mapping()["y2"] for pt in out] == [1, 4]


def test_extend_sign_filter_prunes_negative_slack():
    ts, G = _tiny_system([("w1", BLOCK_SLACK)], ["w1 + 3"], sign_filters=["w1"])
    assert extend(ts, G, PartialSolution(), "w1") == ()


def test_extend_intersects_root_sets():
    ts, G = _tiny_system([("x2", BLOCK_X)], ["x2^2 - x2", "x2 - 1"])
    out = extend(ts, G, PartialSolution(), "x2")
    assert [pt.mapping()["x2"] for pt in out] == [1]


def test_extend_decision_fallback_is_binary():
    ts, G = _tiny_system(
        [("y1", BLOCK_Y), ("x1", BLOCK_X)], ["y1 - 2"]
    )
    out = extend(ts, G, PartialSolution(), "x1")
    assert [pt.mapping()["x1"] for pt in out] == [0, 1]


def test_extend_ambiguous_for_unconstrained_nondecision():
    ts, G = _tiny_system([("y1", BLOCK_Y), ("x1", BLOCK_X)], ["x1^2 - x1"])
    with pytest.raises(AmbiguousExtensionError):
        extend(ts, G, PartialSolution(), "y1")


def test_extend_rejects_nonbinary_decision_root():
    ts, G = _tiny_system([("x1", BLOCK_X)], ["x1 - 2"])
    with pytest.raises(SolverIntegrityError):
        extend(ts, G, PartialSolution(), "x1")


def test_extend_inconsistent_prefix_has_no_extensions():
    ts, G = _tiny_system(
        [("x1", BLOCK_X), ("y1", BLOCK_Y)], ["x1 - 1"]
    )
    partial = PartialSolution((("x1", F(0)),))
    assert extend(ts, G, partial, "y1") == ()


def test_partial_solution_extension_is_persistent():
    base = PartialSolution()
    one = base.extended("w1", F(2))
    two = one.extended("y1", F(3, 2))
    assert base.assignment == ()
    assert one.mapping() == {"w1": 2}
    assert two.assignment == (("w1", F(2)), ("y1", F(3, 2)))


# -- enumerate_variety -----------------------------------------------------------

def test_enumerate_variety_yields_omega_for_knapsack():
    ts = build_alg1(knapsack22())
    G = buchberger(Ideal(ts.context, ts.generators))
    pts = enumerate_variety(ts, G, BLOCK_Y)
    omega = {
        (pt.mapping()["y1"], pt.mapping()["y2"]) for pt in pts
    }
    assert omega == {(1, 2), (3, 1), (4, 3)}


def test_enumerate_variety_trivial_basis_is_empty():
    # contradictory equalities leave 1 in the ideal
    p = instance_from_expressions(1, ["x1"], [], ["x1", "x1 - 1"])
    ts = build_alg1(p)
    G = buchberger(Ideal(ts.context, ts.generators))
    assert G.is_trivial
    assert enumerate_variety(ts, G, BLOCK_Y) == ()


def test_inequality_infeasibility_comes_from_the_sign_filter():
    # the slack variety over Q is nonempty (w roots are all negative), so the
    # basis is not {1}; emptiness only shows up once signs are enforced
    ts = build_alg1(infeasible22())
    G = buchberger(Ideal(ts.context, ts.generators))
    assert not G.is_trivial
    assert enumerate_variety(ts, G, BLOCK_Y) == ()


def test_enumerate_variety_single_point():
    p = instance_from_expressions(2, ["x1 + x2"], [], ["x1 - 1", "x2 - 1"])
    ts = build_alg1(p)
    G = buchberger(Ideal(ts.context, ts.generators))
    pts = enumerate_variety(ts, G, BLOCK_X)
    assert len(pts) == 1
    m = pts[0].mapping()
    assert (m["x1"], m["x2"]) == (1, 1)


# -- pareto_filter ---------------------------------------------------------------

def test_pareto_filter_examples():
    assert pareto_filter({(1, 2), (3, 1), (4, 3)}) == {(1, 2), (3, 1)}
    assert pareto_filter({(1, 1)}) == {(1, 1)}
    assert pareto_filter({(2, 5), (2, 4)}) == {(2, 4)}
    assert pareto_filter([]) == frozenset()


def test_pareto_filter_keeps_exact_ties_once():
    assert pareto_filter([(1, 2), (1, 2), (2, 1)]) == {(1, 2), (2, 1)}


@given(
    st.lists(
        st.tuples(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4)),
        max_size=24,
    )
)
@settings(max_examples=150, deadline=None)
def test_pareto_filter_is_tight_antichain(vecs):
    front = pareto_filter(vecs)
    pool = set(map(tuple, vecs))
    assert front <= pool
    for u in front:
        for v in front:
            assert u == v or any(a > b for a, b in zip(u, v))
    # everything outside the front is dominated by something inside it
    for v in pool - front:
        assert any(
            u != v and all(a <= b for a, b in zip(u, v)) for u in front
        )


# -- pipelines on the worked example ----------------------------------------------

def test_solve_alg1_knapsack():
    r = solve_alg1(knapsack22())
    assert r.status == "solved"
    assert set(r.Y_E) == {(1, 2), (3, 1)}
    assert set(r.X_E) == {(0, 1), (1, 0)}
    assert all(pt.origin == "ALG1" for pt in r.points)


def test_solve_alg1_unconstrained_min():
    p = instance_from_expressions(2, ["x1", "x2"], [])
    r = solve_alg1(p)
    assert set(r.Y_E) == {(0, 0)}
    assert set(r.X_E) == {(0, 0)}


def test_solve_alg1_infeasible():
    r = solve_alg1(infeasible22())
    assert r.status == "infeasible"
    assert r.points == ()


def test_conditions_match_alg1_on_knapsack():
    want_y = {(1, 2), (3, 1)}
    want_x = {(0, 1), (1, 0)}
    for kind in ("kkt", "fj", "mofj"):
        r = solve_via_conditions(knapsack22(), kind)
        assert r.status == "solved"
        assert set(r.Y_E) == want_y, kind
        assert set(r.X_E) == want_x, kind


def test_condition_tags_name_their_system():
    allowed = {"kkt": {"KKT", "NR"}, "fj": {"FJ"}, "mofj": {"MOFJ"}}
    for kind, tags in allowed.items():
        r = solve_via_conditions(knapsack22(), kind)
        assert {pt.origin for pt in r.points} <= tags


def test_kkt_nr_union_on_two_point_problem():
    p = instance_from_expressions(1, ["x1", "1 - x1"], [])
    r = solve_via_conditions(p, "kkt")
    assert set(r.X_E) == {(0,), (1,)}
    assert set(r.Y_E) == {(0, 1), (1, 0)}


def test_conditions_infeasible():
    for kind in ("kkt", "fj", "mofj"):
        r = solve_via_conditions(infeasible22(), kind)
        assert r.status == "infeasible"
        assert r.points == ()


def test_conditions_rejects_unknown_kind():
    with pytest.raises(ValueError):
        solve_via_conditions(knapsack22(), "newton")


# -- brute force -----------------------------------------------------------------

def test_brute_force_knapsack():
    r = brute_force(knapsack22())
    assert set(r.Y_E) == {(1, 2), (3, 1)}
    assert all(pt.origin == "BRUTE" for pt in r.points)


def test_brute_force_single_objective_minimum():
    p = instance_from_expressions(2, ["3*x1 + x2"], ["1 - x1 - x2"])
    r = brute_force(p)
    assert set(r.Y_E) == {(1,)}
    assert set(r.X_E) == {(0, 1)}


def test_brute_force_infeasible():
    assert brute_force(infeasible22()).status == "infeasible"


def test_brute_force_cap():
    p = instance_from_expressions(21, ["x1"], [])
    with pytest.raises(BruteForceCapExceeded):
        brute_force(p)


def test_brute_force_rejects_bounded_instances():
    p = instance_from_expressions(1, ["x1"], [], bounds=[3])
    with pytest.raises(ValueError):
        brute_force(p)


# -- evaluation helpers ------------------------------------------------------------

def test_check_feasible_and_objectives():
    p = knapsack22()
    assert check_feasible((1, 0), p)
    assert evaluate_objectives((1, 0), p) == (3, 1)
    assert not check_feasible((0, 0), p)


def test_equality_feasibility():
    p = instance_from_expressions(2, ["x1"], [], ["x1 - x2"])
    assert check_feasible((1, 1), p)
    assert not check_feasible((1, 0), p)


def test_point_dimension_mismatch():
    with pytest.raises(ValueError):
        check_feasible((1, 0, 1), knapsack22())


# -- uniform front end -------------------------------------------------------------

def test_run_algorithm_details_shape():
    r, details = run_algorithm(knapsack22(), "alg1")
    assert r.status == "solved"
    assert set(details) == {"gb_ms", "n_vars", "n_gens", "max_deg"}
    assert isinstance(details["gb_ms"], int) and details["gb_ms"] >= 0
    assert (details["n_vars"], details["n_gens"]) == (5, 5)


def test_run_algorithm_rejects_unknowns():
    with pytest.raises(ValueError):
        run_algorithm(knapsack22(), "simplex")
    with pytest.raises(ValueError):
        run_algorithm(knapsack22(), "kkt", slack_mode="quadratic")


def test_run_algorithm_slack_modes_agree():
    p = knapsack22()
    keep, _ = run_algorithm(p, "kkt")
    lin, _ = run_algorithm(p, "kkt", slack_mode=SLACK_LINEAR)
    assert set(keep.Y_E) == set(lin.Y_E)
    assert set(keep.X_E) == set(lin.X_E)


def test_run_algorithm_brute_has_no_system():
    r, details = run_algorithm(knapsack22(), "brute")
    assert set(r.Y_E) == {(1, 2), (3, 1)}
    assert details["n_gens"] == 0 and details["gb_ms"] == 0


# -- oracle agreement on generated instances ---------------------------------------

SPOT_CELLS = (
    ("biobj_linkn", 4, 3, ("alg1", "kkt", "fj", "mofj")),
    ("triobj_qkn", 3, 1, ("alg1", "kkt", "mofj")),
    ("portfolio", 3, 5, ("alg1", "mofj")),
    ("biobj_cubkn", 3, 2, ("alg1", "fj")),
)


@pytest.mark.parametrize("family,n,seed,algorithms", SPOT_CELLS)
def test_pipelines_match_brute_force(family, n, seed, algorithms):
    p = generate(family, n, seed)
    oracle = brute_force(p)
    for alg in algorithms:
        r, _ = run_algorithm(p, alg)
        assert r.status == oracle.status, alg
        assert set(r.Y_E) == set(oracle.Y_E), alg
        assert set(r.X_E) == set(oracle.X_E), alg


# -- result serialization -----------------------------------------------------------

def test_to_record_is_deterministic():
    p = generate("biobj_linkn", 3, 7)
    a = json.dumps(run_algorithm(p, "alg1")[0].to_record())
    b = json.dumps(run_algorithm(p, "alg1")[0].to_record())
    assert a == b


def test_to_record_spells_fractions():
    ts, G = _tiny_system([("x1", BLOCK_X)], ["x1^2 - x1"])
    r = solve_alg1(instance_from_expressions(1, ["x1"], []))
    rec = r.to_record()
    assert rec["status"] == "solved"
    assert rec["points"][0]["decision"] == ["0"]
    assert rec["points"][0]["value"] == ["0"]
