import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from test_tree import _counts_from_steps
from volgrowth import (
    GrowthFunction,
    InfeasibleSelection,
    LevelSet,
    PlacementConflict,
    assemble,
    build_tree,
    choose_nj,
    default_catalog,
    discrete_growth,
    growth_constant_bound,
    lemma16_bounds_check,
    normalize,
    synthesize_params,
    vanishing_density_check,
)
from volgrowth.assembly import AssemblyPlan, flat_enumeration
from volgrowth.tree import layout_from_tree, ray_layout


def ray_params(depth, l=2):
    return synthesize_params(default_catalog(l=l), layout_from_tree(ray_layout(depth).to_dict(), False))


def plan_for(vals, S=LevelSet(), l=2):
    tree = build_tree(vals, S)
    return assemble(tree, S, ray_params(max(1, len(S)), l))


# interval selection -------------------------------------------------------
def test_choose_nj_factorial_rules():
    w, _ = normalize(GrowthFunction.from_poly([1, 1, 1], 120))
    P = ray_params(6)
    S = choose_nj(P, w, "factorial", 120, kgap=2, base=3)
    c = w.level_counts()
    prev_end = 1
    for j, (n, t) in enumerate(S.intervals, start=1):
        assert n >= math.factorial(j) * 2 + 3
        assert n > prev_end and n >= math.ceil(P.d[j] / P.l)
        assert all(c[m] >= P.U[j] for m in range(n, 121))
        prev_end = n + t - 1
    build_tree(w, S)


def test_choose_nj_linear_verbatim_and_failures():
    w, _ = normalize(GrowthFunction.from_poly([1, 2], 40))
    S = choose_nj(ray_params(5), w, "linear", 40, C1=3, C2=5)
    assert S.starts == (3, 8, 13, 18, 23)
    with pytest.raises(InfeasibleSelection):
        choose_nj(ray_params(2), w, "factorial", 40)
    with pytest.raises(InfeasibleSelection):
        choose_nj(ray_params(3), w, "custom", 40, starts=[2, 2, 3])


def test_vanishing_density():
    S = LevelSet.from_starts([math.factorial(j) * 2 for j in range(1, 6)])
    rep = vanishing_density_check(S, [10, 100, 239])
    assert rep.passes and rep.witnesses[-1] == (239, Fraction(4, 239))
    assert not vanishing_density_check(LevelSet.from_starts(range(1, 20, 2)), [10]).passes


# assembly -----------------------------------------------------------------
def test_every_vertex_carries_one_piece():
    vals = [1, 3, 6, 10, 15, 21, 28]
    plan = plan_for(vals, LevelSet.from_starts([3]))
    assert (plan.vertex_piece >= 0).all()
    counts = plan.kind_counts()
    assert counts["Q"] == 1 and counts["R"] == 5
    assert sum(len(p.vertices) for p in plan.pieces) == vals[-1]
    for p in plan.pieces:
        assert p.offset == p.level * plan.l


def test_assemble_rejects_mismatched_S():
    tree = build_tree([1, 3, 6, 10], LevelSet.from_starts([2]))
    with pytest.raises(PlacementConflict):
        assemble(tree, LevelSet(), ray_params(1))


def test_plan_round_trip():
    plan = plan_for([1, 3, 6, 10, 15], LevelSet.from_starts([2]))
    back = AssemblyPlan.from_dict(plan.to_dict())
    assert discrete_growth(back).z == discrete_growth(plan).z


# discrete growth ------------------------------------------------------------
def test_discrete_growth_frozen_small():
    # counts 1,2,2 with l = 2: root HS, then R plus a side HS on levels 1 and 2
    plan = plan_for([1, 3, 5])
    z = discrete_growth(plan).z
    assert z == flat_enumeration(plan)
    assert z == (0, 1, 2, 4, 6)


@given(st.lists(st.integers(0, 3), min_size=2, max_size=7), st.integers(1, 3), st.data())
def test_discrete_growth_matches_flat_enumeration(steps, l, data):
    vals = _counts_from_steps(steps)
    H = len(vals) - 1
    S = LevelSet()
    if H >= 4 and data.draw(st.booleans()):
        n = data.draw(st.integers(2, H - 1))
        c = [vals[0]] + [vals[k] - vals[k - 1] for k in range(1, H + 1)]
        if 1 <= c[n + 1] <= 2 * c[n] - 1:
            S = LevelSet.from_starts([n])
    plan = plan_for(vals, S, l)
    assert discrete_growth(plan).z == flat_enumeration(plan)


@given(st.lists(st.integers(0, 3), min_size=2, max_size=7))
def test_lemma16_band_on_random_plans(steps):
    vals = _counts_from_steps(steps)
    plan = plan_for(vals)
    assert lemma16_bounds_check(discrete_growth(plan), vals, ray_params(1)) == []


# growth constant bound --------------------------------------------------------
def test_growth_constant_bound_frozen():
    b = growth_constant_bound(4, 2, 1, 1, 2, "l")
    assert b.coefficient == 9 and b.exact() == 18
    assert b.admits(18) and not b.admits(Fraction(181, 10))
    assert growth_constant_bound(1, 2, 1, 1, 2, "L").exact() == 9
    assert growth_constant_bound(2, 2, 1, 1, 2, "L").exact() is None
    assert float(growth_constant_bound(2, 2, 1, 1, 2, "l")) == pytest.approx(9 * 2**0.5)
    irr = growth_constant_bound(2, 2, 1, 1, 2)
    assert irr.exact() is None and irr.admits(12) and not irr.admits(13)
    with pytest.raises(ValueError):
        growth_constant_bound(2, 2, 0, 1, 2)
