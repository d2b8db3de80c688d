import numpy as np
import pytest
from hypothesis import given, strategies as st

from volgrowth import (
    GrowthFunction,
    InfeasibleGrowth,
    LevelSet,
    MalformedTree,
    OnTrunk,
    ball_count,
    build_tree,
    departure_level,
    layout_from_tree,
    normalize,
)
from volgrowth.tree import AdmissibleTree, kary_layout, line_layout, ray_layout, star_layout, trunk_widths


def walk_levels(tree):
    """Level of each vertex by following parents to the root."""
    out = []
    for x in range(tree.n_vertices):
        k, p = 0, x
        while tree.parent[p] >= 0:
            p = int(tree.parent[p])
            k += 1
        out.append(k)
    return out


def walk_departure(tree, x):
    """Climb until the parent is a trunk vertex; -1 for trunk vertices."""
    if tree.is_trunk(x):
        return -1
    while not tree.is_trunk(int(tree.parent[x])):
        x = int(tree.parent[x])
    return tree.level_of(int(tree.parent[x]))


normalized_counts = st.lists(st.integers(0, 3), min_size=2, max_size=9).map(
    lambda steps: _counts_from_steps(steps)
)


def _counts_from_steps(steps):
    # c(1) = 2 and then 2 <= c(m+1) <= 2c(m); keeps the tree feasible with S empty
    c = [1, 2]
    for s in steps:
        c.append(min(2 * c[-1], c[-1] + s) if s else max(2, c[-1] - 1))
    vals = [1]
    for x in c[1:]:
        vals.append(vals[-1] + x)
    return vals


def check_structure(tree, w):
    lv = walk_levels(tree)
    counts = np.bincount(lv, minlength=tree.horizon + 1)
    expected = [w[0]] + [w[n] - w[n - 1] for n in range(1, tree.horizon + 1)]
    assert counts.tolist() == expected
    kids = tree.child_counts()
    for m in range(tree.horizon):
        t = tree.trunk_vertex(m)
        assert tree.parent[tree.trunk_vertex(m + 1)] == t
        assert kids[t] == (1 if m in tree.S else 2)
    assert kids.max() <= 2
    for x in range(tree.n_vertices):
        assert tree.departure[x] == walk_departure(tree, x)


@given(normalized_counts)
def test_tree_levels_match_oracle(vals):
    tree = build_tree(vals)
    check_structure(tree, vals)
    for n in range(tree.horizon + 1):
        assert ball_count(tree, n) == vals[n]


def test_tree_with_intervals():
    w, _ = normalize(GrowthFunction.from_poly([1, 1, 1], 30))
    S = LevelSet.from_starts([5, 12], 1)
    tree = build_tree(w, S)
    check_structure(tree, w.values)


def test_departure_level_and_on_trunk():
    tree = build_tree([1, 3, 6, 10, 15])
    with pytest.raises(OnTrunk):
        departure_level(tree, tree.trunk_vertex(2))
    side = tree.trunk_vertex(1) + 1
    assert departure_level(tree, side) == 0


def test_infeasible_growth():
    with pytest.raises(InfeasibleGrowth) as exc:
        build_tree([1, 3, 4, 20])
    assert exc.value.level == 2
    with pytest.raises(InfeasibleGrowth):
        build_tree([2, 3, 4])
    # a trunk vertex in S spends no side child, so one vertex suffices
    assert build_tree([1, 3, 4], LevelSet.from_starts([1])).level_counts().tolist() == [1, 2, 1]


def test_exact_doubling_is_feasible():
    # 2^m vertices per level fit exactly: 2(c-1) + 2 = 2c
    vals = [2 ** (n + 1) - 1 for n in range(12)]
    tree = build_tree(vals)
    assert tree.level_counts().tolist() == [2**n for n in range(12)]


def test_tree_dict_round_trip():
    tree = build_tree([1, 3, 6, 10, 15, 21], LevelSet.from_starts([3]))
    back = AdmissibleTree.from_dict(tree.to_dict())
    assert np.array_equal(back.parent, tree.parent)
    assert np.array_equal(back.departure, tree.departure)
    assert back.S == tree.S


def test_tree_arrays_are_read_only():
    tree = build_tree([1, 3, 5])
    with pytest.raises(ValueError):
        tree.parent[0] = 3


# level sets --------------------------------------------------------------
def test_levelset_validation_and_queries():
    S = LevelSet(((2, 2), (6, 1)))
    assert S.levels() == [2, 3, 6]
    assert 3 in S and 4 not in S
    assert S.interval_index(6) == 1 and S.interval_index(5) is None
    assert S.count_upto(6) == 3
    assert LevelSet.from_dict(S.to_dict()) == S
    with pytest.raises(ValueError):
        LevelSet(((2, 3), (4, 1)))
    with pytest.raises(ValueError):
        LevelSet(((0, 1),))


# layouts -----------------------------------------------------------------
def test_layout_shapes():
    assert ray_layout(4).F == (1, 1, 1, 1, 1)
    assert line_layout(3).F == (1, 2, 2, 2)
    assert star_layout(3, 2).F == (1, 3, 3)
    lay = kary_layout(2, 3)
    assert lay.F == (1, 2, 4, 8) and lay.degree_bound == 3
    assert line_layout(3).n_ends == 2


def test_layout_finite_branches_and_errors():
    lay = layout_from_tree({"levels": [{"count": 1}, {"count": 2, "parents": [0, 0]}, {"count": 1, "parents": [0]}]})
    assert dict(lay.finite_branch_levels) == {1: 1}
    with pytest.raises(MalformedTree):
        layout_from_tree({"levels": [{"count": 2}]})
    with pytest.raises(MalformedTree):
        layout_from_tree({"levels": [{"count": 1}, {"count": 1, "parents": [3]}]})
    with pytest.raises(MalformedTree):
        layout_from_tree({"nope": 1})


def test_trunk_widths_follow_layout():
    S = LevelSet.from_starts([2, 5], [2, 1])
    widths = trunk_widths(S, star_layout(3, 2), 7)
    assert widths == (1, 1, 1, 1, 3, 3, 3, 3)
    assert trunk_widths(S, None, 3) == (1, 1, 1, 1)
