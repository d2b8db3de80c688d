"""Acceptance criteria, each at its stated tolerance.

Every test appends one PASS/FAIL line to the terminal summary before it
asserts, so the report lists all criteria even when some fail.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, subexp
from volgrowth import (
    GrowthFunction,
    LevelSet,
    RcaConfig,
    DoublingConfig,
    assemble,
    build_tree,
    check_distance_bounds,
    check_sandwich,
    default_catalog,
    discrete_growth,
    doubling_bound_check,
    lemma16_bounds_check,
    min_thickening,
    normalize,
    pointwise_doubling,
    rca_nj_threshold,
    rca_theta,
    synthesize_params,
    verify_rca,
    warp_function,
)
from volgrowth.assembly import flat_enumeration
from volgrowth.estimator import GrowthSynthesizer
from volgrowth.graph import OriginBallModel, ball_volume, max_doubling_ratio
from volgrowth.growth import exponential_rate
from volgrowth.tree import kary_layout, layout_from_tree, line_layout, ray_layout, star_layout

L_PIECE = 2
PLANS = {}


def record(n, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    print(ACCEPTANCE_LINES[-1])
    return ok


def note(n, detail):
    ACCEPTANCE_LINES.append(f"criterion {n}: info - {detail}")
    print(ACCEPTANCE_LINES[-1])


def unbounded(layout):
    return layout_from_tree(layout.to_dict(), record_degree_bound=False)


# 1 ----------------------------------------------------------------------------
def twenty_growth_functions(H):
    fs = [GrowthFunction.from_poly([1, a], H) for a in range(1, 6)]
    fs += [GrowthFunction.from_poly([1, a, 1], H) for a in range(1, 5)]
    fs += [GrowthFunction.from_poly([1, 1, a], H) for a in (1, 2, 3)]
    fs += [GrowthFunction.from_poly([1, 0, 0, a], H) for a in (1, 2)]
    fs += [GrowthFunction.from_callable(lambda n, c=c: math.floor(math.exp(c * n ** (1 / 3))) + n, H)
           for c in (1, 1.5, 2, 2.5)]
    fs += [GrowthFunction.from_callable(lambda n, c=c: math.floor(math.exp(c * n**0.5)) + n, H) for c in (0.5, 0.8)]
    return fs


def test_criterion_1_tree_exactness():
    H = 200
    ws = [normalize(f)[0] for f in twenty_growth_functions(H)]
    bad = []
    t0 = time.perf_counter()
    for i, w in enumerate(ws):
        tree = build_tree(w)
        expected = np.array(w.level_counts(), dtype=np.int64)
        # level blocks come from level_start; check every parent sits in the block above
        lvl = np.searchsorted(tree.level_start, np.arange(tree.n_vertices), side="right") - 1
        parent_ok = np.all(lvl[1:][:] - 1 == lvl[tree.parent[1:]])
        if not (np.array_equal(tree.level_counts(), expected) and parent_ok and tree.horizon == H):
            bad.append(i)
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 5
    record(1, ok, f"20 normalized functions, n <= {H}, mismatches {bad}, build+check {elapsed:.2f}s (< 5s)")
    assert ok


# 2 ----------------------------------------------------------------------------
def five_pipelines(H=180):
    lin = GrowthFunction.from_poly([1, 2], H)
    return {
        "one-ended linear": (lambda: GrowthSynthesizer(mode="linear").fit(lin)),
        "one-ended quadratic": (lambda: GrowthSynthesizer(mode="factorial", base=31)
                                .fit(GrowthFunction.from_poly([1, 1, 1], H))),
        "one-ended sub-exponential": (lambda: GrowthSynthesizer(mode="factorial")
                                      .fit(GrowthFunction.from_callable(subexp, H))),
        "two-ended": (lambda: GrowthSynthesizer(mode="linear", layout=unbounded(line_layout(6))).fit(lin)),
        "three-ended": (lambda: GrowthSynthesizer(mode="linear", layout=unbounded(star_layout(3, 6)))
                        .fit(GrowthFunction.from_poly([1, 3], H))),
    }


def test_criterion_2_sandwich():
    results = []
    for name, make in five_pipelines().items():
        t0 = time.perf_counter()
        est = make()
        dist = check_distance_bounds(est.graph_, l=L_PIECE)
        sand = check_sandwich(est.graph_, est.z_)
        elapsed = time.perf_counter() - t0
        PLANS[name] = est
        top = (len(est.z_) - 1) // 3
        results.append((name, not dist and not sand and top >= 60 * L_PIECE and elapsed < 60, len(dist),
                        len(sand), top, elapsed))
    ok = all(r[1] for r in results)
    detail = "; ".join(f"{n}: dist {d}, sandwich {s}, n <= {t}, {e:.1f}s" for n, _, d, s, t, e in results)
    record(2, ok, detail)
    assert ok


# 3 ----------------------------------------------------------------------------
def test_criterion_3_growth_constant():
    H = 120
    w_in = GrowthFunction.from_poly([1, 1, 1], H)
    rows = []
    for k, make in ((2, lambda n: ray_layout(5, n)), (2, lambda n: line_layout(5, n)),
                    (3, lambda n: kary_layout(2, 5, n)), (3, lambda n: star_layout(3, 5, n))):
        for n_el in (1, 2):
            lay = layout_from_tree(make(n_el).to_dict(), record_degree_bound=True)
            assert lay.degree_bound == k
            est = GrowthSynthesizer(mode="factorial", layout=lay, build_graph=False,
                                    catalog=default_catalog(max_boundary=4, n_elements=n_el)).fit(w_in)
            rep = est.certify()
            PLANS[f"k={k} |U|={n_el} F={lay.F[:3]}"] = est
            A = rep["certificate"].A
            rows.append((k, n_el, lay.F[1], A, {v: float(b) for v, b in rep["bounds"].items()},
                         all(rep["within_bound"].values()) and len(rep["within_bound"]) == 2))
    ok = all(r[-1] for r in rows)
    detail = "; ".join(f"k={k} |U|={n} F1={f}: A={A} <= K(l)={b['l']:.3f}, K(L)={b['L']:.3f}"
                       for k, n, f, A, b, _ in rows)
    record(3, ok, detail)
    assert ok


# 4 ----------------------------------------------------------------------------
def test_criterion_4_lemma16_band():
    if not PLANS:
        pytest.skip("needs the plans from criteria 2 and 3")
    bad = {}
    for name, est in PLANS.items():
        v = lemma16_bounds_check(est.z_, est.w_, est.params_, est.S_)
        if v:
            bad[name] = v[:3]
    ok = not bad
    record(4, ok, f"{len(PLANS)} pipeline plans, violations {bad or 'none'}")
    assert ok


# 5 ----------------------------------------------------------------------------
def test_criterion_5_warp():
    t0 = time.perf_counter()
    rows = []
    for lam in (1.5, 2.0, 10.0):
        T = min_thickening(lam)
        prof = warp_function(lam, T)
        f = prof.samples[1]
        rows.append((lam, T, prof.max_ratio, abs(f[0] - 1), abs(f[-1] - lam)))
    elapsed = time.perf_counter() - t0
    ok = all(r <= 1 + 1e-6 and e0 <= 1e-9 and e1 <= 1e-9 for _, _, r, e0, e1 in rows) and elapsed < 10
    detail = "; ".join(f"lambda={lam}: T={T}, max|f''/f|={r:.6f}" for lam, T, r, _, _ in rows)
    record(5, ok, f"{detail}; {elapsed:.2f}s")
    assert ok


# 6 ----------------------------------------------------------------------------
def rca_pipeline(g, mode, lam=1.5):
    """Fit with every n_j above the threshold for the representation ``w <= alpha lam^n``."""
    w, _ = normalize(g)
    if lam is None:
        alpha, lam = exponential_rate(w)
        lam = max(lam, Fraction(1001, 1000))
    else:
        lam = Fraction(lam).limit_denominator(1000)
        alpha = max(Fraction(x) / lam**n for n, x in enumerate(w.values))
    lam, alpha = float(lam), max(1.0, float(alpha))
    probe = GrowthSynthesizer(mode="none", build_graph=False).fit(g)
    t0 = max(probe.params_.t[1:])
    th = rca_theta(lam, alpha, t0)
    first = math.floor(rca_nj_threshold(lam, alpha, th.theta, t0)) + 1
    kw = {"base": first} if mode == "factorial" else {"C1": first}
    est = GrowthSynthesizer(mode=mode, build_graph=False, **kw).fit(g)
    thresholds = [rca_nj_threshold(lam, alpha, th.theta, est.params_.t[j]) for j in range(1, len(est.S_) + 1)]
    assert all(n > thr for n, thr in zip(est.S_.starts, thresholds))
    return est, RcaConfig(th.theta, t0, lam, alpha, L_PIECE)


def test_criterion_6_rca():
    th = rca_theta(1.5, 1, 1, margin=0)
    theta_ok = abs(th.sup - 0.1275) < 1e-4
    H = 200
    cases = {
        "linear": (GrowthFunction.from_poly([1, 2], H), "linear"),
        "quadratic": (GrowthFunction.from_poly([1, 1, 1], H), "factorial"),
        "sub-exponential": (GrowthFunction.from_callable(subexp, H), "factorial"),
    }
    rows = []
    for name, (g, mode) in cases.items():
        est, cfg = rca_pipeline(g, mode)
        rep = verify_rca(est.tree_, est.plan_, cfg, H)
        rows.append((name, rep.passes, rep.s_min, est.S_.starts[:3], len(rep.violations)))
    ok = theta_ok and all(r[1] for r in rows)
    detail = f"theta sup {th.sup:.6f} vs 0.1275 (|diff| {abs(th.sup - 0.1275):.1e}); " + "; ".join(
        f"{n}: {'pass' if p else 'fail'} for s in [{s}, {H}], n_j {st}" for n, p, s, st, _ in rows
    )
    record(6, ok, detail)
    # the tightest fitted rate gives a larger theta; reported, not asserted
    for name in ("quadratic", "sub-exponential"):
        g, mode = cases[name]
        est, cfg = rca_pipeline(g, mode, lam=None)
        for s_from in ("radius", "counting"):
            rep = verify_rca(est.tree_, est.plan_, cfg, H, s_from=s_from)
            note(6, f"tight rate {name} (lambda {cfg.lam:.3f}, theta {cfg.theta:.4f}), scan from {s_from} "
                    f"s >= {rep.s_min}: {'pass' if rep.passes else 'fail'}, "
                    f"{len(rep.branch_witness)} levels with early departures")
    assert ok


# 7 ----------------------------------------------------------------------------
def test_criterion_7_doubling_dichotomy():
    H = 60
    line = GrowthSynthesizer(mode="linear", layout=unbounded(line_layout(6))).fit(GrowthFunction.from_poly([1, 2], H))
    r0 = 3 * L_PIECE
    t0 = time.perf_counter()
    line_viol = pointwise_doubling(line.graph_, r0, 8)
    line_ratio = max_doubling_ratio(line.graph_, r0)
    line_time = time.perf_counter() - t0
    line_bound = doubling_bound_check(line.w_, DoublingConfig(K=8, alpha_poly=0, l=L_PIECE), line.graph_)
    line_ok = not line_viol and line_ratio <= 8 and line_bound.first_violation is None and line_bound.C_settled

    # full binary tree: exact origin balls from the aggregated model, checked against the graph first
    binary = [2 ** (n + 1) - 1 for n in range(81)]
    small = GrowthSynthesizer(mode="none", normalize=False).fit(binary[:13])
    model_small = OriginBallModel.from_growth(binary[:13], small.params_)
    agree = model_small.z() == small.z_.z and all(
        model_small.ball_volume(Fraction(k, 2)) == ball_volume(small.graph_, Fraction(k, 2)) for k in range(0, 60)
    )
    model = OriginBallModel.from_growth(binary, small.params_, 80)
    ratios = model.doubling_ratios(r0, 40 * L_PIECE)
    worst_r, worst = max(ratios, key=lambda t: t[1])
    bin_bound = doubling_bound_check(binary, DoublingConfig(K=8, alpha_poly=0, l=L_PIECE))
    bin_ok = agree and worst > 10**6 and bin_bound.first_violation is not None

    ok = line_ok and bin_ok
    record(7, ok, f"line: max ratio {line_ratio} (A <= 8), pointwise violations {len(line_viol)} in {line_time:.1f}s, "
                  f"C = {line_bound.C}, first violation {line_bound.first_violation}; "
                  f"binary: origin ratio {float(worst):.3g} at r = {worst_r} <= {40 * L_PIECE} "
                  f"(model agrees with graph: {agree}), first n over 4K^2(nl)^(2a): {bin_bound.first_violation}")
    assert ok


# 8 ----------------------------------------------------------------------------
def random_plan(rng):
    l = int(rng.integers(1, 4))
    H = int(rng.integers(3, 13))
    c = [1, 2]
    while len(c) <= H:
        c.append(int(rng.integers(2, 2 * c[-1] + 1)) if rng.random() < 0.5 else max(2, c[-1] + int(rng.integers(-1, 3))))
    c = [min(x, 60) for x in c]
    vals = list(np.cumsum(c))
    line = rng.random() < 0.5
    cat = default_catalog(l=l)
    depth = 3
    lay = unbounded(line_layout(depth) if line else ray_layout(depth))
    params = synthesize_params(cat, lay)
    intervals, prev_end = [], 1
    for m in range(2, H):
        if len(intervals) == depth:
            break
        t = params.t[len(intervals) + 1]
        fits = m > prev_end and m + t - 1 < H and all(1 <= c[k + 1] <= 2 * c[k] - 1 for k in range(m, m + t))
        if fits and rng.random() < 0.3:
            intervals.append((m, t))
            prev_end = m + t - 1
    S_ok = LevelSet(tuple(intervals))
    tree = build_tree(vals, S_ok, layout=lay)
    return assemble(tree, S_ok, params, cat, lay)


def test_criterion_8_oracle_equivalence():
    rng = np.random.default_rng(20261019)
    mismatches, sizes = 0, []
    for _ in range(100):
        plan = random_plan(rng)
        sizes.append(len(plan.pieces))
        if discrete_growth(plan).z != flat_enumeration(plan):
            mismatches += 1
    ok = mismatches == 0 and max(sizes) <= 500
    record(8, ok, f"100 random plans ({min(sizes)}-{max(sizes)} pieces), mismatches {mismatches}")
    assert ok
