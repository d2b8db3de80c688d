import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from volgrowth import (
    DomainError,
    DoublingConfig,
    GrowthFunction,
    MultiTrunk,
    RcaConfig,
    bounded_case_check,
    build_tree,
    doubling_bound_check,
    rca_nj_threshold,
    rca_theta,
    verify_rca,
    verify_rce,
)
from volgrowth.estimator import GrowthSynthesizer
from volgrowth.geometry import rca_s_threshold
from volgrowth.tree import layout_from_tree, line_layout


def theta_oracle(lam, alpha, t0):
    """Both bounds by root finding in 50-digit arithmetic."""
    mpmath.mp.dps = 50
    lam, alpha = mpmath.mpf(lam), mpmath.mpf(alpha)
    ln2 = mpmath.log(2)
    a = mpmath.log(alpha * 4**t0)
    b1 = mpmath.findroot(lambda th: (1 - 3 * th) * ln2 - mpmath.log(lam), 0.1)
    b2 = mpmath.findroot(lambda th: a * th**2 + 3 * ln2 * th + mpmath.log(lam / 2), 0.1)
    return float(b1), float(b2)


def test_theta_reproduces_reference_value():
    th = rca_theta(1.5, 1, 1, margin=0)
    assert abs(th.sup - 0.1275) < 1e-4
    b1, b2 = theta_oracle(1.5, 1, 1)
    assert th.branch1 == pytest.approx(b1, abs=1e-12)
    assert th.branch2 == pytest.approx(b2, abs=1e-12)
    assert rca_theta(1.5, 1, 1).theta == pytest.approx(th.sup * 0.99)


@given(st.floats(1.01, 1.99), st.floats(1, 1000), st.integers(1, 6))
def test_theta_matches_oracle(lam, alpha, t0):
    th = rca_theta(lam, alpha, t0, margin=0)
    b1, b2 = theta_oracle(lam, alpha, t0)
    assert th.sup == pytest.approx(min(b1, b2), rel=1e-9, abs=1e-12)
    assert 0 < th.sup < 1 / 3


def test_theta_domain():
    with pytest.raises(DomainError):
        rca_theta(2.0, 1, 1)
    with pytest.raises(DomainError):
        rca_theta(1.5, 0.5, 1)
    with pytest.raises(DomainError):
        RcaConfig(theta=1.2)


def test_thresholds():
    th = rca_theta(1.5, 1, 1).theta
    lhs = rca_nj_threshold(1.5, 1, th, 1)
    assert lhs == pytest.approx(math.log(2) / ((1 - 3 * th) * math.log(2) - math.log(1.5)))
    assert rca_s_threshold(1.5, 1, th, 1) == pytest.approx(2 * lhs)


@pytest.fixture(scope="module")
def quadratic_rca():
    H = 80
    w = GrowthFunction.from_poly([1, 1, 1], H)
    fit = GrowthSynthesizer(mode="none", build_graph=False).fit(w)
    alpha = float(max(Fraction(x) / Fraction(3, 2) ** n for n, x in enumerate(fit.w_.values)))
    th = rca_theta(1.5, alpha, 1)
    base = math.floor(rca_nj_threshold(1.5, alpha, th.theta, 2)) + 1
    fit = GrowthSynthesizer(mode="factorial", base=base, build_graph=False).fit(w)
    return fit, RcaConfig(th.theta, max(fit.params_.t[1:]), 1.5, alpha, 2)


def test_verify_rca_passes_above_threshold(quadratic_rca):
    fit, cfg = quadratic_rca
    rep = verify_rca(fit.tree_, fit.plan_, cfg)
    assert rep.passes and rep.s_min == math.floor(1 / cfg.theta**2 / 2) + 1


def test_verify_rca_flags_early_departures():
    # a trunk with side branches at every level and nothing in S departs too early
    tree = build_tree([2 ** (n + 1) - 1 for n in range(15)])
    rep = verify_rca(tree, None, RcaConfig(0.3, 1, 1.5, 1, 2))
    assert not rep.passes and rep.violations and rep.branch_witness


def test_verify_rca_rejects_many_ends_and_rce_covers_them():
    H = 40
    lay = layout_from_tree(line_layout(H).to_dict(), record_degree_bound=False)
    fit = GrowthSynthesizer(mode="linear", layout=lay, build_graph=False).fit(GrowthFunction.from_poly([1, 2], H))
    cfg = RcaConfig(0.12, 2, 1.5, 1, 2)
    with pytest.raises(MultiTrunk):
        verify_rca(fit.tree_, fit.plan_, cfg)
    rep = verify_rce(fit.tree_, fit.plan_, cfg)
    assert len(rep.ends) == 2 and rep.passes


def test_bounded_case_check():
    th = rca_theta(1.5, 1, 1).theta
    v = GrowthFunction.from_poly([1, 2], 200)
    rep = bounded_case_check(v, th, 1, 4, range(1, 201), alphaO=1, lam=1.5)
    assert rep.holds_from is not None
    assert all(r.contradiction for r in rep.rows if r.s >= rep.holds_from)
    assert rep.base == pytest.approx(2 ** (4 * (1 - 3 * th) / 5))


# doubling bound ---------------------------------------------------------------
def test_doubling_bound_linear():
    v = GrowthFunction.from_poly([1, 2], 60)
    rep = doubling_bound_check(v, DoublingConfig(K=8))
    assert rep.first_violation is None
    # C from the direct search max v(n) / (n + 1)
    assert rep.C == max(Fraction(x, n + 1) for n, x in enumerate(v.values))
    assert rep.C_settled


def test_doubling_bound_binary():
    v = [2 ** (n + 1) - 1 for n in range(40)]
    rep = doubling_bound_check(v, DoublingConfig(K=8))
    cap = 4 * 64
    first = next(n for n in range(1, 40) if v[n] - v[n - 1] > cap)
    assert rep.first_violation == first == 9
    assert not rep.C_settled


def test_doubling_config_validation():
    with pytest.raises(ValueError):
        DoublingConfig(K=0)
    with pytest.raises(ValueError):
        DoublingConfig(K=2, alpha_poly=-1)
