import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.integrate import quad, solve_ivp

from holderdsm import (GronwallInstance, Schedule, StructuralError, audit_aux33,
                       audit_limits, audit_trajectory, get_problem, gronwall_bound,
                       gronwall_check, integrate, perturb, sample_path)
from holderdsm.verification import k_constant

REF = Schedule.power(3, 1, 0.5)
GRID = np.linspace(0.0, 1.0, 1000)


def instance(g, alpha, beta):
    ones = np.ones_like(GRID)
    return GronwallInstance(GRID, g, alpha * ones, beta * ones)


@pytest.mark.parametrize("alpha,beta,g0,exact", [
    (1.0, 0.0, 1.0, lambda t: np.exp(-t)),
    (0.0, 1.0, 0.0, lambda t: t),
    (1.0, 1.0, 0.0, lambda t: 1 - np.exp(-t)),
])
def test_closed_form_envelopes(alpha, beta, g0, exact):
    inst = instance(np.full_like(GRID, g0), alpha, beta)
    b = gronwall_bound(inst)
    ref = exact(GRID)
    assert np.all(np.abs(b - ref) <= 1e-6 * np.maximum(np.abs(ref), 1e-300) + 1e-300)
    sol = instance(ref, alpha, beta)
    assert gronwall_check(sol, 1e-6).passed


def test_corrupted_g_fails_with_witness():
    g = 1 - np.exp(-GRID)
    g[600:] *= 1.01
    chk = gronwall_check(instance(g, 1.0, 1.0), 1e-6)
    assert not chk.passed and chk.witness == pytest.approx(GRID[600])


def test_instance_validation():
    with pytest.raises(StructuralError):
        GronwallInstance([0, 1], [1, 1], [1], [1, 1])
    with pytest.raises(StructuralError):
        GronwallInstance([0, 1], [1, 1], [-1, 1], [1, 1])
    with pytest.raises(StructuralError):
        GronwallInstance([1, 0], [1, 1], [1, 1], [1, 1])


@given(arrays(float, 20, elements=st.floats(0, 3)), arrays(float, 20, elements=st.floats(0, 3)),
       arrays(float, 20, elements=st.floats(0, 1)))
def test_bound_monotone_in_beta(alpha, beta, bump):
    t = np.linspace(0, 2, 20)
    g = np.ones(20)
    lo = gronwall_bound(GronwallInstance(t, g, alpha, beta))
    hi = gronwall_bound(GronwallInstance(t, g, alpha, beta + bump))
    assert np.all(hi >= lo * (1 - 1e-12))


def test_k_constant_against_ode():
    # K - 1 = sup g with g' = -a g + |a'|/a, g(0) = 0
    s = Schedule.power(3, 1, 0.5, T_max=200.0)
    rhs = lambda t, g: -s.value(t) * g + abs(s.derivative(t)) / s.value(t)
    sol = solve_ivp(rhs, (0, 200), [0.0], rtol=1e-11, atol=1e-14, dense_output=True,
                    max_step=0.05)
    ref = 1 + sol.y[0].max()
    assert k_constant(s, dphi=0.002) == pytest.approx(ref, rel=1e-4)


def test_aux33_constant_psi_reduces_to_schedule_inequality():
    q = 0.25
    t = np.concatenate([[0.0], np.geomspace(0.01, 1e3, 40)])
    rep = audit_aux33(REF, q, (t, np.ones_like(t)))
    assert rep.passed
    lhs = rep.values["lhs"]
    for i in (10, 25, 40):
        T = t[i]
        pT = (1 - q) * REF.integral_phi(T)
        ref, _ = quad(lambda x: np.exp((1 - q) * REF.integral_phi(x) - pT)
                      * abs(REF.derivative(x)), 0, T, limit=500, epsrel=1e-12)
        assert lhs[i] == pytest.approx(ref, rel=1e-4)
        assert ref <= q / (1 - 2 * q) * REF.value(T)


def test_aux33_refuses_uncertified_q():
    t = np.linspace(0, 10, 5)
    with pytest.raises(StructuralError):
        audit_aux33(Schedule.power(1, 1, 0.5), 0.25, (t, np.ones(5)))


def test_aux33_negative_control():
    t = np.concatenate([[0.0], np.geomspace(0.01, 1e3, 40)])
    psi = np.where(t < 10, 1e6, 1.0)
    assert not audit_aux33(REF, 0.25, (t, psi)).passed


@pytest.fixture(scope="module")
def identity_path():
    p = get_problem("identity")
    nd = perturb(p.f, 1e-2, 0)
    return sample_path(p.operator, REF, nd, np.concatenate([[0], np.logspace(-2, 5, 50)]))


def test_limit_audit_on_path(identity_path):
    rep = audit_limits(REF, identity_path, [1e2, 1e3, 1e4, 1e5])
    assert rep.passed
    v = rep.values
    assert v["damped_ratio"][-1] < 1e-2 * v["damped_ratio"][0]


def test_limit_audit_negative_control(identity_path):
    t = np.array([p.t for p in identity_path])
    rep = audit_limits(REF, (t, 1 + t ** 2), [1e2, 1e3, 1e4, 1e5])
    assert not rep["damped ratio decreasing"].passed


def test_limit_audit_needs_long_enough_path(identity_path):
    with pytest.raises(StructuralError):
        audit_limits(REF, identity_path[:20], [1e2, 1e3])


@pytest.fixture(scope="module")
def composite_run():
    p = get_problem("composite")
    nd = perturb(p.f, 1e-1, 0)
    return p, nd, integrate(p.operator, REF, nd, p.start())


def test_trajectory_audit_passes(composite_run):
    p, nd, rec = composite_run
    rep = audit_trajectory(p.operator, REF, nd, rec, y=p.y)
    assert rep.passed, rep.table()
    assert {c.name for c in rep.checks} >= {"h bound", "w bound", "a|u-V| <= h",
                                            "|F(u)-F(V)| <= h", "norm bound", "error chain"}


def test_trajectory_audit_negative_control(composite_run):
    p, nd, rec = composite_run
    import copy
    bad = copy.copy(rec)
    bad.h = rec.h * 0.5
    rep = audit_trajectory(p.operator, REF, nd, bad)
    assert not rep["a|u-V| <= h"].passed


def test_h_envelope_skipped_without_certificate(composite_run):
    p, nd, rec = composite_run
    rep = audit_trajectory(p.operator, REF, nd, rec, q=0.1)
    assert "skipped" in rep["h bound"].detail
