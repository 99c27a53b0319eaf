import numpy as np
import pytest
from hypothesis import given, strategies as st

from holderdsm import (HVector, NoisyData, Schedule, StructuralError, get_problem, norm,
                       perturb, sample_path, solve_regularized)
from holderdsm.path import default_tolerance, direct_solve


@given(st.floats(1e-5, 10.0), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_identity_closed_form(a, x, y, z):
    p = get_problem("identity")
    fd = HVector([x, y, z], p.weights)
    pt = solve_regularized(p.operator, a, fd)
    assert np.allclose(pt.V.coords, fd.coords / (1 + a), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("a", [1e-1, 1e-3, 1e-5])
def test_linear_solution_matches_dense_solve(a):
    p = get_problem("psd5")
    nd = perturb(p.f, 1e-2, 3)
    pt = solve_regularized(p.operator, a, nd)
    oracle = np.linalg.solve(p.operator.matrix + a * np.eye(5), nd.f_delta.coords)
    assert norm(pt.V - HVector(oracle, p.weights)) <= 2 * pt.tol / a
    assert np.allclose(direct_solve(p.operator.matrix, a, nd.f_delta).coords, oracle)


@pytest.mark.parametrize("label", ["holder075", "composite"])
@pytest.mark.parametrize("a", [1.0, 1e-2, 1e-4])
def test_nonlinear_residual_below_tolerance(label, a):
    p = get_problem(label)
    nd = perturb(p.f, 1e-3, 0)
    pt = solve_regularized(p.operator, a, nd)
    r = p.operator.apply(pt.V) + a * pt.V - nd.f_delta
    assert norm(r) <= pt.tol
    assert pt.phi_d == pytest.approx(a * pt.psi)
    assert pt.discrepancy == pytest.approx(norm(p.operator.apply(pt.V) - nd.f_delta))


def test_default_tolerance_scaling():
    assert default_tolerance(1.0, None) == 1e-10
    assert default_tolerance(1e-4, 1e-4) == pytest.approx(1e-11)
    assert default_tolerance(1e-9, 1e-9) == 1e-13


def test_path_monotone_quantities():
    p = get_problem("composite")
    nd = perturb(p.f, 1e-2, 1)
    s = Schedule.power(1, 1, 0.9)
    pts = sample_path(p.operator, s, nd, np.concatenate([[0], np.logspace(-2, 4, 30)]))
    psi = np.array([q.psi for q in pts])
    phi = np.array([q.phi_d for q in pts])
    assert np.all(np.diff(psi) >= -1e-8) and np.all(np.diff(phi) <= 1e-8)
    assert [q.t for q in pts][0] == 0.0


def test_zero_data_rejected():
    p = get_problem("identity")
    with pytest.raises(StructuralError):
        sample_path(p.operator, Schedule.power(), HVector(np.zeros(3), p.weights), [0, 1])


def test_noisy_data_accepted_in_solver():
    p = get_problem("scalar")
    nd = NoisyData(HVector([1.01]), 0.01, p.f)
    pt = solve_regularized(p.operator, 0.5, nd)
    assert pt.V.coords[0] == pytest.approx(1.01 / 1.5, rel=1e-10)


def test_nonpositive_regularization_rejected():
    p = get_problem("identity")
    with pytest.raises(StructuralError):
        solve_regularized(p.operator, 0.0, p.f)
