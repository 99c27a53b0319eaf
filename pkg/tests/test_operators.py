import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from holderdsm import (HVector, NoisyData, StructuralError, get_problem, make_composite,
                       make_identity, make_pointwise_holder, make_psd_linear, norm,
                       perturb, problem_labels)
from holderdsm.operators import check_monotone, hilbert_kernel, holder_ratio, psd5_matrix
from holderdsm.space import uniform_weights
from oracles import weighted_pinv_solution


def test_registry_contents():
    labels = problem_labels()
    for lab in ("identity", "psd2", "psd5", "holder075", "composite", "scalar"):
        assert lab in labels
    with pytest.raises(StructuralError):
        get_problem("nope")


@pytest.mark.parametrize("label", ["identity", "psd2", "psd5", "holder075", "composite"])
def test_registered_problems_are_consistent_and_monotone(label):
    p = get_problem(label)
    assert norm(p.operator.apply(p.y) - p.f) <= 1e-12 * (1 + norm(p.f))
    assert check_monotone(p.operator, samples=500, scale=2.0) >= -1e-12


@pytest.mark.parametrize("label", ["psd2", "psd5"])
def test_linear_solution_is_minimal_norm(label):
    p = get_problem(label)
    oracle = weighted_pinv_solution(p.operator.matrix, p.f.coords, p.weights)
    assert np.allclose(p.y.coords, oracle, rtol=1e-8, atol=1e-8 * norm(p.y))


def test_psd5_null_space_against_scipy():
    p = get_problem("psd5")
    w = p.weights
    s = np.sqrt(w)
    B = (s[:, None] * p.operator.matrix) / s[None, :]
    ns = scipy.linalg.null_space(B, rcond=1e-12)
    assert ns.shape[1] == 1 == p.null_basis.shape[1]
    mine = s * p.null_basis[:, 0]
    assert abs(abs(mine @ ns[:, 0]) - 1.0) < 1e-8


def test_psd5_matrix_is_rank_four_hilbert_deflation():
    K = hilbert_kernel(5, uniform_weights(5))
    assert K[1, 2] == pytest.approx(0.5 * (0.2 / 4 + 0.2 / 4))
    lam = np.linalg.eigvalsh(np.diag(np.sqrt(uniform_weights(5))) @ psd5_matrix()
                             @ np.diag(1 / np.sqrt(uniform_weights(5))))
    assert np.sum(lam > 1e-12) == 4


def test_psd2_nearest_solution_projection_oracle():
    p = get_problem("psd2", ubar=[0.0, 5.0])
    assert np.allclose(p.ystar.coords, [1.0, 5.0])
    assert np.allclose(get_problem("psd2").ystar.coords, [1.0, 0.0])


def test_psd_linear_rejections():
    with pytest.raises(StructuralError):
        make_psd_linear(np.array([[1.0, 1.0], [0.0, 1.0]]), [1.0, 0.0])
    with pytest.raises(StructuralError):
        make_psd_linear(np.diag([1.0, -1e-3]), [1.0, 0.0])
    with pytest.raises(StructuralError):  # y has a null-space component
        make_psd_linear(np.diag([1.0, 0.0]), [1.0, 1.0])


def test_holder_exponent_range():
    with pytest.raises(StructuralError):
        make_pointwise_holder(3, 0.4)
    with pytest.raises(StructuralError):
        make_pointwise_holder(3, 1.0)
    p = make_pointwise_holder(3, 0.4, strict=False)
    assert p.operator.holder_exponent == 0.4


def test_holder_constant_dominates_sampled_ratio():
    p = get_problem("holder075")
    op = p.operator
    assert op.holder_exponent == 0.75 and not op.differentiable
    assert holder_ratio(op, radius=2.0, samples=2000) <= op.holder_constant


def test_pointwise_holder_values():
    p = make_pointwise_holder(2, 0.75, y=[0.5, -2.0])
    assert np.allclose(p.operator.func(np.array([16.0, -81.0])), [8.0, -27.0])


@given(st.floats(1e-8, 10.0), st.integers(0, 2 ** 31 - 1))
def test_perturb_is_exactly_at_distance_delta(delta, seed):
    p = get_problem("composite")
    nd = perturb(p.f, delta, seed)
    assert norm(nd.f_delta - p.f) == pytest.approx(delta, rel=1e-12)


def test_perturb_direction_independent_of_delta():
    p = get_problem("psd5")
    e1 = (perturb(p.f, 1e-1, 7).f_delta - p.f).coords / 1e-1
    e2 = (perturb(p.f, 1e-4, 7).f_delta - p.f).coords / 1e-4
    assert np.allclose(e1, e2, atol=1e-9)


def test_noisy_data_enforces_noise_bound():
    f = HVector([1.0])
    with pytest.raises(StructuralError):
        NoisyData(HVector([1.2]), 0.1, f)
    with pytest.raises(StructuralError):
        NoisyData(HVector([1.0]), 0.0)
    assert NoisyData(HVector([1.01]), 0.01, f).delta == 0.01


def test_composite_is_strictly_monotone_sum():
    A = np.diag([1.0, 0.0])
    p = make_composite(A, 0.75, y=[0.5, 0.5])
    u = np.array([1.0, -8.0])
    assert np.allclose(p.operator.func(u), A @ u + np.sign(u) * np.abs(u) ** 0.75)
    assert p.strictly_monotone


def test_identity_factory():
    p = make_identity(4)
    assert np.allclose(p.y.coords, 1.0) and p.null_basis is None
