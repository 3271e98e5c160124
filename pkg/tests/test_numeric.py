import numpy as np
import pytest

from recur.algebra import PathPolynomial
from recur.builtins import builtin_spec
from recur.errors import ActivationError
from recur.expansion import derivative
from recur.numeric import (
    ConcreteNet,
    check_derivative,
    eval_polynomial,
    finite_diff_check,
    forward,
    instantiate,
    jacobian_exact,
)

RESNET = builtin_spec("resnet")
CHAIN = builtin_spec("chain")
NEWARCH = builtin_spec("newarch")

ALL_BUILTINS = ("chain", "resnet", "newarch", "eq22", "appendix-ex1", "appendix-ex2")


def _scalar_net(spec, *values):
    return ConcreteNet(
        spec=spec, matrices=tuple(np.array([[v]], dtype=float) for v in values)
    )


def test_instantiate_is_deterministic():
    a = instantiate(RESNET, 3, 4, seed=7)
    b = instantiate(RESNET, 3, 4, seed=7)
    for ma, mb in zip(a.matrices, b.matrices):
        assert np.array_equal(ma, mb)
    c = instantiate(RESNET, 3, 4, seed=8)
    assert not np.array_equal(a.matrices[0], c.matrices[0])


def test_instantiate_range_scaled_by_sqrt_dim():
    net = instantiate(CHAIN, 2, 1, seed=0)
    for m in net.matrices:
        assert -0.5 <= m[0, 0] <= 0.5
    net4 = instantiate(CHAIN, 5, 4, seed=0)
    bound = 0.5 / 2.0  # 0.5 / sqrt(4)
    for m in net4.matrices:
        assert np.all(np.abs(m) <= bound)


def test_activation_guard():
    with pytest.raises(ActivationError):
        instantiate(NEWARCH, 3, 4, seed=7, activation="tanh")
    # chain and resnet are fine
    instantiate(CHAIN, 3, 4, seed=7, activation="tanh")
    instantiate(RESNET, 3, 4, seed=7, activation="tanh")


def test_forward_scalar_resnet():
    net = _scalar_net(RESNET, 0.5, 0.25, 0.125)
    trace = forward(net, np.array([1.0]))
    assert trace.state(3)[0] == pytest.approx(1.5 * 1.25 * 1.125, abs=0)
    assert trace.state(3)[0] == 2.109375


def test_forward_scalar_chain():
    net = _scalar_net(CHAIN, 2.0, 3.0)
    assert forward(net, np.array([1.0])).state(2)[0] == 6.0


def test_forward_zero_matrices_newarch_passes_input_through():
    d = 3
    zeros = tuple(np.zeros((d, d)) for _ in range(4))
    net = ConcreteNet(spec=NEWARCH, matrices=zeros)
    trace = forward(net, np.arange(1.0, d + 1))
    for i in range(1, 5):
        assert np.allclose(trace.state(i), np.arange(1.0, d + 1))


def test_jacobian_exact_at_final_state_is_identity():
    net = instantiate(NEWARCH, 4, 3, seed=11)
    assert np.array_equal(jacobian_exact(net, 4), np.eye(3))


def test_jacobian_exact_scalar_oracle():
    net = _scalar_net(RESNET, 0.5, 0.25, 0.125)
    assert jacobian_exact(net, 0)[0, 0] == 2.109375


def test_jacobian_exact_rejects_activated_net():
    net = instantiate(RESNET, 3, 2, seed=1, activation="tanh")
    with pytest.raises(ActivationError):
        jacobian_exact(net, 0)


def test_eval_polynomial_identity():
    net = instantiate(CHAIN, 3, 4, seed=2)
    assert np.array_equal(eval_polynomial(PathPolynomial.one(), net), np.eye(4))


def test_eval_polynomial_order_sensitive():
    net = instantiate(CHAIN, 2, 3, seed=3)
    w21 = eval_polynomial(PathPolynomial({(2, 1): 1}), net)
    w12 = eval_polynomial(PathPolynomial({(1, 2): 1}), net)
    assert np.allclose(w21, net.matrix(2) @ net.matrix(1))
    assert not np.allclose(w21, w12)


def test_eval_polynomial_index_error():
    net = instantiate(CHAIN, 2, 2, seed=0)
    with pytest.raises(IndexError):
        eval_polynomial(PathPolynomial({(3,): 1}), net)


def test_derivative_matches_exact_jacobian():
    for name in ALL_BUILTINS:
        spec = builtin_spec(name)
        for seed in range(3):
            net = instantiate(spec, 5, 4, seed=seed)
            for j in range(0, 6):
                res = check_derivative(net, derivative(spec, 5, j), j)
                assert res.passed, (name, seed, j, res.error)


def test_newarch_polynomial_matches_exact_to_1e12():
    for seed in range(5):
        net = instantiate(NEWARCH, 5, 4, seed=seed)
        for j in range(0, 6):
            res = check_derivative(net, derivative(NEWARCH, 5, j), j, tol=1e-12)
            assert res.passed, (seed, j, res.error)


def test_scalar_dimension_degenerates_to_arithmetic():
    for name in ALL_BUILTINS:
        spec = builtin_spec(name)
        net = instantiate(spec, 4, 1, seed=9)
        for j in range(0, 5):
            assert check_derivative(net, derivative(spec, 4, j), j).passed


def test_transposed_factors_break_equality():
    # Negative control: reversing a multi-factor term must fail for d > 1.
    net = instantiate(CHAIN, 3, 4, seed=5)
    wrong = PathPolynomial({(1, 2, 3): 1})  # true answer is W3*W2*W1
    res = check_derivative(net, wrong, 0)
    assert not res.passed


def test_finite_diff_resnet():
    net = instantiate(RESNET, 4, 4, seed=7, activation="tanh")
    res = finite_diff_check(net, 0, epsilon=1e-5)
    assert res.error <= 1e-4
    assert res.passed


def test_finite_diff_chain_all_states():
    net = instantiate(CHAIN, 3, 3, seed=7, activation="tanh")
    for j in range(0, 3):
        res = finite_diff_check(net, j, epsilon=1e-5)
        assert res.error <= 1e-4, (j, res.error)


def test_finite_diff_zero_matrices_formula_is_gprime_product():
    d, L = 2, 2
    zeros = tuple(np.zeros((d, d)) for _ in range(L))
    net = ConcreteNet(spec=RESNET, matrices=zeros, activation="tanh", seed=0)
    x0 = np.array([0.05, -0.08])
    res = finite_diff_check(net, 0, epsilon=1e-5, x0=x0)
    assert res.error <= 1e-10
    # The product formula collapses to the product of g' diagonals.
    trace = forward(net, x0)
    z1, z2 = trace.preactivations
    expected = np.diag(1 - np.tanh(z2) ** 2) @ np.diag(1 - np.tanh(z1) ** 2)
    from recur.numeric import _activated_product_jacobian

    assert np.allclose(_activated_product_jacobian(net, trace, 0), expected, atol=0)


def test_chain_product_formula_is_explicit_gprime_chain():
    from recur.numeric import _activated_product_jacobian

    net = instantiate(CHAIN, 3, 3, seed=7, activation="tanh")
    x0 = np.array([0.3, -0.2, 0.1])
    trace = forward(net, x0)
    z1, z2, z3 = trace.preactivations
    expected = (
        np.diag(1 - np.tanh(z3) ** 2) @ net.matrix(3)
        @ np.diag(1 - np.tanh(z2) ** 2) @ net.matrix(2)
        @ np.diag(1 - np.tanh(z1) ** 2) @ net.matrix(1)
    )
    assert np.allclose(_activated_product_jacobian(net, trace, 0), expected, atol=0)


def test_finite_diff_requires_activation_and_valid_epsilon():
    plain = instantiate(RESNET, 3, 2, seed=0)
    with pytest.raises(ActivationError):
        finite_diff_check(plain, 0)
    net = instantiate(RESNET, 3, 2, seed=0, activation="tanh")
    with pytest.raises(ValueError):
        finite_diff_check(net, 0, epsilon=0.5)


def test_check_result_serialization():
    net = instantiate(RESNET, 3, 2, seed=4)
    res = check_derivative(net, derivative(RESNET, 3, 1), 1)
    payload = res.to_dict()
    assert payload["pass"] is True
    assert set(payload) == {
        "spec", "L", "j", "d", "seed", "activation", "error", "tol", "pass",
    }
