import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradcheck import check_network
from hstirs.exceptions import DomainError
from hstirs.sac.network import Mlp, backward, forward


def reference_forward(net, x):
    """Scalar loops over the same arithmetic."""
    h = list(x)
    for layer, (w, b) in enumerate(zip(net.weights, net.biases)):
        out = []
        for j in range(w.shape[1]):
            z = b[j] + sum(h[i] * w[i, j] for i in range(w.shape[0]))
            out.append(z if layer == len(net.weights) - 1 else np.tanh(z))
        h = out
    return np.array(h)


def test_zero_network():
    net = Mlp.zeros((4, 5, 2))
    np.testing.assert_array_equal(forward(net, np.ones(4)), 0)


def test_identity_layer():
    net = Mlp((3, 3), [np.eye(3)], [np.zeros(3)])
    x = np.array([0.2, -5.0, 7.0])
    np.testing.assert_array_equal(forward(net, x), x)


@pytest.mark.parametrize("seed", range(5))
def test_matches_scalar_reference(seed):
    rng = np.random.default_rng(seed)
    net = Mlp.init((4, 6, 5, 2), rng)
    x = rng.normal(size=4)
    np.testing.assert_allclose(forward(net, x), reference_forward(net, x), rtol=1e-12, atol=1e-12)


def test_batch_matches_rows():
    rng = np.random.default_rng(1)
    net = Mlp.init((3, 4, 2), rng)
    xs = rng.normal(size=(6, 3))
    np.testing.assert_allclose(forward(net, xs), np.stack([forward(net, x) for x in xs]), rtol=1e-14)


def test_linear_layer_weight_gradient():
    x = np.array([[1.0, 2.0, -3.0]])
    net = Mlp((3, 2), [np.ones((3, 2))], [np.zeros(2)])
    grads, gin = backward(net, x, np.ones((1, 2)))
    np.testing.assert_array_equal(grads[0], np.outer(x[0], [1.0, 1.0]))
    np.testing.assert_array_equal(grads[1], [1.0, 1.0])
    np.testing.assert_array_equal(gin, [[2.0, 2.0, 2.0]])


def test_zero_output_gradient():
    net = Mlp.init((3, 4, 2), np.random.default_rng(0))
    grads, _ = backward(net, np.ones((2, 3)), np.zeros((2, 2)))
    assert all(np.all(g == 0) for g in grads)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_finite_differences(seed):
    assert check_network(seed) < 1e-4


def test_shape_errors():
    net = Mlp.init((3, 2), np.random.default_rng(0))
    with pytest.raises(DomainError):
        forward(net, np.ones(4))
    with pytest.raises(DomainError):
        backward(net, np.ones((2, 3)), np.ones((2, 3)))
    with pytest.raises(DomainError):
        Mlp.init((3,), np.random.default_rng(0))


def test_copy_is_deep():
    net = Mlp.init((2, 2), np.random.default_rng(0))
    other = net.copy()
    other.weights[0][0, 0] += 1
    assert net.weights[0][0, 0] != other.weights[0][0, 0]
    assert net.n_params() == 6 and net.all_finite()
