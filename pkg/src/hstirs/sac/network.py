"""Small fully connected networks with hand-written reverse mode.

Hidden layers use ``tanh``; the output layer is linear. Weights are stored
as ``(fan_in, fan_out)`` so a batch ``x`` of shape ``(B, fan_in)`` maps to
``x @ W + b``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError


@dataclass
class Mlp:
    widths: tuple
    weights: list
    biases: list

    @classmethod
    def init(cls, widths, rng, out_scale=1.0) -> "Mlp":
        widths = tuple(int(w) for w in widths)
        if len(widths) < 2 or min(widths) < 1:
            raise DomainError(f"invalid layer widths {widths}")
        weights, biases = [], []
        for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            if i == len(widths) - 2:
                limit *= out_scale
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(widths, weights, biases)

    @classmethod
    def zeros(cls, widths) -> "Mlp":
        widths = tuple(int(w) for w in widths)
        return cls(widths, [np.zeros((a, b)) for a, b in zip(widths[:-1], widths[1:])],
                   [np.zeros(b) for b in widths[1:]])

    def arrays(self) -> list:
        """Parameters in declaration order: ``W0, b0, W1, b1, ...``."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self) -> "Mlp":
        return Mlp(self.widths, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def n_params(self) -> int:
        return sum(a.size for a in self.arrays())

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())

    def __call__(self, x):
        return forward(self, x)


def _check_input(params: Mlp, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.widths[0]:
        raise DomainError(f"input has {x.shape[-1]} features, network expects {params.widths[0]}")
    return x


def forward(params: Mlp, x, return_cache=False):
    """Evaluate the network on a vector or a batch of row vectors."""
    x = _check_input(params, x)
    squeeze = x.ndim == 1
    h = x[None, :] if squeeze else x
    activations = [h]
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        h = z if i == last else np.tanh(z)
        activations.append(h)
    out = h[0] if squeeze else h
    if return_cache:
        return out, activations
    return out


def backward(params: Mlp, x, grad_out, cache=None):
    """Gradients of ``sum(grad_out * forward(params, x))``.

    Returns ``(grads, grad_input)`` where ``grads`` follows
    :meth:`Mlp.arrays` order.
    """
    x = _check_input(params, x)
    squeeze = x.ndim == 1
    g = np.asarray(grad_out, dtype=float)
    if squeeze:
        g = g[None, :]
    if cache is None:
        _, cache = forward(params, x[None, :] if squeeze else x, return_cache=True)
    if g.shape != cache[-1].shape:
        raise DomainError(f"output gradient shape {g.shape} does not match output {cache[-1].shape}")

    n_layers = len(params.weights)
    grads = [None] * (2 * n_layers)
    for i in range(n_layers - 1, -1, -1):
        if i != n_layers - 1:
            g = g * (1.0 - cache[i + 1] ** 2)
        grads[2 * i] = cache[i].T @ g
        grads[2 * i + 1] = g.sum(axis=0)
        g = g @ params.weights[i].T
    return grads, (g[0] if squeeze else g)
