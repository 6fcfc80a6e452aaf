"""Small fully-connected regressor with hand-rolled backprop.

Rectified-linear hidden layers, linear scalar output, squared-error
loss, optional inverted dropout on hidden activations during training.
Kept dependency-free (numpy only) so gradients can be verified against
finite differences.
"""

from __future__ import annotations

import numpy as np


class Mlp:
    def __init__(self, layer_sizes: list[int], rng: np.random.Generator):
        """``layer_sizes`` runs input -> hidden... -> output."""
        if len(layer_sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = list(layer_sizes)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
            scale = np.sqrt(2.0 / fan_in)
            self.weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0.0)
        return h[:, 0]

    def loss_and_grads(
        self,
        x: np.ndarray,
        y: np.ndarray,
        dropout_rate: float = 0.0,
        rng: np.random.Generator | None = None,
    ) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
        """Mean squared error and parameter gradients for one batch."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.asarray(y, dtype=float).reshape(-1)
        last = len(self.weights) - 1
        h = x
        pre: list[np.ndarray] = []
        acts: list[np.ndarray] = [x]
        masks: list[np.ndarray | None] = []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            pre.append(z)
            if i < last:
                h = np.maximum(z, 0.0)
                if dropout_rate > 0.0:
                    if rng is None:
                        raise ValueError("dropout needs an rng")
                    keep = 1.0 - dropout_rate
                    mask = (rng.random(h.shape) < keep) / keep
                    h = h * mask
                    masks.append(mask)
                else:
                    masks.append(None)
            else:
                h = z
                masks.append(None)
            acts.append(h)

        pred = h[:, 0]
        err = pred - y
        loss = float(np.mean(err**2))

        d = (2.0 * err / len(y))[:, None]
        grads_w: list[np.ndarray] = [np.empty(0)] * len(self.weights)
        grads_b: list[np.ndarray] = [np.empty(0)] * len(self.biases)
        for i in range(last, -1, -1):
            grads_w[i] = acts[i].T @ d
            grads_b[i] = d.sum(axis=0)
            if i > 0:
                d = d @ self.weights[i].T
                if masks[i - 1] is not None:
                    d = d * masks[i - 1]
                d = d * (pre[i - 1] > 0.0)
        return loss, grads_w, grads_b

    def sgd_step(self, grads_w, grads_b, lr: float) -> None:
        for w, gw in zip(self.weights, grads_w):
            w -= lr * gw
        for b, gb in zip(self.biases, grads_b):
            b -= lr * gb

    def get_params(self) -> list[dict]:
        return [
            {"w": w.tolist(), "b": b.tolist()}
            for w, b in zip(self.weights, self.biases)
        ]

    @classmethod
    def from_params(cls, layers: list[dict]) -> "Mlp":
        mlp = cls.__new__(cls)
        mlp.weights = [np.asarray(layer["w"], dtype=float) for layer in layers]
        mlp.biases = [np.asarray(layer["b"], dtype=float) for layer in layers]
        mlp.sizes = [mlp.weights[0].shape[0]] + [w.shape[1] for w in mlp.weights]
        return mlp


def gradient_check(mlp: Mlp, x: np.ndarray, y: np.ndarray, eps: float = 1e-5) -> float:
    """Max relative error between backprop and central finite differences.

    Runs with dropout disabled; returns the worst layer-wise error over
    all weight and bias tensors.
    """
    _, grads_w, grads_b = mlp.loss_and_grads(x, y)
    worst = 0.0
    for params, grads in ((mlp.weights, grads_w), (mlp.biases, grads_b)):
        for p, g in zip(params, grads):
            num = np.zeros_like(p)
            it = np.nditer(p, flags=["multi_index"])
            while not it.finished:
                idx = it.multi_index
                orig = p[idx]
                p[idx] = orig + eps
                hi, _, _ = mlp.loss_and_grads(x, y)
                p[idx] = orig - eps
                lo, _, _ = mlp.loss_and_grads(x, y)
                p[idx] = orig
                num[idx] = (hi - lo) / (2 * eps)
                it.iternext()
            denom = np.linalg.norm(num) + np.linalg.norm(g) + 1e-12
            worst = max(worst, float(np.linalg.norm(num - g) / denom))
    return worst
