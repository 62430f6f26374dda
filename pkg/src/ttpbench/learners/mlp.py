"""One-hidden-layer ReLU network with softmax output, trained by Adam."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def init_params(n_in: int, n_hidden: int, n_out: int, rng: np.random.Generator) -> dict:
    def glorot(fan_in, fan_out):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))

    return {
        "W1": glorot(n_in, n_hidden),
        "b1": rng.uniform(-np.sqrt(6.0 / (n_in + n_hidden)), np.sqrt(6.0 / (n_in + n_hidden)), n_hidden),
        "W2": glorot(n_hidden, n_out),
        "b2": rng.uniform(-np.sqrt(6.0 / (n_hidden + n_out)), np.sqrt(6.0 / (n_hidden + n_out)), n_out),
    }


def forward(params: dict, X):
    H = np.maximum(np.asarray(X @ params["W1"]) + params["b1"], 0.0)
    return H, softmax(H @ params["W2"] + params["b2"])


def loss_and_grads(params: dict, X, Y: np.ndarray, alpha: float = 0.0):
    """Mean cross-entropy plus ``alpha/2 * ||W||^2 / batch`` and its gradients."""
    B = Y.shape[0]
    H, P = forward(params, X)
    loss = -np.sum(Y * np.log(np.clip(P, 1e-300, None))) / B
    loss += 0.5 * alpha * (np.sum(params["W1"] ** 2) + np.sum(params["W2"] ** 2)) / B
    dZ = (P - Y) / B
    dH = (dZ @ params["W2"].T) * (H > 0)
    grads = {
        "W2": H.T @ dZ + alpha * params["W2"] / B,
        "b2": dZ.sum(axis=0),
        "W1": np.asarray(X.T @ dH) + alpha * params["W1"] / B,
        "b1": dH.sum(axis=0),
    }
    return loss, grads


class MLP:
    def __init__(self, hidden: int = 100, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8, epochs: int = 200,
                 batch_size: int = 32, alpha: float = 1e-4, tol: float = 1e-4,
                 n_iter_no_change: int = 10):
        self.hidden = hidden
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.epochs = epochs
        self.batch_size = batch_size
        self.alpha = alpha
        self.tol = tol
        self.n_iter_no_change = n_iter_no_change

    def fit(self, X, y, n_classes: int, rng: np.random.Generator):
        X = sp.csr_matrix(X) if sp.issparse(X) else np.asarray(X, dtype=np.float64)
        n = X.shape[0]
        Y = np.eye(n_classes)[y]
        params = init_params(X.shape[1], self.hidden, n_classes, rng)
        m = {k: np.zeros_like(v) for k, v in params.items()}
        v = {k: np.zeros_like(p) for k, p in params.items()}
        t = 0
        best, stall = np.inf, 0
        self.loss_curve = []
        for _ in range(self.epochs):
            order = rng.permutation(n)
            total = 0.0
            for lo in range(0, n, self.batch_size):
                b = order[lo:lo + self.batch_size]
                loss, grads = loss_and_grads(params, X[b], Y[b], self.alpha)
                total += loss * len(b)
                t += 1
                lr_t = self.lr * np.sqrt(1 - self.beta2 ** t) / (1 - self.beta1 ** t)
                for k in params:
                    g = grads[k]
                    m[k] = self.beta1 * m[k] + (1 - self.beta1) * g
                    v[k] = self.beta2 * v[k] + (1 - self.beta2) * g * g
                    params[k] -= lr_t * m[k] / (np.sqrt(v[k]) + self.eps)
            epoch_loss = total / n
            self.loss_curve.append(epoch_loss)
            if epoch_loss > best - self.tol:
                stall += 1
                if stall >= self.n_iter_no_change:
                    break
            else:
                stall = 0
            best = min(best, epoch_loss)
        self.params = params
        return self

    def predict_proba(self, X) -> np.ndarray:
        return forward(self.params, X)[1]
