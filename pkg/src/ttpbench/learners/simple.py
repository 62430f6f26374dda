"""K-nearest neighbours, Gaussian naive Bayes and a one-vs-rest linear SVM."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp


def _row_sq_norms(X) -> np.ndarray:
    if sp.issparse(X):
        return np.asarray(X.multiply(X).sum(axis=1)).ravel()
    return np.einsum("ij,ij->i", X, X)


class KNN:
    def __init__(self, k: int = 5):
        self.k = k

    def fit(self, X, y, n_classes: int, rng=None):
        self.X = sp.csr_matrix(X) if sp.issparse(X) else np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y)
        self.n_classes = n_classes
        self.sq = _row_sq_norms(self.X)
        return self

    def neighbors(self, X) -> np.ndarray:
        """Row indices of the k nearest training points; equal distances to the lower index."""
        k = min(self.k, self.X.shape[0])
        out = np.empty((X.shape[0], k), dtype=np.int64)
        for lo in range(0, X.shape[0], 256):
            block = X[lo:lo + 256]
            G = block @ self.X.T
            G = G.toarray() if sp.issparse(G) else np.asarray(G)
            D = _row_sq_norms(block)[:, None] + self.sq[None, :] - 2.0 * G
            np.maximum(D, 0.0, out=D)
            out[lo:lo + block.shape[0]] = np.argsort(D, axis=1, kind="stable")[:, :k]
        return out

    def predict_proba(self, X) -> np.ndarray:
        nb = self.neighbors(X)
        scores = np.zeros((X.shape[0], self.n_classes))
        for j in range(nb.shape[1]):
            np.add.at(scores, (np.arange(X.shape[0]), self.y[nb[:, j]]), 1.0)
        return scores / nb.shape[1]


class GaussianNB:
    def __init__(self, var_smoothing: float = 1e-9):
        self.var_smoothing = var_smoothing

    def fit(self, X, y, n_classes: int, rng=None):
        y = np.asarray(y)
        n_features = X.shape[1]
        self.theta = np.zeros((n_classes, n_features))
        self.var = np.zeros((n_classes, n_features))
        counts = np.bincount(y, minlength=n_classes).astype(np.float64)
        for c in range(n_classes):
            Xc = X[y == c]
            if Xc.shape[0] == 0:
                continue
            if sp.issparse(Xc):
                mean = np.asarray(Xc.mean(axis=0)).ravel()
                sq = np.asarray(Xc.multiply(Xc).mean(axis=0)).ravel()
                var = np.maximum(sq - mean ** 2, 0.0)
            else:
                mean = Xc.mean(axis=0)
                var = Xc.var(axis=0)
            self.theta[c], self.var[c] = mean, var
        if sp.issparse(X):
            m = np.asarray(X.mean(axis=0)).ravel()
            total_var = np.asarray(X.multiply(X).mean(axis=0)).ravel() - m ** 2
        else:
            total_var = np.asarray(X).var(axis=0)
        floor = self.var_smoothing * float(total_var.max()) if total_var.size else 0.0
        if floor <= 0.0:
            floor = self.var_smoothing
        self.var += floor
        with np.errstate(divide="ignore"):
            self.log_prior = np.log(counts / counts.sum())
        return self

    def joint_log_likelihood(self, X) -> np.ndarray:
        inv = 1.0 / self.var
        if sp.issparse(X):
            quad = np.asarray(X.multiply(X) @ inv.T)
            cross = np.asarray(X @ (self.theta * inv).T)
        else:
            quad = (X * X) @ inv.T
            cross = X @ (self.theta * inv).T
        const = -0.5 * np.sum(np.log(2.0 * np.pi * self.var), axis=1) - 0.5 * np.sum(self.theta ** 2 * inv, axis=1)
        return self.log_prior + const - 0.5 * quad + cross

    def predict_log_proba(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return jll - logsumexp(jll, axis=1, keepdims=True)


class LinearSVM:
    """One-vs-rest L2-regularized hinge loss by mini-batch subgradient descent.

    Step size ``1/(lambda t)``; the intercept is a constant feature. With
    that step size the iterate is ``V_t / t``, so the shrink step costs
    nothing and each batch only touches the rows it contains.
    """

    def __init__(self, lam: float = 1e-4, epochs: int = 200, batch_size: int = 32):
        self.lam = lam
        self.epochs = epochs
        self.batch_size = batch_size

    @staticmethod
    def _augment(X):
        ones = np.ones((X.shape[0], 1))
        if sp.issparse(X):
            return sp.hstack([X, sp.csr_matrix(ones)]).tocsr()
        return np.hstack([np.asarray(X, dtype=np.float64), ones])

    def fit(self, X, y, n_classes: int, rng: np.random.Generator):
        Xa = self._augment(X)
        n, d = Xa.shape
        Y = -np.ones((n, n_classes))
        Y[np.arange(n), y] = 1.0
        V = np.zeros((d, n_classes))
        t = 0
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for lo in range(0, n, self.batch_size):
                b = order[lo:lo + self.batch_size]
                t += 1
                Xb, Yb = Xa[b], Y[b]
                if t > 1:
                    margins = np.asarray(Xb @ V) / (t - 1)
                    active = (Yb * margins) < 1.0
                else:
                    active = np.ones_like(Yb, dtype=bool)
                step = np.asarray(Xb.T @ (active * Yb))
                V += step / (self.lam * len(b))
        self.W = V / max(t, 1)
        return self

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(self._augment(X) @ self.W)
