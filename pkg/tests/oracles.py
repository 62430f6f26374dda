"""Slow, independent reference implementations used only by tests."""

from __future__ import annotations

import itertools
import math

import numpy as np


def jacobi_svd(A, tol: float = 1e-15, max_sweeps: int = 100):
    """One-sided Jacobi SVD (Hestenes): returns ``(U, s, Vt)`` with ``s`` descending.

    Rotates column pairs of a working copy until all pairs are
    orthogonal; no LAPACK SVD routine is involved.
    """
    A = np.array(A, dtype=np.float64)
    transposed = A.shape[0] < A.shape[1]
    if transposed:
        A = A.T
    m, n = A.shape
    U = A.copy()
    V = np.eye(n)
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = U[:, p] @ U[:, p]
                beta = U[:, q] @ U[:, q]
                gamma = U[:, p] @ U[:, q]
                if alpha == 0.0 or beta == 0.0:
                    continue
                off = max(off, abs(gamma) / math.sqrt(alpha * beta))
                if abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                up, uq = U[:, p].copy(), U[:, q].copy()
                U[:, p], U[:, q] = c * up - s * uq, s * up + c * uq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * vp - s * vq, s * vp + c * vq
        if off <= tol:
            break
    sv = np.linalg.norm(U, axis=0)
    order = np.argsort(-sv, kind="stable")
    sv, U, V = sv[order], U[:, order], V[:, order]
    Un = np.divide(U, sv, out=np.zeros_like(U), where=sv > 0)
    if transposed:
        return V, sv, Un.T
    return Un, sv, V.T


def fix_signs(vt):
    vt = np.array(vt)
    for i in range(vt.shape[0]):
        j = np.argmax(np.abs(vt[i]))
        if vt[i, j] < 0:
            vt[i] = -vt[i]
    return vt


def tfidf_scalar(docs):
    """Dict-of-dicts TF-IDF with the smoothed idf and unit L2 rows, term by term."""
    vocab = sorted({t for d in docs for t in d})
    n = len(docs)
    rows = []
    for d in docs:
        row = []
        for t in vocab:
            tf = d.count(t)
            df = sum(1 for e in docs if t in e)
            row.append(tf * (math.log((1 + n) / (1 + df)) + 1))
        norm = math.sqrt(sum(x * x for x in row))
        rows.append([x / norm if norm else 0.0 for x in row])
    return vocab, rows


def brute_prf(y_true, y_pred, n_classes):
    ps, rs, fs = [], [], []
    for c in range(n_classes):
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        ps.append(p)
        rs.append(r)
        fs.append(f)
    return sum(ps) / n_classes, sum(rs) / n_classes, sum(fs) / n_classes


def pairwise_auc(is_pos, scores):
    pos = [s for s, y in zip(scores, is_pos) if y]
    neg = [s for s, y in zip(scores, is_pos) if not y]
    total = 0.0
    for a, b in itertools.product(pos, neg):
        total += 1.0 if a > b else 0.5 if a == b else 0.0
    return total / (len(pos) * len(neg))
