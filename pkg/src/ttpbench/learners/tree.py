"""CART decision tree (Gini) and random forest.

Split search works on the node's explicit matrix entries. For sparse
non-negative input the implicit zeros of each column form one block that
sorts before every stored value, so work per node is proportional to the
node's stored entries rather than rows x features.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

_TIE_RTOL = 1e-12


class _Data:
    """Training matrix in the layout the split search needs."""

    def __init__(self, X):
        if sp.issparse(X):
            X = sp.csr_matrix(X, dtype=np.float64)
            X.eliminate_zeros()
            if X.nnz and X.data.min() < 0:
                X = X.toarray()
        self.sparse = sp.issparse(X)
        if self.sparse:
            X.sort_indices()
            self.indptr = X.indptr
            self.indices = X.indices
            self.data = X.data
        else:
            self.X = np.asarray(X, dtype=np.float64)
        self.n_features = X.shape[1]

    def entries(self, rows: np.ndarray, feats: np.ndarray | None):
        """(row position, feature, value) for the node's entries on ``feats``."""
        if self.sparse:
            starts = self.indptr[rows]
            lens = self.indptr[rows + 1] - starts
            total = int(lens.sum())
            if total == 0:
                return (np.zeros(0, np.int64),) * 2 + (np.zeros(0),)
            offsets = np.repeat(starts - np.r_[0, np.cumsum(lens)[:-1]], lens)
            idx = offsets + np.arange(total)
            pos = np.repeat(np.arange(len(rows)), lens)
            feat = self.indices[idx].astype(np.int64)
            val = self.data[idx]
            if feats is not None:
                mask = np.zeros(self.n_features, dtype=bool)
                mask[feats] = True
                keep = mask[feat]
                pos, feat, val = pos[keep], feat[keep], val[keep]
            return pos, feat, val
        cols = np.arange(self.n_features) if feats is None else feats
        block = self.X[np.ix_(rows, cols)]
        pos = np.tile(np.arange(len(rows)), len(cols))
        feat = np.repeat(cols.astype(np.int64), len(rows))
        return pos, feat, block.T.ravel()


def _segment_cumsum(x: np.ndarray, seg_start_of: np.ndarray) -> np.ndarray:
    c = np.cumsum(x)
    return c - (c[seg_start_of] - x[seg_start_of])


def best_split(pos, feat, val, y_node, n_classes: int, sparse: bool):
    """Best Gini split over the given entries.

    Returns ``(feature, threshold)`` or None when every feature is constant
    on the node. Equal scores go to the lower feature, then the lower
    threshold.
    """
    n = len(y_node)
    E = len(feat)
    if E == 0:
        return None
    node_counts = np.bincount(y_node, minlength=n_classes).astype(np.float64)
    cls = y_node[pos]
    order = np.lexsort((val, feat))
    feat, val, cls = feat[order], val[order], cls[order]

    new_seg = np.r_[True, feat[1:] != feat[:-1]]
    starts = np.flatnonzero(new_seg)
    n_seg = len(starts)
    seg_len = np.diff(np.r_[starts, E])
    seg_id = np.repeat(np.arange(n_seg), seg_len)
    seg_start_of = starts[seg_id]
    within = np.arange(E) - seg_start_of

    nz = np.bincount(seg_id * n_classes + cls, minlength=n_seg * n_classes)
    nz = nz.reshape(n_seg, n_classes).astype(np.float64)
    z = node_counts[None, :] - nz if sparse else np.zeros_like(nz)

    # rank of each entry among earlier entries of its (segment, class)
    g = seg_id * n_classes + cls
    o2 = np.argsort(g, kind="stable")
    gs = g[o2]
    gstart = np.flatnonzero(np.r_[True, gs[1:] != gs[:-1]])
    glen = np.diff(np.r_[gstart, E])
    cumcount = np.empty(E, dtype=np.float64)
    cumcount[o2] = np.arange(E) - np.repeat(gstart, glen)

    left_before = z[seg_id, cls] + cumcount
    right_before = node_counts[cls] - left_before
    sl0 = (z ** 2).sum(axis=1)
    sr0 = ((node_counts[None, :] - z) ** 2).sum(axis=1)
    nl0 = z.sum(axis=1)

    sl = sl0[seg_id] + _segment_cumsum(2.0 * left_before + 1.0, seg_start_of)
    sr = sr0[seg_id] + _segment_cumsum(-(2.0 * right_before - 1.0), seg_start_of)
    nl = nl0[seg_id] + within + 1.0
    nr = n - nl

    same_next = np.r_[feat[1:] == feat[:-1], False]
    nxt = np.r_[val[1:], 0.0]
    valid = same_next & (nxt > val)

    cand_feat = [feat[valid]]
    mid = (val[valid] + nxt[valid]) / 2.0
    # adjacent floats can have a midpoint that rounds up to the larger one
    mid = np.where(mid >= nxt[valid], val[valid], mid)
    cand_thr = [mid]
    cand_score = [sl[valid] / nl[valid] + sr[valid] / nr[valid]]
    if sparse:
        zvalid = nl0 > 0
        if zvalid.any():
            cand_feat.append(feat[starts][zvalid])
            cand_thr.append(val[starts][zvalid] / 2.0)
            cand_score.append(sl0[zvalid] / nl0[zvalid] + sr0[zvalid] / (n - nl0[zvalid]))
    cf = np.concatenate(cand_feat)
    if len(cf) == 0:
        return None
    ct = np.concatenate(cand_thr)
    cs = np.concatenate(cand_score)
    best = cs.max()
    tied = np.flatnonzero(cs >= best - _TIE_RTOL * max(1.0, abs(best)))
    pick = tied[np.lexsort((ct[tied], cf[tied]))[0]]
    return int(cf[pick]), float(ct[pick])


class DecisionTree:
    """Unpruned CART with Gini impurity; leaves store class proportions."""

    def __init__(self, min_samples_split: int = 2, max_features: int | None = None):
        self.min_samples_split = min_samples_split
        self.max_features = max_features

    def fit(self, X, y, n_classes: int, rng: np.random.Generator | None = None):
        data = X if isinstance(X, _Data) else _Data(X)
        y = np.asarray(y, dtype=np.int64)
        self.n_classes = n_classes
        self.n_features = data.n_features
        m = self.max_features
        subsample = m is not None and m < data.n_features
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node(rows):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(np.bincount(y[rows], minlength=n_classes) / len(rows))
            return len(feature) - 1

        root = new_node(np.arange(len(y)))
        stack = [(root, np.arange(len(y)))]
        while stack:
            node, rows = stack.pop()
            y_node = y[rows]
            if len(rows) < self.min_samples_split or np.all(y_node == y_node[0]):
                continue
            feats = np.sort(rng.choice(data.n_features, m, replace=False)) if subsample else None
            pos, feat, val = data.entries(rows, feats)
            split = best_split(pos, feat, val, y_node, n_classes, data.sparse)
            if split is None:
                continue
            f, thr = split
            col = np.zeros(len(rows))
            sel = feat == f
            col[pos[sel]] = val[sel]
            go_left = col <= thr
            lrows, rrows = rows[go_left], rows[~go_left]
            if len(lrows) == 0 or len(rrows) == 0:
                continue
            feature[node], threshold[node] = f, thr
            left[node] = new_node(lrows)
            right[node] = new_node(rrows)
            # push right first so the left subtree is numbered first
            stack.append((right[node], rrows))
            stack.append((left[node], lrows))
        self.feature = np.array(feature)
        self.threshold = np.array(threshold)
        self.left = np.array(left)
        self.right = np.array(right)
        self.value = np.vstack(value)
        return self

    def apply(self, X) -> np.ndarray:
        out = np.empty(X.shape[0], dtype=np.int64)
        for lo in range(0, X.shape[0], 1024):
            block = X[lo:lo + 1024]
            block = block.toarray() if sp.issparse(block) else np.asarray(block)
            node = np.zeros(block.shape[0], dtype=np.int64)
            active = np.flatnonzero(self.feature[node] >= 0)
            while len(active):
                nd = node[active]
                x = block[active, self.feature[nd]]
                node[active] = np.where(x <= self.threshold[nd], self.left[nd], self.right[nd])
                active = active[self.feature[node[active]] >= 0]
            out[lo:lo + len(node)] = node
        return out

    def predict_proba(self, X) -> np.ndarray:
        return self.value[self.apply(X)]


def bootstrap_indices(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, n, size=n)


class RandomForest:
    def __init__(self, n_trees: int = 100, max_features="sqrt", min_samples_split: int = 2):
        self.n_trees = n_trees
        self.max_features = max_features
        self.min_samples_split = min_samples_split

    def _n_features(self, total: int) -> int:
        m = self.max_features
        if m == "sqrt":
            return max(1, int(np.sqrt(total)))
        if m is None:
            return total
        return int(m)

    def fit(self, X, y, n_classes: int, rng: np.random.Generator):
        y = np.asarray(y, dtype=np.int64)
        n = len(y)
        m = self._n_features(X.shape[1])
        seeds = rng.integers(0, 2**63 - 1, size=self.n_trees)
        X = sp.csr_matrix(X) if sp.issparse(X) else np.asarray(X, dtype=np.float64)
        self.trees = []
        for s in seeds:
            tree_rng = np.random.default_rng(int(s))
            idx = bootstrap_indices(n, tree_rng)
            tree = DecisionTree(self.min_samples_split, m)
            tree.fit(_Data(X[idx]), y[idx], n_classes, tree_rng)
            self.trees.append(tree)
        return self

    def predict_proba(self, X) -> np.ndarray:
        return sum(t.predict_proba(X) for t in self.trees) / len(self.trees)
