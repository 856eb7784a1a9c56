"""Random forest classifier: Gini splits, bootstrap, sqrt(d) features."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch, SingleClassDataset
from .specs import RFSpec

# leaf nodes use feature = -1
_NODE_DTYPE = np.dtype([
    ("feature", np.int32),
    ("threshold", np.float64),
    ("left", np.int32),
    ("right", np.int32),
    ("prob", np.float64),  # P(class 1) at the leaf
])


class _TreeBuilder:
    def __init__(self, x, y, min_leaf, rng):
        self.x, self.y = x, y
        self.min_leaf = min_leaf
        self.rng = rng
        self.n_sub = max(1, int(np.sqrt(x.shape[1])))
        self.nodes = []

    def build(self, idx) -> int:
        node_id = len(self.nodes)
        self.nodes.append(None)
        yn = self.y[idx]
        prob = float(yn.mean())
        split = None
        if len(idx) >= 2 * self.min_leaf and 0.0 < prob < 1.0:
            split = self._best_split(idx)
        if split is None:
            self.nodes[node_id] = (-1, 0.0, -1, -1, prob)
            return node_id
        feat, thr = split
        go_left = self.x[idx, feat] < thr
        left = self.build(idx[go_left])
        right = self.build(idx[~go_left])
        self.nodes[node_id] = (feat, thr, left, right, prob)
        return node_id

    def _best_split(self, idx):
        x, y, min_leaf = self.x, self.y, self.min_leaf
        n = len(idx)
        feats = self.rng.choice(x.shape[1], size=self.n_sub, replace=False)
        best = (np.inf, None, None)
        for f in feats:
            xf = x[idx, f]
            order = np.argsort(xf, kind="stable")
            xs, ys = xf[order], y[idx[order]]
            # candidate split after position i (1-based left count)
            c1 = np.cumsum(ys)[:-1]
            i = np.arange(1, n)
            valid = (xs[1:] > xs[:-1]) & (i >= min_leaf) & (n - i >= min_leaf)
            if not valid.any():
                continue
            nl, nr = i[valid], n - i[valid]
            l1, r1 = c1[valid], ys.sum() - c1[valid]
            gini_l = 1.0 - (l1 / nl) ** 2 - (1 - l1 / nl) ** 2
            gini_r = 1.0 - (r1 / nr) ** 2 - (1 - r1 / nr) ** 2
            cost = (nl * gini_l + nr * gini_r) / n
            k = int(np.argmin(cost))
            if cost[k] < best[0]:
                pos = i[valid][k]
                thr = 0.5 * (xs[pos - 1] + xs[pos])
                best = (cost[k], int(f), float(thr))
        if best[1] is None:
            return None
        return best[1], best[2]


class Tree:
    def __init__(self, nodes):
        self.nodes = np.array(nodes, dtype=_NODE_DTYPE)

    def leaf_prob(self, x) -> np.ndarray:
        out = np.empty(len(x))
        stack = [(0, np.arange(len(x)))]
        while stack:
            nid, rows = stack.pop()
            feat = self.nodes["feature"][nid]
            if feat < 0 or rows.size == 0:
                out[rows] = self.nodes["prob"][nid]
                continue
            go_left = x[rows, feat] < self.nodes["threshold"][nid]
            stack.append((self.nodes["left"][nid], rows[go_left]))
            stack.append((self.nodes["right"][nid], rows[~go_left]))
        return out


class RandomForest:
    def __init__(self, spec: RFSpec, seed: int = 0):
        spec.validate()
        self.spec = spec
        self.seed = seed
        self.trees: list[Tree] = []
        self.n_features = None

    def fit(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if len(np.unique(y)) < 2:
            raise SingleClassDataset("random forest needs both classes")
        self.n_features = x.shape[1]
        self.trees = []
        seeds = np.random.SeedSequence(self.seed).spawn(self.spec.n_trees)
        for ss in seeds:
            rng = np.random.Generator(np.random.PCG64(ss))
            boot = rng.integers(0, len(x), size=len(x))
            builder = _TreeBuilder(x, y, self.spec.min_samples_leaf, rng)
            builder.build(boot)
            self.trees.append(Tree(builder.nodes))
        return self

    def predict_proba(self, x) -> np.ndarray:
        """Fraction of trees voting class 1."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} features, got {x.shape[1]}"
            )
        votes = np.zeros(len(x))
        for tree in self.trees:
            votes += tree.leaf_prob(x) > 0.5
        return votes / len(self.trees)
