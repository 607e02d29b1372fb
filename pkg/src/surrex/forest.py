"""Random forest classifier built from scratch on CART trees.

Trees grow on bootstrap resamples with Gini-impurity splits evaluated over a
random feature subset per node. Split thresholds are midpoints between
consecutive distinct sorted values; ties in impurity resolve to the lowest
feature index and then the lowest threshold, so training is fully
deterministic given the seed. Leaves store class-count distributions and
prediction averages the per-tree leaf frequencies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_features: int | None = None  # None: ceil(sqrt(d)) at fit time
    min_samples_leaf: int = 1
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ParameterError("n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise ParameterError("min_samples_leaf must be >= 1")
        if self.max_features is not None and self.max_features < 1:
            raise ParameterError("max_features must be >= 1")


class _Tree:
    """Flat-array CART tree; feature == -1 marks a leaf."""

    __slots__ = ("feature", "threshold", "left", "right", "dist")

    def __init__(self, feature, threshold, left, right, dist):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.dist = dist

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        pos = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            feat = self.feature[pos]
            active = feat >= 0
            if not active.any():
                break
            rows = np.flatnonzero(active)
            node = pos[rows]
            go_left = X[rows, feat[rows]] <= self.threshold[node]
            pos[rows] = np.where(go_left, self.left[node], self.right[node])
        return self.dist[pos]


def _gini_best_split(values, y_idx, n_classes, min_leaf):
    """Best (gini, threshold) along one feature; None when no valid split."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    n = v.size
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y_idx[order]] = 1.0
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]

    idx = np.arange(n - 1)
    valid = v[:-1] < v[1:]
    valid &= (idx + 1 >= min_leaf) & (n - idx - 1 >= min_leaf)
    if not valid.any():
        return None
    cand = np.flatnonzero(valid)
    n_left = (cand + 1).astype(np.float64)
    n_right = n - n_left
    left_counts = cum[cand]
    right_counts = total - left_counts
    gini_l = 1.0 - ((left_counts / n_left[:, None]) ** 2).sum(axis=1)
    gini_r = 1.0 - ((right_counts / n_right[:, None]) ** 2).sum(axis=1)
    score = (n_left * gini_l + n_right * gini_r) / n
    best = int(np.argmin(score))  # first minimum = lowest threshold
    i = cand[best]
    return float(score[best]), float((v[i] + v[i + 1]) / 2.0)


def _best_split_over_subset(X, y_idx, rows, n_classes, max_features, min_leaf, rng):
    """Best split over a random feature subset, deterministic tie-breaking.

    Features are inspected in random order; once ``max_features`` of them
    have been examined, scanning stops unless none offered a valid split, in
    which case the remaining features are tried so constant features cannot
    stall an impure node.
    """
    sub_y = y_idx[rows]
    if rows.size < 2 * min_leaf or (sub_y == sub_y[0]).all():
        return None
    perm = rng.permutation(X.shape[1])
    best = None  # ordered by (gini, feature index, threshold)
    examined = 0
    for f in perm:
        res = _gini_best_split(X[rows, int(f)], sub_y, n_classes, min_leaf)
        examined += 1
        if res is not None:
            cand = (res[0], int(f), res[1])
            if best is None or cand < best:
                best = cand
        if examined >= max_features and best is not None:
            break
    return best


class Forest:
    """Trained forest; implements the BlackBox interface over d-vectors."""

    input_kind = "point2d"

    def __init__(self, trees, classes, n_features, config):
        self.trees = trees
        self.classes = np.asarray(classes)
        self.n_features = n_features
        self.config = config

    @property
    def n_classes(self) -> int:
        return self.classes.size

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionError(
                f"expected points of dimension {self.n_features}, got shape {X.shape}"
            )
        acc = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees:
            acc += tree.predict_proba(X)
        acc /= len(self.trees)
        return acc[0] if single else acc

    def predict_batch(self, inputs) -> np.ndarray:
        return self.predict_proba(np.asarray(inputs, dtype=np.float64))

    def predict(self, X) -> np.ndarray:
        proba = np.atleast_2d(self.predict_proba(X))
        return self.classes[np.argmax(proba, axis=1)]


def train_forest(X, y, cfg: ForestConfig = ForestConfig()) -> Forest:
    """Grow a deterministic random forest on labeled points."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionError("X must be n x d with one label per row")
    n, d = X.shape
    if n < 2:
        raise ParameterError("need at least 2 training samples")
    classes = np.unique(y)
    if classes.size < 2:
        raise ParameterError("training data must contain at least 2 classes")
    y_idx = np.searchsorted(classes, y)
    max_features = cfg.max_features
    if max_features is None:
        max_features = int(np.ceil(np.sqrt(d)))
    if not 1 <= max_features <= d:
        raise ParameterError(f"max_features must lie in [1, {d}]")

    trees = []
    for t in range(cfg.n_trees):
        rng = np.random.default_rng([cfg.seed, t])
        rows = rng.integers(0, n, size=n) if cfg.bootstrap else np.arange(n)
        trees.append(
            _grow_tree_rows(X, y_idx, rows, classes.size, max_features,
                            cfg.min_samples_leaf, rng)
        )
    return Forest(trees, classes, d, cfg)


def _grow_tree_rows(X, y_idx, rows, n_classes, max_features, min_leaf, rng):
    feature, threshold, left, right, dist = [], [], [], [], []

    stack = [(np.sort(rows), None, False)]
    while stack:
        node_rows, parent, is_left = stack.pop()
        choice = _best_split_over_subset(X, y_idx, node_rows, n_classes,
                                         max_features, min_leaf, rng)
        if choice is None:
            counts = np.bincount(y_idx[node_rows], minlength=n_classes).astype(np.float64)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            dist.append(counts / counts.sum())
            idx = len(feature) - 1
        else:
            _, f, thr = choice
            idx = len(feature)
            feature.append(f)
            threshold.append(thr)
            left.append(-1)
            right.append(-1)
            dist.append(np.zeros(n_classes))
            mask = X[node_rows, f] <= thr
            stack.append((node_rows[~mask], idx, False))
            stack.append((node_rows[mask], idx, True))
        if parent is not None:
            if is_left:
                left[parent] = idx
            else:
                right[parent] = idx

    return _Tree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(dist, dtype=np.float64),
    )


def predict_proba(forest: Forest, x) -> np.ndarray:
    """Probability vector for one d-vector (averaged leaf frequencies)."""
    return forest.predict_proba(np.asarray(x, dtype=np.float64))


def _node_to_doc(tree: _Tree, idx: int) -> dict:
    if tree.feature[idx] < 0:
        return {"counts": tree.dist[idx].tolist()}
    return {
        "feature": int(tree.feature[idx]),
        "threshold": float(tree.threshold[idx]),
        "left": _node_to_doc(tree, int(tree.left[idx])),
        "right": _node_to_doc(tree, int(tree.right[idx])),
    }


def forest_to_json(forest: Forest) -> str:
    doc = {
        "n_features": forest.n_features,
        "classes": forest.classes.tolist(),
        "config": {
            "n_trees": forest.config.n_trees,
            "max_features": forest.config.max_features,
            "min_samples_leaf": forest.config.min_samples_leaf,
            "bootstrap": forest.config.bootstrap,
            "seed": forest.config.seed,
        },
        "trees": [_node_to_doc(t, 0) for t in forest.trees],
    }
    return json.dumps(doc)


def _doc_to_arrays(doc, feature, threshold, left, right, dist, n_classes):
    idx = len(feature)
    if "counts" in doc:
        counts = np.asarray(doc["counts"], dtype=np.float64)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        dist.append(counts / counts.sum())
        return idx
    feature.append(int(doc["feature"]))
    threshold.append(float(doc["threshold"]))
    left.append(-1)
    right.append(-1)
    dist.append(np.zeros(n_classes))
    left[idx] = _doc_to_arrays(doc["left"], feature, threshold, left, right, dist, n_classes)
    right[idx] = _doc_to_arrays(doc["right"], feature, threshold, left, right, dist, n_classes)
    return idx


def forest_from_json(text: str) -> Forest:
    doc = json.loads(text)
    classes = np.asarray(doc["classes"])
    cfg = ForestConfig(**doc["config"])
    trees = []
    for tree_doc in doc["trees"]:
        feature, threshold, left, right, dist = [], [], [], [], []
        _doc_to_arrays(tree_doc, feature, threshold, left, right, dist, classes.size)
        trees.append(
            _Tree(
                np.asarray(feature, dtype=np.int64),
                np.asarray(threshold, dtype=np.float64),
                np.asarray(left, dtype=np.int64),
                np.asarray(right, dtype=np.int64),
                np.asarray(dist, dtype=np.float64),
            )
        )
    return Forest(trees, classes, int(doc["n_features"]), cfg)
