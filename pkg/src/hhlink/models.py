"""Pairwise match classifiers over the five per-field Dice features.

Four model families produce a binary match decision plus a confidence used
as the edge weight during clustering: a plain threshold on the pooled Dice
value, logistic regression, a small CART decision tree, and a multi-layer
perceptron.  Training is deterministic given (dataset order, hyperparameters,
seed) — full-batch gradient descent with backtracking for the logistic model,
adaptive-moment mini-batch descent for the perceptron.

Confidence is max(p, 1 - p) for the probabilistic models and
d_all / (1 - d_all) for the threshold model; a probability of exactly 0.5
counts as a match (closed decision boundary, mirroring the threshold
model's >=).
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateClassError, UntrainedModelError
from .pairgen import PairTable
from .similarity import FeatureVector

MODEL_FORMAT_VERSION = 1


class ConvergenceWarning(UserWarning):
    """Training hit its iteration budget before reaching tolerance."""


# ---------------------------------------------------------------------------
# feature standardization (logistic and perceptron models only)


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std = np.where(std > 0, std, 1.0)  # constant columns pass through
        return cls(mean, std)

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["std"], dtype=float))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _xy(table: PairTable) -> tuple[np.ndarray, np.ndarray]:
    if table.labels is None:
        raise ValueError("training requires a labeled pair table")
    x = table.features[:, :5].astype(np.float64)
    y = table.labels.astype(np.float64)
    if y.min() == y.max():
        raise DegenerateClassError("training requires both classes present")
    return x, y


def training_digest(table: PairTable) -> str:
    """Provenance hash over ids, features and labels of the training set."""
    h = hashlib.sha256()
    for a, b in zip(table.id_a, table.id_b):
        h.update(a.encode())
        h.update(b"\x00")
        h.update(b.encode())
        h.update(b"\x01")
    h.update(np.ascontiguousarray(table.features).tobytes())
    if table.labels is not None:
        h.update(table.labels.astype(np.uint8).tobytes())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# threshold model


@dataclass
class ThresholdModel:
    """Match iff the pooled Dice value reaches beta."""

    beta: float

    def __post_init__(self) -> None:
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must be in (0, 1]")


def threshold_predict(model: ThresholdModel, d_all: float) -> tuple[bool, float]:
    """Decision plus confidence: d_all when matched, 1 - d_all otherwise."""
    match = d_all >= model.beta
    return match, d_all if match else 1.0 - d_all


# ---------------------------------------------------------------------------
# logistic regression


@dataclass(frozen=True)
class LrHyperparams:
    class_weight: float = 1.0  # weight multiplier on positive examples
    penalty: str = "l2"
    c: float = 1.0  # inverse regularization strength
    max_iter: int = 100
    tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.penalty not in ("l1", "l2"):
            raise ValueError("penalty must be 'l1' or 'l2'")
        if self.c <= 0 or self.class_weight <= 0:
            raise ValueError("c and class_weight must be positive")


@dataclass
class LogisticModel:
    hyperparams: LrHyperparams
    weights: np.ndarray | None = None
    bias: float = 0.0
    standardizer: Standardizer | None = None
    converged: bool = True
    final_loss: float = 0.0

    def predict_proba(self, x5: np.ndarray) -> np.ndarray:
        if self.weights is None or self.standardizer is None:
            raise UntrainedModelError("logistic model has no fitted parameters")
        z = self.standardizer.transform(x5) @ self.weights + self.bias
        return _sigmoid(z)


def lr_loss_grad(
    weights: np.ndarray,
    bias: float,
    x: np.ndarray,
    y: np.ndarray,
    class_weight: float,
    penalty: str,
    c: float,
) -> tuple[float, np.ndarray, float]:
    """Class-weighted regularized logistic loss with its analytic gradient.

    Loss = sum_i cw_i * bce_i / sum_i cw_i + pen(w) / (c * n), with the L2
    penalty 0.5*||w||^2 and the L1 penalty ||w||_1 (subgradient sign(w),
    valid away from zero).  The bias is never penalized.
    """
    n = len(y)
    cw = np.where(y == 1.0, class_weight, 1.0)
    s = cw.sum()
    z = x @ weights + bias
    bce = np.logaddexp(0.0, z) - y * z
    p = _sigmoid(z)
    dz = cw * (p - y) / s
    grad_w = x.T @ dz
    grad_b = float(dz.sum())
    loss = float((cw * bce).sum() / s)
    lam = 1.0 / (c * n)
    if penalty == "l2":
        loss += lam * 0.5 * float(weights @ weights)
        grad_w = grad_w + lam * weights
    else:
        loss += lam * float(np.abs(weights).sum())
        grad_w = grad_w + lam * np.sign(weights)
    return loss, grad_w, grad_b


def _lr_smooth(weights, bias, x, y, class_weight, penalty, c):
    """Smooth part of the objective (everything except an L1 penalty)."""
    loss, gw, gb = lr_loss_grad(weights, bias, x, y, class_weight, "l2", c)
    if penalty == "l1":
        n = len(y)
        lam = 1.0 / (c * n)
        loss -= lam * 0.5 * float(weights @ weights)
        gw = gw - lam * weights
    return loss, gw, gb


def lr_train(table: PairTable, hp: LrHyperparams, seed: int = 0) -> LogisticModel:
    """Fit by deterministic proximal gradient descent with backtracking.

    The seed is accepted for interface uniformity; initialization is the
    zero vector so the fit is seed-independent.
    """
    del seed
    x_raw, y = _xy(table)
    std = Standardizer.fit(x_raw)
    x = std.transform(x_raw)
    n, d = x.shape
    lam1 = 1.0 / (hp.c * n) if hp.penalty == "l1" else 0.0
    w = np.zeros(d)
    b = 0.0
    step = 1.0
    loss, gw, gb = _lr_smooth(w, b, x, y, hp.class_weight, hp.penalty, hp.c)
    converged = False
    for _ in range(hp.max_iter):
        # Backtracking on the smooth part (ISTA when the penalty is L1).
        while True:
            w_new = w - step * gw
            b_new = b - step * gb
            if lam1 > 0.0:
                w_new = np.sign(w_new) * np.maximum(np.abs(w_new) - step * lam1, 0.0)
            loss_new, gw_new, gb_new = _lr_smooth(
                w_new, b_new, x, y, hp.class_weight, hp.penalty, hp.c
            )
            dw = np.concatenate([w_new - w, [b_new - b]])
            bound = loss + gw @ dw[:-1] + gb * dw[-1] + (dw @ dw) / (2.0 * step)
            if loss_new <= bound + 1e-15 or step < 1e-12:
                break
            step *= 0.5
        total_old = loss + lam1 * np.abs(w).sum()
        total_new = loss_new + lam1 * np.abs(w_new).sum()
        w, b, loss, gw, gb = w_new, b_new, loss_new, gw_new, gb_new
        step = min(step * 1.5, 1e6)
        if abs(total_old - total_new) < hp.tol * max(1.0, abs(total_old)):
            converged = True
            break
    if not converged:
        warnings.warn(
            f"logistic fit stopped after {hp.max_iter} iterations without converging",
            ConvergenceWarning,
        )
    final = loss + lam1 * float(np.abs(w).sum())
    return LogisticModel(hp, w, float(b), std, converged, float(final))


# ---------------------------------------------------------------------------
# decision tree (CART, Gini, best-first growth, cost-complexity pruning)


@dataclass(frozen=True)
class TreeHyperparams:
    max_leaf_nodes: int = 5
    ccp_alpha: float = 1e-4

    def __post_init__(self) -> None:
        if self.max_leaf_nodes < 1:
            raise ValueError("max_leaf_nodes must be >= 1")
        if self.ccp_alpha < 0:
            raise ValueError("ccp_alpha must be >= 0")


@dataclass
class _TreeNode:
    n: int
    n_pos: int
    feature: int | None = None
    threshold: float = 0.0
    left: "_TreeNode | None" = None
    right: "_TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def prob(self) -> float:
        return self.n_pos / self.n

    @property
    def gini(self) -> float:
        p = self.prob
        return 1.0 - p * p - (1.0 - p) * (1.0 - p)

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"n": self.n, "n_pos": self.n_pos}
        return {
            "n": self.n,
            "n_pos": self.n_pos,
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "_TreeNode":
        node = cls(d["n"], d["n_pos"])
        if "feature" in d:
            node.feature = d["feature"]
            node.threshold = d["threshold"]
            node.left = cls.from_dict(d["left"])
            node.right = cls.from_dict(d["right"])
        return node


def _best_split(x: np.ndarray, y: np.ndarray, idx: np.ndarray) -> tuple[float, int, float] | None:
    """Highest-Gini-decrease split of one node; ties favor lower feature then threshold."""
    n = len(idx)
    if n < 2:
        return None
    n_pos = y[idx].sum()
    if n_pos == 0 or n_pos == n:
        return None
    parent_gini = 1.0 - (n_pos / n) ** 2 - (1.0 - n_pos / n) ** 2
    best = None
    for f in range(x.shape[1]):
        vals = x[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sy = y[idx[order]]
        pos_prefix = np.cumsum(sy)
        # candidate cut after position i when value strictly increases
        cuts = np.flatnonzero(sv[1:] > sv[:-1])
        for i in cuts:
            nl = i + 1
            nr = n - nl
            pl = pos_prefix[i] / nl
            pr = (n_pos - pos_prefix[i]) / nr
            gl = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl)
            gr = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr)
            decrease = parent_gini - (nl * gl + nr * gr) / n
            thr = (sv[i] + sv[i + 1]) / 2.0
            key = (-decrease, f, thr)
            if best is None or key < best[0]:
                best = (key, decrease, f, thr)
    if best is None or best[1] <= 1e-12:
        return None
    return best[1], best[2], best[3]


def tree_train(table: PairTable, hp: TreeHyperparams, seed: int = 0) -> "TreeModel":
    """Greedy best-first CART growth followed by cost-complexity pruning.

    Deterministic: candidate leaves expand in order of (weighted impurity
    decrease, creation order); the seed is unused and accepted for
    interface uniformity.
    """
    del seed
    if table.labels is None:
        raise ValueError("training requires a labeled pair table")
    # A pure single-class table is fine here: it fits one leaf.
    x = table.features[:, :5].astype(np.float64)
    yf = table.labels.astype(np.float64)
    n_total = len(yf)
    root = _TreeNode(n_total, int(yf.sum()))
    # frontier entries: (-weighted_decrease, creation_order, node, idx, split)
    frontier: list = []
    creation = 0

    def consider(node: _TreeNode, idx: np.ndarray) -> None:
        nonlocal creation
        split = _best_split(x, yf, idx)
        if split is not None:
            decrease, f, thr = split
            frontier.append((-(decrease * len(idx) / n_total), creation, node, idx, (f, thr)))
        creation += 1

    consider(root, np.arange(n_total))
    leaves = 1
    while frontier and leaves < hp.max_leaf_nodes:
        frontier.sort()
        _, _, node, idx, (f, thr) = frontier.pop(0)
        go_left = x[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        node.feature = f
        node.threshold = thr
        node.left = _TreeNode(len(li), int(yf[li].sum()))
        node.right = _TreeNode(len(ri), int(yf[ri].sum()))
        leaves += 1
        consider(node.left, li)
        consider(node.right, ri)
    _prune(root, hp.ccp_alpha, n_total)
    return TreeModel(hp, root)


def _subtree_stats(node: _TreeNode, n_total: int) -> tuple[float, int]:
    """Total weighted leaf impurity and leaf count of a subtree."""
    if node.is_leaf:
        return node.gini * node.n / n_total, 1
    rl, cl = _subtree_stats(node.left, n_total)
    rr, cr = _subtree_stats(node.right, n_total)
    return rl + rr, cl + cr


def _prune(root: _TreeNode, ccp_alpha: float, n_total: int) -> None:
    """Weakest-link pruning: collapse internal nodes while min g(t) <= alpha."""
    while not root.is_leaf:
        weakest: tuple | None = None
        stack = [(root, 0)]
        order = 0
        while stack:
            node, _ = stack.pop()
            if node.is_leaf:
                continue
            r_sub, n_leaves = _subtree_stats(node, n_total)
            r_node = node.gini * node.n / n_total
            g = (r_node - r_sub) / (n_leaves - 1)
            key = (g, -order)  # ties prune the deepest (latest-visited) node
            if weakest is None or key < weakest[0]:
                weakest = (key, node)
            order += 1
            stack.append((node.right, order))
            stack.append((node.left, order))
        (g, _), node = weakest
        if g > ccp_alpha:
            break
        node.feature = None
        node.left = None
        node.right = None


@dataclass
class TreeModel:
    hyperparams: TreeHyperparams
    root: _TreeNode | None = None

    def leaf_count(self) -> int:
        if self.root is None:
            raise UntrainedModelError("tree model has no fitted structure")
        return _subtree_stats(self.root, 1)[1]

    def predict_proba(self, x5: np.ndarray) -> np.ndarray:
        if self.root is None:
            raise UntrainedModelError("tree model has no fitted structure")
        out = np.empty(len(x5))
        for i, row in enumerate(x5):
            node = self.root
            while not node.is_leaf:
                node = node.left if row[node.feature] <= node.threshold else node.right
            out[i] = node.prob
        return out


# ---------------------------------------------------------------------------
# multi-layer perceptron


@dataclass(frozen=True)
class MlpHyperparams:
    hidden_layers: tuple[int, ...] = (15,)
    alpha: float = 1e-6  # L2 penalty on weights
    learning_rate: float = 1e-3
    batch_size: int = 128
    max_epochs: int = 200
    tol: float = 1e-6
    n_iter_no_change: int = 10

    def __post_init__(self) -> None:
        if any(h < 1 for h in self.hidden_layers):
            raise ValueError("hidden layer sizes must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")


def mlp_init(hidden_layers: Sequence[int], seed: int, n_inputs: int = 5) -> list[np.ndarray]:
    """Glorot-uniform parameters as a flat list [W0, b0, W1, b1, ...]."""
    rng = np.random.default_rng(seed)
    sizes = [n_inputs, *hidden_layers, 1]
    params: list[np.ndarray] = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))
    return params


def mlp_loss_grad(
    params: list[np.ndarray], x: np.ndarray, y: np.ndarray, alpha: float
) -> tuple[float, list[np.ndarray]]:
    """Mean binary cross-entropy with L2 weight penalty, plus backprop gradients.

    Hidden activations are rectified linear, the output is logistic.  The
    penalty alpha/(2n) * sum ||W||^2 excludes biases.
    """
    n = len(y)
    weights = params[0::2]
    biases = params[1::2]
    acts = [x]
    pre: list[np.ndarray] = []
    h = x
    for li, (w, b) in enumerate(zip(weights, biases)):
        z = h @ w + b
        pre.append(z)
        h = _sigmoid(z) if li == len(weights) - 1 else np.maximum(z, 0.0)
        acts.append(h)
    p = acts[-1][:, 0]
    z_out = pre[-1][:, 0]
    bce = float(np.mean(np.logaddexp(0.0, z_out) - y * z_out))
    loss = bce + alpha / (2.0 * n) * sum(float((w * w).sum()) for w in weights)

    grads: list[np.ndarray] = [np.empty(0)] * len(params)
    delta = ((p - y) / n)[:, None]
    for li in range(len(weights) - 1, -1, -1):
        grads[2 * li] = acts[li].T @ delta + (alpha / n) * weights[li]
        grads[2 * li + 1] = delta.sum(axis=0)
        if li > 0:
            delta = (delta @ weights[li].T) * (pre[li - 1] > 0.0)
    return loss, grads


@dataclass
class MlpModel:
    hyperparams: MlpHyperparams
    params: list[np.ndarray] = field(default_factory=list)
    standardizer: Standardizer | None = None
    converged: bool = True
    final_loss: float = 0.0

    def predict_proba(self, x5: np.ndarray) -> np.ndarray:
        if not self.params or self.standardizer is None:
            raise UntrainedModelError("perceptron model has no fitted parameters")
        h = self.standardizer.transform(x5)
        weights = self.params[0::2]
        biases = self.params[1::2]
        for li, (w, b) in enumerate(zip(weights, biases)):
            z = h @ w + b
            h = _sigmoid(z) if li == len(weights) - 1 else np.maximum(z, 0.0)
        return h[:, 0]


def mlp_train(table: PairTable, hp: MlpHyperparams, seed: int = 0) -> MlpModel:
    """Mini-batch adaptive-moment descent with early stop on loss plateau.

    Batch order per epoch derives from the seed, so two runs with the same
    (table, hp, seed) produce bit-identical parameters.
    """
    x_raw, y = _xy(table)
    std = Standardizer.fit(x_raw)
    x = std.transform(x_raw)
    n = len(y)
    params = mlp_init(hp.hidden_layers, seed)
    rng = np.random.default_rng(seed + 1)
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    t = 0
    best_loss = np.inf
    stale = 0
    converged = False
    epoch_loss = np.inf
    for _epoch in range(hp.max_epochs):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, hp.batch_size):
            idx = order[start : start + hp.batch_size]
            loss, grads = mlp_loss_grad(params, x[idx], y[idx], hp.alpha)
            batch_losses.append(loss)
            t += 1
            for i, g in enumerate(grads):
                m[i] = beta1 * m[i] + (1 - beta1) * g
                v[i] = beta2 * v[i] + (1 - beta2) * g * g
                mhat = m[i] / (1 - beta1**t)
                vhat = v[i] / (1 - beta2**t)
                params[i] = params[i] - hp.learning_rate * mhat / (np.sqrt(vhat) + eps)
        epoch_loss = float(np.mean(batch_losses))
        if epoch_loss < best_loss - hp.tol:
            best_loss = epoch_loss
            stale = 0
        else:
            stale += 1
            if stale >= hp.n_iter_no_change:
                converged = True
                break
    if not converged:
        warnings.warn(
            f"perceptron fit ran all {hp.max_epochs} epochs without plateauing",
            ConvergenceWarning,
        )
    return MlpModel(hp, params, std, converged, epoch_loss)


# ---------------------------------------------------------------------------
# generic prediction and persistence

Model = ThresholdModel | LogisticModel | TreeModel | MlpModel


def predict_table(model: Model, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized decisions and confidences for an (n, 6) feature matrix."""
    if isinstance(model, ThresholdModel):
        d_all = features[:, 5]
        decisions = d_all >= model.beta
        return decisions, np.where(decisions, d_all, 1.0 - d_all)
    p = model.predict_proba(features[:, :5])
    decisions = p >= 0.5
    return decisions, np.where(decisions, p, 1.0 - p)


def predict(model: Model, fv: FeatureVector) -> tuple[bool, float]:
    """Decision and confidence for a single pair."""
    decisions, conf = predict_table(model, np.asarray([fv.as_row()]))
    return bool(decisions[0]), float(conf[0])


def model_to_dict(model: Model, digest: str = "") -> dict:
    """Versioned JSON-ready artifact; never includes training data."""
    out: dict = {
        "format_version": MODEL_FORMAT_VERSION,
        "training_digest": digest,
        "standardization": None,
    }
    if isinstance(model, ThresholdModel):
        out.update(model_type="threshold", hyperparameters={"beta": model.beta}, parameters={})
    elif isinstance(model, LogisticModel):
        if model.weights is None:
            raise UntrainedModelError("cannot persist an unfitted logistic model")
        out.update(
            model_type="lr",
            hyperparameters={
                "class_weight": model.hyperparams.class_weight,
                "penalty": model.hyperparams.penalty,
                "c": model.hyperparams.c,
                "max_iter": model.hyperparams.max_iter,
                "tol": model.hyperparams.tol,
            },
            parameters={"weights": model.weights.tolist(), "bias": model.bias},
            standardization=model.standardizer.to_dict(),
        )
    elif isinstance(model, TreeModel):
        if model.root is None:
            raise UntrainedModelError("cannot persist an unfitted tree model")
        out.update(
            model_type="tree",
            hyperparameters={
                "max_leaf_nodes": model.hyperparams.max_leaf_nodes,
                "ccp_alpha": model.hyperparams.ccp_alpha,
            },
            parameters={"tree": model.root.to_dict()},
        )
    elif isinstance(model, MlpModel):
        if not model.params:
            raise UntrainedModelError("cannot persist an unfitted perceptron model")
        out.update(
            model_type="mlp",
            hyperparameters={
                "hidden_layers": list(model.hyperparams.hidden_layers),
                "alpha": model.hyperparams.alpha,
                "learning_rate": model.hyperparams.learning_rate,
                "batch_size": model.hyperparams.batch_size,
                "max_epochs": model.hyperparams.max_epochs,
                "tol": model.hyperparams.tol,
                "n_iter_no_change": model.hyperparams.n_iter_no_change,
            },
            parameters={"layers": [p.tolist() for p in model.params]},
            standardization=model.standardizer.to_dict(),
        )
    else:
        raise TypeError(f"unknown model type {type(model).__name__}")
    return out


def model_from_dict(d: dict) -> Model:
    if d.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {d.get('format_version')!r}")
    kind = d["model_type"]
    hp = d["hyperparameters"]
    if kind == "threshold":
        return ThresholdModel(beta=hp["beta"])
    if kind == "lr":
        model = LogisticModel(
            LrHyperparams(hp["class_weight"], hp["penalty"], hp["c"], hp["max_iter"], hp["tol"])
        )
        model.weights = np.asarray(d["parameters"]["weights"], dtype=float)
        model.bias = float(d["parameters"]["bias"])
        model.standardizer = Standardizer.from_dict(d["standardization"])
        return model
    if kind == "tree":
        return TreeModel(
            TreeHyperparams(hp["max_leaf_nodes"], hp["ccp_alpha"]),
            _TreeNode.from_dict(d["parameters"]["tree"]),
        )
    if kind == "mlp":
        model = MlpModel(
            MlpHyperparams(
                tuple(hp["hidden_layers"]),
                hp["alpha"],
                hp["learning_rate"],
                hp["batch_size"],
                hp["max_epochs"],
                hp["tol"],
                hp["n_iter_no_change"],
            )
        )
        model.params = [np.asarray(p, dtype=float) for p in d["parameters"]["layers"]]
        model.standardizer = Standardizer.from_dict(d["standardization"])
        return model
    raise ValueError(f"unknown model type {kind!r}")


def save_model(model: Model, path, digest: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model, digest), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
