"""Grid search with stratified 5-fold cross-validation.

Every hyperparameter combination is trained on four folds and scored on the
held-out fold, for all five rotations.  Selection is by mean F1 across folds;
ties fall back to higher mean precision, then to the lexicographically
smallest hyperparameter tuple (axes in sorted name order).  Standardization
happens inside each training call, so no fold leaks into another.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .models import (
    LogisticModel,
    LrHyperparams,
    MlpHyperparams,
    MlpModel,
    Model,
    ThresholdModel,
    TreeHyperparams,
    TreeModel,
    lr_train,
    mlp_train,
    predict_table,
    tree_train,
)
from .pairgen import PairTable, stratified_kfold

MODEL_TYPES = ("threshold", "lr", "tree", "mlp")

DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "threshold": {
        "beta": [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95],
    },
    "lr": {
        "class_weight": [0.01, 0.1, 1.0, 10.0, 100.0, 500.0],
        "penalty": ["l1", "l2"],
        "c": [1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0],
        "max_iter": [50, 100, 200],
    },
    "tree": {
        "max_leaf_nodes": [5, 6],
        "ccp_alpha": [1e-4, 1e-5],
    },
    "mlp": {
        "hidden_layers": [[15], [10], [20], [10, 3], [6, 2]],
        "alpha": [1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0],
    },
}


@dataclass
class Grid:
    model_type: str
    axes: dict[str, list]

    def __post_init__(self) -> None:
        if self.model_type not in MODEL_TYPES:
            raise ValueError(f"unknown model type {self.model_type!r}")
        if not self.axes or any(len(v) == 0 for v in self.axes.values()):
            raise ValueError("every grid axis needs at least one value")

    @property
    def axis_names(self) -> list[str]:
        return sorted(self.axes)

    def combination_count(self) -> int:
        n = 1
        for v in self.axes.values():
            n *= len(v)
        return n

    def combinations(self) -> list[dict]:
        """All combinations in lexicographic order of the sorted axis names."""
        names = self.axis_names
        return [
            dict(zip(names, values))
            for values in itertools.product(*(self.axes[n] for n in names))
        ]


def default_grid(model_type: str) -> Grid:
    if model_type not in DEFAULT_GRIDS:
        raise ValueError(f"unknown model type {model_type!r}")
    return Grid(model_type, {k: list(v) for k, v in DEFAULT_GRIDS[model_type].items()})


def train_model(model_type: str, hyperparams: dict, table: PairTable, seed: int = 0) -> Model:
    """Train one model of the given type; grid axes may omit fixed knobs."""
    hp = dict(hyperparams)
    if model_type == "threshold":
        return ThresholdModel(beta=float(hp["beta"]))
    if model_type == "lr":
        return lr_train(table, LrHyperparams(**hp), seed)
    if model_type == "tree":
        return tree_train(table, TreeHyperparams(**hp), seed)
    if model_type == "mlp":
        if "hidden_layers" in hp:
            hp["hidden_layers"] = tuple(int(h) for h in hp["hidden_layers"])
        return mlp_train(table, MlpHyperparams(**hp), seed)
    raise ValueError(f"unknown model type {model_type!r}")


def model_type_of(model: Model) -> str:
    if isinstance(model, ThresholdModel):
        return "threshold"
    if isinstance(model, LogisticModel):
        return "lr"
    if isinstance(model, TreeModel):
        return "tree"
    if isinstance(model, MlpModel):
        return "mlp"
    raise TypeError(f"unknown model type {type(model).__name__}")


def prf(decisions: np.ndarray, labels: np.ndarray) -> tuple[float, float, float]:
    """Precision, recall and F1 of match decisions against labels.

    Empty denominators score 0.0 (no predicted matches means precision 0,
    no actual matches means recall 0).
    """
    tp = int(np.sum(decisions & labels))
    fp = int(np.sum(decisions & ~labels))
    fn = int(np.sum(~decisions & labels))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass
class ComboScore:
    hyperparams: dict
    fold_scores: list[tuple[float, float, float]]  # (precision, recall, f1) per fold

    @property
    def mean_precision(self) -> float:
        return float(np.mean([s[0] for s in self.fold_scores]))

    @property
    def mean_recall(self) -> float:
        return float(np.mean([s[1] for s in self.fold_scores]))

    @property
    def mean_f1(self) -> float:
        return float(np.mean([s[2] for s in self.fold_scores]))


@dataclass
class GridSearchResult:
    model_type: str
    best: dict
    scores: list[ComboScore]
    folds: int
    seed: int
    tie_break: str  # rule that finally decided: mean_f1 / mean_precision / lexicographic

    def report(self) -> dict:
        """JSON-ready tuning report with the full score table and the winner."""
        rows = []
        for cs in self.scores:
            rows.append(
                {
                    "hyperparameters": cs.hyperparams,
                    "folds": [
                        {"fold": i, "precision": p, "recall": r, "f1": f}
                        for i, (p, r, f) in enumerate(cs.fold_scores)
                    ],
                    "mean_precision": cs.mean_precision,
                    "mean_recall": cs.mean_recall,
                    "mean_f1": cs.mean_f1,
                }
            )
        return {
            "model_type": self.model_type,
            "folds": self.folds,
            "seed": self.seed,
            "combination_count": len(self.scores),
            "combinations": rows,
            "winner": {
                "hyperparameters": self.best,
                "mean_f1": max(cs.mean_f1 for cs in self.scores),
                "decided_by": self.tie_break,
            },
        }


def _lex_key(hyperparams: dict) -> tuple:
    return tuple(
        tuple(v) if isinstance(v, (list, tuple)) else v
        for _, v in sorted(hyperparams.items())
    )


def grid_search(
    table: PairTable, grid: Grid, folds: int = 5, seed: int = 0
) -> GridSearchResult:
    """Exhaustive cross-validated search over the grid.

    The fold assignment is computed once from (table, folds, seed) and shared
    by every combination, so scores are comparable across the grid.
    """
    assignment = stratified_kfold(table, folds, seed)
    fold_splits = []
    for f in range(folds):
        val_idx = np.flatnonzero(assignment == f)
        train_idx = np.flatnonzero(assignment != f)
        fold_splits.append((table.subset(train_idx), table.subset(val_idx)))

    scores: list[ComboScore] = []
    for combo in grid.combinations():
        fold_scores = []
        for train_part, val_part in fold_splits:
            model = train_model(grid.model_type, combo, train_part, seed)
            decisions, _ = predict_table(model, val_part.features)
            fold_scores.append(prf(decisions, val_part.labels))
        scores.append(ComboScore(combo, fold_scores))

    best_f1 = max(cs.mean_f1 for cs in scores)
    tied = [cs for cs in scores if cs.mean_f1 == best_f1]
    rule = "mean_f1"
    if len(tied) > 1:
        best_prec = max(cs.mean_precision for cs in tied)
        tied = [cs for cs in tied if cs.mean_precision == best_prec]
        rule = "mean_precision"
    if len(tied) > 1:
        tied.sort(key=lambda cs: _lex_key(cs.hyperparams))
        rule = "lexicographic"
    return GridSearchResult(grid.model_type, tied[0].hyperparams, scores, folds, seed, rule)


def final_fit(table: PairTable, model_type: str, best: dict, seed: int = 0) -> Model:
    """Refit the winning combination on the whole training set."""
    return train_model(model_type, best, table, seed)
