"""Binary linear SVM trained by dual coordinate descent, liblinear style.

Solves the L2-regularized L1-hinge primal

    min_w  0.5 ||w||^2 + C * sum_i max(0, 1 - y_i (w . x_i + b))

through its box-constrained dual, one alpha coordinate at a time. The bias is
absorbed as an augmented constant feature. Labels are {-1, +1} internally;
the prediction rule maps margin >= 0 to class 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

DEFAULT_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
DEFAULT_TOL = 1e-4
DEFAULT_MAX_EPOCHS = 1000


@dataclass(frozen=True)
class SvmModel:
    weights: np.ndarray
    bias: float
    C: float
    epochs_run: int = 0
    # dual objective after each epoch; populated when train(track_objective=True)
    objective_history: tuple[float, ...] = field(default=())

    @property
    def dims(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    cv_folds: int = 5
    C_grid: tuple[float, ...] = DEFAULT_C_GRID


@njit(cache=True)
def _cd_epoch(Xa, y, alpha, w, C, q_diag, order):
    """One dual coordinate-descent sweep in the given order.

    Mutates alpha and w in place; returns the maximal projected-gradient
    violation seen during the sweep.
    """
    n_features = w.shape[0]
    max_violation = 0.0
    for t in range(order.shape[0]):
        i = order[t]
        xi = Xa[i]
        g = 0.0
        for j in range(n_features):
            g += w[j] * xi[j]
        g = y[i] * g - 1.0
        a = alpha[i]
        if a <= 0.0:
            pg = g if g < 0.0 else 0.0
        elif a >= C:
            pg = g if g > 0.0 else 0.0
        else:
            pg = g
        if abs(pg) > max_violation:
            max_violation = abs(pg)
        if pg != 0.0:
            new_a = a - g / q_diag[i]
            if new_a < 0.0:
                new_a = 0.0
            elif new_a > C:
                new_a = C
            delta = (new_a - a) * y[i]
            if delta != 0.0:
                alpha[i] = new_a
                for j in range(n_features):
                    w[j] += delta * xi[j]
    return max_violation


def _augment(X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    ones = np.ones((X.shape[0], 1), dtype=np.float64)
    return np.ascontiguousarray(np.hstack([X, ones]))


def dual_objective(alpha: np.ndarray, w_aug: np.ndarray) -> float:
    """Dual objective sum(alpha) - 0.5 ||w||^2 (to be maximized)."""
    return float(np.sum(alpha) - 0.5 * np.dot(w_aug, w_aug))


def train(
    X: np.ndarray,
    y: np.ndarray,
    C: float,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
    track_objective: bool = False,
) -> SvmModel:
    """Fit the SVM on rows X with labels y in {-1, +1}.

    Coordinates are visited in a fresh random order per epoch (deterministic
    for a given seed); training stops when the maximal projected-gradient
    violation over an epoch drops below ``tol`` or after ``max_epochs``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"X has shape {X.shape} but y has {y.shape[0]} labels")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if np.all(y == y[0]):
        raise ValueError("training set contains a single class")
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")

    Xa = _augment(X)
    n = Xa.shape[0]
    alpha = np.zeros(n, dtype=np.float64)
    w = np.zeros(Xa.shape[1], dtype=np.float64)
    q_diag = np.einsum("ij,ij->i", Xa, Xa)
    rng = np.random.default_rng(seed)

    history: list[float] = []
    epochs_run = 0
    for epoch in range(max_epochs):
        order = rng.permutation(n)
        violation = _cd_epoch(Xa, y, alpha, w, float(C), q_diag, order)
        epochs_run = epoch + 1
        if track_objective:
            history.append(dual_objective(alpha, w))
        if violation < tol:
            break

    return SvmModel(
        weights=w[:-1].copy(),
        bias=float(w[-1]),
        C=float(C),
        epochs_run=epochs_run,
        objective_history=tuple(history),
    )


def decision(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """Signed margins w . x + b, one per row."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != model.dims:
        raise ValueError(f"expected {model.dims} columns, got {X.shape[1]}")
    return X @ model.weights + model.bias


def predict(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """Class labels in {0, 1}; the margin tie at exactly 0 predicts 1."""
    return (decision(model, X) >= 0).astype(np.int64)


def _stratified_folds(
    y: np.ndarray, n_folds: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Deal shuffled per-class indices round-robin into ``n_folds`` test folds."""
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for cls in (-1.0, 1.0):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.shape[0])]
        for pos, i in enumerate(idx):
            folds[pos % n_folds].append(int(i))
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def cross_validate(
    X: np.ndarray,
    y: np.ndarray,
    params: SvmParams,
    seed: int = 0,
) -> SvmParams:
    """Pick C from the grid by stratified k-fold accuracy.

    Ties go to the smaller C. A split whose training part collapses to one
    class is regenerated with a fresh shuffle, up to 5 attempts.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if n < params.cv_folds:
        raise ValueError(f"need at least {params.cv_folds} examples, got {n}")
    if np.all(y == y[0]):
        raise ValueError("cross-validation needs both classes present")

    rng = np.random.default_rng(seed)
    folds: list[np.ndarray] | None = None
    for _ in range(5):
        candidate = _stratified_folds(y, params.cv_folds, rng)
        ok = True
        for test_idx in candidate:
            train_mask = np.ones(n, dtype=bool)
            train_mask[test_idx] = False
            if test_idx.size == 0 or np.unique(y[train_mask]).size < 2:
                ok = False
                break
        if ok:
            folds = candidate
            break
    if folds is None:
        raise ValueError("could not build folds with both classes in every training part")

    train_seed = int(rng.integers(0, 2**31 - 1))
    best_c = None
    best_correct = -1
    for C in params.C_grid:
        correct = 0
        for test_idx in folds:
            train_mask = np.ones(n, dtype=bool)
            train_mask[test_idx] = False
            model = train(X[train_mask], y[train_mask], C, seed=train_seed)
            pred = np.where(decision(model, X[test_idx]) >= 0, 1.0, -1.0)
            correct += int(np.sum(pred == y[test_idx]))
        if correct > best_correct or (correct == best_correct and C < best_c):
            best_correct = correct
            best_c = C
    return SvmParams(C=float(best_c), cv_folds=params.cv_folds, C_grid=params.C_grid)
