"""Soft-margin kernel SVM trained by SMO, and stratified cross-validation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceWarning,
    DimensionMismatch,
    FoldDegenerate,
    NotPsd,
    SingleClass,
    TooManyFolds,
)
from .graph import RngSeed, as_seed
from .kernel import KernelMatrix, check_psd

_MIN_CURVATURE = 1e-12


@dataclass(frozen=True)
class CvConfig:
    folds: int = 10
    repeats: int = 1
    seed: RngSeed = RngSeed(0)
    c_param: float = 1.0
    tolerance: float = 1e-3
    max_passes: int = 200

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.c_param <= 0:
            raise ValueError("C must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        object.__setattr__(self, "seed", as_seed(self.seed))

    def to_dict(self) -> dict:
        return {
            "folds": self.folds,
            "repeats": self.repeats,
            "seed": self.seed.master_seed,
            "c_param": self.c_param,
            "tolerance": self.tolerance,
            "max_passes": self.max_passes,
        }


@dataclass
class SvmModel:
    alphas: np.ndarray
    bias: float
    labels: np.ndarray
    c_param: float
    converged: bool = True
    iterations: int = 0
    objective_trace: list = field(default_factory=list)

    @property
    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.alphas > 0)

    @property
    def coef(self) -> np.ndarray:
        return self.alphas * self.labels

    def decision_function(self, k_rows) -> np.ndarray:
        """Decision values for rows of kernel values against the training points."""
        k_rows = np.atleast_2d(np.asarray(k_rows, dtype=float))
        if k_rows.shape[1] != self.alphas.size:
            raise DimensionMismatch(f"expected {self.alphas.size} kernel values, got {k_rows.shape[1]}")
        # per-class sums: mirrored classes cancel exactly
        pos = self.labels > 0
        return (k_rows[:, pos] @ self.alphas[pos] - k_rows[:, ~pos] @ self.alphas[~pos]) + self.bias


def _as_labels(labels) -> np.ndarray:
    y = np.asarray(labels, dtype=float)
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValueError("labels must be +1 or -1")
    return y


def dual_objective(alphas: np.ndarray, q: np.ndarray) -> float:
    return float(alphas.sum() - 0.5 * alphas @ q @ alphas)


def train_svm(k, labels, config: CvConfig = CvConfig(), trace: bool = False) -> SvmModel:
    """Solve the C-SVM dual with SMO on a precomputed kernel.

    Each step updates the maximal KKT-violating pair; training stops once the
    violation gap is at most ``config.tolerance`` or after
    ``config.max_passes * n`` pair updates. The bias is the midpoint of the
    feasible interval, so every point meets KKT to within half the gap.
    """
    kv = np.asarray(k.values if isinstance(k, KernelMatrix) else k, dtype=float)
    y = _as_labels(labels)
    n = y.size
    if kv.shape != (n, n):
        raise DimensionMismatch(f"kernel is {kv.shape}, got {n} labels")
    if np.unique(y).size < 2:
        raise SingleClass("training labels contain a single class")
    tol = 1e-8 * max(1.0, float(np.max(np.diag(kv))))
    if check_psd(kv) < -tol:
        raise NotPsd("kernel matrix is not positive semidefinite")

    c = float(config.c_param)
    tau = float(config.tolerance)
    q = np.outer(y, y) * kv
    diag = np.diag(kv)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    pos = y > 0
    objective = [dual_objective(alpha, q)] if trace else []

    max_iter = config.max_passes * n
    converged = False
    it = 0
    while True:
        f = -y * grad
        up = np.where(pos, alpha < c, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < c)
        f_up = np.where(up, f, -np.inf)
        f_low = np.where(low, f, np.inf)
        i = int(np.argmax(f_up))
        j = int(np.argmin(f_low))
        hi, lo = f_up[i], f_low[j]
        if hi - lo <= tau:
            converged = True
            break
        if it >= max_iter:
            break
        it += 1

        curv = diag[i] + diag[j] - 2.0 * kv[i, j]
        step = (hi - lo) / max(curv, _MIN_CURVATURE)
        room_i = c - alpha[i] if pos[i] else alpha[i]
        room_j = alpha[j] if pos[j] else c - alpha[j]
        step = min(step, room_i, room_j)

        old_i, old_j = alpha[i], alpha[j]
        alpha[i] = old_i + y[i] * step
        alpha[j] = old_j - y[j] * step
        # snap exactly onto the box when a bound was the binding constraint
        if step == room_i:
            alpha[i] = c if pos[i] else 0.0
        if step == room_j:
            alpha[j] = 0.0 if pos[j] else c
        grad += q[:, i] * (alpha[i] - old_i) + q[:, j] * (alpha[j] - old_j)
        if trace:
            objective.append(dual_objective(alpha, q))

    if np.isfinite(hi) and np.isfinite(lo):
        bias = (hi + lo) / 2.0
    else:
        bias = hi if np.isfinite(hi) else lo
    model = SvmModel(alpha, float(bias), y, c, converged, it, objective)
    if not converged:
        warnings.warn(f"SMO stopped after {it} updates without meeting tolerance {tau}",
                      ConvergenceWarning, stacklevel=2)
    return model


def predict(model: SvmModel, k_row) -> tuple[int, float]:
    """Label and decision value for one point; a zero decision maps to +1."""
    k_row = np.asarray(k_row, dtype=float)
    if k_row.ndim != 1:
        raise DimensionMismatch("k_row must be one-dimensional")
    d = float(model.decision_function(k_row)[0])
    return (1 if d >= 0 else -1), d


def kkt_violation(model: SvmModel, k) -> float:
    """Largest KKT violation of a trained model, in units of ``y * f(x)``."""
    kv = np.asarray(k.values if isinstance(k, KernelMatrix) else k, dtype=float)
    margin = model.labels * model.decision_function(kv)
    a, c = model.alphas, model.c_param
    at_zero = a <= 0
    at_c = a >= c
    free = ~at_zero & ~at_c
    v = np.zeros_like(margin)
    v[at_zero] = np.maximum(0.0, 1.0 - margin[at_zero])
    v[at_c] = np.maximum(0.0, margin[at_c] - 1.0)
    v[free] = np.abs(margin[free] - 1.0)
    return float(v.max(initial=0.0))


def stratified_folds(labels, folds: int, seed) -> np.ndarray:
    """Fold index per sample.

    Each class is shuffled and dealt round-robin starting at fold 0. Every
    class is shuffled with the same stream, so for equal-sized classes the
    i-th member of each class lands in the same fold; paired designs (fake
    ``i`` derived from real ``i``) keep their pairs together.
    """
    y = np.asarray(labels)
    classes = sorted(np.unique(y).tolist(), reverse=True)
    smallest = min((int((y == c).sum()) for c in classes), default=0)
    if folds > smallest:
        raise TooManyFolds(f"{folds} folds but the smallest class has {smallest} members")
    seed = as_seed(seed)
    out = np.empty(y.size, dtype=np.int64)
    for cls in classes:
        idx = np.flatnonzero(y == cls)
        perm = seed.generator().permutation(idx.size)
        out[idx[perm]] = np.arange(idx.size) % folds
    return out


@dataclass(frozen=True)
class AccuracyResult:
    mean_accuracy: float
    std_accuracy: float
    per_fold: tuple
    confusion: np.ndarray  # rows: true real/fake, cols: predicted real/fake
    pooled_accuracy: float
    all_converged: bool = True


def cross_validate(k, labels, config: CvConfig = CvConfig()) -> AccuracyResult:
    kv = np.asarray(k.values if isinstance(k, KernelMatrix) else k, dtype=float)
    y = _as_labels(labels)
    if kv.shape != (y.size, y.size):
        raise DimensionMismatch(f"kernel is {kv.shape}, got {y.size} labels")
    per_fold = []
    confusion = np.zeros((2, 2), dtype=np.int64)
    converged = True
    for r in range(config.repeats):
        assign = stratified_folds(y, config.folds, config.seed.stream(r))
        for fold in range(config.folds):
            test = np.flatnonzero(assign == fold)
            train = np.flatnonzero(assign != fold)
            if np.unique(y[train]).size < 2:
                raise FoldDegenerate(f"repeat {r} fold {fold} trains on a single class")
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ConvergenceWarning)
                model = train_svm(kv[np.ix_(train, train)], y[train], config)
            converged &= model.converged
            dec = model.decision_function(kv[np.ix_(test, train)])
            pred = np.where(dec >= 0, 1.0, -1.0)
            per_fold.append(float((pred == y[test]).mean()))
            for t, p in zip(y[test], pred):
                confusion[0 if t > 0 else 1, 0 if p > 0 else 1] += 1
    if not converged:
        warnings.warn("some folds did not converge", ConvergenceWarning, stacklevel=2)
    acc = np.array(per_fold)
    return AccuracyResult(
        float(acc.mean()),
        float(acc.std()),
        tuple(per_fold),
        confusion,
        float(np.trace(confusion) / confusion.sum()),
        converged,
    )
