"""Gram matrices over graphlet feature matrices."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCorpus, DimensionMismatch, EmptyFeatureMatrix, NonFinite, ZeroDiagonal

DEFAULT_SMOOTHING = 1e-8
PSD_TOL = 1e-8


@dataclass(frozen=True)
class KernelMatrix:
    values: np.ndarray
    normalized: bool = False
    kind: str = "base"

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def submatrix(self, rows, cols=None) -> np.ndarray:
        cols = rows if cols is None else cols
        return self.values[np.ix_(rows, cols)]


def _as_features(features) -> np.ndarray:
    f = np.asarray(features, dtype=float)
    if f.ndim != 2 or f.shape[0] < 1:
        raise EmptyFeatureMatrix("feature matrix needs at least one row")
    return f


def _gram(features: np.ndarray, m: np.ndarray | None) -> np.ndarray:
    # Compute over distinct rows only and scatter back: identical feature rows
    # then get bit-identical kernel rows, and K is exactly symmetric.
    uniq, inverse = np.unique(features, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    left = uniq if m is None else uniq @ m
    g = left @ uniq.T
    g = np.triu(g) + np.triu(g, 1).T
    return g[np.ix_(inverse, inverse)]


def gram_base(features) -> KernelMatrix:
    """``K[i, j] = <row_i, row_j>``."""
    return KernelMatrix(_gram(_as_features(features), None), False, "base")


def cosine_normalize(k: KernelMatrix) -> KernelMatrix:
    v = k.values
    d = np.diag(v).copy()
    bad = np.flatnonzero(~(d > 0))
    if bad.size:
        raise ZeroDiagonal(int(bad[0]))
    s = np.sqrt(d)
    out = v / np.outer(s, s)
    out = np.triu(out) + np.triu(out, 1).T
    # K_ij = K_ii = K_jj means cosine exactly 1 (diagonal, duplicate rows)
    out[(v == d[:, None]) & (d[:, None] == d[None, :])] = 1.0
    return KernelMatrix(out, True, k.kind)


def center_scale(k: KernelMatrix) -> KernelMatrix:
    """Center in feature space and scale to unit mean squared norm.

    Equivalent to subtracting the dataset mean from every feature vector and
    dividing by a global constant, so PSD is kept and ``C`` becomes
    independent of the spectra's overall scale. Computed entrywise so that
    identical rows of ``k`` stay bit-identical.
    """
    v = k.values
    r = v.mean(axis=1)
    # r_i + r_j is exact-commutative, so the result is exactly symmetric
    out = v - (r[:, None] + r[None, :]) + r.mean()
    scale = np.trace(out) / out.shape[0]
    if scale > 1e-300:
        out = out / scale
    return KernelMatrix(out, False, k.kind)


@dataclass(frozen=True)
class SimilarityMatrix:
    values: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def project_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.T) / 2)
    out = (v * np.clip(w, 0.0, None)) @ v.T
    return (out + out.T) / 2


def cooccurrence_similarity(features, smoothing: float = DEFAULT_SMOOTHING) -> SimilarityMatrix:
    """Positive-PMI similarity between graphlet classes, projected onto the PSD cone.

    Each row is read as a bag of classes weighted by its normalized spectrum.
    """
    f = _as_features(features)
    if f.shape[0] < 2:
        raise DegenerateCorpus("need at least two graphs")
    if not f.any():
        raise DegenerateCorpus("every feature row is zero")
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    marg = f.mean(axis=0)
    joint = (f.T @ f) / f.shape[0]
    ratio = (joint + smoothing) / np.outer(marg + smoothing, marg + smoothing)
    ppmi = np.maximum(0.0, np.log(ratio))
    # smoothing alone would give classes absent from every graph log(1/eps)
    absent = marg <= 0
    ppmi[absent, :] = 0.0
    ppmi[:, absent] = 0.0
    return SimilarityMatrix(project_psd(ppmi))


def gram_deep(features, m: SimilarityMatrix) -> KernelMatrix:
    """``K[i, j] = row_i^T M row_j``."""
    f = _as_features(features)
    mv = np.asarray(m.values if isinstance(m, SimilarityMatrix) else m, dtype=float)
    if mv.shape != (f.shape[1], f.shape[1]):
        raise DimensionMismatch(f"similarity is {mv.shape}, features have {f.shape[1]} columns")
    return KernelMatrix(_gram(f, mv), False, "deep")


def check_psd(k) -> float:
    """Smallest eigenvalue of a symmetric kernel matrix."""
    v = np.asarray(k.values if isinstance(k, KernelMatrix) else k, dtype=float)
    if not np.isfinite(v).all():
        raise NonFinite("kernel matrix has NaN or Inf entries")
    return float(np.linalg.eigvalsh(v)[0])


def psd_tolerance(k: KernelMatrix, tol: float = PSD_TOL) -> float:
    return tol * max(1.0, float(np.max(np.diag(k.values), initial=0.0)))


def kernel_to_csv(k: KernelMatrix, sizes) -> str:
    buf = io.StringIO()
    buf.write(f"# kernel={k.kind} sizes={','.join(map(str, sorted(sizes)))} normalized={str(k.normalized).lower()}\n")
    w = csv.writer(buf, lineterminator="\n")
    for row in k.values:
        w.writerow([f"{float(x):.12g}" for x in row])
    return buf.getvalue()


def kernel_from_csv(text: str) -> KernelMatrix:
    lines = text.splitlines()
    meta = dict(tok.split("=", 1) for tok in lines[0].lstrip("# ").split())
    vals = np.array([[float(x) for x in row] for row in csv.reader(lines[1:])], dtype=float)
    return KernelMatrix(vals, meta.get("normalized") == "true", meta.get("kernel", "base"))
