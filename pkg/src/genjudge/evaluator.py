"""Classifier-based scoring of graph generators.

A generator is scored by how well a graphlet-kernel SVM separates its output
from the target graphs: ``error = |accuracy - 0.5|``, lower is better.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .classifier import CvConfig, cross_validate
from .errors import GenJudgeError, LabelConflict, OutOfRange, StageError
from .generators import GeneratorSpec, sample_fake_set
from .graph import Dataset, Label, RngSeed, as_seed
from .graphlets import EXACT, CountingMode, feature_matrix
from .kernel import center_scale, cooccurrence_similarity, cosine_normalize, gram_base, gram_deep

log = logging.getLogger(__name__)

NORMALIZATIONS = {"center": center_scale, "cosine": cosine_normalize, "none": lambda k: k}

# top-level seed streams
_FAKE_STREAM, _CV_STREAM, _FEATURE_STREAM = 0, 1, 2


def error_score(accuracy: float) -> float:
    if not 0.0 <= accuracy <= 1.0:
        raise OutOfRange(f"accuracy {accuracy} outside [0, 1]")
    return abs(accuracy - 0.5)


@dataclass(frozen=True)
class EvaluationConfig:
    sizes: tuple = (3, 4)
    counting: CountingMode = EXACT
    kernel: str = "base"  # "base" or "deep"
    smoothing: float = 1e-8
    normalize: str = "center"  # "center", "cosine" or "none"
    cv: CvConfig = CvConfig()
    trials: int = 5
    master_seed: RngSeed = RngSeed(0)

    def __post_init__(self):
        sizes = tuple(sorted(set(int(k) for k in self.sizes)))
        if not sizes:
            raise ValueError("sizes must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.kernel not in ("base", "deep"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.normalize not in NORMALIZATIONS:
            raise ValueError(f"unknown normalization {self.normalize!r}")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "master_seed", as_seed(self.master_seed))

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "counting": self.counting.to_dict(),
            "kernel": self.kernel,
            "smoothing": self.smoothing,
            "normalize": self.normalize,
            # the CV shuffle seed is derived from master_seed per trial
            "cv": {k: v for k, v in self.cv.to_dict().items() if k != "seed"},
            "trials": self.trials,
            "master_seed": self.master_seed.master_seed,
        }


@dataclass
class EvaluationReport:
    generator_name: str
    graph_family: str
    per_trial: list  # (accuracy, error) pairs
    confusion_total: np.ndarray
    config: EvaluationConfig
    dataset_sizes: tuple
    pooled_accuracy: float = float("nan")
    std_accuracy: float = 0.0
    fake_source: str = ""

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean([a for a, _ in self.per_trial]))

    @property
    def mean_error(self) -> float:
        return float(np.mean([e for _, e in self.per_trial]))

    @property
    def std_error(self) -> float:
        return float(np.std([e for _, e in self.per_trial]))

    def to_dict(self) -> dict:
        return {
            "generator": self.generator_name,
            "family": self.graph_family,
            "fake_source": self.fake_source,
            "config": self.config.to_dict(),
            "per_trial": [{"accuracy": a, "error": e} for a, e in self.per_trial],
            "mean_accuracy": self.mean_accuracy,
            "mean_error": self.mean_error,
            "std_error": self.std_error,
            "std_accuracy": self.std_accuracy,
            "pooled_accuracy": self.pooled_accuracy,
            "confusion": self.confusion_total.tolist(),
            "dataset_sizes": {"real": self.dataset_sizes[0], "fake": self.dataset_sizes[1]},
            "seed": self.config.master_seed.master_seed,
            "version": __version__,
        }


def assemble_real_fake(real: Dataset, fake: Dataset) -> tuple[Dataset, np.ndarray]:
    """Concatenate real then fake graphs with labels +1 / -1."""
    if len(real) == 0 or len(fake) == 0:
        raise ValueError("both real and fake sets must be non-empty")
    if real.labels is not None and any(lab is not Label.REAL for lab in real.labels):
        raise LabelConflict("real set contains a graph not labeled REAL")
    if fake.labels is None or any(lab is not Label.FAKE for lab in fake.labels):
        raise LabelConflict("fake set must be labeled FAKE throughout")
    graphs = real.graphs + fake.graphs
    labels = (Label.REAL,) * len(real) + fake.labels
    merged = Dataset(graphs, labels, real.source_tags + fake.source_tags)
    y = np.array([lab.sign for lab in labels], dtype=float)
    return merged, y


def build_kernel(features: np.ndarray, config: EvaluationConfig):
    if config.kernel == "deep":
        k = gram_deep(features, cooccurrence_similarity(features, config.smoothing))
    else:
        k = gram_base(features)
    return NORMALIZATIONS[config.normalize](k)


def family_of(ds: Dataset) -> str:
    tags = {t.split("(")[0] for t in ds.source_tags if t}
    return tags.pop() if len(tags) == 1 else "unknown"


class _Stage:
    def __init__(self, name: str, trial: int | None):
        self.name, self.trial = name, trial

    def __enter__(self):
        log.info("%s%s", self.name, "" if self.trial is None else f" (trial {self.trial})")
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError) and isinstance(exc, (GenJudgeError, ValueError)):
            raise StageError(self.name, exc, self.trial) from exc
        return False


def _real_features(real: Dataset, config: EvaluationConfig, threads: int) -> np.ndarray:
    seed = config.master_seed.stream(_FEATURE_STREAM).stream(0)
    return feature_matrix(real.graphs, config.sizes, config.counting, seed, threads)


def evaluate_generator(real: Dataset, fake_source: GeneratorSpec, config: EvaluationConfig = EvaluationConfig(),
                       generator_name: str | None = None, graph_family: str | None = None,
                       threads: int = 1, real_features: np.ndarray | None = None) -> EvaluationReport:
    """Score one generator against *real* over ``config.trials`` fresh fake draws.

    Each trial draws as many fake graphs as there are real ones, so chance
    accuracy is exactly 0.5.
    """
    if len(real) == 0:
        raise ValueError("real set is empty")
    n = len(real)
    master = config.master_seed
    with _Stage("featurize-real", None):
        if real_features is None:
            real_features = _real_features(real, config, threads)
    per_trial = []
    confusion = np.zeros((2, 2), dtype=np.int64)
    pooled_hits = 0
    fold_accs = []
    for t in range(config.trials):
        with _Stage("generate", t):
            fake = sample_fake_set(fake_source, n, master.stream(_FAKE_STREAM).stream(t), real=real)
        with _Stage("assemble", t):
            _, y = assemble_real_fake(real, fake)
        with _Stage("featurize", t):
            fseed = master.stream(_FEATURE_STREAM).stream(t + 1)
            fake_features = feature_matrix(fake.graphs, config.sizes, config.counting, fseed, threads)
            features = np.vstack([real_features, fake_features])
        with _Stage("kernel", t):
            k = build_kernel(features, config)
        with _Stage("classify", t):
            cv = CvConfig(config.cv.folds, config.cv.repeats, master.stream(_CV_STREAM).stream(t),
                          config.cv.c_param, config.cv.tolerance, config.cv.max_passes)
            res = cross_validate(k, y, cv)
        acc = res.mean_accuracy
        per_trial.append((acc, error_score(acc)))
        confusion += res.confusion
        pooled_hits += int(np.trace(res.confusion))
        fold_accs.extend(res.per_fold)
        log.info("trial %d: accuracy=%.4f error=%.4f", t, acc, per_trial[-1][1])
    return EvaluationReport(
        generator_name or fake_source.describe(),
        graph_family or family_of(real),
        per_trial,
        confusion,
        config,
        (n, n),
        pooled_accuracy=pooled_hits / confusion.sum(),
        std_accuracy=float(np.std([a for a, _ in per_trial])),
        fake_source=fake_source.describe(),
    )


@dataclass
class ComparisonRow:
    name: str
    report: EvaluationReport | None = None
    failure: str | None = None

    @property
    def failed(self) -> bool:
        return self.report is None


@dataclass
class ComparisonTable:
    family: str
    rows: list = field(default_factory=list)

    @property
    def ranking(self) -> list[str]:
        return [r.name for r in self.rows if not r.failed]

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "ranking": self.ranking,
            "rows": [
                {"name": r.name, "status": "FAILED", "error": r.failure} if r.failed
                else {"name": r.name, "status": "ok", "report": r.report.to_dict()}
                for r in self.rows
            ],
        }

    def cell(self, row: ComparisonRow, kind: str = "combined") -> str:
        if row.failed:
            return "FAILED"
        acc, err = row.report.mean_accuracy, row.report.mean_error
        if kind == "accuracy":
            return f"{100 * acc:.1f}"
        if kind == "error":
            return f"{err:.3f}"
        return f"{100 * acc:.1f}|{err:.3f}"

    def to_csv(self, kind: str = "combined") -> str:
        return comparison_csv([self], kind)

    def format(self) -> str:
        lines = [f"{'rank':<5}{'generator':<28}{'accuracy':>10}{'error':>9}"]
        for i, r in enumerate(self.rows, 1):
            if r.failed:
                lines.append(f"{'-':<5}{r.name:<28}{'FAILED':>10}   {r.failure}")
            else:
                lines.append(f"{i:<5}{r.name:<28}{100 * r.report.mean_accuracy:>9.1f}%"
                             f"{r.report.mean_error:>9.3f}")
        return "\n".join(lines)


def comparison_csv(tables: Sequence[ComparisonTable], kind: str = "combined") -> str:
    """One row per graph family, one column per generator (first table's ranked order)."""
    names: list[str] = []
    for t in tables:
        names.extend(r.name for r in t.rows if r.name not in names)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family"] + names)
    for t in tables:
        by_name = {r.name: r for r in t.rows}
        w.writerow([t.family] + [t.cell(by_name[n], kind) if n in by_name else "" for n in names])
    return buf.getvalue()


def rank_rows(rows: Sequence[ComparisonRow]) -> list[ComparisonRow]:
    ok = sorted((r for r in rows if not r.failed), key=lambda r: (r.report.mean_error, r.name))
    failed = sorted((r for r in rows if r.failed), key=lambda r: r.name)
    return ok + failed


def compare_generators(real: Dataset, sources: Sequence[tuple[str, GeneratorSpec]],
                       config: EvaluationConfig = EvaluationConfig(), graph_family: str | None = None,
                       threads: int = 1) -> ComparisonTable:
    """Evaluate every source under identical seeds and rank by mean error.

    A failing source is kept as a FAILED row rather than aborting the rest.
    """
    if not sources:
        raise ValueError("need at least one source")
    family = graph_family or family_of(real)
    real_features = _real_features(real, config, threads)
    rows = []
    for name, spec in sources:
        try:
            rep = evaluate_generator(real, spec, config, name, family, threads, real_features)
            rows.append(ComparisonRow(name, rep))
        except GenJudgeError as exc:
            log.warning("source %s failed: %s", name, exc)
            rows.append(ComparisonRow(name, failure=str(exc)))
    return ComparisonTable(family, rank_rows(rows))
