"""Calibration battery run by ``genjudge selftest``.

Checks use small fixed seeds so the printed output is identical run to run.
"""

from __future__ import annotations

import itertools
from typing import Callable

import numpy as np

from . import graphlets
from .classifier import CvConfig
from .evaluator import EvaluationConfig, error_score, evaluate_generator
from .generators import GeneratorSpec, gen_erdos_renyi, sample_fake_set, sample_mixed
from .graph import Label, RngSeed

EXPECTED_CLASSES = {3: 2, 4: 6, 5: 21}


def _permutation_canon(code: int, k: int) -> int:
    pairs = list(itertools.combinations(range(k), 2))
    edges = [pairs[len(pairs) - 1 - b] for b in range(len(pairs)) if code >> b & 1]
    best = None
    for perm in itertools.permutations(range(k)):
        mapped = {tuple(sorted((perm[u], perm[v]))) for u, v in edges}
        c = sum(1 << (len(pairs) - 1 - i) for i, p in enumerate(pairs) if p in mapped)
        best = c if best is None else min(best, c)
    return best


def check_catalog_counts() -> str | None:
    for k, n in EXPECTED_CLASSES.items():
        got = graphlets.build_catalog(k).class_count
        if got != n:
            return f"k={k}: {got} classes, expected {n}"
    return None


def check_catalog_canonical() -> str | None:
    for k in EXPECTED_CLASSES:
        cat = graphlets.build_catalog(k)
        for code in cat.classes:
            if _permutation_canon(code, k) != code:
                return f"k={k}: representative {code} is not canonical"
    return None


def check_oracle_counts() -> str | None:
    for i in range(12):
        g = gen_erdos_renyi(9, (0.2, 0.5, 0.8)[i % 3], RngSeed(2024).stream(i))
        for k in EXPECTED_CLASSES:
            cat = graphlets.build_catalog(k)
            index = {c: j for j, c in enumerate(cat.classes)}
            expected = np.zeros(cat.class_count, dtype=np.int64)
            pairs = list(itertools.combinations(range(k), 2))
            for sub in itertools.combinations(range(g.node_count), k):
                code = sum(1 << (len(pairs) - 1 - b) for b, (a, c) in enumerate(pairs)
                           if g.has_edge(sub[a], sub[c]))
                canon = _permutation_canon(code, k)
                if canon in index:
                    expected[index[canon]] += 1
            got = graphlets.count_exact(g, k).counts
            if got.shape != expected.shape or (got != expected).any():
                return f"graph {i}, k={k}: ESU {got.tolist()} != brute force {expected.tolist()}"
    return None


def check_identical_copies() -> str | None:
    real = sample_fake_set(GeneratorSpec.ba(30, 2), 10, RngSeed(1)).with_label(Label.REAL)
    cfg = EvaluationConfig(trials=1, cv=CvConfig(folds=5), master_seed=RngSeed(3))
    rep = evaluate_generator(real, GeneratorSpec.rewire(0.0), cfg)
    if rep.mean_accuracy != 0.5 or rep.mean_error != 0.0:
        return f"accuracy {rep.mean_accuracy}, error {rep.mean_error}"
    return None


def check_separability() -> str | None:
    seed = RngSeed(7)
    ba = sample_mixed([GeneratorSpec.ba(60 + 3 * i, 2) for i in range(20)], seed.stream(0))
    cfg = EvaluationConfig(trials=1, cv=CvConfig(folds=5), master_seed=RngSeed(5))
    rep = evaluate_generator(ba, GeneratorSpec.caveman(8, 6), cfg)
    if rep.mean_accuracy < 0.9:
        return f"BA vs caveman accuracy {rep.mean_accuracy:.3f} < 0.9"
    return None


def check_error_formula() -> str | None:
    for acc, err in ((0.57, 0.07), (0.71, 0.21), (0.996, 0.496), (0.5, 0.0), (0.43, 0.07)):
        if abs(error_score(acc) - err) > 1e-12:
            return f"error_score({acc}) = {error_score(acc)}"
    return None


CHECKS: list[tuple[str, Callable[[], str | None]]] = [
    ("catalog_counts", check_catalog_counts),
    ("catalog_canonical", check_catalog_canonical),
    ("oracle_counts", check_oracle_counts),
    ("error_formula", check_error_formula),
    ("identical_copies", check_identical_copies),
    ("ba_vs_caveman", check_separability),
]


def run(echo=print) -> bool:
    ok = True
    for name, check in CHECKS:
        try:
            problem = check()
        except Exception as exc:  # a crash is a failed check, not a crashed battery
            problem = f"{type(exc).__name__}: {exc}"
        if problem is None:
            echo(f"ok    {name}")
        else:
            ok = False
            echo(f"FAIL  {name}: {problem}")
    return ok
