"""Connected graphlet catalogs, exact ESU counting, sampling and feature vectors.

A k-node labeled graph is encoded as an integer whose bits are the upper
triangle of its adjacency matrix read row by row, first pair most
significant. The canonical form of an isomorphism class is the smallest
such code over all k! relabelings, and catalog classes are ordered by it.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NoValidSample, UnsupportedSize
from .graph import Graph, RngSeed, as_seed

SUPPORTED_SIZES = (3, 4, 5)
DISCONNECTED = -1


def _pairs(k: int) -> list[tuple[int, int]]:
    return list(combinations(range(k), 2))


def _bit(k: int, i: int, j: int) -> int:
    """Bit of the code word holding adjacency between positions i and j."""
    if i > j:
        i, j = j, i
    idx = _pairs(k).index((i, j))
    return 1 << (len(_pairs(k)) - 1 - idx)


@lru_cache(maxsize=None)
def _bit_table(k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(0 if i == j else _bit(k, i, j) for j in range(k)) for i in range(k))


def _code_connected(code: int, k: int) -> bool:
    bits = _bit_table(k)
    seen = 1
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in range(k):
            if not seen >> j & 1 and code & bits[i][j]:
                seen |= 1 << j
                frontier.append(j)
    return seen == (1 << k) - 1


def _permute_code(code: int, perm: Sequence[int], k: int) -> int:
    bits = _bit_table(k)
    out = 0
    for i, j in _pairs(k):
        if code & bits[i][j]:
            out |= bits[perm[i]][perm[j]]
    return out


@dataclass(frozen=True)
class GraphletCatalog:
    size: int
    classes: tuple  # canonical codes, ascending
    lookup: tuple  # code of every labeled k-graph -> class index or DISCONNECTED

    @property
    def class_count(self) -> int:
        return len(self.classes)

    def adjacency(self, index: int) -> np.ndarray:
        """Adjacency bit-matrix of the representative of class *index*."""
        k = self.size
        bits = _bit_table(k)
        code = self.classes[index]
        return np.array(
            [[1 if i != j and code & bits[i][j] else 0 for j in range(k)] for i in range(k)],
            dtype=np.uint8,
        )

    def labels(self) -> list[str]:
        return [f"g{self.size}_{i}" for i in range(self.class_count)]


@lru_cache(maxsize=None)
def build_catalog(k: int) -> GraphletCatalog:
    if k not in SUPPORTED_SIZES:
        raise UnsupportedSize(f"graphlet size {k} not in {SUPPORTED_SIZES}")
    n_codes = 1 << len(_pairs(k))
    perms = list(permutations(range(k)))
    canon = [-1] * n_codes
    for code in range(n_codes):
        if canon[code] >= 0:
            continue
        orbit = {_permute_code(code, p, k) for p in perms}
        rep = min(orbit)
        for c in orbit:
            canon[c] = rep
    reps = sorted({c for c in canon if _code_connected(c, k)})
    index = {c: i for i, c in enumerate(reps)}
    lookup = tuple(index.get(canon[c], DISCONNECTED) for c in range(n_codes))
    return GraphletCatalog(k, tuple(reps), lookup)


def encode_adjacency(sub_adjacency) -> int:
    a = np.asarray(sub_adjacency)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch("adjacency must be square")
    k = a.shape[0]
    if (a != a.T).any() or a.diagonal().any():
        raise ValueError("adjacency must be symmetric with a zero diagonal")
    bits = _bit_table(k)
    code = 0
    for i, j in _pairs(k):
        if a[i, j]:
            code |= bits[i][j]
    return code


def canonical_class(sub_adjacency, catalog: GraphletCatalog) -> int:
    """Catalog index of the class isomorphic to *sub_adjacency*, or ``DISCONNECTED``."""
    a = np.asarray(sub_adjacency)
    if a.shape != (catalog.size, catalog.size):
        raise DimensionMismatch(f"expected {catalog.size}x{catalog.size}, got {a.shape}")
    return catalog.lookup[encode_adjacency(a)]


@dataclass(frozen=True)
class GraphletSpectrum:
    size: int
    counts: np.ndarray
    mode: str = "exact"  # "exact" or "sampled"
    samples: int | None = None
    seed: RngSeed | None = None

    def normalized(self) -> np.ndarray:
        c = np.asarray(self.counts, dtype=float)
        total = c.sum()
        return c / total if total > 0 else np.zeros_like(c)


def count_exact(g: Graph, k: int) -> GraphletSpectrum:
    """Count connected induced k-node subgraphs per class with ESU.

    Every connected k-subset is visited exactly once: subsets grow from their
    smallest node ``v`` and are only extended by exclusive neighbours greater
    than ``v``.
    """
    cat = build_catalog(k)
    lookup = cat.lookup
    bits = _bit_table(k)
    nbrs = g.neighbor_sets
    counts = [0] * cat.class_count

    def extend(sub, code, ext, v, closed):
        p = len(sub)
        if p == k - 1:
            row = bits[p]
            for w in ext:
                nw = nbrs[w]
                c = code
                for q, x in enumerate(sub):
                    if x in nw:
                        c |= row[q]
                counts[lookup[c]] += 1
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            nw = nbrs[w]
            c = code
            for q, x in enumerate(sub):
                if x in nw:
                    c |= bits[q][p]
            new_ext = ext + [u for u in nw if u > v and u not in closed]
            extend(sub + [w], c, new_ext, v, closed | nw)

    if k <= g.node_count:
        for v in range(g.node_count):
            ext = [u for u in nbrs[v] if u > v]
            if ext:
                extend([v], 0, ext, v, nbrs[v] | {v})
    return GraphletSpectrum(k, np.array(counts, dtype=np.int64), "exact")


def _components(g: Graph) -> list[list[int]]:
    seen = [False] * g.node_count
    out = []
    adj = g.adjacency
    for s in range(g.node_count):
        if seen[s]:
            continue
        seen[s] = True
        comp, stack = [s], [s]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        out.append(comp)
    return out


def count_sampled(g: Graph, k: int, samples: int, seed) -> GraphletSpectrum:
    """Tally classes of ``samples`` random connected k-subsets.

    Each subset starts at a uniform node and grows by a uniform member of
    its current open neighbourhood. The resulting subset distribution is not
    uniform, so the tallies describe composition only.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    cat = build_catalog(k)
    seed = as_seed(seed)
    starts = sorted(u for comp in _components(g) if len(comp) >= k for u in comp)
    if not starts:
        raise NoValidSample(f"no connected {k}-node subset in {g!r}")
    rng = seed.generator()
    nbrs = g.neighbor_sets
    bits = _bit_table(k)
    counts = np.zeros(cat.class_count, dtype=float)
    for _ in range(samples):
        # starting outside a large-enough component can never complete
        sub = [starts[rng.integers(len(starts))]]
        frontier = set(nbrs[sub[0]])
        while len(sub) < k:
            choices = sorted(frontier)
            w = choices[rng.integers(len(choices))]
            sub.append(w)
            frontier |= nbrs[w]
            frontier -= set(sub)
        code = 0
        for i, j in _pairs(k):
            if sub[j] in nbrs[sub[i]]:
                code |= bits[i][j]
        counts[cat.lookup[code]] += 1
    return GraphletSpectrum(k, counts, "sampled", samples, seed)


@dataclass(frozen=True)
class CountingMode:
    kind: str = "exact"
    samples: int | None = None

    def __post_init__(self):
        if self.kind not in ("exact", "sampled"):
            raise ValueError(f"unknown counting mode {self.kind!r}")
        if self.kind == "sampled" and (self.samples is None or self.samples < 1):
            raise ValueError("sampled mode needs samples >= 1")

    @classmethod
    def sampled(cls, samples: int) -> "CountingMode":
        return cls("sampled", samples)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "samples": self.samples}


EXACT = CountingMode()


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    size_config: tuple


def feature_labels(sizes: Sequence[int]) -> list[str]:
    return [lab for k in sorted(set(sizes)) for lab in build_catalog(k).labels()]


def feature_vector(g: Graph, sizes: Sequence[int] = (3, 4), mode: CountingMode = EXACT,
                   seed=None) -> FeatureVector:
    sizes = tuple(sorted(set(sizes)))
    if not sizes:
        raise ValueError("sizes must be non-empty")
    blocks = []
    for k in sizes:
        if mode.kind == "exact":
            spec = count_exact(g, k)
        else:
            if seed is None:
                raise ValueError("sampled counting needs a seed")
            try:
                spec = count_sampled(g, k, mode.samples, as_seed(seed).stream(k))
            except NoValidSample:
                spec = GraphletSpectrum(k, np.zeros(build_catalog(k).class_count), "sampled")
        blocks.append(spec.normalized())
    return FeatureVector(np.concatenate(blocks), sizes)


def features_to_csv(rows: Sequence[FeatureVector] | np.ndarray, sizes: Sequence[int]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(feature_labels(sizes))
    for r in rows:
        vals = r.values if isinstance(r, FeatureVector) else r
        w.writerow([f"{float(x):.12g}" for x in vals])
    return buf.getvalue()


def features_from_csv(text: str) -> tuple[list[str], np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    return header, np.array([[float(x) for x in r] for r in body], dtype=float).reshape(len(body), len(header))


def _feature_job(args):
    g, sizes, mode, seed = args
    return feature_vector(g, sizes, mode, seed).values


def feature_matrix(graphs: Sequence[Graph], sizes: Sequence[int] = (3, 4), mode: CountingMode = EXACT,
                   seed=None, threads: int = 1) -> np.ndarray:
    """Stack feature vectors row-wise; graph ``i`` samples from stream ``(seed, i)``.

    With ``threads > 1`` graphs are featurized in worker processes; the
    result does not depend on the worker count.
    """
    sizes = tuple(sorted(set(sizes)))
    if mode.kind == "sampled" and seed is None:
        raise ValueError("sampled counting needs a seed")
    seeds = [None if seed is None else as_seed(seed).stream(i) for i in range(len(graphs))]
    jobs = [(g, sizes, mode, s) for g, s in zip(graphs, seeds)]
    width = sum(build_catalog(k).class_count for k in sizes)
    if not jobs:
        return np.zeros((0, width))
    if threads > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_feature_job, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        rows = [_feature_job(j) for j in jobs]
    return np.vstack(rows)
