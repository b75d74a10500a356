"""Synthetic graph families, parameter fitting, and fake-set sampling."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    InvalidParams,
    NotEnoughExternalGraphs,
    RetriesExhausted,
    TooFewEdges,
    UnfittableFamily,
    Unrealizable,
)
from .graph import Dataset, Graph, Label, RngSeed, as_seed, read_graph


class Family(enum.Enum):
    BARABASI_ALBERT = "ba"
    CONNECTED_CAVEMAN = "caveman"
    ERDOS_RENYI = "er"
    CONFIGURATION_MODEL = "config"
    REWIRE_COPY = "rewire"
    EXTERNAL = "external"


@dataclass(frozen=True)
class GeneratorSpec:
    """A graph family plus its parameters.

    ``params`` keys per family: ``ba`` n, m; ``caveman`` l, k; ``er`` n, p;
    ``config`` degrees; ``rewire`` fraction and optional source_index;
    ``external`` directory.
    """

    family: Family
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        validate_spec(self)

    @classmethod
    def ba(cls, n: int, m: int) -> "GeneratorSpec":
        return cls(Family.BARABASI_ALBERT, {"n": int(n), "m": int(m)})

    @classmethod
    def caveman(cls, l: int, k: int) -> "GeneratorSpec":
        return cls(Family.CONNECTED_CAVEMAN, {"l": int(l), "k": int(k)})

    @classmethod
    def er(cls, n: int, p: float) -> "GeneratorSpec":
        return cls(Family.ERDOS_RENYI, {"n": int(n), "p": float(p)})

    @classmethod
    def config(cls, degrees: Sequence[int]) -> "GeneratorSpec":
        return cls(Family.CONFIGURATION_MODEL, {"degrees": tuple(int(d) for d in degrees)})

    @classmethod
    def rewire(cls, fraction: float, source_index: int | None = None) -> "GeneratorSpec":
        return cls(Family.REWIRE_COPY, {"fraction": float(fraction), "source_index": source_index})

    @classmethod
    def external(cls, directory) -> "GeneratorSpec":
        return cls(Family.EXTERNAL, {"directory": str(directory)})

    def describe(self) -> str:
        args = ",".join(f"{k}={v}" for k, v in self.params.items() if k != "degrees" and v is not None)
        return f"{self.family.value}({args})"

    def to_dict(self) -> dict:
        d = {"family": self.family.value}
        for k, v in self.params.items():
            d[k] = list(v) if isinstance(v, tuple) else v
        return d

    def __hash__(self):
        return hash((self.family, self.describe()))


def validate_spec(spec: GeneratorSpec) -> None:
    p = spec.params
    fam = spec.family
    try:
        if fam is Family.BARABASI_ALBERT:
            _check_ba(p["n"], p["m"])
        elif fam is Family.CONNECTED_CAVEMAN:
            _check_caveman(p["l"], p["k"])
        elif fam is Family.ERDOS_RENYI:
            _check_er(p["n"], p["p"])
        elif fam is Family.CONFIGURATION_MODEL:
            if sum(p["degrees"]) % 2 or min(p["degrees"], default=0) < 0:
                raise InvalidParams("degree sequence must be non-negative with an even sum")
        elif fam is Family.REWIRE_COPY:
            if not 0.0 <= p["fraction"] <= 1.0:
                raise InvalidParams("fraction must be in [0, 1]")
            si = p.get("source_index")
            if si is not None and si < 0:
                raise InvalidParams("source_index must be non-negative")
        elif fam is Family.EXTERNAL:
            if not p.get("directory"):
                raise InvalidParams("external source needs a directory")
    except KeyError as exc:
        raise InvalidParams(f"{fam.value}: missing parameter {exc}") from None


def _check_ba(n, m):
    if m < 1:
        raise InvalidParams("m must be >= 1")
    if m >= n:
        raise InvalidParams("m must be < n")


def _check_caveman(l, k):
    if l < 2:
        raise InvalidParams("l must be >= 2")
    if k < 2:
        raise InvalidParams("k must be >= 2")


def _check_er(n, p):
    if n < 1:
        raise InvalidParams("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise InvalidParams("p must be in [0, 1]")


def gen_barabasi_albert(n: int, m: int, seed) -> Graph:
    """Preferential attachment from ``m`` isolated seed nodes.

    Each arrival links to ``m`` distinct earlier nodes drawn with weight
    ``degree + 1``, giving exactly ``m * (n - m)`` edges.
    """
    _check_ba(n, m)
    rng = as_seed(seed).generator()
    weight = np.ones(n)
    edges = []
    for v in range(m, n):
        w = weight[:v]
        targets = rng.choice(v, size=m, replace=False, p=w / w.sum())
        for u in targets:
            edges.append((int(u), v))
            weight[u] += 1
        weight[v] += m
    return Graph.from_edges(n, edges)


def gen_connected_caveman(l: int, k: int, seed) -> Graph:
    """Ring of ``l`` k-cliques; each clique moves one internal edge to the next clique.

    The moved edge and its landing node are drawn from *seed*. For ``k = 2``
    moving the only edge of each clique cannot keep the ring connected.
    """
    _check_caveman(l, k)
    rng = as_seed(seed).generator()
    edges = set()
    for c in range(l):
        base = c * k
        edges.update((base + i, base + j) for i in range(k) for j in range(i + 1, k))
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    added = set()
    for c in range(l):
        base, nxt = c * k, ((c + 1) % l) * k
        while True:
            i, j = pairs[rng.integers(len(pairs))]
            u = base + (i if rng.integers(2) == 0 else j)
            w = nxt + int(rng.integers(k))
            link = (min(u, w), max(u, w))
            if link not in added:
                break
        edges.discard((base + i, base + j))
        added.add(link)
    return Graph.from_edges(l * k, edges | added)


def gen_erdos_renyi(n: int, p: float, seed) -> Graph:
    _check_er(n, p)
    rng = as_seed(seed).generator()
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def fit_parameters(family: Family, real: Dataset) -> GeneratorSpec:
    """Moment-matching fit of a family to a set of target graphs."""
    if len(real) == 0:
        raise UnfittableFamily("cannot fit to an empty dataset")
    ns = np.array([g.node_count for g in real.graphs], dtype=float)
    es = np.array([g.edge_count for g in real.graphs], dtype=float)
    n = _round_half_up(ns.mean())
    try:
        if family is Family.BARABASI_ALBERT:
            return GeneratorSpec.ba(n, _round_half_up((es / ns).mean()))
        if family is Family.ERDOS_RENYI:
            with np.errstate(divide="ignore", invalid="ignore"):
                dens = np.where(ns > 1, 2 * es / (ns * (ns - 1)), 0.0)
            return GeneratorSpec.er(n, float(dens.mean()))
        if family is Family.CONNECTED_CAVEMAN:
            k = _round_half_up(1 + (2 * es / ns).mean())
            return GeneratorSpec.caveman(_round_half_up(ns.mean() / k), k)
    except InvalidParams as exc:
        raise UnfittableFamily(f"{family.value}: {exc}") from None
    raise UnfittableFamily(f"family {family.value} cannot be fitted")


def _erdos_gallai(degrees: Sequence[int]) -> bool:
    d = sorted(degrees, reverse=True)
    if sum(d) % 2 or (d and d[-1] < 0):
        return False
    n = len(d)
    total = 0
    for r in range(1, n + 1):
        total += d[r - 1]
        if total > r * (r - 1) + sum(min(x, r) for x in d[r:]):
            return False
    return True


def configuration_model(degrees: Sequence[int], seed, max_attempts: int = 100) -> Graph:
    """Stub matching, rejecting any draw with a self-loop or multi-edge."""
    degrees = [int(d) for d in degrees]
    if not _erdos_gallai(degrees):
        raise Unrealizable("degree sequence is not graphical")
    rng = as_seed(seed).generator()
    stubs = np.repeat(np.arange(len(degrees)), degrees)
    for _ in range(max_attempts):
        perm = rng.permutation(stubs)
        a, b = perm[0::2], perm[1::2]
        if (a == b).any():
            continue
        pairs = {(min(u, v), max(u, v)) for u, v in zip(a.tolist(), b.tolist())}
        if len(pairs) == len(a):
            return Graph(len(degrees), frozenset(pairs))
    raise RetriesExhausted(f"no simple realization after {max_attempts} attempts")


def rewire_perturbation(g: Graph, fraction: float, seed, max_tries: int = 100) -> Graph:
    """Apply ``ceil(fraction * |E|)`` degree-preserving double-edge swaps.

    A swap turns ``{a,b},{c,d}`` into ``{a,d},{c,b}``. Draws that would create
    a self-loop or duplicate edge are redrawn up to ``max_tries`` times, after
    which that swap is skipped.
    """
    if g.edge_count < 2:
        raise TooFewEdges("double-edge swaps need at least 2 edges")
    if not 0.0 <= fraction <= 1.0:
        raise InvalidParams("fraction must be in [0, 1]")
    n_swaps = math.ceil(fraction * g.edge_count)
    if n_swaps == 0:
        return g
    rng = as_seed(seed).generator()
    edges = g.sorted_edges()
    present = set(edges)
    for _ in range(n_swaps):
        for _ in range(max_tries):
            i, j = rng.choice(len(edges), size=2, replace=False)
            a, b = edges[i]
            c, d = edges[j]
            if rng.integers(2):
                c, d = d, c
            if len({a, b, c, d}) < 4:
                continue
            e1 = (min(a, d), max(a, d))
            e2 = (min(c, b), max(c, b))
            if e1 in present or e2 in present:
                continue
            present -= {edges[i], edges[j]}
            present |= {e1, e2}
            edges[i], edges[j] = e1, e2
            break
    return Graph(g.node_count, frozenset(present))


def sample_fake_set(spec: GeneratorSpec, count: int, seed, real: Dataset | None = None) -> Dataset:
    """Draw ``count`` graphs from *spec*, all labeled FAKE.

    Graph ``i`` uses the seed stream ``(seed, i)``. ``rewire`` specs perturb
    graphs of *real* (graph ``i`` rewires ``real[i mod |real|]`` unless
    ``source_index`` pins one source); ``external`` reads edge-list files in
    lexicographic name order.
    """
    if count < 1:
        raise InvalidParams("count must be >= 1")
    seed = as_seed(seed)
    p = spec.params
    fam = spec.family

    if fam is Family.EXTERNAL:
        directory = Path(p["directory"])
        if not directory.is_dir():
            raise NotEnoughExternalGraphs(f"{directory} is not a directory")
        files = sorted(f for f in directory.iterdir() if f.is_file() and f.suffix == ".el")
        if len(files) < count:
            raise NotEnoughExternalGraphs(
                f"{directory} has {len(files)} graphs, need {count}")
        graphs = [read_graph(f) for f in files[:count]]
        return Dataset(graphs, (Label.FAKE,) * count, tuple(f"external:{f.name}" for f in files[:count]))

    graphs = []
    for i in range(count):
        s = seed.stream(i)
        if fam is Family.BARABASI_ALBERT:
            graphs.append(gen_barabasi_albert(p["n"], p["m"], s))
        elif fam is Family.CONNECTED_CAVEMAN:
            graphs.append(gen_connected_caveman(p["l"], p["k"], s))
        elif fam is Family.ERDOS_RENYI:
            graphs.append(gen_erdos_renyi(p["n"], p["p"], s))
        elif fam is Family.CONFIGURATION_MODEL:
            graphs.append(configuration_model(p["degrees"], s))
        elif fam is Family.REWIRE_COPY:
            if real is None or len(real) == 0:
                raise InvalidParams("rewire source needs the real dataset")
            si = p.get("source_index")
            src = real.graphs[(si if si is not None else i) % len(real)]
            graphs.append(rewire_perturbation(src, p["fraction"], s))
    return Dataset(graphs, (Label.FAKE,) * count, (spec.describe(),) * count)


def sample_mixed(specs: Sequence[GeneratorSpec], seed, label: Label = Label.REAL) -> Dataset:
    """One graph per spec, graph ``i`` drawn from stream ``(seed, i)``."""
    seed = as_seed(seed)
    graphs = [sample_fake_set(s, 1, seed.stream(i)).graphs[0] for i, s in enumerate(specs)]
    return Dataset(graphs, (label,) * len(graphs), tuple(s.describe() for s in specs))
