"""Graph representation, datasets, seeding and edge-list I/O."""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyInput,
    InvalidGraph,
    MalformedLine,
    ManifestSchemaError,
    MissingFile,
    MixedLabeling,
    NotAPermutation,
    SelfLoop,
)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes ``0 .. node_count - 1``.

    Edges are stored once each as ``(u, v)`` with ``u < v``. Instances are
    immutable; use :meth:`from_edges` to build one from arbitrary pairs.
    """

    node_count: int
    edges: frozenset

    def __post_init__(self):
        if self.node_count < 0:
            raise InvalidGraph("negative node count")
        for e in self.edges:
            u, v = e
            if u == v:
                raise InvalidGraph(f"self-loop at {u}")
            if not (0 <= u < v < self.node_count):
                raise InvalidGraph(f"edge {e} not normalized or out of range")

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        norm = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise InvalidGraph(f"self-loop at {u}")
            norm.add((u, v) if u < v else (v, u))
        return cls(int(node_count), frozenset(norm))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edges

    def is_connected(self) -> bool:
        if self.node_count == 0:
            return True
        seen = {0}
        stack = [0]
        adj = self.adjacency
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.node_count

    def __repr__(self):
        return f"Graph(n={self.node_count}, m={len(self.edges)})"


class Label(enum.Enum):
    REAL = "real"
    FAKE = "fake"

    @property
    def sign(self) -> int:
        return 1 if self is Label.REAL else -1


@dataclass(frozen=True)
class Dataset:
    graphs: tuple
    labels: tuple | None = None
    source_tags: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != len(self.graphs):
                raise ValueError("labels and graphs differ in length")
        tags = tuple(self.source_tags) or ("",) * len(self.graphs)
        if len(tags) != len(self.graphs):
            raise ValueError("source_tags and graphs differ in length")
        object.__setattr__(self, "source_tags", tags)
        for i, g in enumerate(self.graphs):
            if g.node_count < 1:
                raise InvalidGraph(f"graph {i} has no nodes")

    def __len__(self):
        return len(self.graphs)

    def with_label(self, label: Label) -> "Dataset":
        return Dataset(self.graphs, (label,) * len(self.graphs), self.source_tags)


@dataclass(frozen=True)
class RngSeed:
    """Counter-based seed: a master seed plus a path of stream indices.

    ``RngSeed(s).stream(i).stream(j)`` names a random stream that depends only
    on ``(s, i, j)``, so work can be reordered or parallelised freely.
    """

    master_seed: int
    path: tuple = field(default=())

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @property
    def stream_index(self) -> int:
        return self.path[-1] if self.path else 0

    def stream(self, index: int) -> "RngSeed":
        if index < 0:
            raise ValueError("stream index must be non-negative")
        return RngSeed(self.master_seed, self.path + (int(index),))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(ss))


def as_seed(seed) -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    return RngSeed(int(seed))


def fresh_seed() -> int:
    return int(np.random.SeedSequence().entropy % 2**63)


# ---------------------------------------------------------------- edge lists

def _int_token(tok: str, lineno: int) -> int:
    if not tok.isdigit():
        raise MalformedLine(f"expected a non-negative integer, got {tok!r}", lineno)
    return int(tok)


def parse_edge_list(text: bytes | str) -> Graph:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedLine(f"not UTF-8: {exc}") from None
    header = None
    edges = set()
    max_index = -1
    seen_content = False
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if toks[0] == "n":
            if seen_content or len(toks) != 2:
                raise MalformedLine("header 'n <count>' must be the first line", lineno)
            header = _int_token(toks[1], lineno)
            seen_content = True
            continue
        seen_content = True
        if len(toks) != 2:
            raise MalformedLine(f"expected 'u v', got {line!r}", lineno)
        u, v = _int_token(toks[0], lineno), _int_token(toks[1], lineno)
        if u == v:
            raise SelfLoop(f"self-loop on node {u}", lineno)
        if header is not None and max(u, v) >= header:
            raise MalformedLine(f"node index {max(u, v)} >= n={header}", lineno)
        edges.add((u, v) if u < v else (v, u))
        max_index = max(max_index, u, v)
    if not seen_content:
        raise EmptyInput("no header and no edges")
    n = header if header is not None else max_index + 1
    return Graph(n, frozenset(edges))


def serialize_edge_list(g: Graph) -> bytes:
    lines = [f"n {g.node_count}"]
    lines.extend(f"{u} {v}" for u, v in g.sorted_edges())
    return "\n".join(lines).encode("ascii")


def read_graph(path) -> Graph:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(path)
    return parse_edge_list(path.read_bytes())


def write_graph(g: Graph, path) -> None:
    Path(path).write_bytes(serialize_edge_list(g))


def relabel(g: Graph, perm: Sequence[int]) -> Graph:
    n = g.node_count
    perm = [int(p) for p in perm]
    if len(perm) != n or sorted(perm) != list(range(n)):
        raise NotAPermutation(f"not a permutation of range({n})")
    return Graph.from_edges(n, ((perm[u], perm[v]) for u, v in g.edges))


# ---------------------------------------------------------------- manifests

def load_dataset(manifest_path) -> Dataset:
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise MissingFile(manifest_path)
    try:
        doc = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestSchemaError(f"invalid JSON: {exc}") from None
    entries = doc.get("graphs") if isinstance(doc, dict) else None
    if not isinstance(entries, list):
        raise ManifestSchemaError("manifest must be an object with a 'graphs' list")

    base = manifest_path.parent
    graphs, labels, tags = [], [], []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or not isinstance(entry.get("path"), str):
            raise ManifestSchemaError(f"entry {i} needs a string 'path'")
        extra = set(entry) - {"path", "label", "tag"}
        if extra:
            raise ManifestSchemaError(f"entry {i} has unknown keys {sorted(extra)}")
        label = entry.get("label")
        if label is not None and label not in ("real", "fake"):
            raise ManifestSchemaError(f"entry {i} label must be 'real' or 'fake'")
        tag = entry.get("tag", "")
        if not isinstance(tag, str):
            raise ManifestSchemaError(f"entry {i} tag must be a string")
        graphs.append(read_graph(base / entry["path"]))
        labels.append(None if label is None else Label(label))
        tags.append(tag)

    n_labeled = sum(lab is not None for lab in labels)
    if 0 < n_labeled < len(labels):
        raise MixedLabeling(f"{n_labeled} of {len(labels)} entries carry a label")
    return Dataset(graphs, tuple(labels) if labels and n_labeled else None, tuple(tags))


def save_dataset(ds: Dataset, out_dir) -> Path:
    """Write ``g_000000.el ...`` plus ``manifest.json`` into *out_dir*."""
    out_dir = Path(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for i, g in enumerate(ds.graphs):
        name = f"g_{i:06d}.el"
        write_graph(g, out_dir / name)
        entry = {"path": name}
        if ds.labels is not None:
            entry["label"] = ds.labels[i].value
        if ds.source_tags[i]:
            entry["tag"] = ds.source_tags[i]
        entries.append(entry)
    manifest = out_dir / "manifest.json"
    manifest.write_text(json.dumps({"graphs": entries}, indent=2) + "\n")
    return manifest
