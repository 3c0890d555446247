"""Node-labelled simple undirected graphs: the inputs of alternating automata."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from itertools import combinations, permutations, product
from typing import Callable, Hashable, Iterator, Mapping


class GraphError(ValueError):
    pass


class LazyLabels(Mapping):
    """Labels computed on first access; lets huge letters be built only for visited nodes."""

    def __init__(self, nodes, compute: Callable[[Hashable], object]):
        self._nodes = list(nodes)
        self._members = set(self._nodes)
        self._compute = compute
        self._cache: dict = {}

    def __getitem__(self, node):
        if node not in self._members:
            raise KeyError(node)
        if node not in self._cache:
            self._cache[node] = self._compute(node)
        return self._cache[node]

    def __iter__(self):
        return iter(self._nodes)

    def __len__(self):
        return len(self._nodes)

    def computed(self) -> int:
        return len(self._cache)


@dataclass(frozen=True, eq=False)
class LabelledGraph:
    nodes: tuple
    edges: frozenset  # of 2-element frozensets
    labels: Mapping
    start: Hashable = None

    def __post_init__(self):
        nodes = set(self.nodes)
        if len(nodes) != len(self.nodes):
            raise GraphError("duplicate node")
        adj: dict = {v: [] for v in self.nodes}
        for e in self.edges:
            if len(e) != 2:
                raise GraphError(f"self-loops are not allowed: {set(e)}")
            u, w = tuple(e)
            if u not in nodes or w not in nodes:
                raise GraphError(f"edge {u!r}-{w!r} references a missing node")
            adj[u].append(w)
            adj[w].append(u)
        if self.start is not None and self.start not in nodes:
            raise GraphError(f"start node {self.start!r} does not exist")
        order = {v: i for i, v in enumerate(self.nodes)}
        object.__setattr__(self, "_adj", {v: tuple(sorted(ws, key=order.__getitem__))
                                          for v, ws in adj.items()})

    @classmethod
    def build(cls, labels: Mapping, edges=(), start=None) -> "LabelledGraph":
        return cls(tuple(labels), frozenset(frozenset(e) for e in edges), labels, start)

    def neighbours(self, v) -> tuple:
        return self._adj[v]

    def edge_pairs(self) -> list[tuple]:
        order = {v: i for i, v in enumerate(self.nodes)}
        return sorted((tuple(sorted(e, key=order.__getitem__)) for e in self.edges),
                      key=lambda p: (order[p[0]], order[p[1]]))

    def component(self, v) -> set:
        seen = {v}
        todo = [v]
        while todo:
            u = todo.pop()
            for w in self._adj[u]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return seen

    def is_connected(self) -> bool:
        return not self.nodes or len(self.component(self.nodes[0])) == len(self.nodes)

    def relabel(self, fn) -> "LabelledGraph":
        return LabelledGraph(self.nodes, self.edges, {v: fn(self.labels[v]) for v in self.nodes},
                             self.start)

    def disjoint_union(self, other: "LabelledGraph") -> tuple["LabelledGraph", dict, dict]:
        left = {v: (0, v) for v in self.nodes}
        right = {v: (1, v) for v in other.nodes}
        labels = {left[v]: self.labels[v] for v in self.nodes}
        labels.update({right[v]: other.labels[v] for v in other.nodes})
        edges = [(left[a], left[b]) for a, b in self.edge_pairs()]
        edges += [(right[a], right[b]) for a, b in other.edge_pairs()]
        return LabelledGraph.build(labels, edges), left, right


# -- text format -------------------------------------------------------------

def label_hash(rendering: str) -> str:
    return "L" + hashlib.sha1(rendering.encode()).hexdigest()[:10]


def graph_to_text(g: LabelledGraph, render: Callable[[object], str] | None = None,
                  header: list[str] | None = None) -> str:
    """``node ID LABEL`` / ``edge ID ID`` / ``start ID``.  With ``render``, labels are
    written as hashes and a ``label HASH RENDERING`` dictionary is appended."""
    ids = {v: _node_id(v) for v in g.nodes}
    if len(set(ids.values())) != len(ids):
        ids = {v: f"n{i}" for i, v in enumerate(g.nodes)}
    lines = list(header or [])
    dictionary: dict[str, str] = {}
    for v in g.nodes:
        if render is None:
            lines.append(f"node {ids[v]} {g.labels[v]}")
        else:
            text = render(g.labels[v])
            h = label_hash(text)
            dictionary[h] = text
            lines.append(f"node {ids[v]} {h}")
    lines += [f"edge {ids[a]} {ids[b]}" for a, b in g.edge_pairs()]
    if g.start is not None:
        lines.append(f"start {ids[g.start]}")
    lines += [f"label {h} {text}" for h, text in dictionary.items()]
    return "\n".join(lines) + "\n"


def _node_id(v) -> str:
    text = str(v) if not isinstance(v, tuple) else ".".join(map(str, v))
    return "".join(ch if not ch.isspace() else "_" for ch in text) or "_"


@dataclass
class GraphFile:
    graph: LabelledGraph
    dictionary: dict[str, str]
    header: dict[str, list[str]]


def parse_graph(text: str, decode: Callable[[str], object] | None = None) -> GraphFile:
    """Parse the labelled-graph format.  Labels listed in the ``label`` dictionary are
    replaced by ``decode(rendering)``; other labels stay plain letter names."""
    raw_labels: dict[str, str] = {}
    edges, start, dictionary = [], None, {}
    header: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kw, _, rest = line.partition(" ")
        parts = rest.split()
        if kw == "node" and len(parts) == 2:
            if parts[0] in raw_labels:
                raise GraphError(f"line {lineno}: node {parts[0]} declared twice")
            raw_labels[parts[0]] = parts[1]
        elif kw == "edge" and len(parts) == 2:
            edges.append((lineno, parts[0], parts[1]))
        elif kw == "start" and len(parts) == 1:
            start = parts[0]
        elif kw == "label" and len(parts) >= 1:
            dictionary[parts[0]] = rest.strip()[len(parts[0]):].strip()
        elif kw in ("sub", "pool", "width", "formula"):
            header.setdefault(kw, []).append(rest.strip())
        else:
            raise GraphError(f"line {lineno}: cannot parse {line!r}")
    pairs = []
    for lineno, a, b in edges:
        for v in (a, b):
            if v not in raw_labels:
                raise GraphError(f"line {lineno}: unknown node {v}")
        if a == b:
            raise GraphError(f"line {lineno}: self-loop on {a}")
        pairs.append((a, b))
    if start is not None and start not in raw_labels:
        raise GraphError(f"start node {start} is not declared")
    decoded = {}
    cache: dict[str, object] = {}
    for v, lab in raw_labels.items():
        if lab in dictionary:
            if lab not in cache:
                cache[lab] = decode(dictionary[lab]) if decode else dictionary[lab]
            decoded[v] = cache[lab]
        else:
            decoded[v] = lab
    return GraphFile(LabelledGraph.build(decoded, pairs, start), dictionary, header)


# -- enumeration up to isomorphism ------------------------------------------

def canonical_form(g: LabelledGraph, root=None, key=repr):
    """Exhaustive canonical form (label- and root-aware); for small graphs."""
    n = len(g.nodes)
    best = None
    for perm in permutations(range(n)):
        pos = {v: perm[i] for i, v in enumerate(g.nodes)}
        labels = [None] * n
        for v in g.nodes:
            labels[pos[v]] = key(g.labels[v])
        edges = sorted(tuple(sorted((pos[a], pos[b]))) for a, b in g.edge_pairs())
        cand = (pos[root] if root is not None else -1, tuple(labels), tuple(edges))
        if best is None or cand < best:
            best = cand
    return (n, best)


def enumerate_graphs(max_nodes: int, letters, connected: bool = True) -> Iterator[LabelledGraph]:
    """Labelled simple graphs on 1..max_nodes nodes, one per isomorphism class."""
    letters = list(letters)
    for n in range(1, max_nodes + 1):
        nodes = tuple(range(n))
        slots = list(combinations(nodes, 2))
        seen = set()
        for mask in range(1 << len(slots)):
            edges = [slots[i] for i in range(len(slots)) if mask >> i & 1]
            base = LabelledGraph.build({v: None for v in nodes}, edges)
            if connected and not base.is_connected():
                continue
            for labs in product(letters, repeat=n):
                g = LabelledGraph.build(dict(zip(nodes, labs)), edges)
                cf = canonical_form(g)
                if cf in seen:
                    continue
                seen.add(cf)
                yield g


def rooted_representatives(g: LabelledGraph) -> list:
    """One start node per orbit of the label-preserving automorphism group."""
    seen, reps = set(), []
    for v in g.nodes:
        cf = canonical_form(g, root=v)
        if cf not in seen:
            seen.add(cf)
            reps.append(v)
    return reps
