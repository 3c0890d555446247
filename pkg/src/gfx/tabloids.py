"""Tabloids: graphs of small atomic types glued along shared constant names.

A tabloid node v carries a constant set K_v and an atomic type over K_v.  Tree
tabloids decode into structures whose elements are classes [v, c] of
node/constant pairs, identified along paths on which c survives.  A finite
structure gives back a (cyclic) tabloid whose nodes are injections of its
guarded sets into a pool of 2n constants, and labelling those nodes with
formula truth data yields the letters read by compiled automata.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations, product
from typing import Hashable, Mapping

from .graphs import LabelledGraph, LazyLabels
from .logic import (
    Diagnostic, Fixpoint, Formula, Neg, RelAtom, Signature, ValidationReport,
    free_fixvars, free_vars, nnf, parse_formula, rename_fixvars_apart, subformulas,
    to_text, walk, width,
)
from .structures import AtomicType, Evaluator, Structure, atomic_type, guarded_sets


class TabloidError(ValueError):
    pass


def constant_pool(n: int) -> tuple[str, ...]:
    return tuple(f"k{i}" for i in range(1, 2 * n + 1))


@dataclass(frozen=True, eq=False)
class Tabloid:
    nodes: tuple
    edges: frozenset  # of 2-element frozensets
    constants: Mapping[Hashable, frozenset]
    types: Mapping[Hashable, AtomicType]
    pool: tuple = ()
    injections: Mapping[Hashable, Mapping[str, str]] | None = None  # element -> constant

    def __post_init__(self):
        members = set(self.nodes)
        adj: dict = {v: [] for v in self.nodes}
        for e in self.edges:
            if len(e) != 2:
                raise TabloidError("tabloid edges join two distinct nodes")
            a, b = tuple(e)
            if a not in members or b not in members:
                raise TabloidError(f"edge {a!r}-{b!r} references a missing node")
            adj[a].append(b)
            adj[b].append(a)
        object.__setattr__(self, "_adj", {v: tuple(ws) for v, ws in adj.items()})

    def neighbours(self, v) -> tuple:
        return self._adj[v]

    def as_graph(self, start=None) -> LabelledGraph:
        """Underlying graph labelled by (constants, named facts)."""
        labels = {v: (tuple(sorted(self.constants[v])), tuple(sorted(self.types[v].named_facts())))
                  for v in self.nodes}
        return LabelledGraph(self.nodes, self.edges, labels, start)

    def to_text(self) -> str:
        ids = {v: _ident(v) for v in self.nodes}
        lines = [f"const POOL {' '.join(self.pool)}"] if self.pool else []
        for v in self.nodes:
            lines.append(f"node {ids[v]} {','.join(sorted(self.constants[v])) or '-'}")
            for rel, args in sorted(self.types[v].named_facts()):
                lines.append(f"fact {ids[v]} {rel} {' '.join(args)}")
        for e in sorted(tuple(sorted(ids[x] for x in e)) for e in self.edges):
            lines.append(f"edge {e[0]} {e[1]}")
        root = getattr(self, "root", None)
        if root is not None:
            lines.append(f"root {ids[root]}")
        return "\n".join(lines) + "\n"


def _ident(v) -> str:
    if isinstance(v, tuple):
        return "/".join(map(_ident, v)) or "@"
    return str(v).replace(" ", "_")


@dataclass(frozen=True, eq=False)
class TreeTabloid(Tabloid):
    root: Hashable = None

    def __post_init__(self):
        super().__post_init__()
        if self.nodes:
            if self.root not in set(self.nodes):
                raise TabloidError("tree tabloid needs a root among its nodes")
            if len(self.edges) != len(self.nodes) - 1 or len(self._reach(self.root)) != len(self.nodes):
                raise TabloidError("underlying graph is not a tree")

    def _reach(self, v) -> set:
        seen, todo = {v}, [v]
        while todo:
            u = todo.pop()
            for w in self._adj[u]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return seen

    def path(self, u, v) -> list:
        """The unique path from u to v."""
        parent = {u: None}
        todo = [u]
        while todo:
            x = todo.pop()
            for w in self._adj[x]:
                if w not in parent:
                    parent[w] = x
                    todo.append(w)
        out = [v]
        while out[-1] != u:
            out.append(parent[out[-1]])
        return out[::-1]


def make_tabloid(nodes: Mapping, edges=(), pool=(), root=None) -> Tabloid:
    """``nodes`` maps node -> (constants, named facts)."""
    constants = {v: frozenset(c) for v, (c, _) in nodes.items()}
    types = {v: AtomicType.from_named(tuple(sorted(c)), facts) for v, (c, facts) in nodes.items()}
    edge_set = frozenset(frozenset(e) for e in edges)
    if root is not None:
        return TreeTabloid(tuple(nodes), edge_set, constants, types, tuple(pool), None, root)
    return Tabloid(tuple(nodes), edge_set, constants, types, tuple(pool))


def as_tree(t: Tabloid, root) -> TreeTabloid:
    return TreeTabloid(t.nodes, t.edges, t.constants, t.types, t.pool, t.injections, root)


def parse_tabloid(text: str) -> Tabloid:
    pool: tuple = ()
    consts: dict[str, frozenset] = {}
    facts: dict[str, list] = {}
    edges, root = [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        kw = parts[0]
        if kw == "const" and len(parts) >= 2 and parts[1] == "POOL":
            pool = tuple(parts[2:])
        elif kw == "node" and len(parts) == 3:
            if parts[1] in consts:
                raise TabloidError(f"line {lineno}: node {parts[1]} declared twice")
            cs = frozenset() if parts[2] == "-" else frozenset(parts[2].split(","))
            if pool and not cs <= set(pool):
                raise TabloidError(f"line {lineno}: constants outside the pool")
            consts[parts[1]] = cs
            facts[parts[1]] = []
        elif kw == "fact" and len(parts) >= 4:
            node, rel, args = parts[1], parts[2], tuple(parts[3:])
            if node not in consts:
                raise TabloidError(f"line {lineno}: unknown node {node}")
            if not set(args) <= consts[node]:
                raise TabloidError(f"line {lineno}: fact uses constants outside node {node}")
            facts[node].append((rel, args))
        elif kw == "edge" and len(parts) == 3:
            if parts[1] == parts[2]:
                raise TabloidError(f"line {lineno}: self-loop on {parts[1]}")
            edges.append((parts[1], parts[2]))
        elif kw == "root" and len(parts) == 2:
            root = parts[1]
        else:
            raise TabloidError(f"line {lineno}: cannot parse {raw.strip()!r}")
    for a, b in edges:
        if a not in consts or b not in consts:
            raise TabloidError(f"edge {a}-{b} references an undeclared node")
    return make_tabloid({v: (consts[v], facts[v]) for v in consts}, edges, pool, root)


def validate_tabloid(t: Tabloid) -> ValidationReport:
    diags = []
    for v in t.nodes:
        if set(t.types[v].carrier) != set(t.constants[v]):
            diags.append(Diagnostic("carrier", (), f"type of {v!r} is not over its constants"))
    for e in sorted(t.edges, key=lambda e: sorted(map(repr, e))):
        v, w = sorted(e, key=repr)
        shared = t.constants[v] & t.constants[w]
        if t.types[v].restrict(shared) != t.types[w].restrict(shared):
            diags.append(Diagnostic("overlap", (), f"{v!r} and {w!r} disagree on {sorted(shared)}"))
    return ValidationReport(tuple(diags))


# -- unravelling -------------------------------------------------------------

def _walks(neighbours, v, depth: int) -> list[tuple]:
    out = [(v,)]
    frontier = [(v,)]
    for _ in range(depth):
        nxt = []
        for w in frontier:
            for u in neighbours(w[-1]):
                nxt.append(w + (u,))
        out.extend(nxt)
        frontier = nxt
    return out


def unravel(t: Tabloid, v, depth: int) -> tuple[TreeTabloid, dict]:
    """Walks of length <= depth from v (backtracking included) with the
    terminal-node projection."""
    if v not in set(t.nodes):
        raise TabloidError(f"{v!r} is not a node")
    walks = _walks(t.neighbours, v, depth)
    pi = {w: w[-1] for w in walks}
    edges = frozenset(frozenset((w[:-1], w)) for w in walks if len(w) > 1)
    tree = TreeTabloid(tuple(walks), edges, {w: t.constants[pi[w]] for w in walks},
                       {w: t.types[pi[w]] for w in walks}, t.pool,
                       {w: t.injections[pi[w]] for w in walks} if t.injections else None,
                       (v,))
    return tree, pi


def unravel_graph(g: LabelledGraph, v, depth: int) -> tuple[LabelledGraph, dict]:
    if v not in set(g.nodes):
        raise TabloidError(f"{v!r} is not a node")
    walks = _walks(g.neighbours, v, depth)
    pi = {w: w[-1] for w in walks}
    edges = [(w[:-1], w) for w in walks if len(w) > 1]
    labels = LazyLabels(walks, lambda w: g.labels[w[-1]])
    return LabelledGraph(tuple(walks), frozenset(frozenset(e) for e in edges), labels, (v,)), pi


# -- decoding tree tabloids --------------------------------------------------

def element_classes(t: TreeTabloid) -> dict:
    """(node, constant) -> representative pair, by union-find along edges."""
    parent: dict = {}

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    order = {v: i for i, v in enumerate(t.nodes)}
    for v in t.nodes:
        for c in sorted(t.constants[v]):
            parent[(v, c)] = (v, c)
    for e in t.edges:
        a, b = sorted(e, key=order.__getitem__)
        for c in t.constants[a] & t.constants[b]:
            ra, rb = find((a, c)), find((b, c))
            if ra != rb:
                # keep the representative that appears first
                if order[ra[0]] <= order[rb[0]]:
                    parent[rb] = ra
                else:
                    parent[ra] = rb
    return {x: find(x) for x in parent}


def decode(t: TreeTabloid, sig: Signature | None = None) -> tuple[Structure, dict]:
    """The structure 𝔄(T) of a finite tree tabloid and the map (v, c) -> element."""
    if not isinstance(t, TreeTabloid):
        raise TabloidError("decoding needs a tree tabloid")
    report = validate_tabloid(t)
    if not report.ok:
        raise TabloidError(f"invalid tabloid: {report}")
    classes = element_classes(t)
    names: dict = {}
    for v in t.nodes:
        for c in sorted(t.constants[v]):
            rep = classes[(v, c)]
            if rep not in names:
                names[rep] = f"e{len(names) + 1}"
    element = {x: names[rep] for x, rep in classes.items()}
    rels: dict[str, int] = dict(sig.relations) if sig else {}
    tables: dict[str, set] = {rel: set() for rel in rels}
    for v in t.nodes:
        for rel, args in t.types[v].named_facts():
            rels.setdefault(rel, len(args))
            tables.setdefault(rel, set()).add(tuple(element[(v, c)] for c in args))
    universe = tuple(dict.fromkeys(names.values()))
    return Structure(Signature(rels), universe, tables), element


# -- from a finite model -----------------------------------------------------

def _node_name(chi: Mapping[str, str]) -> str:
    return ",".join(f"{a}:{c}" for a, c in sorted(chi.items()))


def tabloid_of_model(a: Structure, n: int) -> Tabloid:
    """Vertices are injections of guarded sets into 2n constants; adjacent when
    their union is an injective function."""
    if n < 1:
        raise TabloidError("width must be at least 1")
    if not a.facts():
        raise TabloidError("structure has no atoms, so no guarded sets")
    too_wide = [f for f in a.facts() if len(set(f[1])) > n]
    if too_wide:
        raise TabloidError(f"atom {too_wide[0]} has more than {n} distinct components; "
                           "normalize the width first")
    pool = constant_pool(n)
    chis, constants, types = {}, {}, {}
    for gset in sorted(guarded_sets(a), key=lambda s: (len(s), sorted(s))):
        dom = tuple(sorted(gset))
        tp = atomic_type(a, dom)
        for img in permutations(pool, len(dom)):
            chi = dict(zip(dom, img))
            name = _node_name(chi)
            chis[name] = chi
            constants[name] = frozenset(img)
            types[name] = AtomicType.from_named(
                tuple(sorted(img)), [(rel, tuple(chi[x] for x in args))
                                     for rel, args in tp.named_facts()])
    names = list(chis)
    masks = _injection_masks(a.universe, pool, [chis[v] for v in names])
    edges = set()
    for i, (pu, eu, cu) in enumerate(masks):
        u = names[i]
        for j in range(i + 1, len(names)):
            pw, ew, cw = masks[j]
            # chi | chi' is an injective function iff it has as many pairs
            # as elements and as constants
            pairs = (pu | pw).bit_count()
            if pairs == (eu | ew).bit_count() == (cu | cw).bit_count():
                edges.add(frozenset((u, names[j])))
    return Tabloid(tuple(names), frozenset(edges), constants, types, pool, chis)


def _injection_masks(universe, pool, chis) -> list[tuple[int, int, int]]:
    elem = {x: i for i, x in enumerate(universe)}
    const = {k: i for i, k in enumerate(pool)}
    out = []
    for chi in chis:
        p = e = c = 0
        for x, k in chi.items():
            p |= 1 << (elem[x] * len(pool) + const[k])
            e |= 1 << elem[x]
            c |= 1 << const[k]
        out.append((p, e, c))
    return out


def _joinable(c1: Mapping, c2: Mapping) -> bool:
    union = dict(c1)
    for x, k in c2.items():
        if union.setdefault(x, k) != k:
            return False
    return len(set(union.values())) == len(union)


# -- formula catalogues and phi-types ----------------------------------------

Eta = tuple  # sorted tuple of (variable, constant)


def eta_of(mapping: Mapping[str, str]) -> Eta:
    return tuple(sorted(mapping.items()))


class Catalog:
    """Indexed subformulas and literals of a sentence in normal form.

    The formula is put in negation normal form and its fixpoint variables are
    renamed apart, so one catalogue index names one subformula unambiguously.
    """

    def __init__(self, f: Formula):
        self.source = f
        self.formula = rename_fixvars_apart(nnf(f))
        self.width = max(1, width(self.formula))
        self.pool = constant_pool(self.width)
        self.entries: list[Formula] = subformulas(self.formula)
        self.index = {e: i for i, e in enumerate(self.entries)}
        self.free = [tuple(sorted(free_vars(e))) for e in self.entries]
        self.closed = [not free_fixvars(e) for e in self.entries]
        self.root = self.index[self.formula]
        self.literal: dict[int, tuple[str, tuple[str, ...], bool]] = {}
        for i, e in enumerate(self.entries):
            if isinstance(e, RelAtom):
                self.literal[i] = (e.rel, e.args, True)
            elif isinstance(e, Neg) and isinstance(e.arg, RelAtom):
                self.literal[i] = (e.arg.rel, e.arg.args, False)
        self.binders = {g.var: g for g in walk(self.formula) if isinstance(g, Fixpoint)}
        # fact shape -> one positive literal entry able to express it
        self._fact_literal: dict = {}
        for i, (rel, args, positive) in self.literal.items():
            if positive:
                self._fact_literal.setdefault((rel, _shape(args)), (i, args))

    def __len__(self):
        return len(self.entries)

    def text(self) -> str:
        return to_text(self.formula)

    def etas(self, i: int, constants) -> list[Eta]:
        consts = sorted(constants)
        return [tuple(zip(self.free[i], img)) for img in product(consts, repeat=len(self.free[i]))]

    def pair_for_fact(self, rel: str, consts: tuple) -> tuple[int, Eta] | None:
        """A positive literal pair whose truth is the fact rel(consts)."""
        hit = self._fact_literal.get((rel, _shape(consts)))
        if hit is None:
            return None
        i, args = hit
        return i, eta_of(dict(zip(args, consts)))

    def describe(self, i: int) -> str:
        return to_text(self.entries[i])

    def render_pair(self, pair) -> str:
        i, eta = pair
        return f"{i}:" + ",".join(f"{x}={c}" for x, c in eta)

    def parse_pair(self, token: str):
        head, _, rest = token.partition(":")
        if not head.isdigit() or int(head) >= len(self.entries):
            raise TabloidError(f"bad phi-type item {token!r}")
        i = int(head)
        eta = []
        for item in filter(None, rest.split(",")):
            x, _, c = item.partition("=")
            eta.append((x, c))
        eta = tuple(sorted(eta))
        if tuple(x for x, _ in eta) != self.free[i]:
            raise TabloidError(f"item {token!r} does not assign exactly the free variables")
        return i, eta

    def letter(self, pairs) -> "PhiType":
        return PhiType(frozenset(pairs), self)

    def parse_letter(self, text: str) -> "PhiType":
        return self.letter(self.parse_pair(tok) for tok in text.split())

    def header_lines(self) -> list[str]:
        lines = [f"formula {self.text()}", f"pool {' '.join(self.pool)}"]
        lines += [f"sub {i} {to_text(e)}" for i, e in enumerate(self.entries)]
        return lines

    @classmethod
    def from_header(cls, header: Mapping[str, list[str]]) -> "Catalog":
        if "formula" not in header:
            raise TabloidError("missing 'formula' header line")
        return cls(parse_formula(header["formula"][0]))


def _shape(args) -> tuple:
    first: dict = {}
    return tuple(first.setdefault(a, len(first)) for a in args)


@dataclass(frozen=True)
class PhiType:
    """A letter: the set of (catalogue index, valuation) pairs true at a node."""
    pairs: frozenset
    catalog: Catalog = field(compare=False, hash=False, repr=False, default=None)

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    @cached_property
    def carrier(self) -> frozenset:
        return frozenset(c for _, eta in self.pairs for _, c in eta)

    @cached_property
    def facts(self) -> frozenset:
        lit = self.catalog.literal
        out = set()
        for i, eta in self.pairs:
            info = lit.get(i)
            if info is not None and info[2]:
                env = dict(eta)
                out.add((info[0], tuple(env[x] for x in info[1])))
        return frozenset(out)

    def atomic_type(self) -> AtomicType:
        return AtomicType.from_named(tuple(sorted(self.carrier)), self.facts)

    def render(self) -> str:
        cat = self.catalog
        return " ".join(cat.render_pair(p) for p in sorted(self.pairs))

    def __str__(self):
        return "{" + self.render() + "}"


def phi_type(catalog: Catalog, evaluator: Evaluator, chi: Mapping[str, str], memo=None) -> PhiType:
    """Label of one vertex chi: pairs (psi, eta) with eta into rng(chi) and
    psi true under chi^-1 . eta."""
    inverse = {c: x for x, c in chi.items()}
    consts = sorted(inverse)
    memo = {} if memo is None else memo
    pairs = []
    for i, entry in enumerate(catalog.entries):
        if not catalog.closed[i]:
            continue
        names = catalog.free[i]
        for img in product(consts, repeat=len(names)):
            val = tuple(inverse[c] for c in img)
            key = (i, val)
            truth = memo.get(key)
            if truth is None:
                truth = memo[key] = evaluator.truth(entry, dict(zip(names, val)))
            if truth:
                pairs.append((i, tuple(zip(names, img))))
    return PhiType(frozenset(pairs), catalog)


def phi_label(a: Structure, f: Formula | Catalog, g: Tabloid, lazy: bool = False) -> LabelledGraph:
    """G_phi: the tabloid graph with each vertex labelled by its phi-type in ``a``."""
    catalog = f if isinstance(f, Catalog) else Catalog(f)
    if g.injections is None:
        raise TabloidError("phi-labelling needs a tabloid built from a model")
    evaluator = Evaluator(a)
    memo: dict = {}

    def label(v):
        return phi_type(catalog, evaluator, g.injections[v], memo)

    labels = LazyLabels(g.nodes, label)
    if not lazy:
        for v in g.nodes:
            labels[v]
    return LabelledGraph(g.nodes, g.edges, labels)


def model_graph(a: Structure, f: Formula | Catalog, lazy: bool = False) -> tuple[LabelledGraph, Catalog]:
    """Normalise ``a`` to the formula's width, build its tabloid and phi-label it."""
    from .structures import normalize_width
    catalog = f if isinstance(f, Catalog) else Catalog(f)
    a = normalize_width(a, catalog.width)
    return phi_label(a, catalog, tabloid_of_model(a, catalog.width), lazy=lazy), catalog
