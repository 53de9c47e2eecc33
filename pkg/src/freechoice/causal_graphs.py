"""Causal DAGs, their local Markov constraints, the scenario builders for the
Bell / network structures, and the variable-merging maps between them.

Canonical node names
--------------------
bell()                       Lambda*; X, Y, A, B
bell_md()                    Ux*, Uy*, Lambda*; X, Y, A, B
bell_md_aux(outcomes=True)   bell_md() plus R (children of Ux, Uy);
                             ``outcomes=False`` drops A and B
multipartite_bell_md_aux(n)  U1..Un*, Lambda*; X1..Xn, A1..An, R
triangle()                   Ux*, Uy*, Lambda*; alpha, beta, R
twos_and_n(n)                U1..Un*, Lambda*; alpha1..alphan, R
cyclic(n)                    U1*, U2*, Lambda1..Lambda{n-2}*; alpha1..alpha{n-1}, R
nlocality_chain(n)           Lambda1..Lambdan*; X1, X{n+1}, A1..A{n+1}
nlocality_md_aux(n)          U1*, U2*, Lambda1..Lambdan*; X1, X{n+1}, A1..A{n+1}, R

(* = latent)
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from .errors import CapacityError, UnknownVariableError
from .probtab import Distribution, VariableSpec

MAX_SCENARIO_N = 8


@dataclass(frozen=True)
class Dag:
    nodes: tuple[tuple[str, bool], ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        nodes = tuple((str(n), bool(lat)) for n, lat in self.nodes)
        edges = tuple((str(a), str(b)) for a, b in self.edges)
        names = [n for n, _ in nodes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate node names: {names}")
        known = set(names)
        for a, b in edges:
            if a not in known or b not in known:
                raise UnknownVariableError(f"edge {a}->{b} references an unknown node")
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edges")
        g = nx.DiGraph()
        g.add_nodes_from(names)
        g.add_edges_from(edges)
        if not nx.is_directed_acyclic_graph(g):
            raise ValueError("graph has a directed cycle")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.nodes)

    def is_latent(self, name: str) -> bool:
        for n, lat in self.nodes:
            if n == name:
                return lat
        raise UnknownVariableError(f"unknown node {name!r}")

    @property
    def observed(self) -> tuple[str, ...]:
        return tuple(n for n, lat in self.nodes if not lat)

    @property
    def latent(self) -> tuple[str, ...]:
        return tuple(n for n, lat in self.nodes if lat)

    def parents(self, name: str) -> tuple[str, ...]:
        ps = {a for a, b in self.edges if b == name}
        return tuple(n for n in self.names if n in ps)

    def children(self, name: str) -> tuple[str, ...]:
        cs = {b for a, b in self.edges if a == name}
        return tuple(n for n in self.names if n in cs)

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        for n, lat in self.nodes:
            g.add_node(n, latent=lat)
        g.add_edges_from(self.edges)
        return g

    def descendants(self, name: str) -> set[str]:
        return nx.descendants(self.graph(), name)

    def topological_order(self) -> list[str]:
        return list(nx.lexicographical_topological_sort(self.graph(), key=self.names.index))

    def to_dict(self) -> dict:
        return {
            "nodes": [{"name": n, "latent": lat} for n, lat in self.nodes],
            "edges": [[a, b] for a, b in self.edges],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Dag":
        return cls(
            tuple((n["name"], bool(n.get("latent", False))) for n in data["nodes"]),
            tuple((a, b) for a, b in data["edges"]),
        )

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "Dag":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class CiStatement:
    """I(a : b | c) = 0, node tuples in DAG order."""

    a: tuple[str, ...]
    b: tuple[str, ...]
    c: tuple[str, ...]

    def __post_init__(self):
        if not self.a or not self.b:
            raise ValueError("CI statement needs nonempty A and B")
        sa, sb, sc = set(self.a), set(self.b), set(self.c)
        if sa & sb or sa & sc or sb & sc:
            raise ValueError("CI statement sets must be disjoint")

    def __str__(self):
        s = f"I({','.join(self.a)} : {','.join(self.b)}"
        return s + (f" | {','.join(self.c)})" if self.c else ")")


def local_markov_constraints(dag: Dag) -> list[CiStatement]:
    """One grouped statement I(v : ND(v) minus Pa(v) | Pa(v)) = 0 per node,
    in node order, skipping nodes whose nondescendants are all parents."""
    g = dag.graph()
    out = []
    for v in dag.names:
        pa = set(dag.parents(v))
        desc = nx.descendants(g, v)
        rest = [n for n in dag.names if n != v and n not in desc and n not in pa]
        if rest:
            out.append(CiStatement((v,), tuple(rest), tuple(n for n in dag.names if n in pa)))
    return out


def latent_roots(dag: Dag) -> tuple[str, ...]:
    return tuple(n for n, lat in dag.nodes if lat and not dag.parents(n))


def source_independence_constraint(dag: Dag, space=None):
    """H(roots) - sum H(root) = 0 over the latent roots, as a :class:`LinForm`.

    ``space`` defaults to the entropy coordinates over all DAG nodes.
    """
    from .forms import EntropyCoordinateSpace, LinForm

    roots = latent_roots(dag)
    if len(roots) < 2:
        raise ValueError(f"need at least two latent roots, found {list(roots)}")
    if space is None:
        space = EntropyCoordinateSpace(dag.names)
    terms = [(roots, 1)] + [((r,), -1) for r in roots]
    return LinForm.build(space, terms).canonical(equality=True)


# -- scenario builders ---------------------------------------------------------


def _check_n(n: int, lo: int) -> None:
    if not isinstance(n, int) or n < lo or n > MAX_SCENARIO_N:
        raise CapacityError(f"n must be an integer in [{lo}, {MAX_SCENARIO_N}], got {n!r}")


def bell() -> Dag:
    return Dag(
        (("Lambda", True), ("X", False), ("Y", False), ("A", False), ("B", False)),
        (("Lambda", "A"), ("Lambda", "B"), ("X", "A"), ("Y", "B")),
    )


def _md_pair_edges(u, x, a, lam="Lambda"):
    edges = [(u, x), (lam, x)]
    if a is not None:
        edges += [(u, a), (lam, a), (x, a)]
    return edges


def bell_md() -> Dag:
    nodes = (("Ux", True), ("Uy", True), ("Lambda", True),
             ("X", False), ("Y", False), ("A", False), ("B", False))
    edges = _md_pair_edges("Ux", "X", "A") + _md_pair_edges("Uy", "Y", "B")
    return Dag(nodes, tuple(edges))


def bell_md_aux(outcomes: bool = True) -> Dag:
    """Bell scenario with measurement dependence and auxiliary R.

    With ``outcomes=False`` the outcome nodes A, B are omitted; this is the
    six-variable structure {X, Y, R, Ux, Uy, Lambda} used for the entropic
    upper bounds.
    """
    nodes = [("X", False), ("Y", False), ("R", False), ("Ux", True), ("Uy", True), ("Lambda", True)]
    if outcomes:
        nodes[2:2] = [("A", False), ("B", False)]
    edges = _md_pair_edges("Ux", "X", "A" if outcomes else None)
    edges += _md_pair_edges("Uy", "Y", "B" if outcomes else None)
    edges += [("Ux", "R"), ("Uy", "R")]
    return Dag(tuple(nodes), tuple(edges))


def multipartite_bell_md_aux(n: int, outcomes: bool = True) -> Dag:
    _check_n(n, 1)
    nodes = [(f"X{i}", False) for i in range(1, n + 1)]
    if outcomes:
        nodes += [(f"A{i}", False) for i in range(1, n + 1)]
    nodes += [("R", False)] + [(f"U{i}", True) for i in range(1, n + 1)] + [("Lambda", True)]
    edges = []
    for i in range(1, n + 1):
        edges += _md_pair_edges(f"U{i}", f"X{i}", f"A{i}" if outcomes else None)
    edges += [(f"U{i}", "R") for i in range(1, n + 1)]
    return Dag(tuple(nodes), tuple(edges))


def triangle() -> Dag:
    return Dag(
        (("alpha", False), ("beta", False), ("R", False), ("Ux", True), ("Uy", True), ("Lambda", True)),
        (("Ux", "alpha"), ("Lambda", "alpha"), ("Uy", "beta"), ("Lambda", "beta"), ("Ux", "R"), ("Uy", "R")),
    )


def twos_and_n(n: int) -> Dag:
    """One n-way source Lambda over alpha1..alphan; pairwise sources Ui link alphai to R."""
    _check_n(n, 2)
    nodes = [(f"alpha{i}", False) for i in range(1, n + 1)] + [("R", False)]
    nodes += [(f"U{i}", True) for i in range(1, n + 1)] + [("Lambda", True)]
    edges = []
    for i in range(1, n + 1):
        edges += [(f"U{i}", f"alpha{i}"), ("Lambda", f"alpha{i}"), (f"U{i}", "R")]
    return Dag(tuple(nodes), tuple(edges))


def cyclic(n: int) -> Dag:
    """Ring of n observed nodes alpha1..alpha{n-1}, R with one source per edge."""
    _check_n(n, 3)
    m = n - 1
    nodes = [(f"alpha{i}", False) for i in range(1, m + 1)] + [("R", False)]
    nodes += [("U1", True), ("U2", True)] + [(f"Lambda{i}", True) for i in range(1, n - 1)]
    edges = [("U1", "alpha1"), ("U1", "R"), ("U2", f"alpha{m}"), ("U2", "R")]
    for i in range(1, n - 1):
        edges += [(f"Lambda{i}", f"alpha{i}"), (f"Lambda{i}", f"alpha{i + 1}")]
    return Dag(tuple(nodes), tuple(edges))


def nlocality_chain(n: int) -> Dag:
    """Linear chain of n independent sources and n+1 parties; only the
    endpoints have inputs (X1, X{n+1})."""
    _check_n(n, 1)
    last = n + 1
    nodes = [("X1", False), (f"X{last}", False)] + [(f"A{i}", False) for i in range(1, last + 1)]
    nodes += [(f"Lambda{i}", True) for i in range(1, n + 1)]
    edges = [("X1", "A1"), (f"X{last}", f"A{last}")]
    for i in range(1, n + 1):
        edges += [(f"Lambda{i}", f"A{i}"), (f"Lambda{i}", f"A{i + 1}")]
    return Dag(tuple(nodes), tuple(edges))


def nlocality_md_aux(n: int) -> Dag:
    """n-locality chain with measurement dependence at the endpoints and an
    auxiliary R fed by the endpoint private sources U1, U2."""
    _check_n(n, 1)
    last = n + 1
    nodes = [("X1", False), (f"X{last}", False)] + [(f"A{i}", False) for i in range(1, last + 1)]
    nodes += [("R", False), ("U1", True), ("U2", True)] + [(f"Lambda{i}", True) for i in range(1, n + 1)]
    edges = [("U1", "X1"), ("Lambda1", "X1"), ("U1", "A1"), ("X1", "A1"),
             ("U2", f"X{last}"), (f"Lambda{n}", f"X{last}"), ("U2", f"A{last}"), (f"X{last}", f"A{last}"),
             ("U1", "R"), ("U2", "R")]
    for i in range(1, n + 1):
        edges += [(f"Lambda{i}", f"A{i}"), (f"Lambda{i}", f"A{i + 1}")]
    return Dag(tuple(nodes), tuple(edges))


SCENARIOS = {
    "bell": bell,
    "bell_md": bell_md,
    "bell_md_aux": bell_md_aux,
    "multipartite_bell_md_aux": multipartite_bell_md_aux,
    "triangle": triangle,
    "twos_and_n": twos_and_n,
    "cyclic": cyclic,
    "nlocality_chain": nlocality_chain,
    "nlocality_md_aux": nlocality_md_aux,
}


def scenario(name: str, *args, **kwargs) -> Dag:
    try:
        builder = SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    return builder(*args, **kwargs)


def isomorphic(d1: Dag, d2: Dag) -> bool:
    """Directed-graph isomorphism respecting the latent flag."""
    return nx.is_isomorphic(
        d1.graph(), d2.graph(), node_match=lambda a, b: a["latent"] == b["latent"]
    )


def merge_nodes(dag: Dag, groups: Sequence[tuple[str, Sequence[str]]]) -> Dag:
    """Collapse each group of observed nodes into one composite node.

    The composite's parents are the members' outside parents; edges inside
    a group vanish. The composite takes the position of its first member.
    """
    rename = {}
    for new, members in groups:
        for m in members:
            if m in rename:
                raise ValueError(f"node {m} appears in more than one group")
            dag.is_latent(m)
            rename[m] = new
    nodes, seen = [], set()
    for n, lat in dag.nodes:
        name = rename.get(n, n)
        if name in seen:
            continue
        seen.add(name)
        nodes.append((name, lat))
    edges = []
    for a, b in dag.edges:
        a2, b2 = rename.get(a, a), rename.get(b, b)
        if a2 != b2 and (a2, b2) not in edges:
            edges.append((a2, b2))
    return Dag(tuple(nodes), tuple(edges))


# -- composite variables on distributions -----------------------------------


def merge_variables(dist: Distribution, groups: Sequence[tuple[str, Sequence[str]]]) -> Distribution:
    """Recode each member group as one variable (mixed radix, first member
    most significant). The composite sits where its first member was; the
    probabilities are permuted, never altered."""
    names = list(dist.names)
    group_of = {}
    for new, members in groups:
        members = list(members)
        if not members:
            raise ValueError(f"group {new!r} is empty")
        for m in members:
            dist.index(m)
            if m in group_of:
                raise ValueError(f"variable {m} appears in more than one group")
            group_of[m] = new
    layout: list[tuple[str, list[str]]] = []
    placed = set()
    for n in names:
        if n in group_of:
            new = group_of[n]
            if new not in placed:
                placed.add(new)
                layout.append((new, [m for g, ms in groups if g == new for m in ms]))
        else:
            layout.append((n, [n]))
    new_names = [new for new, _ in layout]
    if len(set(new_names)) != len(new_names):
        raise ValueError(f"merged names collide: {new_names}")
    order = [dist.index(m) for _, ms in layout for m in ms]
    table = np.transpose(dist.table, order)
    specs = [VariableSpec(new, math.prod(dist.cardinality(m) for m in ms)) for new, ms in layout]
    return Distribution(specs, np.ascontiguousarray(table).reshape(-1))


def split_variable(dist: Distribution, name: str, members: Sequence[VariableSpec | tuple[str, int]]) -> Distribution:
    """Inverse of :func:`merge_variables` for one composite variable."""
    specs = [m if isinstance(m, VariableSpec) else VariableSpec(*m) for m in members]
    i = dist.index(name)
    if math.prod(s.cardinality for s in specs) != dist.variables[i].cardinality:
        raise ValueError(
            f"member cardinalities {[s.cardinality for s in specs]} do not factor {dist.variables[i].cardinality}"
        )
    new_specs = list(dist.variables[:i]) + specs + list(dist.variables[i + 1:])
    return Distribution(new_specs, dist.table.reshape(-1))
