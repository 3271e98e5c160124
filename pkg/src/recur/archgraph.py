"""Compilation of recursion formulas into architecture graphs.

The graph is a labeled DAG with five node kinds:

  input      the free state X[0]
  block      the mapping W[i]; exactly one incoming data edge
  junction   the signed adder forming state X[i]
  tap        re-exposes block i's pre-junction output for reuse downstream
  output     the network output, fed by the last junction

Wiring rules, per additive term of each state's coefficient polynomials:

  c           constant coefficient on X[s]: |c| parallel identity edges
              from the node of X[s] into the junction, signed by c.
  c*W[i]      where i is the state being defined: the block path; block i
              reads the node of X[s] and feeds the junction.
  c*W[k]      with k < i and s == k-1: reuse of block k's existing output
              through tap k (no second set of parameters).
  c*W[k]      otherwise: a fresh mapped edge straight into the junction
              (the block identity is not represented).
  degree >= 2 coefficients have no single-block realization and raise
              UnrealizableError.

Subtraction is a sign on an edge, not a node kind.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .algebra import PathPolynomial
from .errors import SizeError, UnrealizableError
from .parser import ArchitectureSpec

INPUT = "input"
BLOCK = "block"
JUNCTION = "junction"
TAP = "tap"
OUTPUT = "output"

IDENTITY = "identity"
MAPPED = "mapped"

SIZE_CAP = 200


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    block: int | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "block": self.block}


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    sign: int
    label: str

    def to_dict(self) -> dict:
        return {"from": self.src, "to": self.dst, "sign": self.sign, "label": self.label}


@dataclass(frozen=True)
class ArchGraph:
    """A compiled architecture.

    ``state_ids`` maps each state index to the node carrying that state's
    value (0 to the input node, i >= 1 to the junction of block i); it is
    construction metadata and is not part of the exported schema.
    """

    name: str
    depth: int
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    state_ids: tuple[tuple[int, str], ...]

    def __post_init__(self) -> None:
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")
        known = set(ids)
        for e in self.edges:
            if e.src not in known or e.dst not in known:
                raise ValueError(f"edge {e.src}->{e.dst} references unknown nodes")
        if sum(1 for n in self.nodes if n.kind == INPUT) != 1:
            raise ValueError("graph must have exactly one input node")
        if sum(1 for n in self.nodes if n.kind == OUTPUT) != 1:
            raise ValueError("graph must have exactly one output node")
        _toposort(self)  # raises on cycles

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def state_node(self, index: int) -> str:
        for i, node_id in self.state_ids:
            if i == index:
                return node_id
        raise KeyError(f"no node for state {index}")

    def in_edges(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.dst == node_id]

    def out_edges(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.src == node_id]


def _toposort(g: ArchGraph) -> list[str]:
    indegree = {n.id: 0 for n in g.nodes}
    for e in g.edges:
        indegree[e.dst] += 1
    ready = sorted(nid for nid, d in indegree.items() if d == 0)
    order: list[str] = []
    while ready:
        nid = ready.pop()
        order.append(nid)
        for e in g.out_edges(nid):
            indegree[e.dst] -= 1
            if indegree[e.dst] == 0:
                ready.append(e.dst)
        ready.sort()
    if len(order) != len(g.nodes):
        raise ValueError("graph contains a cycle")
    return order


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def build_graph(spec: ArchitectureSpec, L: int) -> ArchGraph:
    """Compile the spec at depth L into its architecture graph."""
    if L < 1:
        raise ValueError(f"depth must be >= 1, got {L}")
    nodes: list[Node] = [Node("input", INPUT)]
    edges: list[Edge] = []
    state_ids: dict[int, str] = {0: "input"}
    block_input: dict[int, int] = {}  # block index -> state index it reads
    taps: set[int] = set()

    for i in range(1, L + 1):
        junction = f"junction{i}"
        nodes.append(Node(junction, JUNCTION))
        state_ids[i] = junction

        for source, coeff in spec.instantiate_terms(i):
            source_node = state_ids[source]
            for term in coeff.terms():
                degree = len(term.factors)
                if degree >= 2:
                    raise UnrealizableError(
                        f"coefficient term {term} on X[{source}] in X[{i}] has"
                        f" degree {degree}; no single-block wiring exists"
                    )
                sign = 1 if term.coeff > 0 else -1
                copies = abs(term.coeff)
                if degree == 0:
                    for _ in range(copies):
                        edges.append(Edge(source_node, junction, sign, IDENTITY))
                    continue
                k = term.factors[0]
                if k == i and k not in block_input:
                    block_id = f"block{k}"
                    nodes.append(Node(block_id, BLOCK, block=k))
                    block_input[k] = source
                    edges.append(Edge(source_node, block_id, 1, IDENTITY))
                    for _ in range(copies):
                        edges.append(Edge(block_id, junction, sign, MAPPED))
                elif k == i and block_input[k] == source:
                    for _ in range(copies):
                        edges.append(Edge(f"block{k}", junction, sign, MAPPED))
                elif k < i and source == k - 1 and block_input.get(k) == source:
                    if k not in taps:
                        tap_id = f"tap{k}"
                        nodes.append(Node(tap_id, TAP, block=k))
                        edges.append(Edge(f"block{k}", tap_id, 1, MAPPED))
                        taps.add(k)
                    for _ in range(copies):
                        edges.append(Edge(f"tap{k}", junction, sign, MAPPED))
                else:
                    # No shared-parameter realization; keep the data path.
                    for _ in range(copies):
                        edges.append(Edge(source_node, junction, sign, MAPPED))

    nodes.append(Node("output", OUTPUT))
    edges.append(Edge(state_ids[L], "output", 1, IDENTITY))
    return ArchGraph(
        name=spec.name,
        depth=L,
        nodes=tuple(nodes),
        edges=tuple(edges),
        state_ids=tuple(sorted(state_ids.items())),
    )


# ---------------------------------------------------------------------------
# Structural checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairReport:
    """Identity-edge connectivity between states i-1 and i."""

    prev: int
    cur: int
    has_direct_identity: bool
    cross_layer_sources: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "pair": [self.prev, self.cur],
            "has_direct_identity": self.has_direct_identity,
            "cross_layer_sources": list(self.cross_layer_sources),
        }


@dataclass(frozen=True)
class StructuralReport:
    """direct_propagation_check output for every consecutive block pair."""

    graph: str
    entries: tuple[PairReport, ...] = field(default_factory=tuple)

    @property
    def all_direct(self) -> bool:
        return all(e.has_direct_identity for e in self.entries)

    @property
    def any_direct(self) -> bool:
        return any(e.has_direct_identity for e in self.entries)

    def to_dict(self) -> dict:
        return {"graph": self.graph, "pairs": [e.to_dict() for e in self.entries]}


def direct_propagation_check(g: ArchGraph) -> StructuralReport:
    """Report which consecutive states are joined by an identity edge.

    For each pair (i-1, i) with 2 <= i <= depth: has_direct_identity is
    true when the state node of X[i-1] feeds junction i through an identity
    edge; cross_layer_sources lists the other states with identity edges
    into junction i (for the substituted recursion this is just the input).
    """
    state_index = {node_id: i for i, node_id in g.state_ids}
    entries = []
    for i in range(2, g.depth + 1):
        junction = g.state_node(i)
        sources = [
            state_index[e.src]
            for e in g.in_edges(junction)
            if e.label == IDENTITY and e.src in state_index
        ]
        entries.append(
            PairReport(
                prev=i - 1,
                cur=i,
                has_direct_identity=(i - 1) in sources,
                cross_layer_sources=tuple(sorted(set(s for s in sources if s != i - 1))),
            )
        )
    return StructuralReport(graph=g.name, entries=tuple(entries))


# ---------------------------------------------------------------------------
# Isomorphism
# ---------------------------------------------------------------------------


def _label(n: Node) -> tuple:
    return (n.kind, -1 if n.block is None else n.block)


def _multi_adjacency(g: ArchGraph) -> dict[tuple[str, str], tuple]:
    acc: dict[tuple[str, str], list] = {}
    for e in g.edges:
        acc.setdefault((e.src, e.dst), []).append((e.sign, e.label))
    return {k: tuple(sorted(v)) for k, v in acc.items()}


def _refined_signatures(g: ArchGraph, rounds: int = 3) -> dict[str, tuple]:
    adj = _multi_adjacency(g)
    outs: dict[str, list] = {n.id: [] for n in g.nodes}
    ins: dict[str, list] = {n.id: [] for n in g.nodes}
    for (u, v), labels in adj.items():
        outs[u].append((v, labels))
        ins[v].append((u, labels))
    sig = {n.id: _label(n) for n in g.nodes}
    for _ in range(rounds):
        sig = {
            n.id: (
                sig[n.id],
                tuple(sorted((labels, sig[v]) for v, labels in outs[n.id])),
                tuple(sorted((labels, sig[u]) for u, labels in ins[n.id])),
            )
            for n in g.nodes
        }
    return sig


def structural_equal(ga: ArchGraph, gb: ArchGraph, size_cap: int = SIZE_CAP) -> bool:
    """Labeled-DAG isomorphism respecting node kinds, block indices and
    signed/labeled edges (including multi-edges)."""
    for g in (ga, gb):
        if len(g.nodes) > size_cap:
            raise SizeError(
                f"graph {g.name!r} has {len(g.nodes)} nodes, cap is {size_cap}"
            )
    if len(ga.nodes) != len(gb.nodes) or len(ga.edges) != len(gb.edges):
        return False

    siga = _refined_signatures(ga)
    sigb = _refined_signatures(gb)
    if sorted(siga.values()) != sorted(sigb.values()):
        return False

    adja = _multi_adjacency(ga)
    adjb = _multi_adjacency(gb)
    candidates: dict[str, list[str]] = {}
    by_sig: dict[tuple, list[str]] = {}
    for node_id, s in sigb.items():
        by_sig.setdefault(s, []).append(node_id)
    for node_id, s in siga.items():
        candidates[node_id] = sorted(by_sig.get(s, []))

    order = sorted(candidates, key=lambda nid: (len(candidates[nid]), nid))
    assignment: dict[str, str] = {}
    used: set[str] = set()

    def compatible(a: str, b: str) -> bool:
        for a2, b2 in assignment.items():
            if adja.get((a, a2)) != adjb.get((b, b2)):
                return False
            if adja.get((a2, a)) != adjb.get((b2, b)):
                return False
        return True

    def assign(pos: int) -> bool:
        if pos == len(order):
            return True
        a = order[pos]
        for b in candidates[a]:
            if b in used or not compatible(a, b):
                continue
            assignment[a] = b
            used.add(b)
            if assign(pos + 1):
                return True
            del assignment[a]
            used.remove(b)
        return False

    return assign(0)


def relabel_nodes(g: ArchGraph, mapping: dict[str, str]) -> ArchGraph:
    """Copy of g with node ids renamed; structure and labels unchanged."""
    def rename(nid: str) -> str:
        return mapping.get(nid, nid)

    return ArchGraph(
        name=g.name,
        depth=g.depth,
        nodes=tuple(Node(rename(n.id), n.kind, n.block) for n in g.nodes),
        edges=tuple(Edge(rename(e.src), rename(e.dst), e.sign, e.label) for e in g.edges),
        state_ids=tuple((i, rename(nid)) for i, nid in g.state_ids),
    )


def count_paths(g: ArchGraph) -> int:
    """Number of distinct directed input-to-output paths (multi-edges count)."""
    order = _toposort(g)
    paths = {nid: 0 for nid in order}
    paths[g.state_node(0)] = 1
    for nid in order:
        if not paths[nid]:
            continue
        for e in g.out_edges(nid):
            paths[e.dst] += paths[nid]
    (output,) = [n.id for n in g.nodes if n.kind == OUTPUT]
    return paths[output]


def recover_terms(g: ArchGraph) -> dict[int, list[tuple[int, PathPolynomial]]]:
    """Re-derive each state's affine dependencies from the wiring.

    The inverse of build_graph for graphs whose mapped edges all run
    through block or tap nodes; a bare mapped edge has no recoverable
    block index and raises ValueError.
    """
    state_index = {node_id: i for i, node_id in g.state_ids}
    block_input: dict[int, int] = {}
    for n in g.nodes:
        if n.kind != BLOCK:
            continue
        feeds = [e for e in g.in_edges(n.id) if e.src in state_index]
        if len(feeds) != 1:
            raise ValueError(f"block node {n.id} must have exactly one data edge")
        block_input[n.block] = state_index[feeds[0].src]

    out: dict[int, list[tuple[int, PathPolynomial]]] = {}
    for i, node_id in g.state_ids:
        if i == 0:
            continue
        acc: dict[int, dict[tuple[int, ...], int]] = {}
        for e in g.in_edges(node_id):
            src_node = g.node(e.src)
            if src_node.kind in (INPUT, JUNCTION):
                if e.label != IDENTITY:
                    raise ValueError(
                        f"mapped edge {e.src}->{e.dst} carries no block index"
                    )
                source = state_index[e.src]
                key: tuple[int, ...] = ()
            elif src_node.kind in (BLOCK, TAP):
                source = block_input[src_node.block]
                key = (src_node.block,)
            else:
                raise ValueError(f"unexpected edge source kind {src_node.kind}")
            slot = acc.setdefault(source, {})
            slot[key] = slot.get(key, 0) + e.sign
        out[i] = [
            (source, PathPolynomial(terms))
            for source, terms in sorted(acc.items())
            if any(terms.values())
        ]
    return out


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

_DOT_SHAPES = {
    INPUT: "ellipse",
    BLOCK: "box",
    JUNCTION: "circle",
    TAP: "diamond",
    OUTPUT: "ellipse",
}


def _dot_label(n: Node) -> str:
    if n.kind == BLOCK:
        return f"W[{n.block}]"
    if n.kind == TAP:
        return f"tap W[{n.block}]"
    if n.kind == JUNCTION:
        return "+"
    if n.kind == INPUT:
        return "X[0]"
    return "out"


def export(g: ArchGraph, fmt: str = "dot") -> str:
    """Deterministic DOT or JSON text for the graph.

    DOT renders block nodes as boxes, junctions as circles, and draws
    negative edges dashed.
    """
    if fmt == "json":
        payload = {
            "name": g.name,
            "depth": g.depth,
            "nodes": [n.to_dict() for n in g.nodes],
            "edges": [e.to_dict() for e in g.edges],
        }
        return json.dumps(payload, indent=2) + "\n"
    if fmt != "dot":
        raise ValueError(f"unknown export format {fmt!r}; use 'dot' or 'json'")
    lines = [f'digraph "{g.name}" {{', "  rankdir=LR;"]
    for n in g.nodes:
        lines.append(
            f'  "{n.id}" [shape={_DOT_SHAPES[n.kind]} label="{_dot_label(n)}"];'
        )
    for e in g.edges:
        attrs = []
        if e.sign < 0:
            attrs.append('style=dashed label="-"')
        lines.append(
            f'  "{e.src}" -> "{e.dst}"' + (f" [{' '.join(attrs)}]" if attrs else "") + ";"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
