"""Innate motivation graph: the fixed 13-node DAG, its edge table and validation."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable


class NatureNodeId(str, Enum):
    """Closed inventory of the 13 innate-graph nodes."""

    FOOD = "food"
    EXPERIENCE_FEELING_POS = "experience_feeling_pos"
    EXPERIENCE_FEELING_NEG = "experience_feeling_neg"
    EMO_POS = "emo_pos"
    EMO_NEG = "emo_neg"
    NEED_FOOD_POS = "need_food_pos"
    NEED_FOOD_NEG = "need_food_neg"
    PAST_EXPERIENCE = "past_experience"
    ACTION_POS = "action_pos"
    ACTION_NEG = "action_neg"
    MENTAL_ACTION = "mental_action"
    PHYSICAL_ACTION = "physical_action"
    SOCIAL_ACTION = "social_action"


# Canonical display/serialization order (enum declaration order).
NODE_ORDER: dict[NatureNodeId, int] = {n: i for i, n in enumerate(NatureNodeId)}


class GraphError(Exception):
    """Base class for innate-graph errors."""


class CycleError(GraphError):
    def __init__(self, cycle: list[NatureNodeId]):
        self.cycle = cycle
        names = " -> ".join(n.value for n in cycle)
        super().__init__(f"graph contains a cycle: {names}")


class NodeSetError(GraphError):
    def __init__(self, missing: set[NatureNodeId], extra: set[NatureNodeId]):
        self.missing = missing
        self.extra = extra
        parts = []
        if missing:
            parts.append("missing " + ", ".join(sorted(n.value for n in missing)))
        if extra:
            parts.append("extra " + ", ".join(sorted(n.value for n in extra)))
        super().__init__("node set mismatch: " + "; ".join(parts))


class NoOppositeError(GraphError):
    def __init__(self, node: NatureNodeId):
        self.node = node
        super().__init__(f"node {node.value} has no polar opposite")


class GraphFileError(GraphError):
    def __init__(self, path: str, line_no: int, message: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


@dataclass(frozen=True)
class NatureEdge:
    head: NatureNodeId
    tail: NatureNodeId
    transmits: bool

    def __post_init__(self) -> None:
        if self.head == self.tail:
            raise ValueError(f"self-loop on {self.head.value}")


class NatureGraph:
    """Immutable directed graph over the 13 node ids.

    Construction only rejects structurally broken input (duplicate head/tail
    pairs); acyclicity and the exact node set are checked by validate_graph so
    that deliberately broken graphs can be built and then diagnosed.
    """

    def __init__(self, edges: Iterable[NatureEdge], nodes: Iterable[NatureNodeId] | None = None):
        self.edges: frozenset[NatureEdge] = frozenset(edges)
        self.nodes: frozenset[NatureNodeId] = (
            frozenset(nodes) if nodes is not None else frozenset(NatureNodeId)
        )
        seen: set[tuple[NatureNodeId, NatureNodeId]] = set()
        for e in self.edges:
            pair = (e.head, e.tail)
            if pair in seen:
                raise ValueError(f"duplicate edge {e.head.value} -> {e.tail.value}")
            seen.add(pair)
        tails: dict[NatureNodeId, list[NatureEdge]] = {}
        for e in sorted(self.edges, key=lambda e: (NODE_ORDER[e.head], NODE_ORDER[e.tail])):
            tails.setdefault(e.head, []).append(e)
        self._out = {h: tuple(es) for h, es in tails.items()}

    def out_edges(self, head: NatureNodeId) -> tuple[NatureEdge, ...]:
        return self._out.get(head, ())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NatureGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.nodes, self.edges))

    def __repr__(self) -> str:
        return f"NatureGraph({len(self.nodes)} nodes, {len(self.edges)} edges)"


N = NatureNodeId

# Edge table of the canonical graph. The four edges leaving past_experience
# carry causal structure but do not transmit activation; if they did, any past
# event would light up both need nodes and no output graph could be valid.
DEFAULT_EDGE_TABLE: tuple[tuple[NatureNodeId, NatureNodeId, bool], ...] = (
    (N.PAST_EXPERIENCE, N.EXPERIENCE_FEELING_POS, False),
    (N.PAST_EXPERIENCE, N.EXPERIENCE_FEELING_NEG, False),
    (N.PAST_EXPERIENCE, N.EMO_POS, False),
    (N.PAST_EXPERIENCE, N.EMO_NEG, False),
    (N.EXPERIENCE_FEELING_POS, N.NEED_FOOD_POS, True),
    (N.EMO_POS, N.NEED_FOOD_POS, True),
    (N.EXPERIENCE_FEELING_NEG, N.NEED_FOOD_NEG, True),
    (N.EMO_NEG, N.NEED_FOOD_NEG, True),
    (N.NEED_FOOD_POS, N.ACTION_POS, True),
    (N.NEED_FOOD_NEG, N.ACTION_NEG, True),
    (N.ACTION_POS, N.MENTAL_ACTION, True),
    (N.ACTION_POS, N.PHYSICAL_ACTION, True),
    (N.ACTION_POS, N.SOCIAL_ACTION, True),
    (N.ACTION_NEG, N.MENTAL_ACTION, True),
    (N.ACTION_NEG, N.PHYSICAL_ACTION, True),
    (N.ACTION_NEG, N.SOCIAL_ACTION, True),
)

_OPPOSITES: dict[NatureNodeId, NatureNodeId] = {
    N.EXPERIENCE_FEELING_POS: N.EXPERIENCE_FEELING_NEG,
    N.EXPERIENCE_FEELING_NEG: N.EXPERIENCE_FEELING_POS,
    N.EMO_POS: N.EMO_NEG,
    N.EMO_NEG: N.EMO_POS,
    N.NEED_FOOD_POS: N.NEED_FOOD_NEG,
    N.NEED_FOOD_NEG: N.NEED_FOOD_POS,
    N.ACTION_POS: N.ACTION_NEG,
    N.ACTION_NEG: N.ACTION_POS,
}


def default_graph() -> NatureGraph:
    """Build the canonical 13-node, 16-edge graph."""
    return NatureGraph(NatureEdge(h, t, tr) for h, t, tr in DEFAULT_EDGE_TABLE)


def validate_graph(graph: NatureGraph) -> None:
    """Check node-set completeness and acyclicity.

    Raises NodeSetError when the node set differs from the canonical 13 and
    CycleError (reporting one offending cycle) when the graph is cyclic.
    """
    canonical = set(NatureNodeId)
    missing = canonical - set(graph.nodes)
    extra = set(graph.nodes) - canonical
    if missing or extra:
        raise NodeSetError(missing, extra)

    indegree = {n: 0 for n in graph.nodes}
    for e in graph.edges:
        indegree[e.tail] += 1
    queue = deque(sorted((n for n, d in indegree.items() if d == 0), key=NODE_ORDER.get))
    visited = 0
    while queue:
        node = queue.popleft()
        visited += 1
        for e in graph.out_edges(node):
            indegree[e.tail] -= 1
            if indegree[e.tail] == 0:
                queue.append(e.tail)
    if visited != len(graph.nodes):
        raise CycleError(_find_cycle(graph))


def _find_cycle(graph: NatureGraph) -> list[NatureNodeId]:
    state: dict[NatureNodeId, int] = {}  # 1 = on stack, 2 = done
    stack: list[NatureNodeId] = []

    def dfs(node: NatureNodeId) -> list[NatureNodeId] | None:
        state[node] = 1
        stack.append(node)
        for e in graph.out_edges(node):
            if state.get(e.tail) == 1:
                return stack[stack.index(e.tail):] + [e.tail]
            if state.get(e.tail) is None:
                found = dfs(e.tail)
                if found:
                    return found
        stack.pop()
        state[node] = 2
        return None

    for n in sorted(graph.nodes, key=NODE_ORDER.get):
        if state.get(n) is None:
            found = dfs(n)
            if found:
                return found
    raise AssertionError("cycle reported but not found")


def opposite_node(node: NatureNodeId) -> NatureNodeId:
    """Swap pos and neg within a polarity family."""
    try:
        return _OPPOSITES[node]
    except KeyError:
        raise NoOppositeError(node) from None


def transmitting_tails(graph: NatureGraph, node: NatureNodeId) -> set[NatureNodeId]:
    """Tails of all transmitting edges leaving node."""
    if node not in graph.nodes:
        raise ValueError(f"unknown node {node!r}")
    return {e.tail for e in graph.out_edges(node) if e.transmits}


def load_graph_file(path: str | Path) -> NatureGraph:
    """Read an edge-list override file: head<TAB>tail<TAB>0|1 per line, # comments."""
    edges: list[NatureEdge] = []
    path = Path(path)
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise GraphFileError(str(path), line_no, f"expected 3 tab-separated fields, got {len(fields)}")
        head_s, tail_s, flag = fields
        try:
            head = NatureNodeId(head_s)
            tail = NatureNodeId(tail_s)
        except ValueError as exc:
            raise GraphFileError(str(path), line_no, str(exc)) from None
        if flag not in ("0", "1"):
            raise GraphFileError(str(path), line_no, f"transmits flag must be 0 or 1, got {flag!r}")
        try:
            edges.append(NatureEdge(head, tail, flag == "1"))
        except ValueError as exc:
            raise GraphFileError(str(path), line_no, str(exc)) from None
    try:
        return NatureGraph(edges)
    except ValueError as exc:
        raise GraphFileError(str(path), 0, str(exc)) from None
