"""Stage dependency analysis.

Vertices are 0-based stage indices: stage ``j`` of a method with ``s`` points
is vertex ``j - 1`` and the last stage is vertex ``s``.  Adjacency follows the
convention ``adj[j, j1] == True`` iff there is an arc *into* ``j`` *from*
``j1``, i.e. stage ``j`` reads stage ``j1``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from mork.core import MethodTableau

__all__ = [
    "CycleError",
    "NodeState",
    "Explicit",
    "Implicit",
    "ComputationPlan",
    "IMPLICIT_COST",
    "STABILIZE_PROBE",
    "build_weight_digraph",
    "stabilized_digraph",
    "gabow_scc",
    "contract_graph",
    "topological_sort",
    "scc_priorities",
    "computation_plan",
    "useful_stages",
    "is_explicit",
    "graph_report",
]

#: Estimated Picard iterations per implicit stage, used as a block cost.
IMPLICIT_COST = 20
#: Number of ranks inspected when a digraph is built for an infinite method.
STABILIZE_PROBE = 16


class CycleError(ValueError):
    """Raised when a graph that should be acyclic is not."""


class NodeState(enum.Enum):
    NOT_VISITED = 0
    IN_PATH = 1
    IN_SCC = 2


def build_weight_digraph(method: MethodTableau, n: int, tol: float = 0.0) -> np.ndarray:
    """Boolean ``(s+1, s+1)`` adjacency of the maximum weight digraph up to rank ``n``.

    A weight counts as present when its magnitude exceeds ``tol``; the
    default ``0.0`` is an exact zero test, appropriate for constructed
    tableaus.
    """
    s = method.s
    w = np.abs(method.main_stack(n))
    adj = np.zeros((s + 1, s + 1), dtype=bool)
    adj[:, :s] = np.any(w > tol, axis=0)
    return adj


def stabilized_digraph(method: MethodTableau, tol: float = 0.0) -> np.ndarray:
    """Digraph over the first :data:`STABILIZE_PROBE` ranks (or the method length).

    The arc set only grows with the rank and is bounded, so this settles
    early for the closed forms used in practice.
    """
    n = STABILIZE_PROBE if method.length is None else min(method.length, STABILIZE_PROBE)
    return build_weight_digraph(method, n, tol)


def gabow_scc(adj: np.ndarray) -> list[tuple[int, ...]]:
    """Strongly connected components by Gabow's path-based algorithm.

    The depth-first search is iterative and follows arcs backwards, from a
    vertex to the vertices it reads.  Components are returned as sorted
    tuples in the order in which they are completed.
    """
    adj = np.asarray(adj, dtype=bool)
    v = adj.shape[0]
    state = [NodeState.NOT_VISITED] * v
    index = [0] * v
    path: list[int] = []
    bounds: list[int] = []
    comps: list[tuple[int, ...]] = []

    for root in range(v):
        if state[root] is not NodeState.NOT_VISITED:
            continue
        stack: list[list[int]] = []

        def enter(node: int) -> None:
            state[node] = NodeState.IN_PATH
            index[node] = len(path)
            path.append(node)
            bounds.append(index[node])
            stack.append([node, 0])

        enter(root)
        while stack:
            frame = stack[-1]
            node, pos = frame
            row = adj[node]
            nxt = pos
            while nxt < v and not row[nxt]:
                nxt += 1
            if nxt < v:
                frame[1] = nxt + 1
                st = state[nxt]
                if st is NodeState.NOT_VISITED:
                    enter(nxt)
                elif st is NodeState.IN_PATH:
                    while bounds[-1] > index[nxt]:
                        bounds.pop()
                continue
            stack.pop()
            if bounds[-1] == index[node]:
                bounds.pop()
                members = path[index[node] :]
                del path[index[node] :]
                label = len(comps)
                for m in members:
                    state[m] = NodeState.IN_SCC
                    index[m] = label
                comps.append(tuple(sorted(members)))
    return comps


def _membership(partition: Sequence[Sequence[int]], v: int) -> np.ndarray:
    owner = np.full(v, -1)
    for b, block in enumerate(partition):
        for x in block:
            if owner[x] != -1:
                raise ValueError(f"vertex {x} appears in two blocks")
            owner[x] = b
    if np.any(owner < 0):
        raise ValueError("partition does not cover every vertex")
    return owner


def contract_graph(adj: np.ndarray, partition: Sequence[Sequence[int]]) -> np.ndarray:
    """Quotient digraph: one vertex per block, arcs between distinct blocks only."""
    adj = np.asarray(adj, dtype=bool)
    owner = _membership(partition, adj.shape[0])
    k = len(partition)
    out = np.zeros((k, k), dtype=bool)
    for j, j1 in zip(*np.nonzero(adj)):
        a, b = owner[j], owner[j1]
        if a != b:
            out[a, b] = True
    return out


def topological_sort(dag: np.ndarray) -> list[int]:
    """Order the vertices so that every arc goes forward.

    Repeatedly takes the smallest-index vertex without incoming arcs and
    deletes its outgoing arcs.  Raises :class:`CycleError` when no such
    vertex remains before all are placed.
    """
    work = np.array(dag, dtype=bool, copy=True)
    v = work.shape[0]
    if np.any(np.diag(work)):
        raise CycleError("self-loop in a graph that must be acyclic")
    placed = np.zeros(v, dtype=bool)
    order: list[int] = []
    for _ in range(v):
        sources = np.flatnonzero(~placed & ~work.any(axis=1))
        if sources.size == 0:
            raise CycleError("graph contains a cycle")
        node = int(sources[0])
        order.append(node)
        placed[node] = True
        work[:, node] = False
    return order


def scc_priorities(costs: Sequence[int], dag: np.ndarray) -> list[int]:
    """Largest total cost along any diwalk starting at each vertex, own cost included."""
    costs = [int(c) for c in costs]
    if any(c < 0 for c in costs):
        raise ValueError("costs must be non-negative")
    dag = np.asarray(dag, dtype=bool)
    order = topological_sort(dag)
    prio = list(costs)
    for b in reversed(order):
        succ = np.flatnonzero(dag[:, b])
        if succ.size:
            prio[b] = costs[b] + max(prio[c] for c in succ)
    return prio


@dataclass(frozen=True)
class Explicit:
    stage: int

    @property
    def stages(self) -> tuple[int, ...]:
        return (self.stage,)


@dataclass(frozen=True)
class Implicit:
    stages: tuple[int, ...]
    complement: tuple[int, ...]


Block = Union[Explicit, Implicit]


@dataclass(frozen=True)
class ComputationPlan:
    """Blocks in an order of computation, with implicit ranks and priorities.

    ``implicit_ranks[N - 1, j]`` tells whether rank ``N`` at stage ``j`` refers
    to a stage of its own implicit block.
    """

    s: int
    n: int
    blocks: tuple[Block, ...]
    implicit_ranks: np.ndarray
    priorities: tuple[int, ...]
    adjacency: np.ndarray = field(repr=False)

    @property
    def explicit(self) -> bool:
        return all(isinstance(b, Explicit) for b in self.blocks)

    def order(self) -> list[int]:
        return [j for b in self.blocks for j in b.stages]


def computation_plan(
    method: MethodTableau,
    n: int,
    tol: float = 0.0,
    implicit_cost: int = IMPLICIT_COST,
    unit_costs: bool = False,
) -> ComputationPlan:
    """Split the stages into SCC blocks and order them for evaluation.

    Priorities use a cost of 1 per explicit block and ``implicit_cost``
    per stage of an implicit block, or 1 per block when ``unit_costs``.
    """
    s = method.s
    adj = build_weight_digraph(method, n, tol)
    parts = gabow_scc(adj)
    cadj = contract_graph(adj, parts)
    order = topological_sort(cadj)
    everyone = set(range(s))
    blocks: list[Block] = []
    costs: list[int] = []
    for b in order:
        part = parts[b]
        if len(part) == 1 and not adj[part[0], part[0]]:
            blocks.append(Explicit(part[0]))
            costs.append(1)
        else:
            blocks.append(Implicit(part, tuple(sorted(everyone - set(part)))))
            costs.append(1 if unit_costs else implicit_cost * len(part))
    relabeled = cadj[np.ix_(order, order)]
    prio = scc_priorities(costs, relabeled)

    w = np.abs(method.main_stack(n)) > tol
    ranks = np.zeros((n, s + 1), dtype=bool)
    for blk in blocks:
        if isinstance(blk, Implicit):
            J = list(blk.stages)
            for j in J:
                ranks[:, j] = w[:, j, J].any(axis=1)
    ranks.setflags(write=False)
    adj.setflags(write=False)
    return ComputationPlan(s, n, tuple(blocks), ranks, tuple(prio), adj)


def is_explicit(method: MethodTableau, n: int, tol: float = 0.0) -> bool:
    """True iff the maximum weight digraph has no closed diwalk."""
    return computation_plan(method, n, tol).explicit


def useful_stages(method: MethodTableau, n: int, tol: float = 0.0) -> frozenset[int]:
    """Stages (0-based) from which a diwalk of length at least one reaches the last stage."""
    adj = build_weight_digraph(method, n, tol)
    s = method.s
    seen: set[int] = set()
    frontier = [s]
    while frontier:
        node = frontier.pop()
        for j1 in np.flatnonzero(adj[node]):
            j1 = int(j1)
            if j1 not in seen:
                seen.add(j1)
                frontier.append(j1)
    seen.discard(s)
    return frozenset(seen)


def graph_report(method: MethodTableau, n: int, plan: Optional[ComputationPlan] = None) -> str:
    """Plain-text description of arcs, blocks, implicit ranks and priorities.

    Stage labels are 1-based in the text.
    """
    plan = plan or computation_plan(method, n)
    lines = [f"# method {method.name or 'anonymous'} s={method.s} n={n}"]
    adj = plan.adjacency
    for j1 in range(adj.shape[0]):
        for j in range(adj.shape[0]):
            if adj[j, j1]:
                lines.append(f"{j1 + 1} -> {j + 1}")
    for k, blk in enumerate(plan.blocks, start=1):
        tag = "explicit" if isinstance(blk, Explicit) else "implicit"
        members = ",".join(str(j + 1) for j in blk.stages)
        lines.append(f"block {k}: {{{members}}} {tag} priority={plan.priorities[k - 1]}")
    for N in range(1, plan.n + 1):
        stages = [str(j + 1) for j in np.flatnonzero(plan.implicit_ranks[N - 1])]
        if stages:
            lines.append(f"implicit rank {N}: stages {{{','.join(stages)}}}")
    return "\n".join(lines) + "\n"
