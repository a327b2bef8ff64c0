"""Cavity-array connectivity graphs (undirected, unweighted)."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CavityGraph:
    """Nearest-neighbour structure of the array.

    Edges are canonicalized to ``(min, max)`` pairs, sorted, and must be
    free of self-loops and duplicates.  A single uniform hopping rate is
    assumed, so edges carry no weights.
    """

    n_cavities: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n_cavities < 1:
            raise ValueError("need at least one cavity")
        canon = []
        for edge in self.edges:
            j, k = int(edge[0]), int(edge[1])
            if j == k:
                raise ValueError(f"self-loop on cavity {j}")
            if not (0 <= j < self.n_cavities and 0 <= k < self.n_cavities):
                raise ValueError(f"edge ({j},{k}) references a cavity outside 0..{self.n_cavities - 1}")
            canon.append((min(j, k), max(j, k)))
        canon.sort()
        for prev, cur in zip(canon, canon[1:]):
            if prev == cur:
                raise ValueError(f"duplicate edge {cur}")
        object.__setattr__(self, "edges", tuple(canon))

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def chain(n: int, periodic: bool = False) -> CavityGraph:
    """Open chain of ``n`` cavities, or a ring when ``periodic``."""
    if n < 2:
        raise ValueError("a chain needs at least two cavities")
    if periodic and n < 3:
        raise ValueError("a ring needs at least three cavities")
    edges = [(j, j + 1) for j in range(n - 1)]
    if periodic:
        edges.append((n - 1, 0))
    return CavityGraph(n, tuple(edges))


def from_edge_list(n: int, edges) -> CavityGraph:
    """Validate and canonicalize an explicit edge list."""
    return CavityGraph(n, tuple(tuple(e) for e in edges))


def single_cavity() -> CavityGraph:
    return CavityGraph(1, ())
