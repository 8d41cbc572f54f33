"""Base-mesh renumbering: reverse Cuthill-McKee and seeded random orders.

The iteration experiments compare a traversal-friendly mesh against a
pathologically ordered one, so both orders must be deterministic.  The
random permutation is Fisher-Yates as implemented by numpy's
``Generator.permutation`` over a PCG64 stream, so a seed pins the result
on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .mesh import BaseMesh


@dataclass(frozen=True)
class Permutation:
    """A bijection on ``[0, length)``; ``forward[old] = new``."""

    forward: np.ndarray

    def __post_init__(self):
        fwd = np.ascontiguousarray(self.forward, dtype=np.int64)
        object.__setattr__(self, "forward", fwd)
        seen = np.zeros(len(fwd), dtype=bool)
        if len(fwd) and (fwd.min() < 0 or fwd.max() >= len(fwd)):
            raise ValueError("permutation values out of range")
        seen[fwd] = True
        if not seen.all():
            raise ValueError("forward map is not a bijection")

    @property
    def length(self) -> int:
        return len(self.forward)

    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.forward)
        inv[self.forward] = np.arange(self.length)
        return inv


@numba.njit(cache=True)
def _cuthill_mckee(offsets, neighbours, degree):
    # neighbours are pre-sorted by (degree, index) within each row.
    n = offsets.shape[0] - 1
    visited = np.zeros(n, numba.boolean)
    order = np.empty(n, np.int64)
    pos = 0
    scan = 0
    while pos < n:
        while visited[scan]:
            scan += 1
        # Discover the component containing `scan` to find its
        # minimum-degree vertex (ties broken by index).
        comp = np.empty(n - pos, np.int64)
        comp[0] = scan
        visited[scan] = True
        head, tail = 0, 1
        while head < tail:
            v = comp[head]
            head += 1
            for w in neighbours[offsets[v]:offsets[v + 1]]:
                if not visited[w]:
                    visited[w] = True
                    comp[tail] = w
                    tail += 1
        start = comp[0]
        for v in comp[:tail]:
            if degree[v] < degree[start] or (degree[v] == degree[start]
                                             and v < start):
                start = v
        for v in comp[:tail]:
            visited[v] = False
        # Breadth-first search from the start vertex, neighbours in
        # increasing-degree order.
        order[pos] = start
        visited[start] = True
        tail = pos + 1
        while pos < tail:
            v = order[pos]
            pos += 1
            for w in neighbours[offsets[v]:offsets[v + 1]]:
                if not visited[w]:
                    visited[w] = True
                    order[tail] = w
                    tail += 1
    return order


def rcm_order(offsets, neighbours) -> Permutation:
    """Reverse Cuthill-McKee over a CSR graph.

    Breadth-first search from a minimum-degree start vertex with
    neighbours visited in increasing-degree order (ties by index); the
    visit sequence is reversed at the end.  Disconnected graphs are
    handled per component, components taken in order of their smallest
    vertex index.
    """
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    neighbours = np.ascontiguousarray(neighbours, dtype=np.int64)
    n = offsets.shape[0] - 1
    if n == 0:
        return Permutation(np.empty(0, dtype=np.int64))
    degree = np.diff(offsets)
    rows = np.repeat(np.arange(n), degree)
    resort = np.lexsort((neighbours, degree[neighbours], rows))
    order = _cuthill_mckee(offsets, neighbours[resort], degree)
    reversed_order = order[::-1]
    forward = np.empty(n, dtype=np.int64)
    forward[reversed_order] = np.arange(n)
    return Permutation(forward)


def rcm_vertex_order(mesh: BaseMesh) -> Permutation:
    """RCM permutation of the mesh's vertex-vertex (edge) graph."""
    offsets, neighbours = mesh.vertex_neighbours()
    return rcm_order(offsets, neighbours)


def random_order(count: int, seed: int) -> Permutation:
    """Uniform random permutation, reproducible from ``seed``."""
    if count < 0:
        raise ValueError("count must be >= 0")
    rng = np.random.Generator(np.random.PCG64(seed))
    shuffled = rng.permutation(count)
    forward = np.empty(count, dtype=np.int64)
    forward[shuffled] = np.arange(count)
    return Permutation(forward)


def apply_ordering(mesh: BaseMesh, vertex_perm: Permutation) -> BaseMesh:
    """Renumber a mesh's vertices; cells and edges follow.

    Cells are reordered by ascending smallest new vertex index, with the
    remaining sorted vertices breaking ties, so cell traversal order
    correlates with vertex locality.  Edges re-derive under the
    lexicographic rule, and coordinates move with their vertices.
    """
    if vertex_perm.length != mesh.num_vertices:
        raise ValueError(
            f"permutation length {vertex_perm.length} != "
            f"{mesh.num_vertices} vertices")
    fwd = vertex_perm.forward
    new_cells = fwd[mesh.cell_vertices]
    key = np.sort(new_cells, axis=1)
    cell_order = np.lexsort((key[:, 2], key[:, 1], key[:, 0]))
    new_coords = np.empty_like(mesh.coords)
    new_coords[fwd] = mesh.coords
    return BaseMesh(new_cells[cell_order], new_coords)
