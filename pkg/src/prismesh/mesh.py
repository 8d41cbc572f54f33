"""Unstructured 2D triangular base meshes.

A base mesh stores the cell-vertex connectivity explicitly (the mesh is
unstructured in the plane) and derives everything else from it: the edge
set, the cell-edge incidence and, on demand, the remaining adjacency
relations. Meshes are immutable once built; reordering produces a new mesh.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np


class MeshFormatError(ValueError):
    """A mesh file does not parse under its declared format."""


class MeshTopologyError(ValueError):
    """Connectivity input violates the triangle-mesh contract."""


@dataclass(frozen=True)
class EntityId:
    """A mesh entity: topological dimension ``dim`` and index within it."""

    dim: int
    index: int


def derive_edges(cell_vertices, num_vertices=None):
    """Derive the edge set and cell-edge incidence from cell-vertex triples.

    Edges are numbered lexicographically by their sorted vertex pair
    ``(min, max)``, which makes the numbering independent of cell order.
    ``cell_edges[c][k]`` is the edge opposite local vertex ``k`` of cell
    ``c``.

    Returns ``(edge_vertices, cell_edges)`` as int32 arrays of shape
    ``(n_edges, 2)`` and ``(n_cells, 3)``.
    """
    cells = np.ascontiguousarray(cell_vertices, dtype=np.int64)
    if cells.ndim != 2 or cells.shape[1] != 3:
        raise MeshTopologyError(
            f"cell_vertices must have shape (n_cells, 3), got {cells.shape}")
    n_cells = cells.shape[0]
    if n_cells and cells.min() < 0:
        raise MeshTopologyError("negative vertex index in cell_vertices")
    nv = int(cells.max()) + 1 if n_cells else 0
    if num_vertices is not None:
        if n_cells and nv > num_vertices:
            bad = int(cells.max())
            raise MeshTopologyError(
                f"vertex index {bad} out of range for {num_vertices} vertices")
        nv = num_vertices

    distinct = ((cells[:, 0] != cells[:, 1])
                & (cells[:, 1] != cells[:, 2])
                & (cells[:, 0] != cells[:, 2]))
    if not distinct.all():
        c = int(np.flatnonzero(~distinct)[0])
        raise MeshTopologyError(f"cell {c} has repeated vertices")

    key = np.sort(cells, axis=1)
    uniq = np.unique(key, axis=0)
    if uniq.shape[0] != n_cells:
        raise MeshTopologyError("duplicate cell (same vertex set)")

    # Side k of a cell joins the two vertices opposite local vertex k.
    sides = np.concatenate(
        [cells[:, [1, 2]], cells[:, [2, 0]], cells[:, [0, 1]]], axis=0)
    sides.sort(axis=1)
    edge_vertices, inverse, counts = np.unique(
        sides, axis=0, return_inverse=True, return_counts=True)
    if counts.size and counts.max() > 2:
        e = int(np.argmax(counts))
        pair = tuple(edge_vertices[e])
        raise MeshTopologyError(f"edge {pair} shared by more than two cells")
    cell_edges = inverse.reshape(3, n_cells).T

    return (edge_vertices.astype(np.int32),
            np.ascontiguousarray(cell_edges, dtype=np.int32))


def _readonly(a):
    a.flags.writeable = False
    return a


class BaseMesh:
    """Immutable unstructured triangle mesh.

    Built from cell-vertex connectivity and vertex coordinates; the edge
    set and cell-edge incidence are derived on construction.
    """

    def __init__(self, cell_vertices, coords):
        coords = np.ascontiguousarray(coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise MeshTopologyError(
                f"coords must have shape (n_vertices, 2), got {coords.shape}")
        cells = np.ascontiguousarray(cell_vertices, dtype=np.int32)
        edge_vertices, cell_edges = derive_edges(cells, coords.shape[0])

        self.coords = _readonly(coords)
        self.cell_vertices = _readonly(cells)
        self.edge_vertices = _readonly(edge_vertices)
        self.cell_edges = _readonly(cell_edges)

    @property
    def num_vertices(self) -> int:
        return self.coords.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edge_vertices.shape[0]

    @property
    def num_cells(self) -> int:
        return self.cell_vertices.shape[0]

    def entity_count(self, dim: int) -> int:
        """Number of entities of topological dimension ``dim``."""
        return (self.num_vertices, self.num_edges, self.num_cells)[dim]

    def __repr__(self):
        return (f"BaseMesh(vertices={self.num_vertices}, "
                f"edges={self.num_edges}, cells={self.num_cells})")

    # Derived incidence tables, built lazily.  Each is a CSR pair
    # (offsets, values) with values ordered ascending within a row.

    @cached_property
    def _edge_cells(self):
        n = self.num_edges
        order = np.argsort(self.cell_edges.ravel(), kind="stable")
        cells_flat = np.repeat(np.arange(self.num_cells, dtype=np.int32), 3)
        counts = np.bincount(self.cell_edges.ravel(), minlength=n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return offsets, cells_flat[order]

    @cached_property
    def _vertex_cells(self):
        n = self.num_vertices
        flat = self.cell_vertices.ravel()
        order = np.argsort(flat, kind="stable")
        cells_flat = np.repeat(np.arange(self.num_cells, dtype=np.int32), 3)
        counts = np.bincount(flat, minlength=n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return offsets, cells_flat[order]

    @cached_property
    def _vertex_edges(self):
        n = self.num_vertices
        flat = self.edge_vertices.ravel()
        order = np.argsort(flat, kind="stable")
        edges_flat = np.repeat(np.arange(self.num_edges, dtype=np.int32), 2)
        counts = np.bincount(flat, minlength=n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return offsets, edges_flat[order]

    def vertex_neighbours(self):
        """CSR vertex-vertex adjacency through edges, rows ascending."""
        return self._vertex_vertices

    @cached_property
    def _vertex_vertices(self):
        n = self.num_vertices
        ev = self.edge_vertices
        src = np.concatenate([ev[:, 0], ev[:, 1]])
        dst = np.concatenate([ev[:, 1], ev[:, 0]])
        order = np.lexsort((dst, src))
        counts = np.bincount(src, minlength=n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return offsets, dst[order].astype(np.int32)


def adjacency(mesh: BaseMesh, d1: int, d2: int, v: EntityId):
    """Entities of dimension ``d2`` adjacent to ``v`` (of dimension ``d1``).

    Directly stored: (2,0), (2,1), (1,0).  Derived on demand: (1,2), (2,2),
    (0,0), (0,1), (0,2).  The (1,1) pair is not derived in this build.
    """
    if v.dim != d1:
        raise ValueError(f"entity {v} does not have dimension {d1}")
    if not 0 <= v.index < mesh.entity_count(d1):
        raise ValueError(f"entity index {v.index} out of range for dim {d1}")
    i = v.index
    if (d1, d2) == (2, 0):
        out = mesh.cell_vertices[i]
    elif (d1, d2) == (2, 1):
        out = mesh.cell_edges[i]
    elif (d1, d2) == (1, 0):
        out = mesh.edge_vertices[i]
    elif (d1, d2) == (1, 2):
        offsets, values = mesh._edge_cells
        out = values[offsets[i]:offsets[i + 1]]
    elif (d1, d2) == (0, 2):
        offsets, values = mesh._vertex_cells
        out = values[offsets[i]:offsets[i + 1]]
    elif (d1, d2) == (0, 1):
        offsets, values = mesh._vertex_edges
        out = values[offsets[i]:offsets[i + 1]]
    elif (d1, d2) == (0, 0):
        offsets, values = mesh._vertex_vertices
        out = values[offsets[i]:offsets[i + 1]]
    elif (d1, d2) == (2, 2):
        # Neighbouring cells across shared edges, in edge-slot order.
        offsets, values = mesh._edge_cells
        result = []
        for e in mesh.cell_edges[i]:
            for c in values[offsets[e]:offsets[e + 1]]:
                if c != i:
                    result.append(c)
        return tuple(EntityId(2, int(c)) for c in result)
    else:
        raise NotImplementedError(
            f"adjacency ({d1},{d2}) not derived in this build")
    return tuple(EntityId(d2, int(j)) for j in out)


def generate_unit_square_mesh(n: int) -> BaseMesh:
    """Structured triangulation of the unit square with ``n`` subdivisions.

    Produces ``2*n**2`` cells and ``(n+1)**2`` vertices, stored as an
    unstructured mesh.  Each grid square is split along the same diagonal,
    so the numbering is deterministic.
    """
    if n < 1:
        raise ValueError(f"subdivision count must be >= 1, got {n}")
    k = n + 1
    ij = np.arange(k)
    xs, ys = np.meshgrid(ij / n, ij / n, indexing="ij")
    coords = np.column_stack([xs.ravel(), ys.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    v00 = (i * k + j).ravel()
    v10 = ((i + 1) * k + j).ravel()
    v01 = (i * k + j + 1).ravel()
    v11 = ((i + 1) * k + j + 1).ravel()
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    cells = np.concatenate([lower, upper], axis=0)

    mesh = BaseMesh(cells, coords)
    # Generator self-test: Euler's relation for a disk-like domain.
    assert mesh.num_vertices - mesh.num_edges + mesh.num_cells == 1
    return mesh


def load_mesh(path, format: str) -> BaseMesh:
    """Load a triangle mesh from ``path``.

    ``format`` is ``"node-ele"`` (Triangle-style ``.node``/``.ele`` pair;
    pass either file or their common stem) or ``"msh2-subset"`` (Gmsh MSH
    2.2 ASCII, triangles only).
    """
    if format == "node-ele":
        return _load_node_ele(Path(path))
    if format == "msh2-subset":
        return _load_msh2(Path(path))
    raise ValueError(f"unknown mesh format {format!r}")


def _tokens(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def _load_node_ele(path: Path) -> BaseMesh:
    if path.suffix in (".node", ".ele"):
        stem = path.with_suffix("")
    else:
        stem = path
    node_path = stem.with_suffix(".node")
    ele_path = stem.with_suffix(".ele")

    rows = list(_tokens(node_path))
    if not rows:
        raise MeshFormatError(f"{node_path}: empty file")
    lineno, header = rows[0]
    try:
        n_vertices, dim = int(header[0]), int(header[1])
    except (IndexError, ValueError):
        raise MeshFormatError(
            f"{node_path}:{lineno}: malformed header {' '.join(header)!r}")
    if dim != 2:
        raise MeshFormatError(f"{node_path}:{lineno}: dimension must be 2")
    if len(rows) - 1 != n_vertices:
        raise MeshFormatError(
            f"{node_path}: header promises {n_vertices} vertices, "
            f"found {len(rows) - 1}")
    base = None
    coords = np.empty((n_vertices, 2))
    for k, (lineno, tok) in enumerate(rows[1:]):
        try:
            idx = int(tok[0])
            x, y = float(tok[1]), float(tok[2])
        except (IndexError, ValueError):
            raise MeshFormatError(f"{node_path}:{lineno}: malformed record")
        if base is None:
            base = idx  # 0- or 1-based, detected from the first record
            if base not in (0, 1):
                raise MeshFormatError(
                    f"{node_path}:{lineno}: first index must be 0 or 1")
        if idx - base != k:
            raise MeshFormatError(
                f"{node_path}:{lineno}: non-consecutive vertex index {idx}")
        coords[k] = (x, y)

    rows = list(_tokens(ele_path))
    if not rows:
        raise MeshFormatError(f"{ele_path}: empty file")
    lineno, header = rows[0]
    try:
        n_cells, nodes_per_cell = int(header[0]), int(header[1])
    except (IndexError, ValueError):
        raise MeshFormatError(
            f"{ele_path}:{lineno}: malformed header {' '.join(header)!r}")
    if nodes_per_cell != 3:
        raise MeshFormatError(
            f"{ele_path}:{lineno}: non-triangle cells "
            f"({nodes_per_cell} nodes per cell)")
    if len(rows) - 1 != n_cells:
        raise MeshFormatError(
            f"{ele_path}: header promises {n_cells} cells, "
            f"found {len(rows) - 1}")
    ebase = None
    cells = np.empty((n_cells, 3), dtype=np.int64)
    for k, (lineno, tok) in enumerate(rows[1:]):
        try:
            idx = int(tok[0])
            tri = [int(t) for t in tok[1:4]]
        except (IndexError, ValueError):
            raise MeshFormatError(f"{ele_path}:{lineno}: malformed record")
        if len(tok) < 4:
            raise MeshFormatError(f"{ele_path}:{lineno}: malformed record")
        if ebase is None:
            ebase = idx
            if ebase not in (0, 1):
                raise MeshFormatError(
                    f"{ele_path}:{lineno}: first index must be 0 or 1")
        if idx - ebase != k:
            raise MeshFormatError(
                f"{ele_path}:{lineno}: non-consecutive cell index {idx}")
        cells[k] = tri
    # Vertex references share the .node file's index base.
    vbase = base or 0
    cells -= vbase
    if cells.size and cells.min() < 0:
        raise MeshFormatError(f"{ele_path}: vertex reference below index base")
    try:
        return BaseMesh(cells, coords)
    except MeshTopologyError as err:
        raise MeshFormatError(f"{ele_path}: {err}") from err


def _load_msh2(path: Path) -> BaseMesh:
    rows = list(_tokens(path))
    pos = 0

    def expect(tag):
        nonlocal pos
        if pos >= len(rows) or rows[pos][1][0] != tag:
            lineno = rows[pos][0] if pos < len(rows) else "eof"
            raise MeshFormatError(f"{path}:{lineno}: expected {tag}")
        pos += 1

    if pos < len(rows) and rows[pos][1][0] == "$MeshFormat":
        pos += 1
        lineno, tok = rows[pos]
        if not tok[0].startswith("2."):
            raise MeshFormatError(
                f"{path}:{lineno}: unsupported MSH version {tok[0]}")
        pos += 1
        expect("$EndMeshFormat")

    expect("$Nodes")
    lineno, tok = rows[pos]
    pos += 1
    n_nodes = int(tok[0])
    ids = {}
    coords = np.empty((n_nodes, 2))
    for k in range(n_nodes):
        lineno, tok = rows[pos]
        pos += 1
        try:
            ids[int(tok[0])] = k
            coords[k] = (float(tok[1]), float(tok[2]))
        except (IndexError, ValueError):
            raise MeshFormatError(f"{path}:{lineno}: malformed node record")
    expect("$EndNodes")

    expect("$Elements")
    lineno, tok = rows[pos]
    pos += 1
    n_elems = int(tok[0])
    cells = np.empty((n_elems, 3), dtype=np.int64)
    for k in range(n_elems):
        lineno, tok = rows[pos]
        pos += 1
        try:
            etype = int(tok[1])
            ntags = int(tok[2])
            verts = [int(t) for t in tok[3 + ntags:6 + ntags]]
        except (IndexError, ValueError):
            raise MeshFormatError(f"{path}:{lineno}: malformed element record")
        if etype != 2:
            raise MeshFormatError(
                f"{path}:{lineno}: non-triangle cell at element {k} "
                f"(type {etype})")
        if len(verts) != 3:
            raise MeshFormatError(f"{path}:{lineno}: malformed element record")
        try:
            cells[k] = [ids[v] for v in verts]
        except KeyError as missing:
            raise MeshFormatError(
                f"{path}:{lineno}: unknown node id {missing.args[0]}")
    expect("$EndElements")
    try:
        return BaseMesh(cells, coords)
    except MeshTopologyError as err:
        raise MeshFormatError(f"{path}: {err}") from err
