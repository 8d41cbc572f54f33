"""Function spaces on extruded meshes: layouts, numbering, maps, offsets.

The global numbering walks base entities in mesh order (vertices, then
edges, then cells) and, within each entity's column, alternates between
the level copy and the connecting entity above it, finishing with the top
level.  Values attached to vertically adjacent entities therefore get
adjacent global numbers, which is what makes direct vertical addressing
possible: a stencil only needs its bottom-layer DoF list plus one constant
offset per slot to reach any layer.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .extrusion import ExtrudedEntityType, ExtrudedMesh
from .mesh import EntityId

#: Nonzero DoF counts per extruded entity type for the nine built-in
#: discretisations, keyed by (horizontal, vertical) element label.
_BUILTIN = {
    ("CG1", "CG1"): {(0, 0): 1},
    ("CG1", "DG0"): {(0, 1): 1},
    ("CG1", "DG1"): {(0, 1): 2},
    ("DG0", "CG1"): {(2, 0): 1},
    ("DG0", "DG0"): {(2, 1): 1},
    ("DG0", "DG1"): {(2, 1): 2},
    ("DG1", "CG1"): {(2, 0): 3},
    ("DG1", "DG0"): {(2, 1): 3},
    ("DG1", "DG1"): {(2, 1): 6},
}

ELEMENT_LABELS = ("CG1", "DG0", "DG1")


@dataclass(frozen=True)
class DofLayout:
    """DoF counts per extruded entity type for one discretisation."""

    name: str
    counts: dict

    def __post_init__(self):
        clean = {}
        for key, value in self.counts.items():
            t = key if isinstance(key, tuple) else (key.horiz_dim, key.vert_dim)
            ExtrudedEntityType(*t)
            if value < 0:
                raise ValueError(f"negative DoF count for entity type {t}")
            if value:
                clean[t] = int(value)
        if not clean:
            raise ValueError("layout assigns no DoFs at all")
        object.__setattr__(self, "counts", clean)

    def dofs(self, d1: int, d2: int) -> int:
        return self.counts.get((d1, d2), 0)

    def column_dofs(self, d: int, layers: int) -> int:
        """DoFs owned by one dimension-``d`` entity column."""
        return layers * (self.dofs(d, 0) + self.dofs(d, 1)) + self.dofs(d, 0)


def builtin_layout(horiz: str, vert: str) -> DofLayout:
    """One of the nine CG1/DG0/DG1 tensor-product layouts."""
    try:
        counts = _BUILTIN[(horiz, vert)]
    except KeyError:
        raise ValueError(
            f"unknown discretisation {horiz!r} x {vert!r}; "
            f"labels are {ELEMENT_LABELS}")
    return DofLayout(name=f"{horiz}x{vert}", counts=dict(counts))


def all_builtin_layouts():
    return tuple(builtin_layout(h, v)
                 for h in ELEMENT_LABELS for v in ELEMENT_LABELS)


#: Layout of the extruded coordinate field: a 3-vector at every vertex,
#: regardless of the discretisation under test.
COORDS_LAYOUT = DofLayout(name="coords", counts={(0, 0): 3})


@dataclass(frozen=True)
class Slot:
    """One entry of a cell stencil's bottom-layer DoF list.

    ``kind`` is the local entity family within the cell (0 vertices,
    1 edges, 2 the cell itself), ``local`` the index in that family,
    ``base_dim`` its base-mesh dimension.  ``level_kind`` distinguishes
    the level copy at the stencil's own layer (0), the connecting entity
    (1) and the level copy one layer up (2); ``dof`` indexes into the
    entity's DoFs.
    """

    kind: int
    local: int
    base_dim: int
    level_kind: int
    dof: int

    @property
    def entity_type(self) -> ExtrudedEntityType:
        return ExtrudedEntityType(self.base_dim, 1 if self.level_kind == 1 else 0)


def slot_table(layout: DofLayout):
    """The fixed slot ordering of a cell stencil for ``layout``.

    Local base entities run in cell-local order (vertices 0,1,2, edges
    0,1,2, then the cell); within an entity, slots follow the vertical
    numbering order: level copy at the stencil layer, connecting entity,
    level copy one layer up; within each copy, DoFs in numbering order.
    """
    slots = []
    families = ((0, 0, 3), (1, 1, 3), (2, 2, 1))
    for kind, d, n_local in families:
        bottom, conn = layout.dofs(d, 0), layout.dofs(d, 1)
        if not bottom and not conn:
            continue
        for local in range(n_local):
            for j in range(bottom):
                slots.append(Slot(kind, local, d, 0, j))
            for j in range(conn):
                slots.append(Slot(kind, local, d, 1, j))
            for j in range(bottom):
                slots.append(Slot(kind, local, d, 2, j))
    return tuple(slots)


class FunctionSpace:
    """A layout bound to an extruded mesh: numbering, maps and offsets."""

    def __init__(self, mesh: ExtrudedMesh, layout: DofLayout):
        self.mesh = mesh
        self.layout = layout
        base = mesh.base
        origins = []
        start = 0
        for d in (0, 1, 2):
            column = layout.column_dofs(d, mesh.layers)
            n = base.entity_count(d)
            origins.append(start + column * np.arange(n, dtype=np.int64))
            start += column * n
        self._origins = tuple(origins)
        self.total_dofs = start

    def dof_origin(self, entity: EntityId) -> int:
        """First global DoF of the entity's column."""
        return int(self._origins[entity.dim][entity.index])

    @property
    def num_slots(self) -> int:
        return len(self.slots)

    @cached_property
    def slots(self):
        return slot_table(self.layout)

    @cached_property
    def cell_map(self):
        return build_cell_map(self)

    @cached_property
    def offsets(self):
        return compute_offsets(self)

    @cached_property
    def slot_types(self):
        """Extruded entity type addressed by each stencil slot."""
        return tuple(s.entity_type for s in self.slots)

    def __repr__(self):
        return (f"FunctionSpace({self.layout.name}, "
                f"layers={self.mesh.layers}, total_dofs={self.total_dofs})")


def number_dofs(mesh: ExtrudedMesh, layout: DofLayout) -> FunctionSpace:
    """Build the global numbering of ``layout`` over ``mesh``.

    Column ``(d, i)`` owns the contiguous block starting at its origin;
    level ``l`` of the column starts ``l * (dofs(d,0) + dofs(d,1))``
    values in, with the level copy's DoFs before the connecting entity's.
    ``total_dofs`` is the sum of the per-column closed forms.
    """
    return FunctionSpace(mesh, layout)


def build_cell_map(fs: FunctionSpace):
    """Bottom-layer explicit DoF list for every base cell.

    Returns an int32 array of shape ``(num_cells, k)`` in slot-table
    order; lists for higher layers follow by adding multiples of the
    per-slot vertical offsets.
    """
    base = fs.mesh.base
    layout = fs.layout
    n_cells = base.num_cells
    slots = fs.slots
    cell_map = np.empty((n_cells, len(slots)), dtype=np.int32)
    locals_by_kind = (base.cell_vertices, base.cell_edges,
                      np.arange(n_cells, dtype=np.int32)[:, None])
    for j, s in enumerate(slots):
        entities = locals_by_kind[s.kind][:, s.local]
        origin = fs._origins[s.base_dim][entities]
        within = s.dof
        if s.level_kind == 1:
            within += layout.dofs(s.base_dim, 0)
        elif s.level_kind == 2:
            within += layout.dofs(s.base_dim, 0) + layout.dofs(s.base_dim, 1)
        cell_map[:, j] = origin + within
    return cell_map


def compute_offsets(fs: FunctionSpace):
    """Per-slot vertical offset: one layer up adds this to every slot.

    The offset of a slot is the DoF count of the two vertically adjacent
    entity types over the slot's base dimension, so it is the same for
    every cell and every layer.
    """
    layout = fs.layout
    return np.array(
        [layout.dofs(s.base_dim, 0) + layout.dofs(s.base_dim, 1)
         for s in fs.slots],
        dtype=np.int32)


def dofs_at_layer(fs: FunctionSpace, cell: int, n: int):
    """DoF list of the stencil's ``n``-th application up cell's column."""
    if not 0 <= n < fs.mesh.layers:
        raise ValueError(
            f"layer index {n} out of range for {fs.mesh.layers} layers")
    return fs.cell_map[cell] + n * fs.offsets.astype(np.int64)
