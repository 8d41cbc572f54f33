"""Extruded meshes: a 2D base mesh replicated over vertical layers.

Extruded entities are classified by a pair ``(horiz_dim, vert_dim)``:
vertices (0,0), vertical edges (0,1), horizontal edges (1,0), vertical
quadrilateral facets (1,1), horizontal triangle facets (2,0) and prism
cells (2,1).  They are never materialised as lists; counts and numbering
come from closed forms over the base mesh.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import BaseMesh


@dataclass(frozen=True)
class ExtrudedEntityType:
    horiz_dim: int
    vert_dim: int

    def __post_init__(self):
        if self.horiz_dim not in (0, 1, 2) or self.vert_dim not in (0, 1):
            raise ValueError(
                f"invalid entity type ({self.horiz_dim},{self.vert_dim})")


#: The six extruded entity types of a triangle-based prism mesh.
ENTITY_TYPES = tuple(
    ExtrudedEntityType(d1, d2) for d1 in (0, 1, 2) for d2 in (0, 1))


class ExtrudedMesh:
    """A base mesh with ``layers`` uniform vertical intervals.

    There are ``layers + 1`` vertex levels.  ``layer_height`` defaults to
    ``1 / layers`` so the extruded unit square is the unit cube.
    """

    def __init__(self, base: BaseMesh, layers: int, layer_height=None):
        if layers < 1:
            raise ValueError(f"layer count must be >= 1, got {layers}")
        if layer_height is None:
            layer_height = 1.0 / layers
        if layer_height <= 0:
            raise ValueError(f"layer height must be > 0, got {layer_height}")
        self.base = base
        self.layers = int(layers)
        self.layer_height = float(layer_height)

    def __repr__(self):
        return f"ExtrudedMesh({self.base!r}, layers={self.layers})"


def entity_count(mesh: ExtrudedMesh, t: ExtrudedEntityType) -> int:
    """Number of extruded entities of type ``t``.

    A column of ``(d1, d2)`` entities holds ``layers + 1 - d2`` of them:
    one fewer interval than vertex level in the vertical direction.
    """
    n_base = mesh.base.entity_count(t.horiz_dim)
    return n_base * (mesh.layers + 1 - t.vert_dim)


def extrude_coordinates(base_coords, layers: int, layer_height: float):
    """Coordinates of every vertex level, one column per base vertex.

    Returns a flat float64 array: base vertex ``i``, level ``l`` occupies
    slots ``[3*(i*(layers+1) + l), ...+3)`` holding ``(x_i, y_i,
    l*layer_height)``.  Column-innermost storage means the coordinate
    field is numbered exactly like a function space with three values per
    vertex and none elsewhere.
    """
    if layers < 1:
        raise ValueError(f"layer count must be >= 1, got {layers}")
    if layer_height <= 0:
        raise ValueError(f"layer height must be > 0, got {layer_height}")
    base = np.asarray(base_coords, dtype=np.float64)
    n = base.shape[0]
    cols = np.empty((n, layers + 1, 3))
    cols[:, :, 0] = base[:, 0][:, None]
    cols[:, :, 1] = base[:, 1][:, None]
    cols[:, :, 2] = layer_height * np.arange(layers + 1)
    return cols.reshape(-1)
