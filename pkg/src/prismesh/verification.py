"""Independent baselines for the numbering and addressing machinery.

Everything here recomputes what the fast paths derive by closed form or
offset arithmetic, the slow way: the numbering as a literal loop handing
out consecutive numbers, and stencil DoF lists materialised explicitly
for every (cell, layer) pair.  The ``verify`` CLI subcommand and the test
suite compare the production routines against these.
"""
from __future__ import annotations

import numpy as np

from .extrusion import ExtrudedMesh
from .fspace import DofLayout, FunctionSpace, all_builtin_layouts, number_dofs
from .mesh import BaseMesh, EntityId, generate_unit_square_mesh


def number_dofs_literal(mesh: ExtrudedMesh, layout: DofLayout):
    """Hand out global numbers one entity at a time.

    Walks base entities (vertices, edges, cells, each in index order);
    for each, walks the layers assigning the level copy's numbers and
    then the connecting entity's, and finishes with the top level copy.
    Returns ``(assignment, total)`` where ``assignment`` maps
    ``((d1, d2), (i, l))`` to the entity's tuple of global numbers.
    """
    layers = mesh.layers
    assignment = {}
    counter = 0
    for d in (0, 1, 2):
        level_dofs = layout.dofs(d, 0)
        conn_dofs = layout.dofs(d, 1)
        for i in range(mesh.base.entity_count(d)):
            for l in range(layers):
                assignment[((d, 0), (i, l))] = tuple(
                    range(counter, counter + level_dofs))
                counter += level_dofs
                assignment[((d, 1), (i, l))] = tuple(
                    range(counter, counter + conn_dofs))
                counter += conn_dofs
            assignment[((d, 0), (i, layers))] = tuple(
                range(counter, counter + level_dofs))
            counter += level_dofs
    return assignment, counter


def materialized_cell_maps(fs: FunctionSpace):
    """Explicit stencil DoF lists for every (cell, layer).

    Reads the numbers straight out of the literal assignment instead of
    using bottom maps plus offsets.  Returns an int64 array of shape
    ``(num_cells, layers, k)`` in slot-table order.
    """
    mesh = fs.mesh
    base = mesh.base
    assignment, total = number_dofs_literal(mesh, fs.layout)
    if total != fs.total_dofs:
        raise AssertionError(
            f"literal numbering total {total} != {fs.total_dofs}")
    slots = fs.slots
    maps = np.empty((base.num_cells, mesh.layers, len(slots)), dtype=np.int64)
    locals_by_kind = (base.cell_vertices, base.cell_edges,
                      np.arange(base.num_cells, dtype=np.int32)[:, None])
    for c in range(base.num_cells):
        for l in range(mesh.layers):
            for j, s in enumerate(slots):
                i = int(locals_by_kind[s.kind][c, s.local])
                if s.level_kind == 0:
                    entry = assignment[((s.base_dim, 0), (i, l))]
                elif s.level_kind == 1:
                    entry = assignment[((s.base_dim, 1), (i, l))]
                else:
                    entry = assignment[((s.base_dim, 0), (i, l + 1))]
                maps[c, l, j] = entry[s.dof]
    return maps


def check_space(mesh: ExtrudedMesh, layout: DofLayout):
    """Cross-check one space against the literal baseline.

    Verifies that the literal numbering is a bijection onto
    ``{0, ..., total-1}``, that its total matches the closed form, that
    vertically adjacent entities hold adjacent numbers, and that bottom
    maps plus offset arithmetic reproduce every materialised list.
    Returns a list of failure descriptions (empty on success).
    """
    failures = []
    fs = number_dofs(mesh, layout)
    assignment, total = number_dofs_literal(mesh, layout)

    if total != fs.total_dofs:
        failures.append(
            f"total mismatch: literal {total}, closed form {fs.total_dofs}")
    flat = sorted(n for dofs in assignment.values() for n in dofs)
    if flat != list(range(total)):
        failures.append("assigned numbers are not exactly 0..total-1")

    for d in (0, 1, 2):
        stride = layout.dofs(d, 0) + layout.dofs(d, 1)
        for i in range(mesh.base.entity_count(d)):
            origin = assignment[((d, 0), (i, 0))]
            if origin and fs.dof_origin_index(d, i) != origin[0]:
                failures.append(f"column origin mismatch at ({d},{i})")
            for l in range(mesh.layers):
                for d2, top in ((0, l + 1), (1, l)):
                    if top > mesh.layers - d2:
                        continue
                    low = assignment[((d, d2), (i, l))]
                    if d2 == 0:
                        high = assignment[((d, 0), (i, l + 1))]
                    else:
                        high = assignment[((d, 1), (i, l + 1))] \
                            if l + 1 <= mesh.layers - 1 else ()
                    for a, b in zip(low, high):
                        if b - a != stride:
                            failures.append(
                                f"vertical stride at ({d},{d2}) column {i}")
                            break

    maps = materialized_cell_maps(fs)
    offsets = fs.offsets.astype(np.int64)
    for l in range(mesh.layers):
        expected = fs.cell_map.astype(np.int64) + l * offsets
        if not np.array_equal(maps[:, l, :], expected):
            failures.append(f"offset addressing differs at layer {l}")
    return failures


def _fixture_meshes():
    one = BaseMesh([[0, 1, 2]], [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    two = BaseMesh([[0, 1, 2], [1, 3, 2]],
                   [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    square = generate_unit_square_mesh(5)
    return (("single-triangle", one), ("two-triangle", two),
            ("unit-square-5", square))


def run_oracle_suite(layers: int = 4, report=print) -> bool:
    """Check all nine layouts against the baselines on fixture meshes."""
    layouts = all_builtin_layouts()
    meshes = _fixture_meshes()
    passed = 0
    total = len(layouts) * len(meshes)
    for name, base in meshes:
        mesh = ExtrudedMesh(base, layers)
        for layout in layouts:
            failures = check_space(mesh, layout)
            if failures:
                for f in failures:
                    report(f"FAIL {layout.name} on {name}: {f}")
            else:
                passed += 1
    report(f"{passed}/{total} layout-mesh-layers oracle checks passed")
    return passed == total
