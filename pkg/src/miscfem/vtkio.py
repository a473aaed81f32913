"""Legacy ASCII VTK output of scalar fields on a triangulation."""

from __future__ import annotations

import numpy as np

from .meshing import Mesh


def write_vtk(path, mesh: Mesh, point_scalars=None, cell_scalars=None,
              title="miscfem fields"):
    """Write an unstructured-grid VTK file (triangle cells, type 5).

    point_scalars / cell_scalars are dicts mapping field names to arrays
    of one value per vertex / per triangle.
    """
    point_scalars = point_scalars or {}
    cell_scalars = cell_scalars or {}
    V, T = mesh.num_vertices, mesh.num_triangles
    for name, values in point_scalars.items():
        if np.shape(values) != (V,):
            raise ValueError(f"point field {name!r} must have {V} values")
    for name, values in cell_scalars.items():
        if np.shape(values) != (T,):
            raise ValueError(f"cell field {name!r} must have {T} values")

    lines = ["# vtk DataFile Version 2.0", title, "ASCII",
             "DATASET UNSTRUCTURED_GRID", f"POINTS {V} double"]
    for x, y in mesh.vertices:
        lines.append(f"{float(x)!r} {float(y)!r} 0.0")
    lines.append(f"CELLS {T} {4 * T}")
    for a, b, c in mesh.triangles:
        lines.append(f"3 {a} {b} {c}")
    lines.append(f"CELL_TYPES {T}")
    lines.extend(["5"] * T)

    if point_scalars:
        lines.append(f"POINT_DATA {V}")
        for name, values in point_scalars.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(repr(float(v)) for v in values)
    if cell_scalars:
        lines.append(f"CELL_DATA {T}")
        for name, values in cell_scalars.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(repr(float(v)) for v in values)

    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
