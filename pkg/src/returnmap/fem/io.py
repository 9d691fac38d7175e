"""Plain-text mesh files and legacy ASCII VTK output.

Mesh file layout (whitespace separated, ``#`` starts a comment)::

    etype quad8
    nodes <n>
    <x> <y> <tag>          # n lines; tag 0 interior, 1 bottom, 2 left, 3 right, 4 free
    elements <m>
    <node ids ...>         # m lines, zero-based, counterclockwise corners first
"""
from __future__ import annotations

import numpy as np

from .elements import get_element
from .mesh import Mesh


def write_mesh(path, mesh: Mesh):
    with open(path, "w") as fh:
        fh.write(f"etype {mesh.etype}\n")
        fh.write(f"nodes {mesh.n_nodes}\n")
        for (x, y), tag in zip(mesh.coords, mesh.tags):
            fh.write(f"{x:.17g} {y:.17g} {int(tag)}\n")
        fh.write(f"elements {mesh.n_elements}\n")
        for conn in mesh.elements:
            fh.write(" ".join(str(int(n)) for n in conn) + "\n")


def _records(path):
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].split()
            if line:
                yield lineno, line


def read_mesh(path) -> Mesh:
    rec = _records(path)

    def header(name):
        lineno, words = next(rec)
        if len(words) != 2 or words[0] != name:
            raise ValueError(f"{path}:{lineno}: expected '{name} <value>'")
        return words[1]

    etype = header("etype")
    get_element(etype)
    n = int(header("nodes"))
    coords, tags = np.empty((n, 2)), np.empty(n, dtype=np.int8)
    for k in range(n):
        lineno, words = next(rec)
        if len(words) != 3:
            raise ValueError(f"{path}:{lineno}: node line needs 'x y tag'")
        coords[k] = float(words[0]), float(words[1])
        tags[k] = int(words[2])
    m = int(header("elements"))
    conn = [list(map(int, next(rec)[1])) for _ in range(m)]
    return Mesh(coords, np.array(conn, dtype=np.int64).reshape(m, -1), etype, tags=tags)


def element_average(values, n_elements):
    """Mean of integration-point values over each element."""
    return np.asarray(values).reshape(n_elements, -1).mean(axis=1)


def write_vtk(path, mesh: Mesh, point_data=None, cell_data=None, title="returnmap fields"):
    """Legacy ASCII unstructured grid.

    ``point_data`` values are ``(n_nodes,)`` scalars or ``(n_nodes, 2)``
    vectors (padded to 3D); ``cell_data`` values are ``(n_elements,)``.
    """
    ref = get_element(mesh.etype)
    lines = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {mesh.n_nodes} double"]
    lines += [f"{x:.9g} {y:.9g} 0" for x, y in mesh.coords]
    k = ref.n_nodes
    lines.append(f"CELLS {mesh.n_elements} {mesh.n_elements * (k + 1)}")
    lines += [f"{k} " + " ".join(map(str, c)) for c in mesh.elements]
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    lines += [str(ref.vtk_type)] * mesh.n_elements
    if point_data:
        lines.append(f"POINT_DATA {mesh.n_nodes}")
        lines += _fields(point_data, mesh.n_nodes)
    if cell_data:
        lines.append(f"CELL_DATA {mesh.n_elements}")
        lines += _fields(cell_data, mesh.n_elements)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _fields(data, n):
    out = []
    for name, values in data.items():
        v = np.asarray(values, dtype=float)
        if v.shape[0] != n:
            raise ValueError(f"field {name!r} has {v.shape[0]} entries, expected {n}")
        if v.ndim == 1:
            out += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            out += [f"{x:.9g}" for x in v]
        else:
            v3 = np.zeros((n, 3))
            v3[:, :v.shape[1]] = v
            out.append(f"VECTORS {name} double")
            out += [f"{a:.9g} {b:.9g} {c:.9g}" for a, b, c in v3]
    return out
