"""Structured meshes of the slope domain and of rectangles.

The slope domain is the polygon::

    (0, 0) -> (W, 0) -> (W, D + H) -> (L + H, D + H) -> (L, D) -> (0, D)

with toe width ``L``, crest width ``R``, foundation depth ``D``, slope
height ``H`` and ``W = L + H + R``; the slope face is inclined at 45 degrees.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .elements import get_element, strain_displacement


class BoundaryTag(IntEnum):
    INTERIOR = 0
    BOTTOM = 1
    LEFT = 2
    RIGHT = 3
    FREE = 4


@dataclass(frozen=True)
class SlopeGeometry:
    left: float = 15.0
    right: float = 20.0
    depth: float = 10.0
    height: float = 10.0

    def __post_init__(self):
        for name in ("left", "right", "depth", "height"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"degenerate slope geometry: {name} must be positive")

    @property
    def width(self) -> float:
        return self.left + self.height + self.right

    @property
    def crest(self):
        """Top corner of the slope face (monitor point A)."""
        return np.array([self.left + self.height, self.depth + self.height])

    def polygon(self):
        L, D, H, W = self.left, self.depth, self.height, self.width
        return np.array([[0, 0], [W, 0], [W, D + H], [L + H, D + H], [L, D], [0, D]], dtype=float)

    def area(self) -> float:
        return polygon_area(self.polygon())


def polygon_area(vertices) -> float:
    """Shoelace formula for a simple polygon given counterclockwise."""
    x, y = np.asarray(vertices, dtype=float).T
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@dataclass
class Mesh:
    coords: np.ndarray
    elements: np.ndarray
    etype: str
    tags: np.ndarray = None
    geometry: SlopeGeometry | None = field(default=None, compare=False)

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float)
        self.elements = np.asarray(self.elements, dtype=np.int64)
        ref = get_element(self.etype)
        if self.elements.ndim != 2 or self.elements.shape[1] != ref.n_nodes:
            raise ValueError(f"{self.etype} connectivity needs {ref.n_nodes} nodes per element")
        if self.tags is None:
            self.tags = tag_boundary(self.coords, self.elements, self.etype)
        self.tags = np.asarray(self.tags, dtype=np.int8)

    @property
    def n_nodes(self) -> int:
        return len(self.coords)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def element_coords(self):
        return self.coords[self.elements]

    def jacobian_check(self) -> bool:
        try:
            strain_displacement(get_element(self.etype), self.element_coords())
        except ValueError:
            return False
        return True

    def area(self) -> float:
        _, wdet = strain_displacement(get_element(self.etype), self.element_coords())
        return float(wdet.sum())

    def nodes_with(self, tag: BoundaryTag):
        return np.flatnonzero(self.tags == tag)

    def nearest_node(self, point) -> int:
        return int(np.argmin(np.linalg.norm(self.coords - np.asarray(point), axis=1)))


def boundary_edges(elements, etype):
    """Element edges used by exactly one element, as node arrays."""
    if etype == "tri3":
        local = [(0, 1), (1, 2), (2, 0)]
    else:
        local = [(0, 4, 1), (1, 5, 2), (2, 6, 3), (3, 7, 0)]
    edges = np.concatenate([elements[:, list(e)] for e in local])
    key = np.sort(edges[:, [0, -1]], axis=1)
    _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    return edges[counts[inv.ravel()] == 1]


def tag_boundary(coords, elements, etype, tol=1e-9):
    """Partition boundary nodes into bottom, left, right and free parts."""
    tags = np.zeros(len(coords), dtype=np.int8)
    on_boundary = np.unique(boundary_edges(elements, etype))
    x, y = coords[on_boundary].T
    xmin, xmax, ymin = coords[:, 0].min(), coords[:, 0].max(), coords[:, 1].min()
    scale = tol * max(xmax - xmin, 1.0)
    t = np.full(len(on_boundary), BoundaryTag.FREE, dtype=np.int8)
    t[np.abs(x - xmax) <= scale] = BoundaryTag.RIGHT
    t[np.abs(x - xmin) <= scale] = BoundaryTag.LEFT
    t[np.abs(y - ymin) <= scale] = BoundaryTag.BOTTOM
    tags[on_boundary] = t
    return tags


def _quad8_block(mapping, s_lines, t_lines):
    """Quad8 block on the parameter grid ``s_lines x t_lines`` (vertex positions in [0, 1])."""
    s_lines, t_lines = np.asarray(s_lines, float), np.asarray(t_lines, float)
    nx, ny = len(s_lines) - 1, len(t_lines) - 1
    s = np.empty(2 * nx + 1)
    s[0::2], s[1::2] = s_lines, 0.5 * (s_lines[:-1] + s_lines[1:])
    t = np.empty(2 * ny + 1)
    t[0::2], t[1::2] = t_lines, 0.5 * (t_lines[:-1] + t_lines[1:])
    S, T = np.meshgrid(s, t, indexing="ij")
    X, Y = mapping(S, T)
    idx = np.arange(S.size).reshape(S.shape)
    i = 2 * np.arange(nx)[:, None]
    j = 2 * np.arange(ny)[None, :]
    conn = np.stack([
        idx[i, j], idx[i + 2, j], idx[i + 2, j + 2], idx[i, j + 2],
        idx[i + 1, j], idx[i + 2, j + 1], idx[i + 1, j + 2], idx[i, j + 1],
    ], axis=-1).reshape(-1, 8)
    return np.column_stack([X.ravel(), Y.ravel()]), conn


def _tri3_block(mapping, nx, ny):
    s = np.linspace(0.0, 1.0, nx + 1)
    t = np.linspace(0.0, 1.0, ny + 1)
    S, T = np.meshgrid(s, t, indexing="ij")
    X, Y = mapping(S, T)
    idx = np.arange(S.size).reshape(S.shape)
    a, b = idx[:-1, :-1], idx[1:, :-1]
    c, d = idx[1:, 1:], idx[:-1, 1:]
    conn = np.concatenate([np.stack([a, b, c], -1).reshape(-1, 3),
                           np.stack([a, c, d], -1).reshape(-1, 3)])
    return np.column_stack([X.ravel(), Y.ravel()]), conn


def _merge(blocks, etype, geometry=None):
    """Glue blocks by coincident coordinates and drop unused nodes."""
    coords, conns, offset = [], [], 0
    for xy, conn in blocks:
        coords.append(xy)
        conns.append(conn + offset)
        offset += len(xy)
    coords = np.concatenate(coords)
    conn = np.concatenate(conns)
    span = np.ptp(coords, axis=0).max()
    key = np.round(coords / span, 10)
    _, first, inv = np.unique(key, axis=0, return_index=True, return_inverse=True)
    conn = inv.ravel()[conn]
    used, renum = np.unique(conn, return_inverse=True)
    return Mesh(coords[first][used], renum.reshape(conn.shape), etype, geometry=geometry)


def rectangle_mesh(etype, nx, ny, width=1.0, height=1.0, origin=(0.0, 0.0)) -> Mesh:
    x0, y0 = origin

    def mapping(s, t):
        return x0 + width * s, y0 + height * t

    get_element(etype)
    if etype == "quad8":
        return _merge([_quad8_block(mapping, np.linspace(0, 1, nx + 1), np.linspace(0, 1, ny + 1))], etype)
    return _merge([_tri3_block(mapping, nx, ny)], etype)


def graded(n, ratio, refine=1):
    """``n`` intervals on [0, 1] growing geometrically by ``ratio`` overall, each split ``refine`` times."""
    if n == 1 or ratio == 1.0:
        base = np.linspace(0.0, 1.0, n + 1)
    else:
        q = ratio ** (1.0 / (n - 1))
        base = np.concatenate([[0.0], np.cumsum(q ** np.arange(n))])
        base /= base[-1]
    pts = [base[:1]]
    for a, b in zip(base[:-1], base[1:]):
        pts.append(np.linspace(a, b, refine + 1)[1:])
    return np.concatenate(pts)


def _counts(g: SlopeGeometry):
    """Level-1 element counts scaled from the default geometry."""
    d = SlopeGeometry()
    def scaled(n, length, ref):
        return max(2, int(round(n * length / ref)))
    return (scaled(QUAD8_TOE_COLUMNS, g.left, d.left),
            scaled(QUAD8_BODY_COLUMNS, g.height + g.right, d.height + d.right),
            scaled(QUAD8_FOUNDATION_ROWS, g.depth, d.depth),
            scaled(QUAD8_SLOPE_ROWS, g.height, d.height))


# Level-1 quad8 layout: columns left of the toe, columns from the face to the
# right side, rows in the foundation and rows across the slope height.  Sizes
# grow geometrically away from the slope face, the toe and the foundation top.
QUAD8_TOE_COLUMNS = 4
QUAD8_BODY_COLUMNS = 13
QUAD8_FOUNDATION_ROWS = 5
QUAD8_SLOPE_ROWS = 8
QUAD8_GRADING = 5.0


def _quad8_slope(level, g: SlopeGeometry) -> Mesh:
    m = 2 ** (level - 1)
    n_toe, n_body, n_found, n_slope = _counts(g)
    L, D, H, W = g.left, g.depth, g.height, g.width
    toe_x = 1.0 - graded(n_toe, QUAD8_GRADING, m)[::-1]      # fine at the toe
    body_x = graded(n_body, QUAD8_GRADING, m)                  # fine at the face
    found_y = 1.0 - graded(n_found, QUAD8_GRADING, m)[::-1]   # fine at the top
    slope_y = graded(n_slope, 1.0, m)

    def toe(s, t):
        return L * s, D * t

    def foundation(s, t):
        return L + (W - L) * s, D * t

    def body(s, t):
        x_face = L + H * t
        return x_face + (W - x_face) * s, D + H * t

    blocks = [_quad8_block(toe, toe_x, found_y),
              _quad8_block(foundation, body_x, found_y),
              _quad8_block(body, body_x, slope_y)]
    return _merge(blocks, "quad8", geometry=g)


def _tri3_slope(level, g: SlopeGeometry) -> Mesh:
    h = 0.5 / 2 ** (level - 1)
    counts = {}
    for name in ("left", "right", "depth", "height"):
        n = getattr(g, name) / h
        if abs(n - round(n)) > 1e-9 * max(n, 1.0):
            raise ValueError(f"triangular slope mesh needs {name} to be a multiple of {h}")
        counts[name] = int(round(n))
    na, nh, ny = counts["left"], counts["height"], counts["depth"]
    nx = na + nh + counts["right"]

    # node (i, j) sits at (i h, j h); rows above the foundation start at the face
    index = -np.ones((nx + 1, ny + nh + 1), dtype=np.int64)
    i, j = np.meshgrid(np.arange(nx + 1), np.arange(ny + nh + 1), indexing="ij")
    inside = i >= np.where(j > ny, na + (j - ny), 0)
    index[inside] = np.arange(inside.sum())
    coords = np.column_stack([i[inside] * h, j[inside] * h])

    ci, cj = np.meshgrid(np.arange(nx), np.arange(ny + nh), indexing="ij")
    first_col = np.where(cj >= ny, na + (cj - ny), 0)
    full = ci >= first_col
    half = (cj >= ny) & (ci == first_col)       # cut by the face along the diagonal
    full &= ~half
    a = index[ci, cj]
    b = index[ci + 1, cj]
    c = index[ci + 1, cj + 1]
    d = index[ci, cj + 1]
    lower = np.stack([a, b, c], -1)
    upper = np.stack([a, c, d], -1)
    conn = np.concatenate([lower[full | half], upper[full]])
    return Mesh(coords, conn, "tri3", geometry=g)


def generate_slope_mesh(level: int, etype: str = "quad8", geometry: SlopeGeometry | None = None) -> Mesh:
    """Structured slope mesh; node counts grow about four times per level."""
    if level not in (1, 2, 3, 4):
        raise ValueError(f"mesh level must be 1..4, got {level}")
    geometry = geometry or SlopeGeometry()
    if etype == "quad8":
        return _quad8_slope(level, geometry)
    if etype == "tri3":
        return _tri3_slope(level, geometry)
    get_element(etype)
    raise ValueError(f"unsupported element type {etype!r}")
