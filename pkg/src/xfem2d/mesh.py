"""Quadrilateral meshes of a disk and bilinear cell mappings.

The coarse mesh is the classical five-cell ball: a central square surrounded
by four trapezoids whose outer edges lie on the circle. Global refinement
splits every cell into four; midpoints of boundary edges are pushed radially
back onto the circle, everything else stays straight.

Local vertex numbering is counterclockwise on the unit cell::

    3 ---- 2
    |      |
    0 ---- 1

and local edge ``k`` runs from local vertex ``k`` to ``(k + 1) % 4``.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

#: Unit-cell corners in local vertex order.
UNIT_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming quadrilateral mesh.

    Attributes
    ----------
    vertices : (n_vertices, 2) float array
    cells : (n_cells, 4) int array, counterclockwise vertex ids
    radius : radius of the disk the boundary vertices lie on
    level : number of global refinements applied to the coarse mesh
    """

    vertices: np.ndarray
    cells: np.ndarray
    radius: float
    level: int = 0

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_cells(self):
        return len(self.cells)

    @cached_property
    def _topology(self):
        local = np.stack([self.cells, np.roll(self.cells, -1, axis=1)], axis=-1)
        keys = np.sort(local.reshape(-1, 2), axis=1)
        edges, inverse, counts = np.unique(
            keys, axis=0, return_inverse=True, return_counts=True)
        return edges, inverse.reshape(-1, 4), counts

    @property
    def edges(self):
        """(n_edges, 2) vertex ids, lower id first."""
        return self._topology[0]

    @property
    def cell_edges(self):
        """(n_cells, 4) global edge id of each local edge."""
        return self._topology[1]

    @property
    def edge_cell_count(self):
        return self._topology[2]

    @cached_property
    def on_boundary(self):
        flags = np.zeros(self.n_vertices, dtype=bool)
        flags[self.edges[self.edge_cell_count == 1].ravel()] = True
        return flags

    @cached_property
    def cell_diameters(self):
        v = self.vertices[self.cells]
        return np.maximum(np.linalg.norm(v[:, 2] - v[:, 0], axis=1),
                          np.linalg.norm(v[:, 3] - v[:, 1], axis=1))

    def cell_vertices(self, cells=None):
        if cells is None:
            return self.vertices[self.cells]
        return self.vertices[self.cells[cells]]


def build_coarse_disk(radius=1.0, inner_radius=None):
    """Five-cell mesh of the disk of the given radius.

    The central square has its corners on the diagonals at distance
    ``inner_radius`` from the origin; the default ``(sqrt(2) - 1) * radius``
    equalizes cell sizes across the square/trapezoid transition.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if inner_radius is None:
        inner_radius = (np.sqrt(2.0) - 1.0) * radius
    if not 0 < inner_radius < radius:
        raise ValueError("inner_radius must lie in (0, radius)")
    diag = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2.0)
    vertices = np.vstack([radius * diag, inner_radius * diag])
    cells = np.array([
        [4, 5, 6, 7],
        [0, 1, 5, 4],
        [1, 2, 6, 5],
        [2, 3, 7, 6],
        [3, 0, 4, 7],
    ])
    return Mesh(vertices, cells, float(radius), 0)


def refine(mesh):
    """Split every cell into four children.

    New vertices are appended in the order edge midpoints, then cell centers.
    Cell centers use the transfinite (Coons) combination of the four new edge
    midpoints and the corners, which is the plain vertex average for cells
    with straight edges.
    """
    edges = mesh.edges
    mid = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    boundary = mesh.edge_cell_count == 1
    mid[boundary] *= mesh.radius / np.linalg.norm(mid[boundary], axis=1)[:, None]

    cell_edges = mesh.cell_edges
    centers = 0.5 * mid[cell_edges].sum(axis=1) - 0.25 * mesh.vertices[mesh.cells].sum(axis=1)

    nv, ne = mesh.n_vertices, len(edges)
    m = nv + cell_edges
    c = nv + ne + np.arange(mesh.n_cells)
    v = mesh.cells
    children = np.stack([
        np.stack([v[:, 0], m[:, 0], c, m[:, 3]], axis=1),
        np.stack([m[:, 0], v[:, 1], m[:, 1], c], axis=1),
        np.stack([c, m[:, 1], v[:, 2], m[:, 2]], axis=1),
        np.stack([m[:, 3], c, m[:, 2], v[:, 3]], axis=1),
    ], axis=1).reshape(-1, 4)
    vertices = np.vstack([mesh.vertices, mid, centers])
    return Mesh(vertices, children, mesh.radius, mesh.level + 1)


def disk_mesh(refinements=2, radius=1.0):
    mesh = build_coarse_disk(radius)
    for _ in range(refinements):
        mesh = refine(mesh)
    return mesh


# Bilinear Q1 shape functions on the unit cell.

def shape_values(xi):
    """Values of the four bilinear shape functions, shape ``(..., 4)``."""
    xi = np.asarray(xi, dtype=float)
    s, t = xi[..., 0], xi[..., 1]
    return np.stack([(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t], axis=-1)


def shape_gradients(xi):
    """Unit-cell gradients of the shape functions, shape ``(..., 4, 2)``."""
    xi = np.asarray(xi, dtype=float)
    s, t = xi[..., 0], xi[..., 1]
    ds = np.stack([-(1 - t), 1 - t, t, -t], axis=-1)
    dt = np.stack([-(1 - s), -s, s, 1 - s], axis=-1)
    return np.stack([ds, dt], axis=-1)


def map_to_real(cell_vertices, xi):
    """Bilinear map of unit-cell points; ``cell_vertices`` broadcasts as ``(..., 4, 2)``."""
    return np.einsum("...k,...ki->...i", shape_values(xi), cell_vertices)


def jacobian(cell_vertices, xi):
    """``J[..., i, j] = d x_i / d xi_j`` of the bilinear map."""
    return np.einsum("...kj,...ki->...ij", shape_gradients(xi), cell_vertices)


def inverse_map(cell_vertices, x, tol=1e-14, max_iter=50):
    """Unit-cell coordinates of real points by Newton iteration.

    ``cell_vertices`` is a single ``(4, 2)`` cell; ``x`` has shape ``(..., 2)``.
    """
    cell_vertices = np.asarray(cell_vertices, dtype=float)
    x = np.asarray(x, dtype=float)
    xi = np.full(x.shape, 0.5)
    for _ in range(max_iter):
        res = map_to_real(cell_vertices, xi) - x
        step = np.linalg.solve(jacobian(cell_vertices, xi), res[..., None])[..., 0]
        xi = xi - step
        if np.max(np.abs(step), initial=0.0) < tol:
            break
    return xi
