"""Quadrature on cut cells by subdivision of the unit cell into quadrilaterals.

A cut cell carries exactly two intersected edges. Their cut points define a
straight segment in unit-cell coordinates that approximates the interface.
The two sides of the segment are tiled with quadrilateral subcells and a
tensor Gauss rule is pulled back through each subcell's bilinear map:
``y = sigma_j(x_i)``, ``w = w_i * det(grad sigma_j(x_i))``.

* corner cut (adjacent cut edges): the triangle is split into three quads
  through its edge midpoints and centroid, the pentagon into two quads along
  the line from the segment midpoint to the opposite vertex;
* straight cut (opposite cut edges): one quad per side.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mesh import UNIT_VERTICES, jacobian, map_to_real


def _frozen(*arrays):
    for a in arrays:
        a.flags.writeable = False
    return arrays


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """``n``-point Gauss rule on [0, 1] (read-only arrays)."""
    x, w = np.polynomial.legendre.leggauss(n)
    return _frozen(0.5 * (x + 1.0), 0.5 * w)


@lru_cache(maxsize=None)
def tensor_gauss(m):
    """``m x m`` tensor Gauss rule on the unit square (read-only arrays)."""
    x, w = gauss_legendre(m)
    xs, ys = np.meshgrid(x, x, indexing="ij")
    points = np.stack([xs.ravel(), ys.ravel()], axis=-1)
    return _frozen(points, np.outer(w, w).ravel())


def duffy_rule(corner, m):
    """Rule on the unit cell for integrands with a 1/r singularity at a corner.

    The cell is split into two triangles at local vertex ``corner``; each is
    the collapsed image of the unit square, whose Jacobian vanishes linearly
    at the corner and cancels the singularity.
    """
    gp, gw = tensor_gauss(m)
    a, b = gp[:, 0], gp[:, 1]
    A = UNIT_VERTICES[corner]
    points, weights = [], []
    for k in (1, 2):
        B = UNIT_VERTICES[(corner + k) % 4] - A
        C = UNIT_VERTICES[(corner + k + 1) % 4] - A
        points.append(A + a[:, None] * ((1 - b)[:, None] * B + b[:, None] * C))
        weights.append(gw * a * abs(B[0] * C[1] - B[1] * C[0]))
    return np.concatenate(points), np.concatenate(weights)


def edge_point(edge, t):
    """Unit-cell point at parameter ``t`` along local edge ``edge``."""
    return UNIT_VERTICES[edge] + t * (UNIT_VERTICES[(edge + 1) % 4] - UNIT_VERTICES[edge])


@dataclass(frozen=True)
class CutConfig:
    """Vertex signs of a cell and the parameters of its interface crossings."""

    vertex_signs: tuple
    cut_edges: tuple = ()
    cut_params: tuple = ()

    @property
    def is_cut(self):
        return len(self.cut_edges) > 0

    def validate(self):
        s = np.asarray(self.vertex_signs)
        if s.shape != (4,) or not np.all(np.abs(s) == 1):
            raise ValueError("vertex_signs must be four values of +1/-1")
        if s[0] == s[2] and s[1] == s[3] and s[0] != s[1]:
            raise ValueError("ambiguous cut (under-resolved interface)")
        changing = tuple(int(k) for k in range(4) if s[k] != s[(k + 1) % 4])
        if tuple(sorted(self.cut_edges)) != changing:
            raise ValueError(f"cut edges {self.cut_edges} do not match sign changes {changing}")
        if len(self.cut_params) != len(self.cut_edges):
            raise ValueError("one parameter per cut edge required")
        if any(not 0.0 < t < 1.0 for t in self.cut_params):
            raise ValueError("cut parameters must lie in (0, 1)")

    def segment(self):
        """The two cut points in unit-cell coordinates."""
        return [edge_point(e, t) for e, t in zip(self.cut_edges, self.cut_params)]

    def kind(self):
        if not self.is_cut:
            return "uncut"
        e0, e1 = sorted(self.cut_edges)
        return "straight" if e1 - e0 == 2 else "corner"

    def point_side(self, xi, tol=1e-14):
        """Side (+1/-1) of a unit point relative to the cut segment, ``None`` on it."""
        if not self.is_cut:
            return int(self.vertex_signs[0])
        p, q = self.segment()
        d = q - p

        def line(y):
            return d[0] * (y[1] - p[1]) - d[1] * (y[0] - p[0])

        value = line(np.asarray(xi, dtype=float))
        if abs(value) <= tol:
            return None
        for k in range(4):
            ref = line(UNIT_VERTICES[k])
            if abs(ref) > tol:
                return int(self.vertex_signs[k] if np.sign(ref) == np.sign(value)
                           else -self.vertex_signs[k])
        raise ValueError("degenerate cut segment")


@dataclass(frozen=True)
class SubCell:
    points: np.ndarray  # (4, 2) unit-cell coordinates, counterclockwise
    side: int


@dataclass(frozen=True)
class VolumeRule:
    points: np.ndarray  # (n, 2) on the unit cell
    weights: np.ndarray
    sides: np.ndarray  # +1/-1 per point


@dataclass(frozen=True)
class InterfaceRule:
    points: np.ndarray  # (n, 2) on the unit cell
    weights: np.ndarray  # include the real arclength factor
    normals: np.ndarray  # (n, 2), from Omega1 into Omega2
    real_points: np.ndarray


def subdivide(config):
    """Tile the unit cell with quadrilateral subcells on either side of the cut."""
    config.validate()
    s = config.vertex_signs
    V = UNIT_VERTICES
    if not config.is_cut:
        return [SubCell(V.copy(), int(s[0]))]
    e0, e1 = sorted(config.cut_edges)
    params = dict(zip(config.cut_edges, config.cut_params))
    if e1 - e0 == 2:
        p, q = edge_point(e0, params[e0]), edge_point(e1, params[e1])
        a, b, c, d = V[e0], V[(e0 + 1) % 4], V[(e0 + 2) % 4], V[(e0 + 3) % 4]
        return [
            SubCell(np.array([a, p, q, d]), int(s[e0])),
            SubCell(np.array([p, b, c, q]), int(s[(e0 + 1) % 4])),
        ]
    # corner cut: the vertex shared by the two cut edges is isolated
    k = e1 if (e0 + 1) % 4 == e1 else e0
    pa = edge_point(k, params[k])
    pb = edge_point((k - 1) % 4, params[(k - 1) % 4])
    vk = V[k]
    ma, mb, ms = 0.5 * (vk + pa), 0.5 * (vk + pb), 0.5 * (pa + pb)
    centroid = (vk + pa + pb) / 3.0
    tri, pent = int(s[k]), -int(s[k])
    return [
        SubCell(np.array([vk, ma, centroid, mb]), tri),
        SubCell(np.array([ma, pa, ms, centroid]), tri),
        SubCell(np.array([mb, centroid, ms, pb]), tri),
        SubCell(np.array([pa, V[(k + 1) % 4], V[(k + 2) % 4], ms]), pent),
        SubCell(np.array([ms, V[(k + 2) % 4], V[(k + 3) % 4], pb]), pent),
    ]


def build_volume_rule(config, m):
    if m < 1:
        raise ValueError("base order must be >= 1")
    gp, gw = tensor_gauss(m)
    points, weights, sides = [], [], []
    for sub in subdivide(config):
        points.append(map_to_real(sub.points, gp))
        weights.append(gw * np.linalg.det(jacobian(sub.points, gp)))
        sides.append(np.full(len(gw), sub.side))
    return VolumeRule(np.concatenate(points), np.concatenate(weights), np.concatenate(sides))


def build_interface_rule(cell_vertices, config, n, levelset):
    """Gauss rule on the cut segment, weighted by the real arclength."""
    p, q = config.segment()
    s, w = gauss_legendre(n)
    xi = p + s[:, None] * (q - p)
    tangent = np.einsum("nij,j->ni", jacobian(cell_vertices, xi), q - p)
    weights = w * np.linalg.norm(tangent, axis=1)
    x = map_to_real(cell_vertices, xi)
    return InterfaceRule(xi, weights, levelset.normal(x), x)


@dataclass
class RuleBatch:
    """Quadrature for a group of cells laid out as ``(n_cells, n_points)``.

    Padding points (cut cells with fewer subcells) carry zero weight.
    """

    cells: np.ndarray
    points: np.ndarray  # (B, Q, 2)
    weights: np.ndarray  # (B, Q)
    sides: np.ndarray  # (B, Q)

    def __len__(self):
        return len(self.cells)


def _pad(rules, attr, fill):
    size = max(len(r.weights) for r in rules)
    out = []
    for r in rules:
        a = getattr(r, attr)
        pad = [(0, size - len(a))] + [(0, 0)] * (a.ndim - 1)
        out.append(np.pad(a, pad, constant_values=fill))
    return np.stack(out)


def volume_batches(space, m):
    """Volume rules for all cells of ``space`` grouped by (cut, enriched)."""
    cls = space.classification
    gp, gw = tensor_gauss(m)
    batches = []
    for enriched in (False, True):
        sel = space.cell_enriched == enriched
        uncut = np.flatnonzero(sel & ~cls.is_cut)
        if len(uncut):
            batches.append(RuleBatch(
                uncut,
                np.broadcast_to(gp, (len(uncut),) + gp.shape),
                np.broadcast_to(gw, (len(uncut), len(gw))),
                np.repeat(cls.cell_side[uncut][:, None], len(gw), axis=1),
            ))
        cut = np.flatnonzero(sel & cls.is_cut)
        if len(cut):
            rules = [build_volume_rule(cls.config(c), m) for c in cut]
            batches.append(RuleBatch(
                cut,
                _pad(rules, "points", 0.5),
                _pad(rules, "weights", 0.0),
                _pad(rules, "sides", 1),
            ))
    return batches


def singular_batches(space, point, m):
    """Duffy rules for uncut cells having ``point`` as a vertex, grouped by enriched status."""
    mesh = space.mesh
    cls = space.classification
    dist = np.linalg.norm(mesh.vertices[mesh.cells] - np.asarray(point), axis=-1)
    hit = (dist <= 1e-12 * mesh.cell_diameters[:, None]) & ~cls.is_cut[:, None]
    cells, corners = np.nonzero(hit)
    batches = []
    for enriched in (False, True):
        sel = space.cell_enriched[cells] == enriched
        if not sel.any():
            continue
        rules = [duffy_rule(k, m) for k in corners[sel]]
        pts = np.stack([r[0] for r in rules])
        batches.append(RuleBatch(
            cells[sel], pts, np.stack([r[1] for r in rules]),
            np.repeat(cls.cell_side[cells[sel]][:, None], pts.shape[1], axis=1),
        ))
    return batches


def interface_batch(space, n):
    """Interface rules of all cut cells, ``(n_cut, n)`` layout."""
    cls = space.classification
    cut = np.flatnonzero(cls.is_cut)
    verts = space.mesh.cell_vertices(cut)
    rules = [build_interface_rule(v, cls.config(c), n, space.levelset)
             for c, v in zip(cut, verts)]
    if not rules:
        empty = np.zeros((0, n))
        return cut, np.zeros((0, n, 2)), empty, np.zeros((0, n, 2))
    return (cut, np.stack([r.points for r in rules]), np.stack([r.weights for r in rules]),
            np.stack([r.normals for r in rules]))
