"""Cell classification, enriched DoF distribution and basis evaluation.

Global unknowns are one standard DoF per mesh vertex (numbered like the
vertices) followed by the enriched DoFs. On an enriched cell the local basis
has eight functions: the four bilinear ``N_i`` and the shifted enrichments

    M_i = N_i * (psi - psi(x_i)) * r

where ``r`` is the ramp on blending cells and 1 elsewhere.
"""
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from .levelset import SNAP, EnrichmentKind, bisect_edges, snapped_sign
from .mesh import jacobian, map_to_real, shape_gradients, shape_values
from .quadrature import CutConfig


class CellCategory(IntEnum):
    STANDARD = 0
    CUT = 1
    BLENDING = 2


class SpaceMode(Enum):
    XFEM_OFF = "xfem_off"
    STRONG = "strong"
    WEAK_NOBLEND = "weak_noblend"
    WEAK_BLEND = "weak_blend"


@dataclass(eq=False)
class Classification:
    mesh: object
    category: np.ndarray  # (n_cells,) CellCategory values
    cell_side: np.ndarray  # (n_cells,) +1/-1, 0 on cut cells
    vertex_phi: np.ndarray
    vertex_sign: np.ndarray  # snapped, +1/-1
    edge_t: np.ndarray  # crossing parameter along (lower id -> higher id), nan if uncut

    @property
    def is_cut(self):
        return self.category == CellCategory.CUT

    def __post_init__(self):
        self._configs = {}

    def config(self, cell):
        """Unit-cell cut configuration of ``cell``."""
        cfg = self._configs.get(cell)
        if cfg is None:
            cfg = self._build_config(cell)
            self._configs[cell] = cfg
        return cfg

    def _build_config(self, cell):
        mesh = self.mesh
        vids = mesh.cells[cell]
        signs = tuple(int(s) for s in self.vertex_sign[vids])
        edges, params = [], []
        for k in range(4):
            t = self.edge_t[mesh.cell_edges[cell, k]]
            if np.isnan(t):
                continue
            # stored parameter runs from the lower vertex id
            edges.append(k)
            params.append(float(t if vids[k] < vids[(k + 1) % 4] else 1.0 - t))
        return CutConfig(signs, tuple(edges), tuple(params))


def vertex_snap_tolerance(mesh):
    """Per-vertex snapping tolerance: SNAP times the smallest adjacent cell diameter."""
    tol = np.full(mesh.n_vertices, np.inf)
    np.minimum.at(tol, mesh.cells.ravel(), np.repeat(mesh.cell_diameters, 4))
    return SNAP * tol


def classify_cells(mesh, levelset):
    """Tag cells as cut, blending or standard and locate edge crossings."""
    phi = levelset(mesh.vertices)
    sign = snapped_sign(phi, vertex_snap_tolerance(mesh))
    cs = sign[mesh.cells]
    cut = cs.min(axis=1) != cs.max(axis=1)

    uncut = np.flatnonzero(~cut)
    if len(uncut):
        centers = map_to_real(mesh.cell_vertices(uncut), np.array([0.5, 0.5]))
        center_sign = snapped_sign(levelset(centers), SNAP * mesh.cell_diameters[uncut])
        bad = center_sign != cs[uncut, 0]
        if bad.any():
            raise ValueError(f"interface under-resolved in cell {uncut[bad][0]}")

    edges = mesh.edges
    crossing = np.flatnonzero(sign[edges[:, 0]] != sign[edges[:, 1]])
    edge_t = np.full(len(edges), np.nan)
    if len(crossing):
        a = mesh.vertices[edges[crossing, 0]]
        b = mesh.vertices[edges[crossing, 1]]
        edge_t[crossing] = bisect_edges(levelset, a, b, sign[edges[crossing, 0]])

    near_cut = np.zeros(mesh.n_vertices, dtype=bool)
    near_cut[mesh.cells[cut].ravel()] = True
    blending = ~cut & near_cut[mesh.cells].any(axis=1)
    category = np.full(mesh.n_cells, CellCategory.STANDARD, dtype=int)
    category[cut] = CellCategory.CUT
    category[blending] = CellCategory.BLENDING
    cell_side = np.where(cut, 0, cs[:, 0]).astype(int)
    return Classification(mesh, category, cell_side, phi, sign, edge_t)


@dataclass(eq=False)
class DofMap:
    n_standard: int
    enriched_index: np.ndarray  # (n_vertices,) global index or -1
    ramp_support: np.ndarray  # (n_vertices,) bool, vertices of cut cells
    mode: SpaceMode

    @property
    def n_enriched(self):
        return int((self.enriched_index >= 0).sum())

    @property
    def total(self):
        return self.n_standard + self.n_enriched

    @property
    def standard_dofs(self):
        return np.arange(self.n_standard)

    @property
    def enriched_vertices(self):
        return np.flatnonzero(self.enriched_index >= 0)


def enriched_cells(category, mode):
    mode = SpaceMode(mode)
    if mode is SpaceMode.XFEM_OFF:
        return np.zeros(len(category), dtype=bool)
    enriched = category == CellCategory.CUT
    if mode is SpaceMode.WEAK_BLEND:
        enriched |= category == CellCategory.BLENDING
    return enriched


def distribute_dofs(mesh, category, mode):
    mode = SpaceMode(mode)
    category = np.asarray(category)
    ramp_support = np.zeros(mesh.n_vertices, dtype=bool)
    ramp_support[mesh.cells[category == CellCategory.CUT].ravel()] = True
    flagged = np.zeros(mesh.n_vertices, dtype=bool)
    flagged[mesh.cells[enriched_cells(category, mode)].ravel()] = True
    index = np.full(mesh.n_vertices, -1)
    index[flagged] = mesh.n_vertices + np.arange(flagged.sum())
    return DofMap(mesh.n_vertices, index, ramp_support, mode)


@dataclass(eq=False)
class BasisValues:
    """Local basis at a ``(B, Q)`` block of points.

    ``values``/``gradients`` have ``L = 4`` (standard cells) or ``L = 8``
    (enriched cells) functions; ``dofs`` is ``(B, L)``.
    """

    x: np.ndarray
    det: np.ndarray
    values: np.ndarray
    gradients: np.ndarray
    dofs: np.ndarray


@dataclass(frozen=True)
class LocalBasisEval:
    value: float
    gradient: np.ndarray
    dof: int
    kind: str  # "standard" or "enriched"
    vertex: int


class EnrichedSpace:
    """Q1 space extended by shifted enrichment on cut (and blending) cells."""

    def __init__(self, mesh, levelset, kind, mode):
        self.mesh = mesh
        self.levelset = levelset
        self.kind = EnrichmentKind(kind)
        self.mode = SpaceMode(mode)
        self.classification = classify_cells(mesh, levelset)
        self.dofmap = distribute_dofs(mesh, self.classification.category, self.mode)
        self.cell_enriched = enriched_cells(self.classification.category, self.mode)
        self.cell_ramped = (self.mode is SpaceMode.WEAK_BLEND) & (
            self.classification.category == CellCategory.BLENDING)
        cls = self.classification
        if self.kind is EnrichmentKind.SIGN:
            self.vertex_shift = cls.vertex_sign.astype(float)
        else:
            self.vertex_shift = np.abs(cls.vertex_phi)

    @property
    def n_dofs(self):
        return self.dofmap.total

    @property
    def category(self):
        return self.classification.category

    def evaluate(self, cells, xi, sides):
        """Basis values and real gradients at unit points ``xi`` of shape ``(B, Q, 2)``.

        All cells in one call must share the same enriched status. ``sides``
        (+1/-1, shape ``(B, Q)``) selects the branch of the enrichment.
        """
        cells = np.asarray(cells)
        xi = np.asarray(xi, dtype=float)
        mesh = self.mesh
        verts = mesh.vertices[mesh.cells[cells]][:, None]
        N = shape_values(xi)
        dN = shape_gradients(xi)
        J = jacobian(verts, xi)
        det = np.linalg.det(J)
        Jinv = np.linalg.inv(J)
        grad = np.einsum("bqkj,bqji->bqki", dN, Jinv)
        x = map_to_real(verts, xi)
        vids = mesh.cells[cells]

        enriched = self.cell_enriched[cells]
        if not enriched.any():
            return BasisValues(x, det, N, grad, vids)
        if not enriched.all():
            raise ValueError("mixed enriched and standard cells in one batch")

        s = np.asarray(sides, dtype=float)
        if self.kind is EnrichmentKind.SIGN:
            psi = s
            gpsi = np.zeros_like(x)
        else:
            psi = s * self.levelset(x)
            gpsi = s[..., None] * self.levelset.gradient(x)
        shift = psi[..., None] - self.vertex_shift[vids][:, None, :]

        ramped = self.cell_ramped[cells]
        r = np.ones(N.shape[:-1])
        gr = np.zeros_like(x)
        if ramped.any():
            mask = self.dofmap.ramp_support[vids[ramped]].astype(float)[:, None, :]
            r[ramped] = np.sum(N[ramped] * mask, axis=-1)
            gr[ramped] = np.sum(grad[ramped] * mask[..., None], axis=-2)

        M = N * shift * r[..., None]
        gM = (grad * (shift * r[..., None])[..., None]
              + (N * r[..., None])[..., None] * gpsi[..., None, :]
              + (N * shift)[..., None] * gr[..., None, :])
        dofs = np.concatenate([vids, self.dofmap.enriched_index[vids]], axis=1)
        return BasisValues(x, det, np.concatenate([N, M], axis=-1),
                           np.concatenate([grad, gM], axis=-2), dofs)

    def ramp(self, cell, xi):
        """Ramp value and real gradient on ``cell``; 1 on cut cells."""
        xi = np.asarray(xi, dtype=float)
        if self.classification.category[cell] == CellCategory.CUT:
            return 1.0, np.zeros(2)
        verts = self.mesh.cell_vertices(cell)
        mask = self.dofmap.ramp_support[self.mesh.cells[cell]].astype(float)
        grad = shape_gradients(xi) @ np.linalg.inv(jacobian(verts, xi))
        return float(shape_values(xi) @ mask), mask @ grad

    def point_side(self, cell, xi):
        """Side of a unit point of ``cell``; ``None`` on the discrete interface."""
        cls = self.classification
        if cls.category[cell] != CellCategory.CUT:
            return int(cls.cell_side[cell])
        return cls.config(cell).point_side(xi)

    def eval_basis(self, cell, xi, side=None):
        """All local basis functions of ``cell`` at one unit point."""
        if side is None:
            side = self.point_side(cell, xi)
            if side is None:
                if self.kind is EnrichmentKind.SIGN and self.cell_enriched[cell]:
                    raise ValueError("side required on interface")
                side = 1
        bv = self.evaluate([cell], np.asarray(xi, dtype=float)[None, None], [[int(side)]])
        vids = self.mesh.cells[cell]
        out = []
        for a, dof in enumerate(bv.dofs[0]):
            out.append(LocalBasisEval(float(bv.values[0, 0, a]), bv.gradients[0, 0, a].copy(),
                                      int(dof), "standard" if a < 4 else "enriched",
                                      int(vids[a % 4])))
        return out


def build_space(mesh, levelset, kind, mode):
    return EnrichedSpace(mesh, levelset, kind, mode)
