"""System assembly: volume terms, Robin interface coupling, Dirichlet data."""
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .levelset import EnrichmentKind
from .quadrature import interface_batch, singular_batches, volume_batches


def _zero(x):
    return np.zeros(np.shape(x)[:-1])


@dataclass
class ProblemSpec:
    """Data of an interface problem.

    ``coupling`` holds ``alpha[i][k]`` for the interface fluxes
    ``mu_i grad(u_i).n_i = sum_k alpha[i][k] u_k``; ``None`` means no Robin
    coupling (weak-discontinuity problem). ``exact``/``exact_gradient`` take
    points and a side array (+1/-1) and return the matching branch.
    ``source_singularity`` marks a point where the source blows up like 1/r;
    the load on cells touching it is integrated with a Duffy rule.
    """

    mu1: float
    mu2: float
    source: Callable
    kind: EnrichmentKind
    dirichlet: Callable = _zero
    coupling: Optional[np.ndarray] = None
    exact: Optional[Callable] = None
    exact_gradient: Optional[Callable] = None
    source_singularity: Optional[tuple] = None
    name: str = ""

    def __post_init__(self):
        if self.mu1 <= 0 or self.mu2 <= 0:
            raise ValueError("mu1 and mu2 must be positive")
        self.kind = EnrichmentKind(self.kind)
        if self.coupling is not None:
            self.coupling = np.asarray(self.coupling, dtype=float).reshape(2, 2)

    def mu(self, sides):
        return np.where(np.asarray(sides) < 0, self.mu1, self.mu2)


@dataclass
class SparseSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    space: object
    constrained: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


def _to_csr(n, rows, cols, vals, symmetric=False):
    A = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    if symmetric:
        # duplicate summation order differs between (i, j) and (j, i)
        A = ((A + A.T) * 0.5).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def _scatter(dofs, local):
    L = dofs.shape[1]
    rows = np.broadcast_to(dofs[:, :, None], (len(dofs), L, L))
    cols = np.broadcast_to(dofs[:, None, :], (len(dofs), L, L))
    return rows.ravel(), cols.ravel(), local.ravel()


def assemble_volume(space, spec, m=3):
    """``(mu grad u, grad v) = (f, v)`` over all cells and subcells."""
    n = space.n_dofs
    rows, cols, vals = [], [], []
    rhs = np.zeros(n)
    singular = []
    if spec.source_singularity is not None:
        singular = singular_batches(space, spec.source_singularity, m + 2)
    special = np.concatenate([b.cells for b in singular] + [np.zeros(0, dtype=int)])
    for batch in volume_batches(space, m):
        bv = space.evaluate(batch.cells, batch.points, batch.sides)
        w = batch.weights * bv.det
        K = np.einsum("bq,bqai,bqci->bac", w * spec.mu(batch.sides), bv.gradients, bv.gradients)
        F = np.einsum("bq,bqa->ba", w * spec.source(bv.x), bv.values)
        F[np.isin(batch.cells, special)] = 0.0
        r, c, v = _scatter(bv.dofs, K)
        rows.append(r), cols.append(c), vals.append(v)
        np.add.at(rhs, bv.dofs.ravel(), F.ravel())
    for batch in singular:
        bv = space.evaluate(batch.cells, batch.points, batch.sides)
        F = np.einsum("bq,bqa->ba", batch.weights * bv.det * spec.source(bv.x), bv.values)
        np.add.at(rhs, bv.dofs.ravel(), F.ravel())
    A = _to_csr(n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals),
                symmetric=True)
    return SparseSystem(A, rhs, space)


def interface_form(space, coupling, n):
    """Matrix of ``-sum_ik alpha_ik (u_k, v_i)_Gamma`` with one-sided traces."""
    alpha = np.asarray(coupling, dtype=float).reshape(2, 2)
    cells, xi, w, _ = interface_batch(space, n)
    size = space.n_dofs
    if len(cells) == 0:
        return sp.csr_matrix((size, size))
    ones = np.ones(w.shape)
    t1 = space.evaluate(cells, xi, -ones)
    t2 = space.evaluate(cells, xi, ones)
    T = (t1.values, t2.values)
    local = np.zeros(t1.dofs.shape + (t1.dofs.shape[1],))
    for i in range(2):
        for k in range(2):
            if alpha[i, k] != 0.0:
                local -= alpha[i, k] * np.einsum("bq,bqa,bqc->bac", w, T[i], T[k])
    return _to_csr(size, *_scatter(t1.dofs, local), symmetric=bool(np.all(alpha == alpha.T)))


def assemble_interface(space, spec, n, system):
    """Add the Robin coupling terms to ``system``."""
    if spec.coupling is None:
        return system
    if spec.kind is not EnrichmentKind.SIGN:
        raise ValueError("interface coupling requires sign enrichment")
    A = (system.matrix + interface_form(space, spec.coupling, n)).tocsr()
    A.sort_indices()
    return replace(system, matrix=A)


def dirichlet_values(space, spec):
    """Constrained DoFs on boundary vertices and their prescribed values."""
    mesh = space.mesh
    bnd = np.flatnonzero(mesh.on_boundary)
    dofs = [bnd]
    values = [np.asarray(spec.dirichlet(mesh.vertices[bnd]), dtype=float)]
    enr = space.dofmap.enriched_index[bnd]
    enr = enr[enr >= 0]
    dofs.append(enr)
    values.append(np.zeros(len(enr)))
    return np.concatenate(dofs), np.concatenate(values)


def apply_dirichlet(system, spec):
    """Symmetric elimination of boundary DoFs."""
    dofs, values = dirichlet_values(system.space, spec)
    A = system.matrix
    n = A.shape[0]
    fixed = np.zeros(n)
    fixed[dofs] = values
    rhs = system.rhs - A @ fixed
    keep = np.ones(n)
    keep[dofs] = 0.0
    D = sp.diags(keep)
    A = (D @ A @ D + sp.diags(1.0 - keep)).tocsr()
    A.eliminate_zeros()
    A.sort_indices()
    rhs[dofs] = values
    return replace(system, matrix=A, rhs=rhs, constrained=dofs)


def assemble_system(space, spec, q_points=3):
    system = assemble_volume(space, spec, q_points)
    system = assemble_interface(space, spec, q_points, system)
    return apply_dirichlet(system, spec)


def discontinuous_dirichlet_coeffs(g1c, g2c, g_at_v1, g_at_v2, xc, x1, x2):
    """Enriched coefficients reproducing a jump of Dirichlet data at ``xc``.

    ``x1`` lies in Omega1 and ``x2`` in Omega2; the returned ``(a1, a2)``
    make the one-sided limits of ``u_h`` at ``xc`` equal ``g1c`` and ``g2c``
    for sign enrichment.
    """
    x1, x2, xc = (np.asarray(p, dtype=float) for p in (x1, x2, xc))
    length = np.linalg.norm(x2 - x1)
    n1 = np.linalg.norm(x2 - xc) / length
    n2 = np.linalg.norm(xc - x1) / length
    if n1 <= 0.0 or n2 <= 0.0:
        raise ValueError("discontinuity point coincides with an edge vertex")
    base = g_at_v1 * n1 + g_at_v2 * n2
    return (g2c - base) / (2.0 * n1), (g1c - base) / (-2.0 * n2)
