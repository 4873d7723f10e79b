import numpy as np
import pytest

from xfem2d import (CellCategory, CircleLevelSet, EnrichmentKind, Mesh, SpaceMode, build_space,
                    disk_mesh)
from xfem2d.mesh import UNIT_VERTICES, map_to_real
from xfem2d.quadrature import edge_point
from xfem2d.space import classify_cells

from space_checks import edge_trace_mismatch, gradient_fd_error

MODES = list(SpaceMode)


def test_single_cut_cell_classification():
    verts = np.array([[0.4, 0.0], [0.6, 0.0], [0.6, 0.1], [0.4, 0.1]])
    mesh = Mesh(verts, np.array([[0, 1, 2, 3]]), radius=1.0)
    cls = classify_cells(mesh, CircleLevelSet(0.5))
    assert cls.category.tolist() == [CellCategory.CUT]
    cfg = cls.config(0)
    assert cfg.vertex_signs == (-1, 1, 1, -1)
    assert cfg.cut_edges == (0, 2)
    assert cfg.cut_params[0] == pytest.approx(0.5, abs=1e-12)
    # edge 2 runs from (0.6, 0.1) to (0.4, 0.1); crossing at x = sqrt(0.24)
    assert cfg.cut_params[1] == pytest.approx((0.6 - np.sqrt(0.24)) / 0.2, abs=1e-10)


def test_under_resolved_interface_raises():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    mesh = Mesh(verts, np.array([[0, 1, 2, 3]]), radius=1.0)
    with pytest.raises(ValueError, match="under-resolved"):
        classify_cells(mesh, CircleLevelSet(0.1, center=(0.5, 0.5)))


@pytest.mark.parametrize("level", [2, 3, 4])
def test_cut_cells_have_two_crossings(level, levelset):
    mesh = disk_mesh(level)
    cls = classify_cells(mesh, levelset)
    cut = np.flatnonzero(cls.is_cut)
    n_cross = (~np.isnan(cls.edge_t[mesh.cell_edges[cut]])).sum(axis=1)
    assert np.all(n_cross == 2)
    uncut = np.flatnonzero(~cls.is_cut)
    assert np.all(np.isnan(cls.edge_t[mesh.cell_edges[uncut]]))
    for c in cut:
        for p in cls.config(c).segment():
            x = mesh.vertices[mesh.cells[c]]
            assert abs(levelset(map_to_real(x, p))) <= 1e-12


def test_cycle0_categories(spaces):
    cat = spaces[SpaceMode.WEAK_BLEND].category
    assert np.sum(cat == CellCategory.CUT) == 24
    cls = spaces[SpaceMode.WEAK_BLEND].classification
    cut_vertices = np.unique(spaces[SpaceMode.WEAK_BLEND].mesh.cells[cls.is_cut])
    # blending cells: uncut cells touching a cut-cell vertex
    mesh = spaces[SpaceMode.WEAK_BLEND].mesh
    touching = np.isin(mesh.cells, cut_vertices).any(axis=1) & ~cls.is_cut
    np.testing.assert_array_equal(cat == CellCategory.BLENDING, touching)


@pytest.mark.parametrize("mode, total", [(SpaceMode.XFEM_OFF, 89), (SpaceMode.STRONG, 133),
                                         (SpaceMode.WEAK_NOBLEND, 133),
                                         (SpaceMode.WEAK_BLEND, 161)])
def test_dof_counts(spaces, mode, total):
    space = spaces[mode]
    assert space.dofmap.n_standard == 89
    assert space.n_dofs == total
    flagged = np.unique(space.mesh.cells[space.cell_enriched])
    assert space.n_dofs == 89 + len(flagged)
    np.testing.assert_array_equal(space.dofmap.enriched_vertices, flagged)


def test_dof_map_numbering(spaces):
    dm = spaces[SpaceMode.WEAK_BLEND].dofmap
    idx = dm.enriched_index[dm.enriched_index >= 0]
    np.testing.assert_array_equal(idx, np.arange(89, dm.total))
    cls = spaces[SpaceMode.WEAK_BLEND].classification
    np.testing.assert_array_equal(np.flatnonzero(dm.ramp_support),
                                  np.unique(spaces[SpaceMode.WEAK_BLEND].mesh.cells[cls.is_cut]))


@pytest.mark.parametrize("mode", MODES)
def test_kronecker_and_partition_of_unity(spaces, mode):
    space = spaces[mode]
    cls = space.classification
    for cell in range(space.mesh.n_cells):
        signs = cls.vertex_sign[space.mesh.cells[cell]]
        for k, xi in enumerate(UNIT_VERTICES):
            bv = space.evaluate([cell], xi[None, None], [[signs[k]]])
            vals = bv.values[0, 0]
            np.testing.assert_allclose(vals[:4], np.eye(4)[k], atol=1e-15)
            np.testing.assert_allclose(vals[4:], 0.0, atol=1e-15)
        xi = np.random.default_rng(cell).random((1, 5, 2))
        bv = space.evaluate([cell], xi, np.ones((1, 5)))
        np.testing.assert_allclose(bv.values[0, :, :4].sum(axis=-1), 1.0)
        np.testing.assert_allclose(bv.gradients[0, :, :4].sum(axis=-2), 0.0, atol=1e-12)


def test_ramp(spaces):
    space = spaces[SpaceMode.WEAK_BLEND]
    cls = space.classification
    mesh = space.mesh
    support = space.dofmap.ramp_support
    for cell in np.flatnonzero(cls.is_cut):
        assert space.ramp(cell, [0.3, 0.6]) == (1.0, pytest.approx(np.zeros(2)))
    for cell in np.flatnonzero(space.category == CellCategory.BLENDING):
        mask = support[mesh.cells[cell]]
        for k in range(4):
            assert space.ramp(cell, UNIT_VERTICES[k])[0] == float(mask[k])
            if mask[k] and mask[(k + 1) % 4]:
                for t in (0.25, 0.5, 0.9):
                    assert space.ramp(cell, edge_point(k, t))[0] == pytest.approx(1.0)


@pytest.mark.parametrize("mode", MODES)
def test_gradients_match_finite_differences(spaces, mode):
    assert gradient_fd_error(spaces[mode], 300, np.random.default_rng(7)) <= 1e-5


def test_gradients_on_cycle1(levelset):
    space = build_space(disk_mesh(3), levelset, EnrichmentKind.ABS, SpaceMode.WEAK_BLEND)
    assert gradient_fd_error(space, 300, np.random.default_rng(8)) <= 1e-5


def test_weak_blend_is_conforming(spaces):
    rows = edge_trace_mismatch(spaces[SpaceMode.WEAK_BLEND])
    assert max(j for _, _, j in rows) <= 1e-12


def test_weak_noblend_is_nonconforming(spaces):
    space = spaces[SpaceMode.WEAK_NOBLEND]
    cat = space.category
    rows = edge_trace_mismatch(space)
    jumps = [j for c1, c2, j in rows
             if {cat[c1], cat[c2]} == {CellCategory.CUT, CellCategory.BLENDING}]
    assert max(jumps) > 1e-6
    # edges away from the enriched region stay conforming
    far = [j for c1, c2, j in rows
           if cat[c1] == cat[c2] == CellCategory.STANDARD]
    assert max(far) <= 1e-12


def test_strong_enrichment_is_piecewise_scaled_hat(spaces):
    space = spaces[SpaceMode.STRONG]
    cls = space.classification
    rng = np.random.default_rng(3)
    for cell in np.flatnonzero(cls.is_cut):
        xi = rng.uniform(0.05, 0.95, (1, 6, 2))
        for side in (-1, 1):
            bv = space.evaluate([cell], xi, np.full((1, 6), side))
            N, M = bv.values[0, :, :4], bv.values[0, :, 4:]
            shift = side - cls.vertex_sign[space.mesh.cells[cell]]
            np.testing.assert_allclose(M, N * shift, atol=1e-15)
            np.testing.assert_allclose(bv.gradients[0, :, 4:],
                                       bv.gradients[0, :, :4] * shift[:, None], atol=1e-14)


def test_eval_basis(spaces):
    space = spaces[SpaceMode.STRONG]
    cell = int(np.flatnonzero(space.classification.is_cut)[0])
    out = space.eval_basis(cell, [0.5, 0.5], side=1)
    assert len(out) == 8
    assert [b.kind for b in out] == ["standard"] * 4 + ["enriched"] * 4
    assert sum(b.value for b in out[:4]) == pytest.approx(1.0)
    assert out[4].vertex == out[0].vertex == space.mesh.cells[cell, 0]
    p, q = space.classification.config(cell).segment()
    with pytest.raises(ValueError, match="side required"):
        space.eval_basis(cell, 0.5 * (p + q))


def test_mixed_batch_rejected(spaces):
    space = spaces[SpaceMode.WEAK_BLEND]
    cells = [int(np.flatnonzero(space.cell_enriched)[0]),
             int(np.flatnonzero(~space.cell_enriched)[0])]
    with pytest.raises(ValueError, match="mixed"):
        space.evaluate(cells, np.full((2, 1, 2), 0.5), np.ones((2, 1)))
