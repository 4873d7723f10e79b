"""Error norms, convergence tables and legacy VTK output."""
from dataclasses import dataclass, field

import numpy as np

from .mesh import map_to_real
from .quadrature import subdivide, volume_batches


def evaluate_solution(space, u, batch):
    """Values and gradients of ``u_h`` on a quadrature batch."""
    bv = space.evaluate(batch.cells, batch.points, batch.sides)
    coef = u[bv.dofs]
    uh = np.einsum("bqa,ba->bq", bv.values, coef)
    guh = np.einsum("bqai,ba->bqi", bv.gradients, coef)
    return bv, uh, guh


def measure_errors(space, u, exact, exact_gradient, order=5):
    """Broken L2 and energy (gradient L2) errors of ``u_h``.

    ``exact``/``exact_gradient`` receive real points and the side array of
    the quadrature points, so each side is compared with its own branch.
    """
    l2 = energy = 0.0
    for batch in volume_batches(space, order):
        bv, uh, guh = evaluate_solution(space, u, batch)
        w = batch.weights * bv.det
        l2 += np.sum(w * (uh - exact(bv.x, batch.sides)) ** 2)
        energy += np.sum(w * np.sum((guh - exact_gradient(bv.x, batch.sides)) ** 2, axis=-1))
    return float(np.sqrt(l2)), float(np.sqrt(energy))


@dataclass
class ErrorReport:
    cells: list = field(default_factory=list)
    dofs: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    energy: list = field(default_factory=list)

    def add(self, cells, dofs, l2, energy):
        self.cells.append(int(cells))
        self.dofs.append(int(dofs))
        self.l2.append(float(l2))
        self.energy.append(float(energy))

    def __len__(self):
        return len(self.l2)

    @staticmethod
    def _rates(errors):
        e = np.asarray(errors)
        return [None] + list(np.log2(e[:-1] / e[1:]))

    @property
    def l2_rates(self):
        return self._rates(self.l2)

    @property
    def energy_rates(self):
        return self._rates(self.energy)


def rate_table(report):
    """Text table of errors and log2 rates between consecutive cycles."""
    lines = ["       L2          Energy"]
    for e0, r0, e1, r1 in zip(report.l2, report.l2_rates, report.energy, report.energy_rates):
        rate0 = "   -" if r0 is None else f"{r0:4.2f}"
        rate1 = "   -" if r1 is None else f"{r1:4.2f}"
        lines.append(f"{e0:.3e} {rate0} {e1:.3e} {rate1}")
    return "\n".join(lines) + "\n"


def vtk_pieces(space, u):
    """Points, quads, point values and cell sides of the visualization grid.

    Uncut cells reuse the mesh vertices. Cut cells are split into their
    quadrature subcells; new points are shared per side only, so points on
    the interface appear once for each side.
    """
    mesh = space.mesh
    cls = space.classification
    points = [p for p in mesh.vertices]
    values = list(u[: mesh.n_vertices])
    quads, sides = [], []
    uncut = np.flatnonzero(~cls.is_cut)
    quads.extend(mesh.cells[uncut].tolist())
    sides.extend(cls.cell_side[uncut].tolist())

    unit_corner = {(0.0, 0.0): 0, (1.0, 0.0): 1, (1.0, 1.0): 2, (0.0, 1.0): 3}
    index = {}
    for cell in np.flatnonzero(cls.is_cut):
        verts = mesh.cell_vertices(cell)
        for sub in subdivide(cls.config(cell)):
            ids = []
            for xi in sub.points:
                corner = unit_corner.get((float(xi[0]), float(xi[1])))
                if corner is not None:
                    ids.append(int(mesh.cells[cell, corner]))
                    continue
                x = map_to_real(verts, xi)
                key = (round(float(x[0]), 12), round(float(x[1]), 12), sub.side)
                if key not in index:
                    index[key] = len(points)
                    points.append(x)
                    bv = space.evaluate([cell], xi[None, None], [[sub.side]])
                    values.append(float(bv.values[0, 0] @ u[bv.dofs[0]]))
                ids.append(index[key])
            quads.append(ids)
            sides.append(sub.side)
    return np.array(points), np.array(quads, dtype=int), np.array(values), np.array(sides)


def write_vtk(space, u, path, name="solution"):
    """Write ``u_h`` as a legacy ASCII VTK unstructured grid of quads."""
    points, quads, values, sides = vtk_pieces(space, u)
    n, c = len(points), len(quads)
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{name}\nASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {n} double\n")
        np.savetxt(fh, np.column_stack([points, np.zeros(n)]), fmt="%.12g")
        fh.write(f"CELLS {c} {5 * c}\n")
        np.savetxt(fh, np.column_stack([np.full(c, 4), quads]), fmt="%d")
        fh.write(f"CELL_TYPES {c}\n")
        np.savetxt(fh, np.full(c, 9), fmt="%d")
        fh.write(f"CELL_DATA {c}\nSCALARS side int 1\nLOOKUP_TABLE default\n")
        np.savetxt(fh, sides, fmt="%d")
        fh.write(f"POINT_DATA {n}\nSCALARS {name} double 1\nLOOKUP_TABLE default\n")
        np.savetxt(fh, values, fmt="%.12g")
