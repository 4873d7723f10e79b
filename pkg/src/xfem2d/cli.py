"""Command-line driver: refinement cycles, console report and VTK output."""
import argparse
import logging
import os
import re
import sys
from dataclasses import dataclass

from .assembly import assemble_system
from .levelset import CircleLevelSet
from .mesh import disk_mesh, refine
from .post import ErrorReport, measure_errors, rate_table, write_vtk
from .problems import INTERFACE_RADIUS, PROBLEMS
from .solver import SolverConfig, solve
from .space import EnrichedSpace, SpaceMode

log = logging.getLogger(__name__)


class ParameterError(ValueError):
    pass


@dataclass
class Params:
    use_xfem: bool = True
    blending: bool = True
    cycles: int = 6
    q_points: int = 3

    def __post_init__(self):
        if self.cycles < 1:
            raise ParameterError("Number of Cycles must be >= 1")
        if self.q_points < 1:
            raise ParameterError("q_points must be >= 1")


def _bool(text):
    value = text.strip().lower()
    if value in ("true", "yes", "1"):
        return True
    if value in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_KEYS = {
    "Using XFEM": ("use_xfem", _bool),
    "blending": ("blending", _bool),
    "Number of Cycles": ("cycles", int),
    "q_points": ("q_points", int),
}
_LINE = re.compile(r"^set\s+(.+?)\s*=\s*(.*?)\s*$")


def parse_params(text):
    """Parse ``set <key> = <value>`` lines; missing keys keep their defaults."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LINE.match(line)
        if not match:
            raise ParameterError(f"line {lineno}: malformed entry {raw.strip()!r}")
        key = re.sub(r"\s+", " ", match.group(1))
        if key not in _KEYS:
            raise ParameterError(f"line {lineno}: unknown parameter {key!r}")
        field_name, convert = _KEYS[key]
        try:
            values[field_name] = convert(match.group(2))
        except ValueError as exc:
            raise ParameterError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return Params(**values)


def space_mode(params, problem):
    if not params.use_xfem:
        return SpaceMode.XFEM_OFF
    if problem == "strong":
        return SpaceMode.STRONG
    return SpaceMode.WEAK_BLEND if params.blending else SpaceMode.WEAK_NOBLEND


def run(params, problem, out=None, output_dir=".", write_files=True, solver=None):
    """Run all refinement cycles of a built-in problem and return the error report."""
    out = sys.stdout if out is None else out
    spec = PROBLEMS[problem]()
    mode = space_mode(params, problem)
    levelset = CircleLevelSet(INTERFACE_RADIUS)
    mesh = disk_mesh(2)
    report = ErrorReport()
    for cycle in range(params.cycles):
        if cycle > 0:
            mesh = refine(mesh)
        space = EnrichedSpace(mesh, levelset, spec.kind, mode)
        system = assemble_system(space, spec, params.q_points)
        u = solve(system, solver)
        l2, energy = measure_errors(space, u, spec.exact, spec.exact_gradient,
                                    params.q_points + 2)
        report.add(mesh.n_cells, space.n_dofs, l2, energy)
        out.write(f"Cycle {cycle}:\n")
        out.write(f"   Number of active cells:       {mesh.n_cells}\n")
        out.write(f"   Number of degrees of freedom: {space.n_dofs}\n")
        out.write(f"   L2 error = {l2:g}\n")
        out.write(f"   energy error = {energy:g}\n")
        out.flush()
        if write_files:
            write_vtk(space, u, os.path.join(output_dir, f"solution-{cycle}.vtk"))
    out.write("\n" + rate_table(report))
    return report


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="xfem2d", description="XFEM convergence study for a circular interface.")
    parser.add_argument("problem", choices=sorted(PROBLEMS))
    parser.add_argument("--params", help="parameter file with 'set <key> = <value>' lines")
    parser.add_argument("--output-dir", default=".", help="directory for solution-<cycle>.vtk")
    parser.add_argument("--no-vtk", action="store_true", help="skip VTK output")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        params = Params()
        if args.params:
            with open(args.params) as fh:
                params = parse_params(fh.read())
        run(params, args.problem, output_dir=args.output_dir, write_files=not args.no_vtk)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
