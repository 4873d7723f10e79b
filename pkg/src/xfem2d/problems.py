"""The two built-in interface problems on the unit disk with Gamma = {|x| = 1/2}."""
import numpy as np

from .assembly import ProblemSpec
from .levelset import EnrichmentKind

INTERFACE_RADIUS = 0.5


def _r(x):
    return np.maximum(np.linalg.norm(x, axis=-1), 1e-14)


def _branch(sides, inner, outer):
    return np.where(np.asarray(sides) < 0, inner, outer)


def weak_exact(x, sides):
    r2 = np.sum(np.asarray(x) ** 2, axis=-1)
    return _branch(sides, (-0.25 * r2 + 61.0 / 16.0) / 20.0, 0.25 * (1.0 - r2))


def weak_exact_gradient(x, sides):
    x = np.asarray(x)
    return _branch(np.asarray(sides)[..., None], -x / 40.0, -0.5 * x)


def weak_problem():
    """Kink problem: -div(mu grad u) = 1, mu = 20 inside, 1 outside, u = 0 on the circle."""
    return ProblemSpec(
        mu1=20.0, mu2=1.0,
        source=lambda x: np.ones(np.shape(x)[:-1]),
        kind=EnrichmentKind.ABS,
        exact=weak_exact, exact_gradient=weak_exact_gradient,
        name="weak",
    )


def strong_exact(x, sides):
    r2 = np.sum(np.asarray(x) ** 2, axis=-1)
    return _branch(sides, 0.25 * (2.0 - r2), 0.25 * (1.0 - r2))


def strong_exact_gradient(x, sides):
    return -0.5 * np.asarray(x, dtype=float) + 0.0 * np.asarray(sides)[..., None]


# Robin data consistent with both strong solutions below:
# grad(u_1).n_1 = u_2 - u_1 and grad(u_2).n_2 = u_1 - u_2 on |x| = 1/2.
STRONG_COUPLING = np.array([[-1.0, 1.0], [1.0, -1.0]])


def strong_problem():
    """Jump problem: -laplace(u) = 1, u = 0 on the circle, Robin coupling on Gamma.

    Exact solution (2 - |x|^2)/4 inside, (1 - |x|^2)/4 outside.
    """
    return ProblemSpec(
        mu1=1.0, mu2=1.0,
        source=lambda x: np.ones(np.shape(x)[:-1]),
        kind=EnrichmentKind.SIGN,
        coupling=STRONG_COUPLING,
        exact=strong_exact, exact_gradient=strong_exact_gradient,
        name="strong",
    )


def cone_exact(x, sides):
    r = np.linalg.norm(x, axis=-1)
    return _branch(sides, 0.25 * (2.0 - r), 0.25 * (1.0 - r))


def cone_exact_gradient(x, sides):
    x = np.asarray(x, dtype=float)
    return -0.25 * x / _r(x)[..., None] + 0.0 * np.asarray(sides)[..., None]


def strong_cone_problem():
    """Jump problem with exact solution (2 - |x|)/4 inside, (1 - |x|)/4 outside.

    Needs the singular source 1/(4|x|); the solution is not H2 at the
    origin, so the energy rate sits slightly below one on practical meshes.
    """
    return ProblemSpec(
        mu1=1.0, mu2=1.0,
        source=lambda x: 0.25 / _r(x),
        kind=EnrichmentKind.SIGN,
        coupling=STRONG_COUPLING,
        source_singularity=(0.0, 0.0),
        exact=cone_exact, exact_gradient=cone_exact_gradient,
        name="strong-cone",
    )


PROBLEMS = {"weak": weak_problem, "strong": strong_problem}
