"""Linear solver: Jacobi-preconditioned CG with a MINRES fallback."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse.linalg as spla

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual


class IndefiniteMatrix(Exception):
    pass


@dataclass
class SolverConfig:
    method: str = "cg"  # "cg" or "minres"
    rel_tol: float = 1e-12
    max_iters: Optional[int] = None  # default 10 * n

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.method not in ("cg", "minres"):
            raise ValueError(f"unknown method {self.method!r}")


def residual_ok(A, b, x, rel_tol, r=None):
    """True if ``|b - A x| <= max(rel_tol |b|, 16 eps |(|A| |x| + |b|)|)``."""
    if r is None:
        r = b - A @ x
    floor = 16 * np.finfo(float).eps * np.linalg.norm(abs(A) @ np.abs(x) + np.abs(b))
    return np.linalg.norm(r) <= max(rel_tol * np.linalg.norm(b), floor)


def pcg(A, b, rel_tol=1e-12, max_iters=None, check_every=50):
    """Conjugate gradients with diagonal preconditioning.

    The recursively updated residual is replaced by the true residual
    ``b - A x`` every ``check_every`` steps and before declaring convergence.
    Convergence means ``|b - A x| <= max(rel_tol |b|, floor)`` where
    ``floor = 16 eps |(|A| |x| + |b|)|`` is the rounding level of the residual
    itself; below it no double-precision ``x`` can do better.
    Raises ``IndefiniteMatrix`` on nonpositive curvature.
    """
    n = len(b)
    max_iters = 10 * n if max_iters is None else max_iters
    bnorm = np.linalg.norm(b)
    x = np.zeros(n)
    if bnorm == 0.0:
        return x, 0
    tol = rel_tol * bnorm
    d = A.diagonal()
    if np.any(d <= 0):
        raise IndefiniteMatrix("nonpositive diagonal")
    inv_d = 1.0 / d
    r = b.copy()
    z = inv_d * r
    p = z.copy()
    rz = r @ z
    for it in range(1, max_iters + 1):
        Ap = A @ p
        curvature = p @ Ap
        if curvature <= 0.0:
            raise IndefiniteMatrix(f"negative curvature at iteration {it}")
        alpha = rz / curvature
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= tol or it % check_every == 0:
            r = b - A @ x
            if residual_ok(A, b, x, rel_tol, r):
                return x, it
        z = inv_d * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError("CG did not converge", np.linalg.norm(b - A @ x) / bnorm)


def solve(system, config=None):
    """Solve ``system.matrix u = system.rhs``."""
    config = config or SolverConfig()
    A, b = system.matrix, system.rhs
    n = len(b)
    max_iters = config.max_iters or 10 * n
    if config.method == "cg":
        try:
            u, its = pcg(A, b, config.rel_tol, max_iters)
            log.debug("CG converged in %d iterations", its)
            return u
        except IndefiniteMatrix as exc:
            log.info("CG stopped (%s); switching to MINRES", exc)
    u, _ = spla.minres(A, b, rtol=config.rel_tol, maxiter=max_iters)
    if not residual_ok(A, b, u, config.rel_tol):
        bnorm = np.linalg.norm(b) or 1.0
        raise SolverError("MINRES did not converge", np.linalg.norm(b - A @ u) / bnorm)
    return u
