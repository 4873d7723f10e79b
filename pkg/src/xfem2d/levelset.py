"""Level-set interface, enrichment functions and edge/interface intersection."""
from enum import Enum, IntEnum

import numpy as np

#: Relative snapping tolerance; vertices with |phi| below SNAP * diameter count as Omega2.
SNAP = 1e-10


class EnrichmentKind(Enum):
    SIGN = "sign"  # strong discontinuity, jump in the solution
    ABS = "abs"  # weak discontinuity, kink in the solution


class Side(IntEnum):
    """Subdomain label; the value is the sign of the level set there."""

    OMEGA1 = -1
    OMEGA2 = 1


class CircleLevelSet:
    """Signed distance to a circle, negative inside."""

    def __init__(self, radius=0.5, center=(0.0, 0.0)):
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x - self.center, axis=-1) - self.radius

    value = __call__

    def gradient(self, x):
        d = np.asarray(x, dtype=float) - self.center
        r = np.linalg.norm(d, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = d / r
        return np.where(r > 0, g, 0.0)

    def point(self, angle):
        """Point on the interface at the given polar angle."""
        angle = np.asarray(angle, dtype=float)
        return self.center + self.radius * np.stack([np.cos(angle), np.sin(angle)], axis=-1)

    def normal(self, x):
        """Unit normal pointing from Omega1 into Omega2."""
        g = self.gradient(x)
        norm = np.linalg.norm(g, axis=-1, keepdims=True)
        if np.any(norm == 0):
            raise ValueError("level-set gradient vanishes; normal undefined")
        return g / norm


def side_of(levelset, x, side=None):
    """Sign array for points ``x``; an explicit ``side`` overrides the level set."""
    phi = levelset(x)
    if side is not None:
        return np.broadcast_to(np.asarray(side, dtype=float), phi.shape), phi
    if np.any(phi == 0):
        raise ValueError("side required on interface")
    return np.sign(phi), phi


def psi(kind, levelset, x, side=None):
    """Enrichment function sign(phi) or |phi|.

    With ``side`` given, points are treated as lying on that side, which gives
    the one-sided limit on the interface.
    """
    kind = EnrichmentKind(kind)
    if kind is EnrichmentKind.ABS and side is None:
        return np.abs(levelset(x))
    s, phi = side_of(levelset, x, side)
    if kind is EnrichmentKind.SIGN:
        return s.copy()
    return s * phi


def grad_psi(kind, levelset, x, side=None):
    kind = EnrichmentKind(kind)
    s, _ = side_of(levelset, x, side)
    if kind is EnrichmentKind.SIGN:
        return np.zeros(np.shape(x), dtype=float)
    return s[..., None] * levelset.gradient(x)


def snapped_sign(phi, tol):
    """+1/-1 per value; values within ``tol`` of zero count as Omega2."""
    phi = np.asarray(phi, dtype=float)
    return np.where(np.abs(phi) < tol, 1.0, np.sign(phi))


def bisect_edges(levelset, a, b, sign_a, tol=1e-12, max_iter=60):
    """Vectorized bisection for the zero of phi on segments ``a -> b``.

    ``sign_a`` is the (snapped) sign at ``a``; the sign at ``b`` is assumed
    opposite. Returns the edge parameters ``t``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = np.zeros(len(a))
    hi = np.ones(len(a))
    t = np.full(len(a), 0.5)
    active = np.ones(len(a), dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        t = np.where(active, 0.5 * (lo + hi), t)
        phi = levelset(a + t[:, None] * (b - a))
        done = np.abs(phi) <= tol
        same = np.sign(phi) == sign_a
        lo = np.where(active & ~done & same, t, lo)
        hi = np.where(active & ~done & ~same, t, hi)
        active &= ~done
    # keep subcells nondegenerate when the root sits on an endpoint
    return np.clip(t, 1e-14, 1.0 - 1e-14)


def edge_intersection(levelset, a, b, snap_tol=None, tol=1e-12, max_iter=60):
    """Parameter ``t`` in (0, 1) of the interface crossing on segment ``a -> b``.

    Returns ``None`` when phi does not change sign between the (snapped)
    endpoints.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if snap_tol is None:
        snap_tol = SNAP * np.linalg.norm(b - a)
    phi_a, phi_b = levelset(a), levelset(b)
    if abs(phi_a) < snap_tol and abs(phi_b) < snap_tol:
        raise ValueError("degenerate edge on interface")
    sa, sb = snapped_sign(phi_a, snap_tol), snapped_sign(phi_b, snap_tol)
    if sa == sb:
        return None
    return float(bisect_edges(levelset, a[None], b[None], sa, tol, max_iter)[0])
