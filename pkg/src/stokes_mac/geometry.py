"""Interface curves, node classification and grid-line crossings.

A curve carries a level function (positive in the bounded region Omega+,
negative outside; zero counts as Omega+) and a closed parametrisation
``t -> X(t)``.  The parameter need not be arclength: every derivative handed
to the jump solver is converted to arclength by the chain rule, which is the
only normalisation the second-order jump relations depend on.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarseError, NumericalError
from .grid import GridFamily, StaggeredGrid


def side(phi):
    """+1 in Omega+ (phi >= 0), -1 in Omega-."""
    return np.where(np.asarray(phi) >= 0.0, 1, -1).astype(np.int8)


class InterfaceCurve:
    """Smooth closed curve.  Subclasses provide the level function and X(t)."""

    period: float = 2.0 * math.pi

    def classify(self, x, y):
        raise NotImplementedError

    def point(self, t):
        raise NotImplementedError

    def d1(self, t):
        raise NotImplementedError

    def d2(self, t):
        raise NotImplementedError

    def parameter_of(self, x, y):
        """Curve parameter of points lying on the curve."""
        return self.project(x, y)

    # generic machinery -------------------------------------------------

    def project(self, x, y, iters: int = 50):
        """Nearest-point parameter by Newton on (X(t) - P) . X'(t) = 0."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        ts = np.linspace(0.0, self.period, 721)[:-1]
        cx, cy = self.point(ts)
        d2 = (x[:, None] - cx[None, :]) ** 2 + (y[:, None] - cy[None, :]) ** 2
        t = ts[np.argmin(d2, axis=1)]
        for _ in range(iters):
            px, py = self.point(t)
            dx, dy = self.d1(t)
            ddx, ddy = self.d2(t)
            rx, ry = px - x, py - y
            g = rx * dx + ry * dy
            dg = dx * dx + dy * dy + rx * ddx + ry * ddy
            step = g / dg
            t = t - step
            if np.all(np.abs(step) < 1e-15 * self.period):
                break
        return np.mod(t, self.period)

    def frame(self, t) -> "LocalFrame":
        return local_frame(t, self)


class Circle(InterfaceCurve):
    def __init__(self, radius: float = 1.0, center=(0.0, 0.0)):
        self.radius = float(radius)
        self.center = (float(center[0]), float(center[1]))

    def classify(self, x, y):
        cx, cy = self.center
        return self.radius**2 - (x - cx) ** 2 - (y - cy) ** 2

    def point(self, t):
        r, (cx, cy) = self.radius, self.center
        return cx + r * np.cos(t), cy + r * np.sin(t)

    def d1(self, t):
        return -self.radius * np.sin(t), self.radius * np.cos(t)

    def d2(self, t):
        return -self.radius * np.cos(t), -self.radius * np.sin(t)

    def parameter_of(self, x, y):
        cx, cy = self.center
        return np.mod(np.arctan2(np.asarray(y) - cy, np.asarray(x) - cx), 2 * math.pi)

    def __repr__(self):
        return f"Circle(radius={self.radius}, center={self.center})"


class Ellipse(InterfaceCurve):
    """(x - cx)^2 / a^2 + (y - cy)^2 / b^2 = 1."""

    def __init__(self, a: float, b: float, center=(0.0, 0.0)):
        self.a, self.b = float(a), float(b)
        self.center = (float(center[0]), float(center[1]))

    def classify(self, x, y):
        cx, cy = self.center
        return 1.0 - ((x - cx) / self.a) ** 2 - ((y - cy) / self.b) ** 2

    def point(self, t):
        cx, cy = self.center
        return cx + self.a * np.cos(t), cy + self.b * np.sin(t)

    def d1(self, t):
        return -self.a * np.sin(t), self.b * np.cos(t)

    def d2(self, t):
        return -self.a * np.cos(t), -self.b * np.sin(t)

    def parameter_of(self, x, y):
        cx, cy = self.center
        return np.mod(
            np.arctan2((np.asarray(y) - cy) / self.b, (np.asarray(x) - cx) / self.a),
            2 * math.pi,
        )

    def __repr__(self):
        return f"Ellipse(a={self.a}, b={self.b}, center={self.center})"


class PolarCurve(InterfaceCurve):
    """Star-shaped curve r(t) = r0 + amp * cos(k t + phase) about ``center``."""

    def __init__(self, r0: float, amp: float = 0.0, k: int = 0, phase: float = 0.0, center=(0.0, 0.0)):
        if abs(amp) >= r0:
            raise ValueError("need |amp| < r0 for a star-shaped curve")
        self.r0, self.amp, self.k, self.phase = float(r0), float(amp), int(k), float(phase)
        self.center = (float(center[0]), float(center[1]))

    def _r(self, t):
        return self.r0 + self.amp * np.cos(self.k * t + self.phase)

    def _rt(self, t):
        return -self.amp * self.k * np.sin(self.k * t + self.phase)

    def _rtt(self, t):
        return -self.amp * self.k**2 * np.cos(self.k * t + self.phase)

    def classify(self, x, y):
        cx, cy = self.center
        dx, dy = np.asarray(x) - cx, np.asarray(y) - cy
        return self._r(np.arctan2(dy, dx)) - np.hypot(dx, dy)

    def point(self, t):
        r = self._r(t)
        return self.center[0] + r * np.cos(t), self.center[1] + r * np.sin(t)

    def d1(self, t):
        r, rt = self._r(t), self._rt(t)
        c, s = np.cos(t), np.sin(t)
        return rt * c - r * s, rt * s + r * c

    def d2(self, t):
        r, rt, rtt = self._r(t), self._rt(t), self._rtt(t)
        c, s = np.cos(t), np.sin(t)
        return rtt * c - 2 * rt * s - r * c, rtt * s + 2 * rt * c - r * s

    def parameter_of(self, x, y):
        cx, cy = self.center
        return np.mod(np.arctan2(np.asarray(y) - cy, np.asarray(x) - cx), 2 * math.pi)

    def __repr__(self):
        return f"PolarCurve(r0={self.r0}, amp={self.amp}, k={self.k})"


# --------------------------------------------------------------------------
# local frame


@dataclass(frozen=True)
class LocalFrame:
    """Arclength frame at curve parameter ``t``.

    ``n`` points from Omega+ into Omega-; ``tangent`` = (x', y');
    ``second`` = (x'', y''); ``n_prime`` = dn/ds, all with respect to
    arclength in the direction of increasing ``t``.
    """

    t: np.ndarray
    point: tuple
    n: tuple
    tangent: tuple
    second: tuple
    n_prime: tuple
    speed: np.ndarray


def local_frame(t, curve: InterfaceCurve) -> LocalFrame:
    t = np.asarray(t, dtype=float)
    px, py = curve.point(t)
    xt, yt = curve.d1(t)
    xtt, ytt = curve.d2(t)
    speed = np.hypot(xt, yt)
    tx, ty = xt / speed, yt / speed
    along = xtt * tx + ytt * ty
    sx = (xtt - along * tx) / speed**2
    sy = (ytt - along * ty) / speed**2
    # orient (ty, -tx) so that it leaves Omega+: the level function drops along n
    eps = 1e-7 * max(1.0, float(np.max(np.abs(speed))))
    probe = curve.classify(px + eps * ty, py - eps * tx) - curve.classify(px - eps * ty, py + eps * tx)
    sign = np.where(probe < 0.0, 1.0, -1.0)
    n = (sign * ty, -sign * tx)
    n_prime = (sign * sy, -sign * sx)
    return LocalFrame(t, (px, py), n, (tx, ty), (sx, sy), n_prime, speed)


# --------------------------------------------------------------------------
# crossings


@dataclass(frozen=True)
class Crossing:
    point: tuple[float, float]
    s: float
    endpoints: tuple[tuple[float, float], tuple[float, float]]
    side_of_center: int


@dataclass
class CrossingArray:
    """Crossings of many segments ``a -> b``; ``a`` is the stencil centre."""

    xa: np.ndarray
    ya: np.ndarray
    xb: np.ndarray
    yb: np.ndarray
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    side_a: np.ndarray

    def __len__(self):
        return len(self.x)

    def __getitem__(self, k) -> Crossing:
        return Crossing(
            (float(self.x[k]), float(self.y[k])),
            float(self.s[k]),
            ((float(self.xa[k]), float(self.ya[k])), (float(self.xb[k]), float(self.yb[k]))),
            int(self.side_a[k]),
        )

    def __iter__(self):
        return (self[k] for k in range(len(self)))


def _roots_on_segments(curve, xa, ya, xb, yb, fa, fb, tol):
    """Vectorised bisection followed by safeguarded secant on each segment."""
    lo = np.zeros_like(xa)
    hi = np.ones_like(xa)
    flo, fhi = fa.astype(float).copy(), fb.astype(float).copy()
    dx, dy = xb - xa, yb - ya

    def f(tau):
        return curve.classify(xa + tau * dx, ya + tau * dy)

    for _ in range(24):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
        fhi = np.where(left, fhi, fm)
    tau = 0.5 * (lo + hi)
    done = np.zeros(len(xa), dtype=bool)
    for _ in range(60):
        denom = fhi - flo
        cand = np.where(denom != 0.0, lo - flo * (hi - lo) / np.where(denom != 0.0, denom, 1.0), 0.5 * (lo + hi))
        bad = (cand <= lo) | (cand >= hi) | ~np.isfinite(cand)
        cand = np.where(bad, 0.5 * (lo + hi), cand)
        fc = f(cand)
        tau = np.where(done, tau, cand)
        done |= (np.abs(fc) <= tol) | ((hi - lo) <= 4 * np.finfo(float).eps)
        if done.all():
            break
        left = np.sign(fc) == np.sign(flo)
        # Illinois tweak keeps regula falsi from stalling on one end
        lo, flo, hi, fhi = (
            np.where(left, cand, lo),
            np.where(left, fc, 0.5 * flo),
            np.where(left, hi, cand),
            np.where(left, 0.5 * fhi, fc),
        )
    if not done.all():
        raise NumericalError(f"crossing search did not converge on {np.count_nonzero(~done)} segments")
    return tau


def find_crossings(curve: InterfaceCurve, xa, ya, xb, yb, h: float | None = None) -> tuple[np.ndarray, CrossingArray]:
    """Locate the interface on every segment whose endpoints change side.

    Returns the boolean mask of cut segments and the crossings on them.
    """
    xa, ya, xb, yb = (np.asarray(v, dtype=float).ravel() for v in (xa, ya, xb, yb))
    fa = curve.classify(xa, ya)
    fb = curve.classify(xb, yb)
    cut = side(fa) != side(fb)
    length = np.hypot(xb - xa, yb - ya)
    hh = h if h is not None else (float(length.max()) if len(length) else 1.0)
    idx = np.flatnonzero(cut)
    xa_c, ya_c, xb_c, yb_c = xa[idx], ya[idx], xb[idx], yb[idx]
    fa_c, fb_c = fa[idx], fb[idx]
    tau = np.empty(0)
    if len(idx):
        exact_b = fb_c == 0.0
        tau = _roots_on_segments(curve, xa_c, ya_c, xb_c, yb_c, fa_c, fb_c, 1e-12 * hh)
        tau = np.where(exact_b, 1.0, tau)
        tau = np.where(fa_c == 0.0, 0.0, tau)
    x = xa_c + tau * (xb_c - xa_c)
    y = ya_c + tau * (yb_c - ya_c)
    s = curve.parameter_of(x, y) if len(idx) else np.empty(0)
    arr = CrossingArray(xa_c, ya_c, xb_c, yb_c, x, y, np.asarray(s, dtype=float), side(fa_c))
    return cut, arr


def find_crossing(p_a, p_b, curve: InterfaceCurve) -> Crossing | None:
    """Crossing of the segment ``p_a -> p_b`` or ``None`` if both ends share a side."""
    _, arr = find_crossings(curve, [p_a[0]], [p_a[1]], [p_b[0]], [p_b[1]])
    return arr[0] if len(arr) else None


# --------------------------------------------------------------------------
# node classification


class NodeClass(enum.IntEnum):
    REGULAR_MINUS = -1
    IRREGULAR = 0
    REGULAR_PLUS = 1


# stencil arms (in units of h) of the equation living on each family
STENCILS = {
    GridFamily.VEDGE: [(1, 0), (-1, 0), (0, 1), (0, -1), (0.5, 0), (-0.5, 0)],
    GridFamily.HEDGE: [(1, 0), (-1, 0), (0, 1), (0, -1), (0, 0.5), (0, -0.5)],
    GridFamily.CELL: [(0.5, 0), (-0.5, 0), (0, 0.5), (0, -0.5)],
    GridFamily.VERTEX: [(1, 0), (-1, 0), (0, 1), (0, -1)],
}


def classify_nodes(grid: StaggeredGrid, curve: InterfaceCurve | None, family: GridFamily) -> np.ndarray:
    """Label every stored node of ``family`` as regular+/regular-/irregular.

    A node is irregular when any arm of its equation's stencil (Laplacian
    neighbours plus the half-cell pressure or velocity points) changes side.
    Raises :class:`GridTooCoarseError` if an arm whose ends agree has a
    midpoint strictly on the other side, i.e. the arm is cut twice.
    """
    X, Y = grid.coords(family)
    if curve is None:
        return np.full(X.shape, NodeClass.REGULAR_PLUS, dtype=np.int8)
    s0 = side(curve.classify(X, Y))
    irregular = np.zeros(X.shape, dtype=bool)
    h = grid.h
    for dx, dy in STENCILS[family]:
        s1 = side(curve.classify(X + dx * h, Y + dy * h))
        # strict sign at the midpoint: a tangential touch (phi == 0) is not a double cut
        sm = np.sign(curve.classify(X + 0.5 * dx * h, Y + 0.5 * dy * h))
        if np.any((s1 == s0) & (sm == -s0)):
            raise GridTooCoarseError(
                f"N={grid.n}: a {family.name} stencil arm crosses the interface twice"
            )
        irregular |= s1 != s0
    out = s0.copy()
    out[irregular] = NodeClass.IRREGULAR
    return out
