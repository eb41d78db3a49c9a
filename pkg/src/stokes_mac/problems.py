"""Manufactured interface problems.

A side function returns the 6-tuple ``(v, v_x, v_y, v_xx, v_xy, v_yy)``
at points ``(x, y)``; a piecewise field is a ``(plus, minus)`` pair of side
functions where ``plus`` belongs to the bounded region.  All derivatives of
the built-in examples are written out by hand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import InvalidProblemError
from .geometry import Circle, Ellipse, InterfaceCurve, local_frame, side
from .jumps import InterfaceData

SideFn = Callable[[np.ndarray, np.ndarray], tuple]


@dataclass(frozen=True)
class PiecewiseField:
    plus: SideFn
    minus: SideFn

    def jet(self, x, y, sides):
        """Derivative 6-tuple using the side selected by ``sides`` (+1/-1)."""
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        sides = np.broadcast_to(sides, x.shape)
        out = [np.zeros(x.shape) for _ in range(6)]
        for sgn, fn in ((1, self.plus), (-1, self.minus)):
            m = sides == sgn
            if np.any(m):
                vals = fn(x[m], y[m])
                for o, v in zip(out, vals):
                    o[m] = v
        return tuple(out)


@dataclass(frozen=True)
class ExactSolution:
    u1: PiecewiseField
    u2: PiecewiseField
    p: PiecewiseField


@dataclass
class ProblemSpec:
    """Everything the scheme needs, plus the exact solution when known.

    ``forcing(x, y, sides)`` returns ``(f1, f2)``; ``boundary_trace`` is the
    pair of Dirichlet traces on the outer boundary.
    """

    name: str
    origin: tuple[float, float]
    extent: tuple[float, float]
    curve: InterfaceCurve | None
    forcing: Callable
    interface_data: InterfaceData | None
    boundary_trace: tuple[Callable, Callable]
    exact: ExactSolution | None = None
    mu: float = 1.0
    notes: dict = dc_field(default_factory=dict)

    def sides(self, x, y):
        if self.curve is None:
            return np.full(np.broadcast(x, y).shape, -1, dtype=np.int8)
        return side(self.curve.classify(x, y))

    def f_at(self, x, y):
        return self.forcing(x, y, self.sides(x, y))

    def exact_value(self, which: str, x, y):
        fld = getattr(self.exact, which)
        return fld.jet(x, y, self.sides(x, y))[0]


# --------------------------------------------------------------------------
# derived data


def stress_jump(exact: ExactSolution, curve: InterfaceCurve, t, mu: float = 1.0):
    """[[sigma(u, p) n]] and its arclength derivative at curve parameters ``t``."""
    fr = local_frame(t, curve)
    px, py = fr.point
    n1, n2 = fr.n
    tx, ty = fr.tangent
    dn1, dn2 = fr.n_prime
    out, dout = [], []
    for sgn in (1, -1):
        pick = lambda f: (f.plus if sgn == 1 else f.minus)(px, py)
        a = pick(exact.u1)
        b = pick(exact.u2)
        q = pick(exact.p)
        # stress components and their tangential derivatives
        s11 = -q[0] + 2 * mu * a[1]
        s12 = mu * (a[2] + b[1])
        s22 = -q[0] + 2 * mu * b[2]
        d_ax = a[3] * tx + a[4] * ty
        d_ay = a[4] * tx + a[5] * ty
        d_bx = b[3] * tx + b[4] * ty
        d_by = b[4] * tx + b[5] * ty
        d_q = q[1] * tx + q[2] * ty
        ds11 = -d_q + 2 * mu * d_ax
        ds12 = mu * (d_ay + d_bx)
        ds22 = -d_q + 2 * mu * d_by
        out.append((s11 * n1 + s12 * n2, s12 * n1 + s22 * n2))
        dout.append(
            (
                ds11 * n1 + ds12 * n2 + s11 * dn1 + s12 * dn2,
                ds12 * n1 + ds22 * n2 + s12 * dn1 + s22 * dn2,
            )
        )
    psi = (out[0][0] - out[1][0], out[0][1] - out[1][1])
    dpsi = (dout[0][0] - dout[1][0], dout[0][1] - dout[1][1])
    return psi, dpsi


def forcing_from_exact(exact: ExactSolution, mu: float = 1.0):
    def forcing(x, y, sides):
        a = exact.u1.jet(x, y, sides)
        b = exact.u2.jet(x, y, sides)
        q = exact.p.jet(x, y, sides)
        return -mu * (a[3] + a[5]) + q[1], -mu * (b[3] + b[5]) + q[2]

    return forcing


def from_exact(name, origin, extent, curve, exact: ExactSolution, mu: float = 1.0) -> ProblemSpec:
    """Build forcing, interface data and boundary trace from exact fields."""
    forcing = forcing_from_exact(exact, mu)
    data = None
    if curve is not None:
        def psi(t):
            return stress_jump(exact, curve, t, mu)[0]

        def psi_prime(t):
            return stress_jump(exact, curve, t, mu)[1]

        def f_jump(t):
            px, py = curve.point(np.asarray(t, float))
            fp = forcing(px, py, np.ones(np.shape(px), dtype=np.int8))
            fm = forcing(px, py, -np.ones(np.shape(px), dtype=np.int8))
            return fp[0] - fm[0], fp[1] - fm[1]

        data = InterfaceData(psi=psi, f_jump=f_jump, psi_prime=psi_prime)
    spec = ProblemSpec(name, tuple(origin), tuple(extent), curve, forcing, data, (None, None), exact, mu)

    def ub(which):
        return lambda x, y: spec.exact_value(which, x, y)

    spec.boundary_trace = (ub("u1"), ub("u2"))
    return spec


# --------------------------------------------------------------------------
# Example 1: circle r = 1 in (-2, 2)^2


def _ex1_u1_in(x, y):
    return ((x * x + y * y) * y / 4, x * y / 2, (x * x + 3 * y * y) / 4, y / 2, x / 2, 1.5 * y)


def _ex1_u1_out(x, y):
    r = np.sqrt(x * x + y * y)
    r3, r5 = r**3, r**5
    return (
        y / r - 0.75 * y,
        -x * y / r3,
        x * x / r3 - 0.75,
        -y / r3 + 3 * x * x * y / r5,
        -x / r3 + 3 * x * y * y / r5,
        -3 * x * x * y / r5,
    )


def _ex1_u2_in(x, y):
    z = np.zeros_like(x)
    return (-x * y * y / 4, -y * y / 4, -x * y / 2, z, -y / 2, -x / 2)


def _ex1_u2_out(x, y):
    r = np.sqrt(x * x + y * y)
    r3, r5 = r**3, r**5
    return (
        -x / r + x - x * (1 - x * x) / 4,
        -y * y / r3 + 0.75 + 0.75 * x * x,
        x * y / r3,
        3 * x * y * y / r5 + 1.5 * x,
        y / r3 - 3 * x * x * y / r5,
        x / r3 - 3 * x * y * y / r5,
    )


def _cubic_p(x, y):
    z = np.zeros_like(x)
    return (
        (-0.75 * x**3 + 0.375 * x) * y,
        (-2.25 * x * x + 0.375) * y,
        -0.75 * x**3 + 0.375 * x,
        -4.5 * x * y,
        -2.25 * x * x + 0.375,
        z,
    )


def _const(c):
    def fn(x, y):
        z = np.zeros_like(x)
        return (z + c, z, z, z, z, z)

    return fn


def example1() -> ProblemSpec:
    """Circle of radius 1 centred in (-2, 2)^2; pressure 5 inside."""
    exact = ExactSolution(
        u1=PiecewiseField(_ex1_u1_in, _ex1_u1_out),
        u2=PiecewiseField(_ex1_u2_in, _ex1_u2_out),
        p=PiecewiseField(_const(5.0), _cubic_p),
    )
    return from_exact("example1", (-2.0, -2.0), (4.0, 4.0), Circle(1.0), exact)


# --------------------------------------------------------------------------
# Example 2: ellipse x^2 + 4 y^2 = 1 in (-2, 2)^2


def _ex2_u1_in(x, y):
    z = np.zeros_like(x)
    return (y / 4, z, z + 0.25, z, z, z)


def _ex2_u1_out(x, y):
    return ((x * x + 4 * y * y) * y / 4, x * y / 2, (x * x + 12 * y * y) / 4, y / 2, x / 2, 6 * y)


def _ex2_u2_in(x, y):
    z = np.zeros_like(x)
    return ((x**3 - x) / 16, (3 * x * x - 1) / 16, z, 0.375 * x, z, z)


def example2() -> ProblemSpec:
    """Ellipse x^2 + 4y^2 = 1 in (-2, 2)^2; cubic pressure inside."""
    exact = ExactSolution(
        u1=PiecewiseField(_ex2_u1_in, _ex2_u1_out),
        u2=PiecewiseField(_ex2_u2_in, _ex1_u2_in),
        p=PiecewiseField(_cubic_p, _const(0.0)),
    )
    return from_exact("example2", (-2.0, -2.0), (4.0, 4.0), Ellipse(1.0, 0.5), exact)


# --------------------------------------------------------------------------
# smooth single-phase check problem on the unit square

_PI = math.pi


def _sm_u1(x, y):
    sx, cx, sy, cy = np.sin(_PI * x), np.cos(_PI * x), np.sin(_PI * y), np.cos(_PI * y)
    p2 = _PI * _PI
    return (-sx * sy, -_PI * cx * sy, -_PI * sx * cy, p2 * sx * sy, -p2 * cx * cy, p2 * sx * sy)


def _sm_u2(x, y):
    sx, cx, sy, cy = np.sin(_PI * x), np.cos(_PI * x), np.sin(_PI * y), np.cos(_PI * y)
    p2 = _PI * _PI
    return (-cx * cy, _PI * sx * cy, _PI * cx * sy, p2 * cx * cy, -p2 * sx * sy, p2 * cx * cy)


def _sm_p(x, y):
    sx, cx, sy, cy = np.sin(_PI * x), np.cos(_PI * x), np.sin(_PI * y), np.cos(_PI * y)
    p2 = _PI * _PI
    return (cx * sy, -_PI * sx * sy, _PI * cx * cy, -p2 * cx * sy, -p2 * sx * cy, -p2 * cx * sy)


def smooth(with_curve: bool = False) -> ProblemSpec:
    """Stream-function flow on (0, 1)^2 with no interface.

    ``with_curve=True`` places a circle inside whose two sides carry the same
    fields, so every jump vanishes identically.
    """
    exact = ExactSolution(
        u1=PiecewiseField(_sm_u1, _sm_u1),
        u2=PiecewiseField(_sm_u2, _sm_u2),
        p=PiecewiseField(_sm_p, _sm_p),
    )
    curve = Circle(0.3, (0.5, 0.5)) if with_curve else None
    return from_exact("smooth_curve" if with_curve else "smooth", (0.0, 0.0), (1.0, 1.0), curve, exact)


BUILTIN = {
    "example1": example1,
    "example2": example2,
    "smooth": smooth,
    "smooth_curve": lambda: smooth(True),
}


def get_problem(name_or_path: str) -> ProblemSpec:
    if name_or_path in BUILTIN:
        return BUILTIN[name_or_path]()
    from .config import load_problem

    return load_problem(name_or_path)


# --------------------------------------------------------------------------
# validation


def validate(spec: ProblemSpec, n_curve: int = 64, n_region: int = 400, seed: int = 0, tol: float = 1e-8) -> dict:
    """Check the identities an exact interface solution must satisfy.

    Returns the maximum violation per identity; raises
    :class:`InvalidProblemError` naming the first identity above ``tol``.
    """
    if spec.exact is None:
        raise InvalidProblemError(f"{spec.name}: no exact solution to validate")
    ex = spec.exact
    rng = np.random.default_rng(seed)
    diag = {}
    x0, y0 = spec.origin
    X = x0 + spec.extent[0] * rng.random(n_region)
    Y = y0 + spec.extent[1] * rng.random(n_region)
    sides = spec.sides(X, Y)
    a = ex.u1.jet(X, Y, sides)
    b = ex.u2.jet(X, Y, sides)
    q = ex.p.jet(X, Y, sides)
    diag["divergence"] = float(np.max(np.abs(a[1] + b[2])))
    f1, f2 = spec.forcing(X, Y, sides)
    diag["forcing"] = float(
        max(
            np.max(np.abs(f1 - (-spec.mu * (a[3] + a[5]) + q[1]))),
            np.max(np.abs(f2 - (-spec.mu * (b[3] + b[5]) + q[2]))),
        )
    )
    if spec.curve is not None:
        t = np.linspace(0.0, spec.curve.period, n_curve, endpoint=False)
        px, py = spec.curve.point(t)
        ones = np.ones(n_curve, dtype=np.int8)
        ju = max(
            np.max(np.abs(ex.u1.jet(px, py, ones)[0] - ex.u1.jet(px, py, -ones)[0])),
            np.max(np.abs(ex.u2.jet(px, py, ones)[0] - ex.u2.jet(px, py, -ones)[0])),
        )
        diag["velocity_jump"] = float(ju)
        psi_exact, _ = stress_jump(ex, spec.curve, t, spec.mu)
        psi_given = spec.interface_data.psi(t)
        diag["traction_jump"] = float(
            max(np.max(np.abs(psi_exact[0] - psi_given[0])), np.max(np.abs(psi_exact[1] - psi_given[1])))
        )
    for key, val in diag.items():
        if not np.isfinite(val) or val > tol:
            raise InvalidProblemError(f"{spec.name}: identity '{key}' violated by {val:.3e}")
    return diag
