"""Jumps of the solution derivatives across the interface.

At each interface point two small dense systems are solved, both vectorised
over many points at once:

* a 5x5 system for ``[[u1_x]], [[u1_y]], [[u2_x]], [[u2_y]], [[p]]`` from
  tangential continuity of u, the traction jump, and the divergence jump;
* an 8x8 system for the second derivatives of u and first derivatives of p
  from differentiating those relations along the curve and jumping the
  momentum equations.

Viscosity is taken as 1; callers with another constant viscosity divide the
traction and force data by it beforehand.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Callable

import numpy as np

from .errors import NumericalError
from .geometry import CrossingArray, InterfaceCurve, LocalFrame, local_frame

FIRST_ORDER = ("u1x", "u1y", "u2x", "u2y", "p")
SECOND_ORDER = ("u1xx", "u1xy", "u1yy", "u2xx", "u2xy", "u2yy", "px", "py")


@dataclass
class JumpSet:
    """All jumps ``[[.]] = (.)+ - (.)-`` at one or many interface points.

    Every field is either a float or an array over points.  The velocity
    itself is continuous, so ``u1`` and ``u2`` are zero.
    """

    u1x: np.ndarray
    u1y: np.ndarray
    u2x: np.ndarray
    u2y: np.ndarray
    p: np.ndarray
    u1xx: np.ndarray
    u1xy: np.ndarray
    u1yy: np.ndarray
    u2xx: np.ndarray
    u2xy: np.ndarray
    u2yy: np.ndarray
    px: np.ndarray
    py: np.ndarray
    u1: np.ndarray = 0.0
    u2: np.ndarray = 0.0

    def take(self, k) -> "JumpSet":
        return JumpSet(**{f.name: (np.asarray(getattr(self, f.name))[k]
                                   if np.ndim(getattr(self, f.name)) else getattr(self, f.name))
                          for f in fields(self)})

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class InterfaceData:
    """Interface data as functions of the curve parameter.

    ``psi(t)`` and ``f_jump(t)`` return pairs; ``psi_prime(t)`` returns the
    arclength derivative of psi and may be None, in which case it is
    approximated by central differences in t.
    """

    psi: Callable
    f_jump: Callable
    psi_prime: Callable | None = None

    def dpsi_ds(self, t, curve: InterfaceCurve):
        if self.psi_prime is not None:
            return self.psi_prime(t)
        dt = 1e-5 * curve.period
        p1, p2 = self.psi(t + dt)
        m1, m2 = self.psi(t - dt)
        xt, yt = curve.d1(t)
        speed = np.hypot(xt, yt)
        return (p1 - m1) / (2 * dt * speed), (p2 - m2) / (2 * dt * speed)


# --------------------------------------------------------------------------
# system assembly


def first_order_system(frame: LocalFrame, psi) -> tuple[np.ndarray, np.ndarray]:
    tx, ty = (np.atleast_1d(v) for v in frame.tangent)
    n1, n2 = (np.atleast_1d(v) for v in frame.n)
    z, one = np.zeros_like(tx), np.ones_like(tx)
    A = np.stack(
        [
            np.stack([tx, ty, z, z, z], -1),
            np.stack([z, z, tx, ty, z], -1),
            np.stack([2 * n1, n2, n2, z, -n1], -1),
            np.stack([z, n1, n1, 2 * n2, -n2], -1),
            np.stack([one, z, z, one, z], -1),
        ],
        -2,
    )
    psi1, psi2 = (np.broadcast_to(np.atleast_1d(v), tx.shape) for v in psi)
    b = np.stack([z, z, psi1, psi2, z], -1)
    return A, b


def second_order_system(frame: LocalFrame, first: dict, psi_prime, f_jump) -> tuple[np.ndarray, np.ndarray]:
    """The 8x8 matrix row for row as printed, and its right-hand side."""
    xp, yp = (np.atleast_1d(v) for v in frame.tangent)
    xpp, ypp = (np.atleast_1d(v) for v in frame.second)
    n1, n2 = (np.atleast_1d(v) for v in frame.n)
    dn1, dn2 = (np.atleast_1d(v) for v in frame.n_prime)
    z, one = np.zeros_like(xp), np.ones_like(xp)
    A = np.stack(
        [
            np.stack([one, z, z, z, one, z, z, z], -1),
            np.stack([z, one, z, z, z, one, z, z], -1),
            np.stack([-one, z, -one, z, z, z, one, z], -1),
            np.stack([z, z, z, -one, z, -one, z, one], -1),
            np.stack([xp**2, 2 * xp * yp, yp**2, z, z, z, z, z], -1),
            np.stack([z, z, z, xp**2, 2 * xp * yp, yp**2, z, z], -1),
            np.stack([2 * n1 * xp, 2 * n1 * yp + n2 * xp, n2 * yp, n2 * xp, n2 * yp, z, -n1 * xp, -n1 * yp], -1),
            np.stack([z, n1 * xp, n1 * yp, n1 * xp, n1 * yp + 2 * n2 * xp, 2 * n2 * yp, -n2 * xp, -n2 * yp], -1),
        ],
        -2,
    )
    u1x, u1y, u2x, u2y, p = (np.atleast_1d(first[k]) for k in FIRST_ORDER)
    dpsi1, dpsi2 = (np.broadcast_to(np.atleast_1d(v), xp.shape) for v in psi_prime)
    jf1, jf2 = (np.broadcast_to(np.atleast_1d(v), xp.shape) for v in f_jump)
    r = np.stack(
        [
            z,
            z,
            jf1,
            jf2,
            -u1x * xpp - u1y * ypp,
            -u2x * xpp - u2y * ypp,
            dpsi1 - 2 * u1x * dn1 - (u1y + u2x) * dn2 + p * dn1,
            dpsi2 - (u2x + u1y) * dn1 - 2 * u2y * dn2 + p * dn2,
        ],
        -1,
    )
    return A, r


def _solve_checked(A, b, rel_tol, label, frame, max_cond=None):
    if len(b) == 0:
        return np.zeros(b.shape)
    if max_cond is not None:
        cond = np.linalg.cond(A)
        worst = int(np.argmax(cond))
        if not np.all(np.isfinite(cond)) or cond[worst] > max_cond:
            raise NumericalError(
                f"{label} system ill-conditioned (cond={cond[worst]:.3e}) at "
                f"t={np.atleast_1d(frame.t)[worst]:.6g}, n={np.atleast_1d(frame.n[0])[worst]:.6g},"
                f"{np.atleast_1d(frame.n[1])[worst]:.6g}"
            )
    try:
        x = np.linalg.solve(A, b[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"{label} system singular: {exc}") from exc
    res = np.abs(np.einsum("...ij,...j->...i", A, x) - b).max(axis=-1)
    scale = 1.0 + np.abs(b).max(axis=-1)
    if np.any(res > rel_tol * scale):
        k = int(np.argmax(res / scale))
        raise NumericalError(f"{label} residual {res[k]:.3e} too large at t={np.atleast_1d(frame.t)[k]:.6g}")
    return x


def solve_first_order(frame: LocalFrame, psi) -> dict:
    """Return the five first-order jumps keyed by name (arrays over points)."""
    A, b = first_order_system(frame, psi)
    x = _solve_checked(A, b, 1e-12, "first-order", frame)
    return {k: x[..., i] for i, k in enumerate(FIRST_ORDER)}


def solve_second_order(frame: LocalFrame, first: dict, psi_prime, f_jump) -> dict:
    A, r = second_order_system(frame, first, psi_prime, f_jump)
    x = _solve_checked(A, r, 1e-10, "second-order", frame, max_cond=1e12)
    return {k: x[..., i] for i, k in enumerate(SECOND_ORDER)}


def jumps_at(t, curve: InterfaceCurve, data: InterfaceData) -> JumpSet:
    """Full JumpSet at curve parameters ``t`` (array)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    frame = local_frame(t, curve)
    first = solve_first_order(frame, data.psi(t))
    second = solve_second_order(frame, first, data.dpsi_ds(t, curve), data.f_jump(t))
    return JumpSet(**first, **second)


@dataclass
class JumpTable:
    """JumpSets aligned index-for-index with a CrossingArray."""

    crossings: CrossingArray
    jumps: JumpSet

    def __len__(self):
        return len(self.crossings)

    def __getitem__(self, k) -> JumpSet:
        return self.jumps.take(k)

    def items(self):
        for k in range(len(self)):
            yield self.crossings[k], self[k]


def jump_table(curve: InterfaceCurve, data: InterfaceData, crossings: CrossingArray) -> JumpTable:
    """Jumps at every crossing's own curve parameter, in crossing order."""
    if len(crossings) == 0:
        empty = np.empty(0)
        return JumpTable(crossings, JumpSet(**{k: empty for k in FIRST_ORDER + SECOND_ORDER}))
    try:
        js = jumps_at(crossings.s, curve, data)
    except NumericalError as exc:
        raise NumericalError(f"jump solve failed near crossings of {curve!r}: {exc}") from exc
    return JumpTable(crossings, js)
