"""User problems from a key=value text file.

Example::

    # the ellipse problem
    name   = ellipse
    domain = -2 -2 4 4          # x0 y0 Lx Ly
    mu     = 1
    curve  = ellipse 1 0.5 0 0  # circle r cx cy | ellipse a b cx cy
                                # | polar r0 amp k phase cx cy | none
    u1_plus  = y/4
    u1_minus = y*(x^2 + 4*y^2)/4
    u2_plus  = -x*(1 - x^2)/16
    u2_minus = -x*y^2/4
    p_plus   = (-3/4*x^3 + 3/8*x)*y
    p_minus  = 0

A single key such as ``u2 = ...`` sets the same expression on both sides.
``*_plus`` belongs to the bounded region inside the curve.  Forcing,
traction jump and boundary data are derived from the expressions.
"""
from __future__ import annotations

from pathlib import Path

from .errors import InvalidProblemError
from .expr import Expression
from .geometry import Circle, Ellipse, InterfaceCurve, PolarCurve
from .problems import ExactSolution, PiecewiseField, ProblemSpec, from_exact

KNOWN = {"name", "domain", "mu", "curve"} | {
    f"{q}{s}" for q in ("u1", "u2", "p") for s in ("", "_plus", "_minus")
}


def parse_config(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidProblemError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN:
            raise InvalidProblemError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise InvalidProblemError(f"line {lineno}: duplicate key {key!r}")
        out[key] = val
    return out


def _floats(text: str, count: int | None, what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split()]
    except ValueError as exc:
        raise InvalidProblemError(f"{what}: expected numbers, got {text!r}") from exc
    if count is not None and len(vals) != count:
        raise InvalidProblemError(f"{what}: expected {count} numbers, got {len(vals)}")
    return vals


def make_curve(text: str) -> InterfaceCurve | None:
    parts = text.split(None, 1)
    kind = parts[0].lower() if parts else "none"
    args = parts[1] if len(parts) > 1 else ""
    if kind == "none":
        return None
    if kind == "circle":
        r, cx, cy = _floats(args, 3, "circle")
        return Circle(r, (cx, cy))
    if kind == "ellipse":
        a, b, cx, cy = _floats(args, 4, "ellipse")
        return Ellipse(a, b, (cx, cy))
    if kind == "polar":
        r0, amp, k, ph, cx, cy = _floats(args, 6, "polar")
        return PolarCurve(r0, amp, int(k), ph, (cx, cy))
    raise InvalidProblemError(f"unknown curve type {kind!r}")


def _field(cfg: dict, q: str) -> PiecewiseField:
    both = cfg.get(q)
    plus, minus = cfg.get(f"{q}_plus", both), cfg.get(f"{q}_minus", both)
    if plus is None or minus is None:
        raise InvalidProblemError(f"missing expression for {q} (give {q} or {q}_plus and {q}_minus)")
    if both is not None and (f"{q}_plus" in cfg or f"{q}_minus" in cfg):
        raise InvalidProblemError(f"{q}: give either {q} or the _plus/_minus pair, not both")
    return PiecewiseField(Expression(plus).jet, Expression(minus).jet)


def problem_from_config(cfg: dict) -> ProblemSpec:
    x0, y0, lx, ly = _floats(cfg.get("domain", "0 0 1 1"), 4, "domain")
    mu = _floats(cfg.get("mu", "1"), 1, "mu")[0]
    if mu <= 0:
        raise InvalidProblemError("mu must be positive")
    curve = make_curve(cfg.get("curve", "none"))
    exact = ExactSolution(_field(cfg, "u1"), _field(cfg, "u2"), _field(cfg, "p"))
    return from_exact(cfg.get("name", "config"), (x0, y0), (lx, ly), curve, exact, mu)


def load_problem(path) -> ProblemSpec:
    p = Path(path)
    if not p.is_file():
        raise InvalidProblemError(f"no built-in problem or config file named {str(path)!r}")
    return problem_from_config(parse_config(p.read_text()))
