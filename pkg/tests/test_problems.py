import numpy as np
import pytest
import sympy as sp

from oracles import SYMBOLIC, X, Y
from stokes_mac.errors import InvalidProblemError
from stokes_mac.problems import (
    ExactSolution,
    PiecewiseField,
    example1,
    example2,
    from_exact,
    get_problem,
    smooth,
    stress_jump,
    validate,
)


def val(spec, which, x, y, s):
    return float(getattr(spec.exact, which).jet(np.array([x]), np.array([y]), np.int8(s))[0][0])


# --- point values ---------------------------------------------------------


def test_example1_inside_u1_value():
    spec = example1()
    assert spec.exact_value("u1", 0.0, 0.5) == pytest.approx(0.03125, abs=1e-15)


def test_example2_inside_u1_value():
    spec = example2()
    assert spec.exact_value("u1", 0.0, 0.25) == pytest.approx(0.0625, abs=1e-15)


def test_example1_velocity_continuous_at_east_point():
    spec = example1()
    for q in ("u1", "u2"):
        assert val(spec, q, 1.0, 0.0, 1) - val(spec, q, 1.0, 0.0, -1) == pytest.approx(0.0, abs=1e-15)


def test_example1_pressure_jump_is_interior_minus_exterior():
    spec = example1()
    assert val(spec, "p", 1.0, 0.0, 1) - val(spec, "p", 1.0, 0.0, -1) == 5.0


def test_example2_exterior_divergence_cancels():
    spec = example2()
    a = spec.exact.u1.jet(np.array([1.5]), np.array([0.5]), np.int8(-1))
    b = spec.exact.u2.jet(np.array([1.5]), np.array([0.5]), np.int8(-1))
    assert a[1][0] + b[2][0] == pytest.approx(0.0, abs=1e-15)


# --- stress jump against symbolic differentiation ------------------------


def symbolic_psi(name, px, py, nx, ny):
    sides = []
    for k in (0, 1):
        u1, u2, p = (SYMBOLIC[name][q][k] for q in ("u1", "u2", "p"))
        s11 = -p + 2 * sp.diff(u1, X)
        s12 = sp.diff(u1, Y) + sp.diff(u2, X)
        s22 = -p + 2 * sp.diff(u2, Y)
        f = sp.lambdify((X, Y), [s11, s12, s22], "numpy")
        sides.append([np.broadcast_to(v, px.shape) for v in f(px, py)])
    (a11, a12, a22), (b11, b12, b22) = sides
    return (a11 - b11) * nx + (a12 - b12) * ny, (a12 - b12) * nx + (a22 - b22) * ny


def test_example2_psi_at_north_point():
    spec = example2()
    # (0, 0.5) is the curve point at t = pi/2, outward normal (0, 1)
    psi, _ = stress_jump(spec.exact, spec.curve, np.array([np.pi / 2]))
    ref = symbolic_psi("example2", np.array([0.0]), np.array([0.5]), 0.0, 1.0)
    np.testing.assert_allclose([psi[0][0], psi[1][0]], [ref[0][0], ref[1][0]], atol=1e-12)


@pytest.mark.parametrize("name, make", [("example1", example1), ("example2", example2)])
def test_psi_matches_symbolic_on_curve(name, make):
    spec = make()
    t = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
    px, py = spec.curve.point(t)
    # outward normal from the level function gradient
    gx, gy = (2 * px, 2 * py) if name == "example1" else (2 * px, 8 * py)
    nrm = np.hypot(gx, gy)
    ref = symbolic_psi(name, px, py, gx / nrm, gy / nrm)
    psi = spec.interface_data.psi(t)
    np.testing.assert_allclose(psi[0], ref[0], atol=1e-10)
    np.testing.assert_allclose(psi[1], ref[1], atol=1e-10)


def test_psi_prime_matches_finite_difference_along_curve():
    spec = example1()
    t = np.linspace(0.1, 6.0, 13)
    dt = 1e-5
    _, dpsi = stress_jump(spec.exact, spec.curve, t)
    p1, _ = stress_jump(spec.exact, spec.curve, t + dt)
    m1, _ = stress_jump(spec.exact, spec.curve, t - dt)
    # unit circle: arclength equals the parameter
    for k in range(2):
        np.testing.assert_allclose(dpsi[k], (p1[k] - m1[k]) / (2 * dt), atol=1e-7)


# --- forcing against finite differences ----------------------------------


def fd_laplacian_and_gradient(fn, x, y, h=1e-4):
    v = lambda a, b: fn(a, b)[0]
    c = [-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12]
    d = [1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12]
    off = [-2, -1, 0, 1, 2]
    lap = sum(w * (v(x + k * h, y) + v(x, y + k * h)) for w, k in zip(c, off)) / h**2
    gx = sum(w * v(x + k * h, y) for w, k in zip(d, off)) / h
    gy = sum(w * v(x, y + k * h) for w, k in zip(d, off)) / h
    return lap, gx, gy


@pytest.mark.parametrize("make", [example1, example2], ids=["example1", "example2"])
def test_forcing_matches_finite_differences(make):
    spec = make()
    rng = np.random.default_rng(11)
    ex = spec.exact
    for s, pick in ((1, lambda f: f.plus), (-1, lambda f: f.minus)):
        pts = []
        while len(pts) < 200:
            x, y = rng.uniform(-2, 2, 2)
            # stay clear of the singular origin of the exterior formulas
            if (spec.curve.classify(x, y) >= 0) == (s == 1) and np.hypot(x, y) > 0.05:
                pts.append((x, y))
        x, y = np.array(pts).T
        lap1, _, _ = fd_laplacian_and_gradient(pick(ex.u1), x, y)
        lap2, _, _ = fd_laplacian_and_gradient(pick(ex.u2), x, y)
        _, px, py = fd_laplacian_and_gradient(pick(ex.p), x, y)
        f1, f2 = spec.forcing(x, y, np.full(x.shape, s, dtype=np.int8))
        np.testing.assert_allclose(f1, -lap1 + px, atol=1e-6)
        np.testing.assert_allclose(f2, -lap2 + py, atol=1e-6)


# --- validation -----------------------------------------------------------


@pytest.mark.parametrize("make", [example1, example2, smooth, lambda: smooth(True)])
def test_builtin_problems_validate(make):
    diag = validate(make())
    assert all(v <= 1e-10 for v in diag.values())


def _shift(fn, c):
    return lambda x, y: (fn(x, y)[0] + c,) + tuple(fn(x, y)[1:])


def test_velocity_jump_rejected():
    base = example1()
    ex = base.exact
    bad = ExactSolution(PiecewiseField(_shift(ex.u1.plus, 0.1), ex.u1.minus), ex.u2, ex.p)
    spec = from_exact("bad", base.origin, base.extent, base.curve, bad)
    with pytest.raises(InvalidProblemError, match="velocity_jump"):
        validate(spec)


def test_non_solenoidal_field_rejected():
    base = example2()
    ex = base.exact

    def stretched(x, y):
        z = np.zeros_like(x)
        return (x, z + 1, z, z, z, z)

    bad = ExactSolution(PiecewiseField(stretched, ex.u1.minus), ex.u2, ex.p)
    spec = from_exact("bad", base.origin, base.extent, base.curve, bad)
    with pytest.raises(InvalidProblemError, match="divergence"):
        validate(spec)


def test_problem_without_exact_solution_rejected():
    spec = example1()
    spec.exact = None
    with pytest.raises(InvalidProblemError):
        validate(spec)


def test_get_problem_by_name():
    assert get_problem("example2").name == "example2"
    assert get_problem("smooth_curve").curve is not None
