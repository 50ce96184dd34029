import numpy as np
import pytest

from membrane_lab.grid import (
    Grid2D,
    ScalarField,
    derivative,
    dump_binary,
    dump_csv,
    fd_weights,
    load_binary,
    load_csv,
    make_bump,
    sobolev_norm,
    weighted_l2,
)


def grid(n=33, half=2.0):
    return Grid2D(-half, half, -half, half, n, n)


def test_grid_invariants():
    g = grid(17)
    assert g.h1 == pytest.approx(4.0 / 16)
    with pytest.raises(ValueError):
        Grid2D(-1, 1, -1, 1, 8, 17)
    with pytest.raises(ValueError):
        Grid2D(1, -1, -1, 1, 17, 17)


def test_fd_weights_standard_stencils():
    w = fd_weights(np.array([-1.0, 0.0, 1.0]), 0.0, 1)
    assert np.allclose(w, [-0.5, 0.0, 0.5])
    w = fd_weights(np.array([-2.0, -1.0, 0.0, 1.0, 2.0]), 0.0, 2)
    assert np.allclose(w, np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0)


@pytest.mark.parametrize("scheme", [2, 4])
@pytest.mark.parametrize("order", [1, 2])
@pytest.mark.parametrize("axis", ["x1", "x2"])
def test_derivative_polynomial_exactness(scheme, order, axis):
    # stencils exact on degree <= scheme_order, boundaries included
    g = grid(21)
    xx1, xx2 = g.mesh()
    x = xx1 if axis == "x1" else xx2
    f = ScalarField(g, x**scheme)
    expect = {
        (1, 2): 2 * x,
        (2, 2): 2 * np.ones_like(x),
        (1, 4): 4 * x**3,
        (2, 4): 12 * x**2,
    }[(order, scheme)]
    got = derivative(f, axis, order, scheme).values
    assert np.max(np.abs(got - expect)) <= 1e-10 * max(1.0, np.max(np.abs(expect)))


def test_derivative_x1_squared_second_order_interior():
    g = grid(21)
    xx1, _ = g.mesh()
    d = derivative(ScalarField(g, xx1**2), "x1", 1, 2).values
    assert np.allclose(d, 2 * xx1, atol=1e-11)


def test_derivative_constant_zero():
    g = grid(21)
    d = derivative(ScalarField(g, np.full((21, 21), 3.7)), "x2", 1, 4)
    assert np.max(np.abs(d.values)) < 1e-12


def test_derivative_convergence_rate_sin():
    # Richardson study: 2nd-order first derivative of sin converges at >= 1.9
    errs, hs = [], []
    for n in (33, 65, 129):
        g = grid(n)
        xx1, _ = g.mesh()
        d = derivative(ScalarField(g, np.sin(xx1)), "x1", 1, 2).values
        errs.append(np.max(np.abs(d - np.cos(xx1))))
        hs.append(g.h1)
    rate = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert rate >= 1.9


def test_derivative_too_small_grid():
    g = Grid2D(-1, 1, -1, 1, 9, 9)
    f = ScalarField(g, np.zeros((9, 9)))
    from membrane_lab.grid import derivative_values

    with pytest.raises(ValueError):
        derivative_values(f.values[:4, :4], 0.1, 0, 2, 4)


def test_bump_zero_amplitude():
    b = make_bump(grid(), (0.0, 0.0), 1.0, 0.0)
    assert np.all(b.values == 0.0)


def test_bump_homogeneity():
    g = grid()
    eps = 1e-3
    b1 = make_bump(g, (0.2, -0.1), 0.9, eps)
    b2 = make_bump(g, (0.2, -0.1), 0.9, 2 * eps)
    assert np.allclose(b2.values, 2.0 * b1.values, rtol=0, atol=0)


def test_bump_closed_form_values():
    # value exp(-1) at the center, exactly zero on and outside r = radius
    g = Grid2D(-2, 2, -2, 2, 41, 41)
    b = make_bump(g, (0.0, 0.0), 1.0, 1.0)
    ic = 20
    assert b.values[ic, ic] == pytest.approx(np.exp(-1.0), rel=1e-14)
    xx1, xx2 = g.mesh()
    outside = xx1**2 + xx2**2 >= 1.0
    assert np.all(b.values[outside] == 0.0)


def test_bump_escapes_grid():
    with pytest.raises(ValueError, match="escapes"):
        make_bump(grid(half=1.0), (0.5, 0.0), 0.8, 1.0)


def test_bump_boundary_smoothness():
    # first derivative at the last in-support node -> 0 under refinement
    vals = []
    for n in (65, 129, 257, 513):
        g = Grid2D(-2, 2, -2, 2, n, n)
        b = make_bump(g, (0.0, 0.0), 1.0, 1.0)
        d = derivative(b, "x1", 1, 4)
        x1 = g.x1
        mid = (n - 1) // 2
        last = np.max(np.where(x1 < 1.0)[0])
        vals.append(abs(d.values[last, mid]))
    assert vals[-1] < vals[0]
    assert vals[-1] < 1e-6


def test_sobolev_norm_zero_and_homogeneity():
    g = grid()
    z = ScalarField(g, np.zeros((33, 33)))
    assert sobolev_norm([(z, z)], 1) == 0.0
    f = make_bump(g, (0, 0), 1.0, 1.0)
    n1 = sobolev_norm([(f, z)], 1)
    f3 = ScalarField(g, 3.0 * f.values)
    assert sobolev_norm([(f3, z)], 1) == pytest.approx(3.0 * n1, rel=1e-12)
    assert n1 > 0


def test_sobolev_norm_refined_oracle():
    # matches a 4x-resolution quadrature oracle within 1%
    def compute(n):
        g = Grid2D(-2, 2, -2, 2, n, n)
        f = make_bump(g, (0, 0), 1.2, 1.0)
        gg = make_bump(g, (0.1, 0), 1.0, 0.5)
        return sobolev_norm([(f, gg)], 1)

    coarse, fine = compute(129), compute(513)
    assert abs(coarse - fine) / fine < 0.01


def test_sobolev_norm_order_cap():
    g = grid()
    z = ScalarField(g, np.zeros((33, 33)))
    with pytest.raises(ValueError):
        sobolev_norm([(z, z)], 5)


def test_weighted_l2_basics():
    xi = np.linspace(0, 1, 41)
    eta = np.linspace(0, 2, 31)
    x2 = np.linspace(-1, 1, 21)
    phi = np.zeros((41, 31, 21))
    assert weighted_l2(phi, (xi, eta, x2)) == 0.0
    rng = np.random.default_rng(7)
    phi = rng.standard_normal(phi.shape)
    v1 = weighted_l2(phi, (xi, eta, x2), 1.0)
    v2 = weighted_l2(phi, (xi, eta, x2), 2.0)
    assert v2 == pytest.approx(2.0 * v1, rel=1e-13)


def test_weighted_l2_unweighted_oracle():
    # smooth bump against an independent nested-trapezoid quadrature
    x = np.linspace(-1, 1, 101)
    y = np.linspace(-1, 1, 91)
    xx, yy = np.meshgrid(x, y, indexing="ij")
    r2 = xx**2 + yy**2
    phi = np.where(r2 < 0.64, np.exp(-1.0 / np.maximum(1e-300, 1 - r2 / 0.64)), 0.0)
    got = weighted_l2(phi, (x, y))
    oracle = np.trapezoid(np.trapezoid(phi**2, y, axis=1), x, axis=0)
    assert got == pytest.approx(float(oracle), rel=1e-12)


def test_field_finite_guard():
    g = grid()
    vals = np.zeros((33, 33))
    vals[3, 3] = np.nan
    with pytest.raises(FloatingPointError):
        ScalarField(g, vals).check_finite()


def test_support_radius():
    g = grid(65)
    b = make_bump(g, (0.0, 0.0), 0.8, 1.0)
    assert b.support_radius() <= 0.8 + 1e-12
    z = ScalarField(g, np.zeros((65, 65)))
    assert z.support_radius() == 0.0


def test_csv_roundtrip(tmp_path):
    g = grid(17, half=1.5)
    b = make_bump(g, (0.1, -0.2), 0.7, 0.3)
    path = tmp_path / "field.csv"
    dump_csv(b, str(path))
    back = load_csv(path)
    assert back.grid == g
    assert np.allclose(back.values, b.values, rtol=0, atol=0)
    header = path.read_text().splitlines()[1]
    assert header == "x1,x2,value"


def test_binary_roundtrip(tmp_path):
    g = grid(17)
    b = make_bump(g, (0.0, 0.0), 1.0, 2.5)
    b.time_label = 3.25
    path = tmp_path / "field.bin"
    dump_binary(b, path)
    back = load_binary(path)
    assert back.grid == g
    assert back.time_label == 3.25
    assert np.array_equal(back.values, b.values)
