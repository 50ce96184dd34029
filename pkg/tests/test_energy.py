import numpy as np
import pytest

from membrane_lab.energy import (
    EnergyReport,
    WeightB,
    energy_Es,
    energy_es,
    energy_es_stations,
    energy_etilde,
    fit_decay,
    gamma_words,
    station_report,
)
from membrane_lab.inequalities import ConeBump
from membrane_lab.vector_fields import GoursatStation
from membrane_lab.waves import profile

BUMP = ConeBump(1.0, (3.0, 3.0, 0.5), (1.0, 1.2, 0.8))


def zero_tables(n=15, order=2):
    keys = [
        (i, j, k)
        for i in range(order + 1)
        for j in range(order + 1 - i)
        for k in range(order + 1 - i - j)
    ]
    return {key: np.zeros((n, n, n)) for key in keys}


def axes_for(n=15):
    return [np.linspace(0.0, 4.0, n)] * 3


def test_gamma_word_count():
    assert len(gamma_words(0)) == 1
    assert len(gamma_words(1)) == 7
    assert len(gamma_words(2)) == 43


def test_energy_Es_zero():
    assert energy_Es(zero_tables(), axes_for(), 0) == 0.0
    assert energy_Es(zero_tables(), axes_for(), 1) == 0.0


def test_energy_Es_quadratic_homogeneity():
    axes = BUMP.lattice(25)
    tabs = BUMP.tables(axes, max_order=2)
    e1 = energy_Es(tabs, axes, 1)
    tabs2 = {k: 3.0 * v for k, v in tabs.items()}
    assert energy_Es(tabs2, axes, 1) == pytest.approx(9.0 * e1, rel=1e-12)


def test_energy_Es_refined_quadrature_oracle():
    # separable smooth function against its own finer-lattice quadrature
    e1 = energy_Es(BUMP.tables(BUMP.lattice(41), 2), BUMP.lattice(41), 1)
    e2 = energy_Es(BUMP.tables(BUMP.lattice(81), 2), BUMP.lattice(81), 1)
    assert abs(e1 - e2) / e2 < 0.01


def test_energy_Es_depth_guard():
    with pytest.raises(ValueError):
        energy_Es(zero_tables(order=1), axes_for(), 2)
    with pytest.raises(ValueError):
        energy_Es(zero_tables(), axes_for(), 3)


def test_energy_es_zero_and_locality():
    assert energy_es(zero_tables(), axes_for(), 0) == 0.0
    # support near one xi station: the sup is attained inside the support
    axes = BUMP.lattice(31)
    tabs = BUMP.tables(axes, max_order=1)
    per_xi = []
    for i, xi in enumerate(axes[0]):
        per_xi.append(
            float(
                np.trapezoid(
                    np.trapezoid(tabs[(0, 1, 0)][i] ** 2 + tabs[(0, 0, 1)][i] ** 2,
                                 x=axes[2], axis=1),
                    x=axes[1], axis=0,
                )
            )
        )
    assert energy_es(tabs, axes, 0) == pytest.approx(max(per_xi), rel=1e-12)


def test_energy_es_synthetic_decay_profile():
    # u with u_eta = (2+xi)^{-1/4} b(eta, x2): station integrals scale like
    # (2+xi)^{-1/2}; checked against the quadrature oracle within 2%
    eta = np.linspace(-1.0, 3.0, 41)
    x2 = np.linspace(-1.0, 1.0, 41)
    from membrane_lab.waves import bump1d_derivs

    beta_eta = bump1d_derivs((eta - 1.0) / 1.5, 0)[0]
    beta_x2 = bump1d_derivs(x2 / 0.8, 0)[0]
    b2d = np.einsum("j,k->jk", beta_eta, beta_x2)
    base = float(np.trapezoid(np.trapezoid(b2d**2, x=x2, axis=1), x=eta, axis=0))
    stations = []
    for xi in (2.0, 5.0, 11.0):
        scale = (2.0 + xi) ** -0.25
        st = GoursatStation(
            xi=xi,
            eta=eta,
            x2=x2,
            u=np.zeros_like(b2d),
            u_xi=np.zeros_like(b2d),
            u_eta=scale * b2d,
            u_x2=np.zeros_like(b2d),
        )
        stations.append(st)
    sup, vals = energy_es_stations(stations)
    for xi, v in zip((2.0, 5.0, 11.0), vals):
        assert v == pytest.approx((2.0 + xi) ** -0.5 * base, rel=0.02)
    assert sup == max(vals)


def test_energy_etilde_zero_and_const_patch():
    assert energy_etilde(zero_tables(), axes_for(), 0.1, 0) == 0.0
    n = 15
    tabs = zero_tables(n)
    tabs[(0, 0, 0)] = np.ones((n, n, n))
    axes = [np.linspace(1.0, 5.0, n)] * 3
    got = energy_etilde(tabs, axes, 0.1, 0)
    assert got == pytest.approx(3.0**-0.1, rel=1e-12)


def test_energy_etilde_weight_monotonicity():
    axes = BUMP.lattice(21)
    tabs = BUMP.tables(axes, max_order=1)
    v1 = energy_etilde(tabs, axes, 0.14, 0)
    v2 = energy_etilde(tabs, axes, 0.01, 0)
    assert v2 > v1  # support at xi > -1 means smaller delta weighs less


def test_energy_etilde_delta_range():
    with pytest.raises(ValueError):
        energy_etilde(zero_tables(), axes_for(), 0.2, 0)
    with pytest.raises(ValueError):
        energy_etilde(zero_tables(), axes_for(), 0.0, 0)


def test_energy_etilde_linear_homogeneity():
    axes = BUMP.lattice(21)
    tabs = BUMP.tables(axes, max_order=1)
    v1 = energy_etilde(tabs, axes, 0.1, 1)
    tabs2 = {k: 2.0 * v for k, v in tabs.items()}
    assert energy_etilde(tabs2, axes, 0.1, 1) == pytest.approx(2.0 * v1, rel=1e-12)


def test_weight_b_bounds_sech():
    wb = WeightB(profile("sech", 0.5))
    m, M = wb.exp_neg_bounds()
    assert 0.0 < m <= M <= 1.0
    # closed form: B(inf) = (A^2/3) (1 + tanh(1)^3) with A = 0.5
    b_inf = 0.25 * (1.0 + np.tanh(1.0) ** 3) / 3.0
    assert m == pytest.approx(np.exp(-b_inf), rel=1e-4)
    # tabulated weight respects the bounds at every lattice node
    w = np.exp(-wb(wb.xi_grid))
    assert np.all(w >= m - 1e-15) and np.all(w <= M + 1e-15)
    assert wb(-1.0) == 0.0
    assert wb(-5.0) == 0.0  # clamped below the data line


def test_fit_decay_synthetic_quarter():
    st = [(xi, (2.0 + xi) ** -0.25) for xi in np.geomspace(5, 40, 8)]
    out = fit_decay(st)
    assert out["slope"] == pytest.approx(-0.25, abs=0.01)
    assert out["r2"] > 0.999


def test_fit_decay_constant():
    st = [(xi, 3.7) for xi in np.geomspace(5, 40, 8)]
    assert fit_decay(st)["slope"] == pytest.approx(0.0, abs=1e-12)


def test_fit_decay_log_form_oracle():
    # regression oracle on (2+xi)^{-1} log(2+xi) over stations in [5, 40]:
    # d log y / d log(2+xi) = -1 + 1/log(2+xi), least-squares ~ -0.64
    st = [(xi, np.log(2.0 + xi) / (2.0 + xi)) for xi in np.geomspace(5, 40, 8)]
    out = fit_decay(st)
    assert out["slope"] == pytest.approx(-0.64, abs=0.03)


def test_fit_decay_station_guard():
    with pytest.raises(ValueError):
        fit_decay([(5.0, 1.0), (10.0, 0.5), (20.0, 0.0), (40.0, -1.0)])


def test_energy_report_zero():
    rep = EnergyReport.zero(t=0.0)
    assert rep.all_zero()
    st = GoursatStation(
        xi=5.0,
        eta=np.linspace(0, 1, 5),
        x2=np.linspace(-1, 1, 7),
        u=np.zeros((5, 7)),
        u_xi=np.zeros((5, 7)),
        u_eta=np.zeros((5, 7)),
        u_x2=np.zeros((5, 7)),
    )
    rep = station_report(st)
    assert rep.all_zero() or rep.etildes_proxy == 0.0
    assert rep.xi_station == 5.0
