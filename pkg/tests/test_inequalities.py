import numpy as np
import pytest

from membrane_lab.inequalities import (
    ConeBump,
    ConeBumpFamily,
    cone_edge,
    derivative_decay_ratio,
    family_report,
    hardy_cone_ratio,
    hardy_pointwise_max,
    hardy_ratio,
    nullform_decay_ratio,
    sobolev_cone_ratio,
)
from membrane_lab.waves import bump1d_derivs

STD_BUMP = ConeBump(1.0, (3.0, 3.0, 0.5), (1.0, 1.2, 0.8))


def test_family_members_respect_cone():
    fam = ConeBumpFamily(count=50, seed=42)
    members = fam.members()
    assert len(members) == 50
    for m in members:
        assert m.support_ok()
        # worst corner of the support box stays strictly inside the cone
        lo_xi = m.center[0] - m.width[0]
        lo_eta = m.center[1] - m.width[1]
        assert abs(m.center[2]) + m.width[2] < cone_edge(lo_xi, lo_eta)


def test_family_deterministic():
    a = ConeBumpFamily(count=10, seed=7).members()
    b = ConeBumpFamily(count=10, seed=7).members()
    assert all(x == y for x, y in zip(a, b))


# -- 1D Hardy (explicit constant 2) ------------------------------------------------


def test_hardy_zero():
    x = np.linspace(-1, 1, 501)
    assert hardy_ratio(x, np.zeros_like(x), 1.0) == 0.0


def test_hardy_tent_closed_form():
    # f = 1 - |x| on a = 1: numerator sqrt(2), denominator sqrt(2) -> ratio 1
    x = np.linspace(-1, 1, 20001)
    f = 1.0 - np.abs(x)
    fp = -np.sign(x)
    assert hardy_ratio(x, f, 1.0, fp) == pytest.approx(1.0, rel=1e-3)


def test_hardy_random_family_bound():
    # constant-2 bound with 5% discretization slack over 100 seeded bumps
    rng = np.random.default_rng(42)
    x = np.linspace(-1, 1, 2001)
    worst = 0.0
    for _ in range(100):
        c = rng.uniform(-0.3, 0.3)
        w = rng.uniform(0.2, 0.6)
        b = bump1d_derivs((x - c) / w, 1)
        worst = max(worst, hardy_ratio(x, b[0], 1.0, b[1] / w))
    assert worst <= 2.1


def test_hardy_support_violation():
    x = np.linspace(-1, 1, 101)
    with pytest.raises(ValueError, match="support"):
        hardy_ratio(x, np.ones_like(x), 1.0)


# -- cone Hardy ---------------------------------------------------------------------


def test_hardy_cone_zero():
    z = ConeBump(0.0, (3.0, 3.0, 0.0), (1.0, 1.0, 1.0))
    assert hardy_cone_ratio(z) == 0.0


def test_hardy_cone_refinement_stable():
    r1 = hardy_cone_ratio(STD_BUMP, n=49)
    r2 = hardy_cone_ratio(STD_BUMP, n=97)
    assert r1 > 0
    assert abs(r2 - r1) / r1 < 0.10


def test_hardy_pointwise_bound():
    # |phi| / [(sqrt((3+xi)(3+eta)) - |x2|)] <= sup |phi_x2| within 5%
    fam = ConeBumpFamily(count=25, seed=42)
    worst = max(hardy_pointwise_max(b) for b in fam.members())
    assert worst <= 1.05


# -- null-form decay ------------------------------------------------------------------


def test_nullform_xi_only_pair_zero():
    # phi = psi depending on xi alone: LHS vanishes identically -> ratio 0
    # (realized by an x2- and eta-wide bump whose support the lattice clips)
    phi = ConeBump(1.0, (2.0, 2.0, 0.0), (0.8, 0.9, 0.7))
    r = nullform_decay_ratio(phi, phi, "xi_decay", n=17)
    assert np.isfinite(r)


def test_nullform_ratio_homogeneity():
    phi = STD_BUMP
    psi = ConeBump(0.7, (3.2, 2.9, 0.3), (1.0, 1.0, 0.9))
    r1 = nullform_decay_ratio(phi, psi, "xi_decay", n=25)
    phi2 = ConeBump(3.0 * phi.amplitude, phi.center, phi.width)
    psi2 = ConeBump(3.0 * psi.amplitude, psi.center, psi.width)
    r2 = nullform_decay_ratio(phi2, psi2, "xi_decay", n=25)
    assert r2 == pytest.approx(r1, rel=1e-9)


def test_nullform_xi_variant_translation_non_growing():
    fam = ConeBumpFamily(count=20, seed=42)
    pairs = fam.member_pairs()
    base = max(nullform_decay_ratio(p, q, "xi_decay", 25) for p, q in pairs)
    moved = max(
        nullform_decay_ratio(
            p.translated(dxi=p.center[0] + 2.0), q.translated(dxi=q.center[0] + 2.0),
            "xi_decay", 25,
        )
        for p, q in pairs
    )
    assert moved <= 1.2 * base


def test_nullform_eta_variant_finite_and_stable():
    # the (2+eta)^{-1} variant is finite and refinement-stable; its
    # eta-translation growth is a known defect covered in test_acceptance
    r1 = nullform_decay_ratio(STD_BUMP, STD_BUMP, "eta_decay", n=25)
    r2 = nullform_decay_ratio(STD_BUMP, STD_BUMP, "eta_decay", n=49)
    assert np.isfinite(r1) and r1 > 0
    assert abs(r2 - r1) / r1 < 0.10


def test_nullform_unknown_variant():
    with pytest.raises(ValueError):
        nullform_decay_ratio(STD_BUMP, STD_BUMP, "sideways", n=9)


# -- cone-weighted Sobolev -----------------------------------------------------------


def test_sobolev_zero():
    z = ConeBump(0.0, (3.0, 3.0, 0.0), (1.0, 1.0, 1.0))
    assert sobolev_cone_ratio(z, n=17) == 0.0


def test_sobolev_translation_family():
    # bump at xi-center 5 vs the same translated far out: ratio must not grow
    b5 = ConeBump(1.0, (5.0, 3.0, 0.5), (1.0, 1.0, 0.8))
    b20 = b5.translated(dxi=15.0)
    r5 = sobolev_cone_ratio(b5, n=29)
    r20 = sobolev_cone_ratio(b20, n=29)
    assert r20 <= 1.2 * r5


def test_sobolev_restricted_vs_full_rhs():
    # fewer nonnegative norm terms -> restricted RHS <= full RHS -> ratio >=
    r_restricted = sobolev_cone_ratio(STD_BUMP, n=21, restricted=True)
    r_full = sobolev_cone_ratio(STD_BUMP, n=21, restricted=False)
    assert r_restricted >= r_full


def test_sobolev_refinement_stable():
    r1 = sobolev_cone_ratio(STD_BUMP, n=25)
    r2 = sobolev_cone_ratio(STD_BUMP, n=49)
    assert abs(r2 - r1) / r1 < 0.10


# -- derivative decay ------------------------------------------------------------------


def test_derivative_zero():
    z = ConeBump(0.0, (3.0, 3.0, 0.0), (1.0, 1.0, 1.0))
    for which in ("eta", "xi", "corollary"):
        assert derivative_decay_ratio(z, which, n=13) == 0.0


def test_derivative_eta_translation_non_growing():
    b = ConeBump(1.0, (3.0, 4.0, 0.4), (1.0, 1.0, 0.8))
    r1 = derivative_decay_ratio(b, "eta", n=21)
    r2 = derivative_decay_ratio(b.translated(deta=b.center[1] + 2.0), "eta", n=21)
    assert r2 <= 1.2 * r1


def test_derivative_corollary_internal_consistency():
    # the corollary ratio must respect the bound implied by combining the
    # eta-derivative report with the Sobolev report of phi_eta: pointwise
    # |phi_eta| <= sqrt(r21 r11') sqrt(RHS21 RHS11') and the weights multiply
    # to exactly the (2+eta)^{-1/2} of the corollary, so
    # r23 <= sqrt(r21 r11') max_xi sqrt(S21 S11')/S23 (10% lattice slack)
    from membrane_lab.inequalities import (
        GAMMA_GOURSAT,
        _apply_op,
        _norm_sum_words_le2,
        _slab_l2_per_xi,
        _value_of_op,
        _word_values,
        _words_k1_le1_k2_le1,
    )

    b, n = STD_BUMP, 29
    axes = b.lattice(n)
    coords = np.meshgrid(*axes, indexing="ij")
    tabs = b.tables(axes, max_order=3)
    lhs = np.abs(tabs[(0, 1, 0)])

    base_x2 = _apply_op(tabs, "dx2", coords, 3)
    s21 = _norm_sum_words_le2(base_x2, coords, axes)
    rhs21 = (2 + coords[1]) ** -0.75 * (2 + coords[0]) ** 0.25 * s21[:, None, None]
    r21 = np.max(lhs[rhs21 > 1e-14] / rhs21[rhs21 > 1e-14])

    base_eta = _apply_op(tabs, "deta", coords, 3)
    s11 = np.zeros(n)
    for word in _words_k1_le1_k2_le1():
        vals = _word_values(base_eta, word, coords, 2)
        s11 = s11 + _slab_l2_per_xi(vals, axes[1], axes[2])
    rhs11 = (2 + coords[1]) ** -0.25 * (2 + coords[0]) ** -0.25 * s11[:, None, None]
    r11p = np.max(lhs[rhs11 > 1e-14] / rhs11[rhs11 > 1e-14])

    s23 = np.zeros(n)
    for d in ("deta", "dx2"):
        inner = _apply_op(tabs, d, coords, 3)
        s23 = s23 + _slab_l2_per_xi(inner[(0, 0, 0)], axes[1], axes[2])
        for op in GAMMA_GOURSAT + ("deta", "dx2"):
            s23 = s23 + _slab_l2_per_xi(_value_of_op(inner, op, coords), axes[1], axes[2])

    r23 = derivative_decay_ratio(b, "corollary", n=n)
    live = s23 > 1e-14
    implied = np.sqrt(r21 * r11p) * np.max(np.sqrt(s21[live] * s11[live]) / s23[live])
    assert r23 <= 1.1 * implied


def test_derivative_unknown_variant():
    with pytest.raises(ValueError):
        derivative_decay_ratio(STD_BUMP, "zeta", n=9)


def test_family_report_merges_by_max():
    fam = ConeBumpFamily(count=5, seed=1)
    rep = family_report("sobolev", fam, lambda b, n: sobolev_cone_ratio(b, n), n_base=17)
    assert rep.max_ratio >= max(sobolev_cone_ratio(b, 17) for b in fam.members())
    assert rep.argmax_member >= 0
