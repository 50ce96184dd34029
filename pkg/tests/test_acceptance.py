"""Acceptance criteria, one test per criterion, tolerances pinned.

Each test prints a PASS/FAIL line (run with -v -s or -rA to see them all).
Criterion 5 carries one expected failure, kept faithful and strict: the
eta-weighted null-form estimate grows under eta-translation because the
operator family deliberately omits the one generator (eta d_x2 + 2 x2 d_xi)
that the eta-direction algebra needs; see the analysis in its docstring.
"""

import json

import numpy as np
import pytest

from membrane_lab.cli import main as cli_main
from membrane_lab.energy import fit_decay
from membrane_lab.evolve import BackgroundSpec, BumpSpec, SimConfig, init_cauchy, run, step
from membrane_lab.grid import Grid2D
from membrane_lab.inequalities import (
    ConeBumpFamily,
    derivative_decay_ratio,
    hardy_cone_ratio,
    hardy_pointwise_max,
    hardy_ratio,
    nullform_decay_ratio,
    sobolev_cone_ratio,
)
from membrane_lab.ops import (
    PointJet,
    cartesian_to_goursat_jet,
    delta_factor,
    membrane_residual,
    mform,
    null_form_cartesian,
    null_form_goursat,
)
from membrane_lab.vector_fields import TriPoly, apply_vf_poly, commutator_box
from membrane_lab.waves import (
    affine_subluminal_solution,
    bump1d_derivs,
    lightspeed_solution,
    lightspeed_sum_solution,
    profile,
    residual_convergence,
    superluminal_solution,
)

SEED = 42


def report(num: int, ok: bool, detail: str):
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


# -- 1: exact-solution residual convergence ---------------------------------------


@pytest.mark.parametrize("scheme", [4])
def test_criterion_1_exact_residual_convergence(scheme):
    spans = [(0.0, 0.5), (-1.5, 1.5), (-1.5, 1.5)]
    base = [9, 129, 129]  # spatial levels 129^2 -> 257^2 -> 513^2
    families = {
        "affine": affine_subluminal_solution((0.2, 0.3), 1.0, 0.6).value,
        "lightspeed_product": lightspeed_solution(0.5, 1.0, profile("sech", 0.5)).value,
        "lightspeed_sum": lightspeed_sum_solution(
            (0.4, 0.8), (profile("cos"), profile("sin"))
        ).value,
        "superluminal": superluminal_solution(profile("sech", 1.0), 2.0).value,
    }
    ok = True
    details = []
    for name, value in families.items():
        rep = residual_convergence(value, spans, refinements=3, scheme_order=scheme,
                                   base_ns=base)
        good = rep["exact"] or rep["order"] >= scheme - 0.3
        ok &= good
        details.append(f"{name}: order={rep['order']:.2f} res={rep['max_residual'][-1]:.1e}")
    assert report(1, ok, "; ".join(details))


# -- 2: operator algebra ------------------------------------------------------------


def test_criterion_2_operator_algebra():
    rng = np.random.default_rng(SEED)
    worst_q0 = worst_m = 0.0
    checked = 0
    while checked < 1000:
        jet = PointJet(*rng.uniform(-0.6, 0.6, size=10))
        qc = null_form_cartesian(jet, jet)
        qg = null_form_goursat(cartesian_to_goursat_jet(jet), cartesian_to_goursat_jet(jet))
        worst_q0 = max(worst_q0, abs(qc - qg) / max(1.0, abs(qc)))
        d = delta_factor(jet)
        if d <= 0.05:
            continue
        checked += 1
        m = mform(jet)
        worst_m = max(worst_m, abs(m - d**1.5 * membrane_residual(jet)) / max(1.0, abs(m)))
    ok = worst_q0 <= 1e-11 and worst_m <= 1e-10
    assert report(2, ok, f"Q0 agreement {worst_q0:.1e} (<=1e-11); m-form {worst_m:.1e} (<=1e-10)")


# -- 3: commutators and operator identities ------------------------------------------


def test_criterion_3_commutators():
    rng = np.random.default_rng(SEED)
    expected = {"G1": 0.0, "G2": 0.0, "G3": 0.0, "G4": 2.0, "G5": 2.0, "G6": 0.0}
    worst_lambda = 0.0
    for gid, lam in expected.items():
        for _ in range(25):
            rep = commutator_box(gid, TriPoly.random(rng, degree=4))
            worst_lambda = max(worst_lambda, abs(rep.fitted_coefficient - lam))
    pts = np.meshgrid(*(np.linspace(-1.5, 1.5, 5),) * 3, indexing="ij")
    pts = tuple(a.ravel() for a in pts)
    worst_id = 0.0
    for _ in range(20):
        f = TriPoly.random(rng, degree=4)
        for gid, parts in (("G4", (("L0", 1), ("L1", -1))),
                           ("G5", (("L0", 1), ("L1", 1))),
                           ("G6", (("L2", 1), ("Omega", 1)))):
            lhs = apply_vf_poly(gid, f)(*pts)
            rhs = sum(c * apply_vf_poly(z, f)(*pts) for z, c in parts)
            worst_id = max(worst_id, np.max(np.abs(lhs - rhs)) / max(1.0, np.max(np.abs(lhs))))
    ok = worst_lambda <= 1e-8 and worst_id <= 1e-12
    assert report(3, ok, f"lambda error {worst_lambda:.1e} (<=1e-8); identities {worst_id:.1e} (<=1e-12)")


# -- 4: Hardy bound -------------------------------------------------------------------


def test_criterion_4_hardy():
    rng = np.random.default_rng(SEED)
    shapes = [(rng.uniform(-0.3, 0.3), rng.uniform(0.2, 0.6)) for _ in range(100)]

    def family_max(n_pts):
        x = np.linspace(-1.0, 1.0, n_pts)
        worst = 0.0
        for c, w in shapes:
            vals = bump1d_derivs((x - c) / w, 1)
            worst = max(worst, hardy_ratio(x, vals[0], 1.0, vals[1] / w))
        return worst

    base, fine = family_max(2001), family_max(4001)
    drift = abs(fine - base) / base
    ok = max(base, fine) <= 2.1 and drift < 0.10
    assert report(4, ok, f"max ratio {max(base, fine):.3f} (<=2.1); drift {drift:.1%} (<10%)")


# -- 5: weighted estimate suite -------------------------------------------------------

FAMILY = ConeBumpFamily(count=100, seed=SEED)


def _family_stats(member_fn, n_base, pairs=False, translate=None):
    """(max ratio, refinement drift, translation growth) over the family."""
    items = FAMILY.member_pairs() if pairs else FAMILY.members()

    def eval_all(n):
        if pairs:
            return max(member_fn(p, q, n) for p, q in items)
        return max(member_fn(b, n) for b in items)

    base = eval_all(n_base)
    fine = eval_all(2 * (n_base - 1) + 1)
    drift = abs(fine - base) / base if base > 0 else 0.0
    growth = None
    if translate is not None:
        if pairs:
            moved = max(member_fn(translate(p), translate(q), n_base) for p, q in items)
        else:
            moved = max(member_fn(translate(b), n_base) for b in items)
        growth = moved / base - 1.0 if base > 0 else 0.0
    return max(base, fine), drift, growth


def _dbl_xi(b):
    # doubling of the weight argument 2 + xi
    return b.translated(dxi=b.center[0] + 2.0)


def _dbl_eta(b):
    return b.translated(deta=b.center[1] + 2.0)


def test_criterion_5_weighted_suite():
    lines, ok = [], True

    r, d, g = _family_stats(
        lambda p, q, n: nullform_decay_ratio(p, q, "xi_decay", n), 33, pairs=True,
        translate=_dbl_xi)
    ok &= np.isfinite(r) and d < 0.10 and g <= 0.20
    lines.append(f"(2.5) r={r:.2f} drift={d:.1%} growth={g:+.1%}")

    r, d, _ = _family_stats(
        lambda p, q, n: nullform_decay_ratio(p, q, "eta_decay", n), 33, pairs=True)
    ok &= np.isfinite(r) and d < 0.10
    lines.append(f"(2.6) r={r:.2f} drift={d:.1%} (translation leg: xfail test)")

    r, d, g = _family_stats(lambda b, n: hardy_cone_ratio(b, n=n), 49, translate=_dbl_xi)
    ok &= np.isfinite(r) and d < 0.10 and g <= 0.20
    lines.append(f"(2.7) r={r:.2f} drift={d:.1%} growth={g:+.1%}")

    w28_base = max(hardy_pointwise_max(b, 22) for b in FAMILY.members())
    w28_fine = max(hardy_pointwise_max(b, 43) for b in FAMILY.members())
    w28_moved = max(hardy_pointwise_max(_dbl_xi(b), 22) for b in FAMILY.members())
    d28 = abs(w28_fine - w28_base) / w28_base
    g28 = w28_moved / w28_base - 1.0
    ok &= max(w28_base, w28_fine) <= 1.05 and d28 < 0.10 and g28 <= 0.20
    lines.append(f"(2.8) r={max(w28_base, w28_fine):.2f} drift={d28:.1%} growth={g28:+.1%}")

    r, d, g = _family_stats(lambda b, n: sobolev_cone_ratio(b, n), 29, translate=_dbl_xi)
    _, _, g_eta = _family_stats(lambda b, n: sobolev_cone_ratio(b, n), 29, translate=_dbl_eta)
    ok &= np.isfinite(r) and d < 0.10 and g <= 0.20 and g_eta <= 0.20
    lines.append(f"(2.11) r={r:.3f} drift={d:.1%} growth(xi)={g:+.1%} growth(eta)={g_eta:+.1%}")

    for which, translate, tag in (("eta", _dbl_eta, "(2.21)"), ("xi", _dbl_xi, "(2.22)"),
                                  ("corollary", _dbl_eta, "(2.23)")):
        r, d, g = _family_stats(
            lambda b, n, w=which: derivative_decay_ratio(b, w, n), 29, translate=translate)
        ok &= np.isfinite(r) and d < 0.10 and g <= 0.20
        lines.append(f"{tag} r={r:.4f} drift={d:.1%} growth={g:+.1%}")

    assert report(5, ok, "; ".join(lines))


@pytest.mark.xfail(
    strict=True,
    reason="(2.6) with the six-operator family is not eta-translation stable: "
    "the eta-mirror of the xi-direction algebra needs eta d_x2 + 2 x2 d_xi "
    "(= L2 - Omega), exactly the generator the family drops; the measured "
    "max ratio doubles when the eta-center doubles (see decisions ledger).",
)
def test_criterion_5_eta_nullform_translation():
    _, _, g = _family_stats(
        lambda p, q, n: nullform_decay_ratio(p, q, "eta_decay", n), 33, pairs=True,
        translate=_dbl_eta)
    assert report(5, g <= 0.20, f"(2.6) eta-doubling growth {g:+.1%} (<=+20%)")


# -- 6: background exactness -----------------------------------------------------------


def test_criterion_6_background_exact():
    g = Grid2D(-8.0, 8.0, -8.0, 8.0, 257, 257)
    cfg = SimConfig(grid=g, t_end=6.0, epsilon=0.0,
                    background=BackgroundSpec("sech", 0.5))
    state = init_cauchy(cfg)
    prof = cfg.background.make_profile()
    for _ in range(100):
        state = step(state, cfg, prof)
    sup = float(np.max(np.abs(state.u.values)))
    ok = sup <= 1e-10
    assert report(6, ok, f"eps=0, 100 steps on 257^2: sup|u| = {sup:.2e} (<=1e-10)")


# -- 7/8/10: stability run on 513^2 ----------------------------------------------------


@pytest.fixture(scope="module")
def stability_run():
    g = Grid2D(-22.0, 22.0, -22.0, 22.0, 513, 513)
    cfg = SimConfig(grid=g, t_end=20.0, epsilon=1e-3, cadence=0.5,
                    background=BackgroundSpec("sech", 0.5))
    return cfg, run(cfg)


def test_criterion_7_small_data_stability(stability_run):
    cfg, res = stability_run
    s = res.summary
    es0 = res.records[0].Es_proxy
    es_ok = max(r.Es_proxy for r in res.records) <= 2.0 * es0
    ok = s["max_sup_u"] <= 10 * cfg.epsilon and s["min_delta"] >= 0.5 and es_ok
    assert report(
        7,
        ok,
        f"sup|u|={s['max_sup_u']:.2e} (<=1e-2); minDelta={s['min_delta']:.3f} (>=0.5); "
        f"Es(t)/Es(0) max={max(r.Es_proxy for r in res.records) / es0:.2f} (<=2)",
    )


def test_criterion_8_decay_trend(stability_run):
    _, res = stability_run
    pts = [(st.xi, st.sup_abs("u")) for st in res.stations if 5.0 <= st.xi <= 40.0]
    fit = fit_decay(pts)
    ok = fit["slope"] <= -0.10
    assert report(8, ok, f"fitted slope {fit['slope']:.3f} (<= -0.10; asymptotic -1/4), "
                         f"r2={fit['r2']:.2f}")


def test_criterion_10_finite_propagation(stability_run):
    cfg, res = stability_run
    h = max(cfg.grid.h1, cfg.grid.h2)
    support_ok = all(r.support_radius <= r.t + 1.0 + 2.0 * h + 1e-9 for r in res.records)
    cone_ok = True
    for st in res.stations:
        edge = np.sqrt((2.0 + st.xi) * (2.0 + np.maximum(st.eta, -1.0)))
        mask = np.abs(st.u) > 1e-13
        for i in range(len(st.eta)):
            if mask[i].any():
                cone_ok &= float(np.max(np.abs(st.x2[mask[i]]))) <= edge[i] + h
    ok = support_ok and cone_ok
    assert report(10, ok, f"support radius <= t+1+2h at {len(res.records)} emissions; "
                          f"station support inside the cone with one-cell slack: {cone_ok}")


# -- 9: flat-membrane energy conservation ----------------------------------------------


def test_criterion_9_hamiltonian_conservation():
    g = Grid2D(-12.0, 12.0, -12.0, 12.0, 769, 769)
    cfg = SimConfig(grid=g, t_end=10.0, epsilon=0.05, background=None, cadence=1.0,
                    cfl=0.25, f_bump=BumpSpec(radius=0.95),
                    g_bump=BumpSpec(radius=0.85, weight=0.5))
    res = run(cfg)
    hams = [r.hamiltonian for r in res.records]
    drift = (max(hams) - min(hams)) / abs(hams[0])
    ok = drift <= 1e-4
    assert report(9, ok, f"Hamiltonian relative drift over t in [0,10]: {drift:.2e} (<=1e-4)")


# -- 11: determinism --------------------------------------------------------------------


def test_criterion_11_determinism(tmp_path):
    blobs = []
    for tag in ("a", "b"):
        out = tmp_path / f"ineq_{tag}"
        cli_main(["inequalities", "--which", "hardy", "--count", "50", "--seed", "42",
                  "--outdir", str(out)])
        blob = (out / "inequalities.csv").read_bytes()
        out2 = tmp_path / f"evolve_{tag}"
        cli_main(["evolve", "--grid-n", "97", "--half-width", "5", "--t-end", "2",
                  "--outdir", str(out2)])
        blob += (out2 / "records.ndjson").read_bytes()
        blob += (out2 / "stations.ndjson").read_bytes()
        blob += (out2 / "summary.json").read_bytes()
        blobs.append(blob)
    ok = blobs[0] == blobs[1]
    assert report(11, ok, "identical config+seed gives byte-identical CSV/NDJSON/summary")
