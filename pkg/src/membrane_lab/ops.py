"""Pointwise Minkowski operators on 2-jets.

The membrane equation for a graph v(t, x1, x2),

    d/dt ( v_t / sqrt(Delta) ) - sum_i d/dx_i ( v_{x_i} / sqrt(Delta) ) = 0,
    Delta = 1 + |grad v|^2 - v_t^2 = 1 - Q0(v, v),

is handled here in three equivalent shapes: the conservative residual, the
quasilinear second-order form (what the evolver integrates), and the
null-form shape  Box v = -Q0(v, Q0(v,v)) / (2 (1 - Q0(v,v))).  All operators
act on value types; the same entry points serve analytic jets (exact-solution
tests) and grid-differenced jets.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "PointJet",
    "GoursatJet",
    "MetricCoeffs",
    "BackgroundJet",
    "DegenerateSurfaceError",
    "SIGMA_MARGIN",
    "delta_factor",
    "null_form_cartesian",
    "null_form_goursat",
    "box",
    "membrane_residual",
    "quasilinear_coeffs",
    "mform",
    "background_pointjet",
    "perturbed_rhs_cartesian",
    "eq32_rhs_cartesian",
    "perturbed_rhs_goursat",
    "cartesian_to_goursat_jet",
    "goursat_to_cartesian_jet",
]

# sqrt(1 - sigma) appears under a root; approaches closer than this margin to
# sigma = 1 leave the timelike regime and raise instead of continuing.
SIGMA_MARGIN = 1e-6


class DegenerateSurfaceError(ValueError):
    """Raised when the induced metric degenerates (Delta <= 0 or sigma >= 1)."""


@dataclass(frozen=True)
class PointJet:
    """2-jet of a scalar at a spacetime point: value, first and second derivatives.

    Second derivatives are symmetric; each mixed entry is stored once.
    """

    value: float = 0.0
    d_t: float = 0.0
    d_x1: float = 0.0
    d_x2: float = 0.0
    d_tt: float = 0.0
    d_tx1: float = 0.0
    d_tx2: float = 0.0
    d_x1x1: float = 0.0
    d_x1x2: float = 0.0
    d_x2x2: float = 0.0

    def __add__(self, other: "PointJet") -> "PointJet":
        return PointJet(*(a + b for a, b in zip(self._astuple(), other._astuple())))

    def __sub__(self, other: "PointJet") -> "PointJet":
        return PointJet(*(a - b for a, b in zip(self._astuple(), other._astuple())))

    def _astuple(self):
        return (
            self.value,
            self.d_t,
            self.d_x1,
            self.d_x2,
            self.d_tt,
            self.d_tx1,
            self.d_tx2,
            self.d_x1x1,
            self.d_x1x2,
            self.d_x2x2,
        )


@dataclass(frozen=True)
class GoursatJet:
    """2-jet in null coordinates xi = t + x1, eta = t - x1."""

    value: float = 0.0
    d_xi: float = 0.0
    d_eta: float = 0.0
    d_x2: float = 0.0
    d_xixi: float = 0.0
    d_xieta: float = 0.0
    d_etaeta: float = 0.0
    d_xix2: float = 0.0
    d_etax2: float = 0.0
    d_x2x2: float = 0.0


@dataclass(frozen=True)
class MetricCoeffs:
    """Coefficients of the quasilinear second-order form of the equation."""

    m_tt: float
    m_tx1: float
    m_tx2: float
    m_x1x1: float
    m_x1x2: float
    m_x2x2: float


@dataclass(frozen=True)
class BackgroundJet:
    """Profile data of the background (a x2 + b) F(x1 + sign t) at one xi."""

    a: float
    b: float
    F: float
    Fp: float
    Fpp: float
    sign: float = 1.0


def delta_factor(jet: PointJet) -> float:
    """1 + v_x1^2 + v_x2^2 - v_t^2; positive iff the surface is timelike."""
    return 1.0 + jet.d_x1**2 + jet.d_x2**2 - jet.d_t**2


def null_form_cartesian(phi: PointJet, psi: PointJet) -> float:
    """Q0(phi, psi) = phi_t psi_t - phi_x1 psi_x1 - phi_x2 psi_x2."""
    return phi.d_t * psi.d_t - phi.d_x1 * psi.d_x1 - phi.d_x2 * psi.d_x2


def null_form_goursat(phi: GoursatJet, psi: GoursatJet) -> float:
    """Q0 in null variables: 2(phi_xi psi_eta + phi_eta psi_xi) - phi_x2 psi_x2."""
    return 2.0 * (phi.d_xi * psi.d_eta + phi.d_eta * psi.d_xi) - phi.d_x2 * psi.d_x2


def box(jet: PointJet) -> float:
    """d'Alembertian v_tt - v_x1x1 - v_x2x2."""
    return jet.d_tt - jet.d_x1x1 - jet.d_x2x2


def quasilinear_coeffs(jet: PointJet) -> MetricCoeffs:
    """Expanded second-order coefficients of the conservative equation.

    m_tt v_tt + 2 sum_i m_tx_i v_tx_i + sum_ij m_x_ix_j v_x_ix_j equals
    Delta^{3/2} times the conservative residual (locked by a test identity).
    """
    delta = delta_factor(jet)
    return MetricCoeffs(
        m_tt=1.0 + jet.d_x1**2 + jet.d_x2**2,
        m_tx1=-jet.d_t * jet.d_x1,
        m_tx2=-jet.d_t * jet.d_x2,
        m_x1x1=-delta + jet.d_x1**2,
        m_x1x2=jet.d_x1 * jet.d_x2,
        m_x2x2=-delta + jet.d_x2**2,
    )


def mform(jet: PointJet) -> float:
    """The quasilinear form contracted with the jet's second derivatives."""
    m = quasilinear_coeffs(jet)
    return (
        m.m_tt * jet.d_tt
        + 2.0 * (m.m_tx1 * jet.d_tx1 + m.m_tx2 * jet.d_tx2)
        + m.m_x1x1 * jet.d_x1x1
        + 2.0 * m.m_x1x2 * jet.d_x1x2
        + m.m_x2x2 * jet.d_x2x2
    )


def membrane_residual(jet: PointJet) -> float:
    """Conservative residual evaluated exactly from the 2-jet (no differencing)."""
    delta = delta_factor(jet)
    if delta <= 0.0:
        raise DegenerateSurfaceError("surface not timelike at point")
    return mform(jet) / delta**1.5


def _q0_gradient_jet(v: PointJet) -> PointJet:
    """First-order jet of W = Q0(v, v): value plus its spacetime gradient."""
    return PointJet(
        value=v.d_t**2 - v.d_x1**2 - v.d_x2**2,
        d_t=2.0 * (v.d_t * v.d_tt - v.d_x1 * v.d_tx1 - v.d_x2 * v.d_tx2),
        d_x1=2.0 * (v.d_t * v.d_tx1 - v.d_x1 * v.d_x1x1 - v.d_x2 * v.d_x1x2),
        d_x2=2.0 * (v.d_t * v.d_tx2 - v.d_x1 * v.d_x1x2 - v.d_x2 * v.d_x2x2),
    )


def background_pointjet(bg: BackgroundJet, x2: float) -> PointJet:
    """Full spacetime 2-jet of B = (a x2 + b) F(x1 + sign t) at a point."""
    coef = bg.a * x2 + bg.b
    s = bg.sign
    return PointJet(
        value=coef * bg.F,
        d_t=s * coef * bg.Fp,
        d_x1=coef * bg.Fp,
        d_x2=bg.a * bg.F,
        d_tt=coef * bg.Fpp,
        d_tx1=s * coef * bg.Fpp,
        d_tx2=s * bg.a * bg.Fp,
        d_x1x1=coef * bg.Fpp,
        d_x1x2=bg.a * bg.Fp,
        d_x2x2=0.0,
    )


def perturbed_rhs_cartesian(u_jet: PointJet, bg: BackgroundJet, x2: float) -> float:
    """Right-hand side of Box u for v = background + u, from exact jets.

    Uses the full induced-metric argument sigma = Q0(v, v) (including the
    quadratic background term -a^2 F^2, which vanishes for a = 0), so that
    Box u = rhs holds identically whenever v solves the membrane equation.
    Used for residual cross-checks; the evolver integrates the full surface.
    """
    v = u_jet + background_pointjet(bg, x2)
    w = _q0_gradient_jet(v)
    sigma = w.value
    if sigma >= 1.0 - SIGMA_MARGIN:
        raise DegenerateSurfaceError("degenerate induced metric")
    return -null_form_cartesian(v, w) / (2.0 * (1.0 - sigma))


def eq32_rhs_cartesian(u_jet: PointJet, F: float, Fp: float, Fpp: float) -> float:
    """The a=0, b=1 right-hand side in its published shape, for cross-checks.

    Box u = -Q0(u + F, sigma) / (2 (1 - sigma)) with
    sigma = Q0(u, u) + 2 F' (u_t - u_x1).
    """
    u = u_jet
    sigma = (
        u.d_t**2
        - u.d_x1**2
        - u.d_x2**2
        + 2.0 * Fp * (u.d_t - u.d_x1)
    )
    if sigma >= 1.0 - SIGMA_MARGIN:
        raise DegenerateSurfaceError("degenerate induced metric")
    # gradient of sigma
    sig = PointJet(
        value=sigma,
        d_t=2.0 * (u.d_t * u.d_tt - u.d_x1 * u.d_tx1 - u.d_x2 * u.d_tx2)
        + 2.0 * Fpp * (u.d_t - u.d_x1)
        + 2.0 * Fp * (u.d_tt - u.d_tx1),
        d_x1=2.0 * (u.d_t * u.d_tx1 - u.d_x1 * u.d_x1x1 - u.d_x2 * u.d_x1x2)
        + 2.0 * Fpp * (u.d_t - u.d_x1)
        + 2.0 * Fp * (u.d_tx1 - u.d_x1x1),
        d_x2=2.0 * (u.d_t * u.d_tx2 - u.d_x1 * u.d_x1x2 - u.d_x2 * u.d_x2x2)
        + 2.0 * Fp * (u.d_tx2 - u.d_x1x2),
    )
    upF = PointJet(value=u.value + F, d_t=u.d_t + Fp, d_x1=u.d_x1 + Fp, d_x2=u.d_x2)
    return -null_form_cartesian(upF, sig) / (2.0 * (1.0 - sigma))


def perturbed_rhs_goursat(u: GoursatJet, Fp: float, Fpp: float) -> float:
    """Box u around the light-speed background F(xi), all in null variables.

    Box u = (1/2)(1 - H) [ Q0(u, Q0(u,u)) + 8 F' Q0(u, u_eta)
                           + 8 F'' u_eta^2 + 8 F'^2 u_etaeta ],
    H(sigma) = 1 + 1/(1 - sigma),  sigma = Q0(u, u) + 4 F' u_eta.

    Equal to the Cartesian a=0, b=1 form under the coordinate change (the
    published bracket carries a typo; this is the chain-rule-consistent one).
    """
    q0uu = null_form_goursat(u, u)
    sigma = q0uu + 4.0 * Fp * u.d_eta
    if sigma >= 1.0 - SIGMA_MARGIN:
        raise DegenerateSurfaceError("degenerate induced metric")
    h = 1.0 + 1.0 / (1.0 - sigma)
    # first-order jets of Q0(u, u) and u_eta
    q_jet = GoursatJet(
        value=q0uu,
        d_xi=2.0
        * (2.0 * (u.d_xi * u.d_xieta + u.d_eta * u.d_xixi) - u.d_x2 * u.d_xix2),
        d_eta=2.0
        * (2.0 * (u.d_xi * u.d_etaeta + u.d_eta * u.d_xieta) - u.d_x2 * u.d_etax2),
        d_x2=2.0
        * (2.0 * (u.d_xi * u.d_etax2 + u.d_eta * u.d_xix2) - u.d_x2 * u.d_x2x2),
    )
    ueta_jet = GoursatJet(
        value=u.d_eta, d_xi=u.d_xieta, d_eta=u.d_etaeta, d_x2=u.d_etax2
    )
    bracket = (
        null_form_goursat(u, q_jet)
        + 8.0 * Fp * null_form_goursat(u, ueta_jet)
        + 8.0 * Fpp * u.d_eta**2
        + 8.0 * Fp**2 * u.d_etaeta
    )
    return 0.5 * (1.0 - h) * bracket


def cartesian_to_goursat_jet(jet: PointJet) -> GoursatJet:
    """Chain rule for xi = t + x1, eta = t - x1 (so 2 d_xi = d_t + d_x1)."""
    return GoursatJet(
        value=jet.value,
        d_xi=0.5 * (jet.d_t + jet.d_x1),
        d_eta=0.5 * (jet.d_t - jet.d_x1),
        d_x2=jet.d_x2,
        d_xixi=0.25 * (jet.d_tt + 2.0 * jet.d_tx1 + jet.d_x1x1),
        d_xieta=0.25 * (jet.d_tt - jet.d_x1x1),
        d_etaeta=0.25 * (jet.d_tt - 2.0 * jet.d_tx1 + jet.d_x1x1),
        d_xix2=0.5 * (jet.d_tx2 + jet.d_x1x2),
        d_etax2=0.5 * (jet.d_tx2 - jet.d_x1x2),
        d_x2x2=jet.d_x2x2,
    )


def goursat_to_cartesian_jet(jet: GoursatJet) -> PointJet:
    """Inverse chain rule: d_t = d_xi + d_eta, d_x1 = d_xi - d_eta."""
    return PointJet(
        value=jet.value,
        d_t=jet.d_xi + jet.d_eta,
        d_x1=jet.d_xi - jet.d_eta,
        d_x2=jet.d_x2,
        d_tt=jet.d_xixi + 2.0 * jet.d_xieta + jet.d_etaeta,
        d_tx1=jet.d_xixi - jet.d_etaeta,
        d_tx2=jet.d_xix2 + jet.d_etax2,
        d_x1x1=jet.d_xixi - 2.0 * jet.d_xieta + jet.d_etaeta,
        d_x1x2=jet.d_xix2 - jet.d_etax2,
        d_x2x2=jet.d_x2x2,
    )
