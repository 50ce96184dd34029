"""First-order operator calculus on Minkowski 1+(2)D and its null-coordinate form.

The operator family (six fields commuting with the linearized equation around
a light-speed wave, up to multiples of the d'Alembertian) is tabulated in both
Cartesian (t, x1, x2) and Goursat (xi, eta, x2) coordinates:

    G1 = dt + dx1 = 2 dxi              G4 = (t-x1)(dt-dx1) + x2 dx2 = L0 - L1
    G2 = dt - dx1 = 2 deta             G5 = (t+x1)(dt+dx1) + x2 dx2 = L0 + L1
    G3 = dx2                           G6 = (t+x1) dx2 + x2 (dt-dx1) = L2 + Omega

plus the Lorentz generators L0, L1, L2, Omega and the translations.  Exact
trivariate polynomials provide the test bench on which the commutator and
Leibniz identities are verified to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ScalarField, derivative_values
from .ops import GoursatJet, PointJet

__all__ = [
    "TriPoly",
    "CARTESIAN_FIELDS",
    "GOURSAT_FIELDS",
    "VECTOR_FIELD_IDS",
    "apply_vf_poly",
    "apply_vf_jet",
    "apply_vf_goursat_jet",
    "apply_vf_stack",
    "box_poly",
    "commutator_box",
    "CommutatorReport",
    "gamma_nullform_leibniz",
    "LeibnizReport",
    "q0_poly",
    "FieldStack",
    "GoursatStation",
    "to_goursat",
]


class TriPoly:
    """Trivariate polynomial with exact coefficient algebra.

    Coefficient array c[i, j, k] multiplies t^i x1^j x2^k (or xi^i eta^j x2^k
    when used in null coordinates).  Differentiation and products are exact,
    which is what makes the operator-identity tests meaningful at 1e-12.
    """

    def __init__(self, coeffs):
        self.c = np.atleast_3d(np.asarray(coeffs, dtype=np.float64))

    @classmethod
    def zero(cls):
        return cls(np.zeros((1, 1, 1)))

    @classmethod
    def const(cls, v: float):
        return cls(np.full((1, 1, 1), float(v)))

    @classmethod
    def coordinate(cls, axis: int):
        shape = [1, 1, 1]
        shape[axis] = 2
        c = np.zeros(shape)
        c[tuple(1 if a == axis else 0 for a in range(3))] = 1.0
        return cls(c)

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int = 3):
        d = degree + 1
        c = rng.uniform(-1.0, 1.0, size=(d, d, d))
        # keep total degree <= degree
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    if i + j + k > degree:
                        c[i, j, k] = 0.0
        return cls(c)

    def diff(self, axis: int) -> "TriPoly":
        n = self.c.shape[axis]
        if n == 1:
            return TriPoly.zero()
        sl = [slice(None)] * 3
        sl[axis] = slice(1, None)
        factors = np.arange(1, n).reshape([-1 if a == axis else 1 for a in range(3)])
        return TriPoly(self.c[tuple(sl)] * factors)

    def __add__(self, other: "TriPoly") -> "TriPoly":
        s = [max(a, b) for a, b in zip(self.c.shape, other.c.shape)]
        out = np.zeros(s)
        out[: self.c.shape[0], : self.c.shape[1], : self.c.shape[2]] += self.c
        out[: other.c.shape[0], : other.c.shape[1], : other.c.shape[2]] += other.c
        return TriPoly(out)

    def __sub__(self, other: "TriPoly") -> "TriPoly":
        return self + other * -1.0

    def __mul__(self, other):
        if isinstance(other, TriPoly):
            sa, sb = self.c.shape, other.c.shape
            out = np.zeros((sa[0] + sb[0] - 1, sa[1] + sb[1] - 1, sa[2] + sb[2] - 1))
            for i in range(sa[0]):
                for j in range(sa[1]):
                    for k in range(sa[2]):
                        if self.c[i, j, k] != 0.0:
                            out[i : i + sb[0], j : j + sb[1], k : k + sb[2]] += (
                                self.c[i, j, k] * other.c
                            )
            return TriPoly(out)
        return TriPoly(self.c * float(other))

    __rmul__ = __mul__

    def __call__(self, t, x1, x2):
        t = np.asarray(t, dtype=np.float64)
        x1 = np.asarray(x1, dtype=np.float64)
        x2 = np.asarray(x2, dtype=np.float64)
        out = np.zeros(np.broadcast(t, x1, x2).shape)
        for i in range(self.c.shape[0]):
            for j in range(self.c.shape[1]):
                for k in range(self.c.shape[2]):
                    if self.c[i, j, k] != 0.0:
                        out = out + self.c[i, j, k] * t**i * x1**j * x2**k
        return out

    def max_abs_coeff(self) -> float:
        return float(np.max(np.abs(self.c)))

    def jet(self, t: float, x1: float, x2: float) -> PointJet:
        d = {a: self.diff(a) for a in range(3)}
        return PointJet(
            value=float(self(t, x1, x2)),
            d_t=float(d[0](t, x1, x2)),
            d_x1=float(d[1](t, x1, x2)),
            d_x2=float(d[2](t, x1, x2)),
            d_tt=float(d[0].diff(0)(t, x1, x2)),
            d_tx1=float(d[0].diff(1)(t, x1, x2)),
            d_tx2=float(d[0].diff(2)(t, x1, x2)),
            d_x1x1=float(d[1].diff(1)(t, x1, x2)),
            d_x1x2=float(d[1].diff(2)(t, x1, x2)),
            d_x2x2=float(d[2].diff(2)(t, x1, x2)),
        )


def _p(axis: int) -> TriPoly:
    return TriPoly.coordinate(axis)


def _c(v: float) -> TriPoly:
    return TriPoly.const(v)


# Cartesian tables: list of (coefficient polynomial in (t, x1, x2), axis)
CARTESIAN_FIELDS: dict[str, list[tuple[TriPoly, int]]] = {
    "dt": [(_c(1), 0)],
    "dx1": [(_c(1), 1)],
    "dx2": [(_c(1), 2)],
    "L0": [(_p(0), 0), (_p(1), 1), (_p(2), 2)],
    "L1": [(_p(1), 0), (_p(0), 1)],
    "L2": [(_p(2), 0), (_p(0), 2)],
    "Omega": [(_p(1), 2), (-1.0 * _p(2), 1)],
    "G1": [(_c(1), 0), (_c(1), 1)],
    "G2": [(_c(1), 0), (-1.0 * _c(1), 1)],
    "G3": [(_c(1), 2)],
    "G4": [(_p(0) - _p(1), 0), (-1.0 * (_p(0) - _p(1)), 1), (_p(2), 2)],
    "G5": [(_p(0) + _p(1), 0), (_p(0) + _p(1), 1), (_p(2), 2)],
    "G6": [(_p(0) + _p(1), 2), (_p(2), 0), (-1.0 * _p(2), 1)],
}

# Goursat tables: axes are (xi, eta, x2); coefficients are linear, stored as
# (constant, grad) with grad the constant gradient d(coef)/d(xi, eta, x2).
GOURSAT_FIELDS: dict[str, list[tuple[float, tuple[float, float, float], int]]] = {
    "dxi": [(1.0, (0, 0, 0), 0)],
    "deta": [(1.0, (0, 0, 0), 1)],
    "dx2": [(1.0, (0, 0, 0), 2)],
    "G1": [(2.0, (0, 0, 0), 0)],
    "G2": [(2.0, (0, 0, 0), 1)],
    "G3": [(1.0, (0, 0, 0), 2)],
    "G4": [(0.0, (0, 2, 0), 1), (0.0, (0, 0, 1), 2)],  # 2 eta d_eta + x2 d_x2
    "G5": [(0.0, (2, 0, 0), 0), (0.0, (0, 0, 1), 2)],  # 2 xi d_xi + x2 d_x2
    "G6": [(0.0, (1, 0, 0), 2), (0.0, (0, 0, 2), 1)],  # xi d_x2 + 2 x2 d_eta
}

VECTOR_FIELD_IDS = tuple(CARTESIAN_FIELDS)
GAMMA_IDS = ("G1", "G2", "G3", "G4", "G5", "G6")


def _goursat_coef_value(spec, xi, eta, x2):
    const, grad, _ = spec
    return const + grad[0] * xi + grad[1] * eta + grad[2] * x2


def apply_vf_poly(vf_id: str, p: TriPoly) -> TriPoly:
    """Apply a Cartesian vector field to an exact polynomial."""
    out = TriPoly.zero()
    for coef, axis in CARTESIAN_FIELDS[vf_id]:
        out = out + coef * p.diff(axis)
    return out


def apply_vf_jet(vf_id: str, jet: PointJet, t: float, x1: float, x2: float) -> float:
    """Apply a Cartesian vector field to a point jet."""
    out = 0.0
    grads = {0: jet.d_t, 1: jet.d_x1, 2: jet.d_x2}
    for coef, axis in CARTESIAN_FIELDS[vf_id]:
        out += float(coef(t, x1, x2)) * grads[axis]
    return out


def apply_vf_goursat_jet(vf_id: str, jet: GoursatJet, xi: float, eta: float, x2: float) -> float:
    """Apply a vector field in its Goursat form to a Goursat jet."""
    out = 0.0
    grads = {0: jet.d_xi, 1: jet.d_eta, 2: jet.d_x2}
    for spec in GOURSAT_FIELDS[vf_id]:
        out += _goursat_coef_value(spec, xi, eta, x2) * grads[spec[2]]
    return out


def apply_vf_stack(vf_id: str, stack: "FieldStack", t: float, x1: float, x2: float,
                   scheme_order: int = 4) -> float:
    """Apply a vector field to sampled data (u, u_t) at a stack time.

    The time derivative comes from the stored u_t slice; spatial derivatives
    are differenced and interpolated linearly.  ``t`` must match one of the
    stack times (no time interpolation of derivatives).
    """
    idx = [i for i, ts in enumerate(stack.times) if abs(ts - t) < 1e-12]
    if not idx:
        raise ValueError("insufficient stencil data: t is not a stack slice")
    i = idx[0]
    u, ut = stack.u[i], stack.u_t[i]
    g = u.grid
    if not (g.x1_min <= x1 <= g.x1_max and g.x2_min <= x2 <= g.x2_max):
        raise ValueError("insufficient stencil data: point outside the grid")

    def interp(vals):
        s1 = (x1 - g.x1_min) / g.h1
        s2 = (x2 - g.x2_min) / g.h2
        i1 = min(max(int(np.floor(s1)), 0), g.n1 - 2)
        i2 = min(max(int(np.floor(s2)), 0), g.n2 - 2)
        w1, w2 = s1 - i1, s2 - i2
        return float(
            (1 - w1) * (1 - w2) * vals[i1, i2]
            + w1 * (1 - w2) * vals[i1 + 1, i2]
            + (1 - w1) * w2 * vals[i1, i2 + 1]
            + w1 * w2 * vals[i1 + 1, i2 + 1]
        )

    jet = PointJet(
        value=interp(u.values),
        d_t=interp(ut.values),
        d_x1=interp(derivative_values(u.values, g.h1, 0, 1, scheme_order)),
        d_x2=interp(derivative_values(u.values, g.h2, 1, 1, scheme_order)),
    )
    return apply_vf_jet(vf_id, jet, t, x1, x2)


def box_poly(p: TriPoly) -> TriPoly:
    return p.diff(0).diff(0) - p.diff(1).diff(1) - p.diff(2).diff(2)


def q0_poly(phi: TriPoly, psi: TriPoly) -> TriPoly:
    return (
        phi.diff(0) * psi.diff(0)
        - phi.diff(1) * psi.diff(1)
        - phi.diff(2) * psi.diff(2)
    )


def _lattice_points(n: int = 5, span: float = 1.5):
    pts = np.linspace(-span, span, n)
    tt, aa, bb = np.meshgrid(pts, pts, pts, indexing="ij")
    return tt.ravel(), aa.ravel(), bb.ravel()


@dataclass(frozen=True)
class CommutatorReport:
    vf_id: str
    fitted_coefficient: float
    max_residual: float
    defect_scale: float


def commutator_box(vf_id: str, f: TriPoly, lattice=None) -> CommutatorReport:
    """Fit [Box, Gamma] f = lambda * Box f over a sample lattice.

    Exact polynomial algebra feeds the fit, so the residual after subtracting
    the fitted multiple is rounding-level when the operator identity holds
    (lambda = 2 for G4, G5 and 0 for G1, G2, G3, G6).
    """
    if lattice is None:
        lattice = _lattice_points()
    t, x1, x2 = lattice
    defect = box_poly(apply_vf_poly(vf_id, f)) - apply_vf_poly(vf_id, box_poly(f))
    bf = box_poly(f)
    d = defect(t, x1, x2)
    b = bf(t, x1, x2)
    denom = float(b @ b)
    lam = float(d @ b) / denom if denom > 1e-300 else 0.0
    resid = d - lam * b
    scale = max(1.0, float(np.max(np.abs(d))), float(np.max(np.abs(b))))
    return CommutatorReport(
        vf_id=vf_id,
        fitted_coefficient=lam,
        max_residual=float(np.max(np.abs(resid))),
        defect_scale=scale,
    )


@dataclass(frozen=True)
class LeibnizReport:
    word: tuple
    coefficients: np.ndarray
    max_residual: float
    rhs_scale: float


def gamma_nullform_leibniz(word, phi: TriPoly, psi: TriPoly, lattice=None) -> LeibnizReport:
    """Expand Gamma^k Q0(phi, psi) over null forms of Gamma-derivatives.

    For |k| = 1 the expansion is Q0(G phi, psi) + Q0(phi, G psi) + c Q0(phi, psi)
    with a constant c (0 for translations and G6, -2 for the scaling-type G4,
    G5); for |k| = 2 a least-squares fit over all subword pairs realizes the
    existence claim.  Returns the fitted constants and the post-fit residual.
    """
    if isinstance(word, str):
        word = (word,)
    if not 1 <= len(word) <= 2:
        raise ValueError("word length must be 1 or 2")
    if lattice is None:
        lattice = _lattice_points()
    t, x1, x2 = lattice

    def gamma_word(p: TriPoly, w) -> TriPoly:
        for g in reversed(w):
            p = apply_vf_poly(g, p)
        return p

    lhs = q0_poly(phi, psi)
    for g in reversed(word):
        lhs = apply_vf_poly(g, lhs)

    # subwords of the (ordered) word, length <= len(word)
    subwords = [()]
    for g in word:
        subwords.append((g,))
    if len(word) == 2:
        subwords.append(tuple(word))
        subwords.append((word[1], word[0]))
    pairs = [
        (w1, w2)
        for w1 in subwords
        for w2 in subwords
        if len(w1) + len(w2) <= len(word)
    ]
    cols = [q0_poly(gamma_word(phi, w1), gamma_word(psi, w2))(t, x1, x2) for w1, w2 in pairs]
    target = lhs(t, x1, x2)
    if len(word) == 1:
        # exact-Leibniz part removed analytically; fit only the Q0(phi,psi) multiple
        exact = q0_poly(gamma_word(phi, word), psi) + q0_poly(phi, gamma_word(psi, word))
        rem = target - exact(t, x1, x2)
        base = q0_poly(phi, psi)(t, x1, x2)
        denom = float(base @ base)
        c = float(rem @ base) / denom if denom > 1e-300 else 0.0
        resid = rem - c * base
        coeffs = np.array([c])
    else:
        a = np.stack(cols, axis=1)
        coeffs, *_ = np.linalg.lstsq(a, target, rcond=None)
        resid = target - a @ coeffs
    scale = max(1.0, float(np.max(np.abs(target))))
    return LeibnizReport(
        word=tuple(word),
        coefficients=np.asarray(coeffs),
        max_residual=float(np.max(np.abs(resid))),
        rhs_scale=scale,
    )


# -- Goursat resampling of evolver time stacks ----------------------------------


@dataclass
class FieldStack:
    """Time-ordered slices (t_i, u(t_i), u_t(t_i)) from an evolution run."""

    times: list[float]
    u: list[ScalarField]
    u_t: list[ScalarField]

    def __post_init__(self):
        if not (len(self.times) == len(self.u) == len(self.u_t)):
            raise ValueError("stack lists must have equal length")


@dataclass
class GoursatStation:
    """Samples of u and its null-frame first derivatives at constant xi."""

    xi: float
    eta: np.ndarray  # shape (m,)
    x2: np.ndarray  # shape (n2,)
    u: np.ndarray  # shape (m, n2)
    u_xi: np.ndarray
    u_eta: np.ndarray
    u_x2: np.ndarray

    def sup_abs(self, which: str = "u") -> float:
        return float(np.max(np.abs(getattr(self, which)))) if self.u.size else 0.0


def _interp_row(fld: ScalarField, x1_star: float) -> np.ndarray:
    """Linear interpolation of a field to a constant-x1 line."""
    g = fld.grid
    s = (x1_star - g.x1_min) / g.h1
    i = int(np.floor(s))
    i = min(max(i, 0), g.n1 - 2)
    w = s - i
    return (1.0 - w) * fld.values[i, :] + w * fld.values[i + 1, :]


def to_goursat(
    stack: FieldStack, xi_stations, scheme_order: int = 4, margin: float = 0.0
) -> list[GoursatStation]:
    """Resample a time stack onto constant-xi stations (linear in t, x1).

    u_xi = (u_t + u_x1)/2 and u_eta = (u_t - u_x1)/2 are formed from the
    stored time derivative and a differenced x1-derivative.  A station with
    no time slice satisfying x1 = xi - t inside the grid raises.
    """
    stations = []
    for xi_star in np.atleast_1d(xi_stations):
        etas, rows_u, rows_uxi, rows_ueta, rows_ux2 = [], [], [], [], []
        for t, u, ut in zip(stack.times, stack.u, stack.u_t):
            x1_star = xi_star - t
            g = u.grid
            if not (g.x1_min + margin <= x1_star <= g.x1_max - margin):
                continue
            ux1 = derivative_values(u.values, g.h1, 0, 1, scheme_order)
            ux2 = derivative_values(u.values, g.h2, 1, 1, scheme_order)
            row_u = _interp_row(u, x1_star)
            row_ut = _interp_row(ut, x1_star)
            row_ux1 = _interp_row(ScalarField(g, ux1, u.time_label), x1_star)
            row_ux2 = _interp_row(ScalarField(g, ux2, u.time_label), x1_star)
            etas.append(t - x1_star)  # = 2t - xi
            rows_u.append(row_u)
            rows_uxi.append(0.5 * (row_ut + row_ux1))
            rows_ueta.append(0.5 * (row_ut - row_ux1))
            rows_ux2.append(row_ux2)
        if not etas:
            raise ValueError(f"xi station {xi_star} outside the covered wedge")
        order = np.argsort(etas)
        stations.append(
            GoursatStation(
                xi=float(xi_star),
                eta=np.asarray(etas)[order],
                x2=stack.u[0].grid.x2.copy(),
                u=np.stack(rows_u)[order],
                u_xi=np.stack(rows_uxi)[order],
                u_eta=np.stack(rows_ueta)[order],
                u_x2=np.stack(rows_ux2)[order],
            )
        )
    return stations
