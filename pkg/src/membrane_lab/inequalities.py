"""Randomized numerical verification of the weighted null-frame estimates.

Each estimate is turned into a ratio statistic LHS/RHS evaluated over a
seeded family of smooth bumps supported strictly inside the light cone
{|x2| < sqrt((2+xi)(2+eta))}.  Acceptance is "finite, refinement-stable, and
non-growing when the support translates along the decay direction" — the
unnamed constants are estimated, never asserted, except for the 1D Hardy
bound whose constant 2 is explicit.

Note the deliberate literalism: the Hardy-type weights use (3+xi)(3+eta)
while the support cone uses (2+xi)(2+eta); each statistic follows its own
equation's constants (the mismatch is a property of the source material).

Reading of the derivative symbols: |Gamma phi| is the sum of |G_i phi| over
the six fields, |grad phi| the sum of the indicated first derivatives, and
composite words act right-to-left (the innermost factor differentiates
first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .grid import weighted_l2
from .waves import bump1d_derivs

__all__ = [
    "ConeBump",
    "ConeBumpFamily",
    "RatioReport",
    "cone_edge",
    "hardy_ratio",
    "hardy_cone_ratio",
    "hardy_pointwise_max",
    "nullform_decay_ratio",
    "sobolev_cone_ratio",
    "derivative_decay_ratio",
    "family_report",
    "GAMMA_GOURSAT",
]

GAMMA_GOURSAT = ("G1", "G2", "G3", "G4", "G5", "G6")

# first-order operators in (xi, eta, x2): axis coefficients are linear;
# entry: (axis, constant, gradient of the coefficient)
_OPS = {
    "dxi": [(0, 1.0, (0.0, 0.0, 0.0))],
    "deta": [(1, 1.0, (0.0, 0.0, 0.0))],
    "dx2": [(2, 1.0, (0.0, 0.0, 0.0))],
    "G1": [(0, 2.0, (0.0, 0.0, 0.0))],
    "G2": [(1, 2.0, (0.0, 0.0, 0.0))],
    "G3": [(2, 1.0, (0.0, 0.0, 0.0))],
    "G4": [(1, 0.0, (0.0, 2.0, 0.0)), (2, 0.0, (0.0, 0.0, 1.0))],
    "G5": [(0, 0.0, (2.0, 0.0, 0.0)), (2, 0.0, (0.0, 0.0, 1.0))],
    "G6": [(2, 0.0, (1.0, 0.0, 0.0)), (1, 0.0, (0.0, 0.0, 2.0))],
}


def cone_edge(xi, eta, shift: float = 2.0):
    return np.sqrt((shift + xi) * (shift + eta))


@dataclass(frozen=True)
class ConeBump:
    """Smooth product bump A * b((xi-c)/w) b((eta-c)/w) b((x2-c)/w)."""

    amplitude: float
    center: tuple[float, float, float]
    width: tuple[float, float, float]

    def support_ok(self, margin: float = 0.0) -> bool:
        cxi, ceta, cx2 = self.center
        wxi, weta, wx2 = self.width
        if cxi - wxi < -1.0 or ceta - weta < -1.0:
            return False
        edge = cone_edge(cxi - wxi, ceta - weta)
        return abs(cx2) + wx2 <= edge - margin

    def box(self, pad: float = 0.0):
        c, w = self.center, self.width
        return [(c[i] - w[i] - pad, c[i] + w[i] + pad) for i in range(3)]

    def lattice(self, n: int = 33):
        return [np.linspace(lo, hi, n) for lo, hi in self.box()]

    def tables(self, axes, max_order: int = 2) -> dict:
        """Partial-derivative arrays phi_{(i,j,k)} for i+j+k <= max_order."""
        per_axis = []
        for ax in range(3):
            z = (axes[ax] - self.center[ax]) / self.width[ax]
            stacks = bump1d_derivs(z, max_order)
            per_axis.append(
                [stacks[k] / self.width[ax] ** k for k in range(max_order + 1)]
            )
        out = {}
        for i in range(max_order + 1):
            for j in range(max_order + 1 - i):
                for k in range(max_order + 1 - i - j):
                    out[(i, j, k)] = self.amplitude * np.einsum(
                        "i,j,k->ijk", per_axis[0][i], per_axis[1][j], per_axis[2][k]
                    )
        return out

    def translated(self, dxi: float = 0.0, deta: float = 0.0) -> "ConeBump":
        c = (self.center[0] + dxi, self.center[1] + deta, self.center[2])
        return replace(self, center=c)


@dataclass
class ConeBumpFamily:
    """Seeded family of cone bumps with documented parameter distributions.

    widths: log-uniform in [0.2, 2] per axis; xi/eta centers uniform in the
    window; x2 centers uniform within 60% of the worst-case cone margin;
    amplitudes log-uniform in [0.5, 2].
    """

    count: int = 100
    seed: int = 42
    xi_range: tuple[float, float] = (0.0, 8.0)
    eta_range: tuple[float, float] = (0.0, 8.0)

    def members(self) -> list[ConeBump]:
        rng = np.random.default_rng(self.seed)
        out = []
        while len(out) < self.count:
            w = tuple(np.exp(rng.uniform(math.log(0.2), math.log(2.0), size=3)))
            cxi = rng.uniform(*self.xi_range)
            ceta = rng.uniform(*self.eta_range)
            edge = cone_edge(max(cxi - w[0], -1.0), max(ceta - w[1], -1.0))
            room = 0.6 * max(edge - w[2], 0.0)
            cx2 = rng.uniform(-room, room)
            amp = float(np.exp(rng.uniform(math.log(0.5), math.log(2.0))))
            bump = ConeBump(amp, (cxi, ceta, cx2), w)
            if bump.support_ok():
                out.append(bump)
        return out

    def member_pairs(self) -> list[tuple[ConeBump, ConeBump]]:
        """Overlapping (phi, psi) pairs for the bilinear estimates."""
        rng = np.random.default_rng(self.seed + 1)
        pairs = []
        for phi in self.members():
            shift = rng.uniform(-0.4, 0.4, size=3) * np.asarray(phi.width)
            psi = ConeBump(
                float(np.exp(rng.uniform(math.log(0.5), math.log(2.0)))),
                tuple(np.asarray(phi.center) + shift),
                phi.width,
            )
            if psi.support_ok():
                pairs.append((phi, psi))
            else:
                pairs.append((phi, phi))
        return pairs


@dataclass(frozen=True)
class RatioReport:
    name: str
    max_ratio: float
    argmax_member: int
    refinement_drift: float

    @property
    def accepted(self) -> bool:
        return math.isfinite(self.max_ratio) and self.refinement_drift < 0.10


def _apply_op(tables: dict, op: str, coords, max_order: int) -> dict:
    """Apply a first-order operator to a jet table, losing one order."""
    xi, eta, x2 = coords
    cgrid = {0: xi, 1: eta, 2: x2}
    out = {}
    for alpha in tables:
        if sum(alpha) > max_order - 1:
            continue
        acc = np.zeros_like(tables[alpha])
        for axis, const, grad in _OPS[op]:
            coef = const
            for a in range(3):
                if grad[a] != 0.0:
                    coef = coef + grad[a] * cgrid[a]
            e = list(alpha)
            e[axis] += 1
            acc = acc + coef * tables[tuple(e)]
            # Leibniz corrections from differentiating the linear coefficient
            for a in range(3):
                if grad[a] != 0.0 and alpha[a] >= 1:
                    e2 = list(alpha)
                    e2[a] -= 1
                    e2[axis] += 1
                    acc = acc + alpha[a] * grad[a] * tables[tuple(e2)]
        out[alpha] = acc
    return out


def _word_values(tables: dict, word: tuple[str, ...], coords, order: int) -> np.ndarray:
    """Value array of (word applied to phi), word acting right-to-left."""
    cur = tables
    cur_order = order
    for op in reversed(word):
        cur = _apply_op(cur, op, coords, cur_order)
        cur_order -= 1
    return cur[(0, 0, 0)]


def _slab_l2_per_xi(values: np.ndarray, eta: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """L2 norm over (eta, x2) for each xi index."""
    sq = np.trapezoid(np.trapezoid(values**2, x=x2, axis=2), x=eta, axis=1)
    return np.sqrt(np.maximum(sq, 0.0))


# -- 1D Hardy -------------------------------------------------------------------


def hardy_ratio(x: np.ndarray, f: np.ndarray, a: float, fp: np.ndarray | None = None) -> float:
    """||f/(a-|x|)||_L2 / ||f'||_L2 for supp f inside (-a, a); bound is 2."""
    x = np.asarray(x, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    nz = np.abs(f) > 0
    if nz.any() and np.max(np.abs(x[nz])) >= a:
        raise ValueError("support touches |x| = a")
    if fp is None:
        fp = np.gradient(f, x)
    denom = a - np.abs(x)
    integrand = np.zeros_like(f)
    integrand[nz] = (f[nz] / denom[nz]) ** 2
    num = math.sqrt(float(np.trapezoid(integrand, x=x)))
    den = math.sqrt(float(np.trapezoid(np.asarray(fp) ** 2, x=x)))
    if num == 0.0:
        return 0.0
    if den == 0.0:
        raise ValueError("inequality violated: zero derivative with nonzero numerator")
    return num / den


# -- cone Hardy (fixed xi slab) ---------------------------------------------------


def hardy_cone_ratio(bump: ConeBump, xi: float | None = None, n: int = 65) -> float:
    """Slab ratio ||phi/(sqrt((3+xi)(3+eta)) - |x2|)|| / ||phi_x2|| at fixed xi."""
    if xi is None:
        xi = bump.center[0]
    axes = bump.lattice(n)
    eta, x2 = axes[1], axes[2]
    tabs = bump.tables([np.array([xi]), eta, x2], max_order=1)
    phi = tabs[(0, 0, 0)][0]
    phix2 = tabs[(0, 0, 1)][0]
    ee, xx = np.meshgrid(eta, x2, indexing="ij")
    denom_w = cone_edge(xi, ee, shift=3.0) - np.abs(xx)
    num = math.sqrt(weighted_l2(phi / denom_w, (eta, x2)))
    den = math.sqrt(weighted_l2(phix2, (eta, x2)))
    if num == 0.0:
        return 0.0
    return num / den


def hardy_pointwise_max(bump: ConeBump, n_points: int = 22) -> float:
    """Max over samples of |phi| / [(sqrt((3+xi)(3+eta)) - |x2|) sup_x2 |phi_x2|]."""
    axes = bump.lattice(n_points)
    tabs = bump.tables(axes, max_order=1)
    phi = tabs[(0, 0, 0)]
    phix2 = tabs[(0, 0, 1)]
    sup_x2 = np.max(np.abs(phix2), axis=2, keepdims=True)
    xi, eta, x2 = np.meshgrid(*axes, indexing="ij")
    w = cone_edge(xi, eta, shift=3.0) - np.abs(x2)
    rhs = w * np.broadcast_to(sup_x2, phi.shape)
    mask = np.abs(phi) > 0
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(phi)[mask] / rhs[mask]))


# -- ratio machinery over the family ---------------------------------------------


def _masked_max_ratio(lhs: np.ndarray, rhs: np.ndarray) -> float:
    """Max of LHS/RHS, 0 where both vanish; flags outright violations."""
    lhs = np.abs(lhs)
    live = rhs > 1e-14
    bad = (~live) & (lhs > 1e-10)
    if bad.any():
        raise ValueError("inequality violated: vanishing RHS with nonzero LHS")
    if not live.any():
        return 0.0
    return float(np.max(lhs[live] / rhs[live]))


def nullform_decay_ratio(
    phi: ConeBump, psi: ConeBump, variant: str = "xi_decay", n: int = 33
) -> float:
    """Pointwise |Q0(phi,psi)| over the weighted first-derivative bound.

    xi_decay: weight (2+xi)^{-1}, gradient set {d_eta, d_x2};
    eta_decay: weight (2+eta)^{-1}, gradient set {d_xi, d_x2}.
    """
    los = [min(a, b) for (a, _), (b, _) in zip(phi.box(), psi.box())]
    his = [max(a, b) for (_, a), (_, b) in zip(phi.box(), psi.box())]
    axes = [np.linspace(lo, hi, n) for lo, hi in zip(los, his)]
    coords = np.meshgrid(*axes, indexing="ij")
    tp = phi.tables(axes, max_order=1)
    tq = psi.tables(axes, max_order=1)
    q0 = 2.0 * (tp[(1, 0, 0)] * tq[(0, 1, 0)] + tp[(0, 1, 0)] * tq[(1, 0, 0)]) - tp[
        (0, 0, 1)
    ] * tq[(0, 0, 1)]
    gam_p = sum(
        np.abs(_word_values(tp, (g,), coords, 1)) for g in GAMMA_GOURSAT
    )
    gam_q = sum(
        np.abs(_word_values(tq, (g,), coords, 1)) for g in GAMMA_GOURSAT
    )
    if variant == "xi_decay":
        w = 1.0 / (2.0 + coords[0])
        grad_p = np.abs(tp[(0, 1, 0)]) + np.abs(tp[(0, 0, 1)])
        grad_q = np.abs(tq[(0, 1, 0)]) + np.abs(tq[(0, 0, 1)])
    elif variant == "eta_decay":
        w = 1.0 / (2.0 + coords[1])
        grad_p = np.abs(tp[(1, 0, 0)]) + np.abs(tp[(0, 0, 1)])
        grad_q = np.abs(tq[(1, 0, 0)]) + np.abs(tq[(0, 0, 1)])
    else:
        raise ValueError(f"unknown variant {variant!r}")
    rhs = w * (gam_p * grad_q + grad_p * gam_q)
    return _masked_max_ratio(q0, rhs)


def _words_k1_le1_k2_le1():
    out = []
    for g in ("",) + GAMMA_GOURSAT:
        for d in ("", "deta", "dx2"):
            word = tuple(x for x in (g, d) if x)
            out.append(word)
    return out


def _words_total_le2():
    gammas = ("",) + GAMMA_GOURSAT
    grads = ("", "deta", "dx2")
    out = set()
    for g1 in gammas:
        for g2 in gammas:
            for d1 in grads:
                for d2 in grads:
                    word = tuple(x for x in (g1, g2, d1, d2) if x)
                    if len(word) <= 2:
                        out.add(word)
    return sorted(out)


def sobolev_cone_ratio(bump: ConeBump, n: int = 33, restricted: bool = True) -> float:
    """Pointwise |phi| over (2+eta)^{-1/4} (2+xi)^{-1/4} sum ||G^k1 grad^k2 phi||.

    restricted=True uses the |k1|, |k2| <= 1 word set; False uses every word
    of total order <= 2 (a superset, so the restricted RHS is never larger).
    """
    axes = bump.lattice(n)
    coords = np.meshgrid(*axes, indexing="ij")
    order = 2
    tabs = bump.tables(axes, max_order=order)
    words = _words_k1_le1_k2_le1() if restricted else _words_total_le2()
    norms = np.zeros(len(axes[0]))
    for word in words:
        vals = _word_values(tabs, word, coords, order)
        norms = norms + _slab_l2_per_xi(vals, axes[1], axes[2])
    w = (2.0 + coords[1]) ** -0.25 * (2.0 + coords[0]) ** -0.25
    rhs = w * norms[:, None, None]
    return _masked_max_ratio(tabs[(0, 0, 0)], rhs)


def _value_of_op(table1: dict, op: str, coords) -> np.ndarray:
    """Value array of (op phi) from an order-1 jet table (no Leibniz needed)."""
    xi, eta, x2 = coords
    cgrid = {0: xi, 1: eta, 2: x2}
    acc = 0.0
    basis = {0: (1, 0, 0), 1: (0, 1, 0), 2: (0, 0, 1)}
    for axis, const, grad in _OPS[op]:
        coef = const
        for a in range(3):
            if grad[a] != 0.0:
                coef = coef + grad[a] * cgrid[a]
        acc = acc + coef * table1[basis[axis]]
    return acc


def _norm_sum_words_le2(base: dict, coords, axes) -> np.ndarray:
    """Per-xi sum of L2 norms of Gamma^{k1} grad^{k2} (base), |k1|+|k2| <= 2.

    ``base`` holds partials of the subject up to order 2; the grad factors
    are innermost.  Single-op stages are cached so each of the 61 words costs
    one value-level contraction.
    """
    grads = ("deta", "dx2")
    ops = GAMMA_GOURSAT + grads
    norms = _slab_l2_per_xi(base[(0, 0, 0)], axes[1], axes[2])
    stage1 = {op: _apply_op(base, op, coords, 2) for op in ops}
    for op in ops:
        norms = norms + _slab_l2_per_xi(stage1[op][(0, 0, 0)], axes[1], axes[2])
    pairs = [(o, i) for o in GAMMA_GOURSAT for i in ops] + [
        (o, i) for o in grads for i in grads
    ]
    for outer, inner in pairs:
        vals = _value_of_op(stage1[inner], outer, coords)
        norms = norms + _slab_l2_per_xi(vals, axes[1], axes[2])
    return norms


def derivative_decay_ratio(bump: ConeBump, which: str = "eta", n: int = 25) -> float:
    """Weighted pointwise bounds on phi_eta / phi_xi through phi_x2 norms.

    which='eta':     |phi_eta| <= (2+eta)^{-3/4} (2+xi)^{1/4} S2(phi_x2)
    which='xi':      |phi_xi|  <= (2+eta)^{1/4} (2+xi)^{-3/4} S2(phi_x2)
    which='corollary': |phi_eta| <= (2+eta)^{-1/2} S~(phi), words with a
    mandatory innermost gradient and total order <= 2.
    """
    axes = bump.lattice(n)
    coords = np.meshgrid(*axes, indexing="ij")
    tabs = bump.tables(axes, max_order=3)
    if which in ("eta", "xi"):
        base = _apply_op(tabs, "dx2", coords, 3)  # phi_x2 with orders <= 2
        norms = _norm_sum_words_le2(base, coords, axes)
        if which == "eta":
            w = (2.0 + coords[1]) ** -0.75 * (2.0 + coords[0]) ** 0.25
            lhs = tabs[(0, 1, 0)]
        else:
            w = (2.0 + coords[1]) ** 0.25 * (2.0 + coords[0]) ** -0.75
            lhs = tabs[(1, 0, 0)]
    elif which == "corollary":
        norms = np.zeros(len(axes[0]))
        for d in ("deta", "dx2"):
            inner = _apply_op(tabs, d, coords, 3)
            norms = norms + _slab_l2_per_xi(inner[(0, 0, 0)], axes[1], axes[2])
            for op in GAMMA_GOURSAT + ("deta", "dx2"):
                vals = _value_of_op(inner, op, coords)
                norms = norms + _slab_l2_per_xi(vals, axes[1], axes[2])
        w = (2.0 + coords[1]) ** -0.5
        lhs = tabs[(0, 1, 0)]
    else:
        raise ValueError(f"unknown variant {which!r}")
    rhs = w * norms[:, None, None]
    return _masked_max_ratio(lhs, rhs)


def family_report(
    name: str,
    family: ConeBumpFamily,
    member_fn,
    n_base: int = 33,
    pairs: bool = False,
) -> RatioReport:
    """Max ratio over the family at two resolutions, merged by max."""
    items = family.member_pairs() if pairs else family.members()
    best, arg = 0.0, -1
    for i, item in enumerate(items):
        r = member_fn(item, n_base) if not pairs else member_fn(*item, n_base)
        if r > best:
            best, arg = r, i
    refined = 0.0
    n_ref = 2 * (n_base - 1) + 1
    for i, item in enumerate(items):
        r = member_fn(item, n_ref) if not pairs else member_fn(*item, n_ref)
        refined = max(refined, r)
    drift = abs(refined - best) / best if best > 0 else 0.0
    return RatioReport(name=name, max_ratio=max(best, refined), argmax_member=arg, refinement_drift=drift)
