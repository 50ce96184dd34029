"""Uniform 2D grids, scalar fields, finite-difference stencils and discrete norms.

Everything downstream (pointwise operators, the evolver, the diagnostics)
consumes the types defined here.  Fields are immutable by convention: every
public operation returns a new ``ScalarField``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "Grid2D",
    "ScalarField",
    "fd_weights",
    "derivative",
    "derivative_values",
    "make_bump",
    "bump_profile",
    "sobolev_norm",
    "weighted_l2",
    "dump_csv",
    "load_csv",
    "dump_binary",
    "load_binary",
]

_MAGIC = b"MLF1"


@dataclass(frozen=True)
class Grid2D:
    """Uniform tensor-product grid on [x1_min, x1_max] x [x2_min, x2_max]."""

    x1_min: float
    x1_max: float
    x2_min: float
    x2_max: float
    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 9 or self.n2 < 9:
            raise ValueError("grid needs at least 9 points per axis")
        if not (self.x1_max > self.x1_min and self.x2_max > self.x2_min):
            raise ValueError("grid bounds must be increasing")

    @property
    def h1(self) -> float:
        return (self.x1_max - self.x1_min) / (self.n1 - 1)

    @property
    def h2(self) -> float:
        return (self.x2_max - self.x2_min) / (self.n2 - 1)

    @property
    def x1(self) -> NDArray[np.float64]:
        return np.linspace(self.x1_min, self.x1_max, self.n1)

    @property
    def x2(self) -> NDArray[np.float64]:
        return np.linspace(self.x2_min, self.x2_max, self.n2)

    def mesh(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Coordinate matrices of shape (n1, n2), indexing x1 along axis 0."""
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    @property
    def half_width(self) -> float:
        return min(self.x1_max, -self.x1_min, self.x2_max, -self.x2_min)


@dataclass
class ScalarField:
    """A scalar sampled on a Grid2D at one time level."""

    grid: Grid2D
    values: NDArray[np.float64]
    time_label: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.n1, self.grid.n2):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.grid.n1}, {self.grid.n2})"
            )

    def check_finite(self) -> "ScalarField":
        if not np.all(np.isfinite(self.values)):
            raise FloatingPointError("field contains NaN or Inf")
        return self

    def support_radius(self, threshold: float = 1e-14) -> float:
        """Radius of the smallest origin-centred disc containing |values| > threshold."""
        mask = np.abs(self.values) > threshold
        if not mask.any():
            return 0.0
        xx1, xx2 = self.grid.mesh()
        return float(np.sqrt(np.max(xx1[mask] ** 2 + xx2[mask] ** 2)))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy(), self.time_label)


def fd_weights(nodes: NDArray[np.float64], x0: float, order: int) -> NDArray[np.float64]:
    """Finite-difference weights for d^order/dx^order at x0 on arbitrary nodes.

    Fornberg's recursion; exact for polynomials of degree <= len(nodes)-1.
    """
    x = np.asarray(nodes, dtype=np.float64)
    n = len(x)
    if order >= n:
        raise ValueError("need more nodes than the derivative order")
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _stencil_1d(n: int, h: float, order: int, scheme_order: int):
    """Interior weights + per-boundary-row one-sided weights for one axis.

    Returns (interior_offsets, interior_weights, boundary_rows) where
    boundary_rows maps row index -> (window_start, weights).
    """
    half = (scheme_order + 1) // 2  # symmetric interior window
    one_sided = order + scheme_order  # exact through degree one_sided-1 >= scheme_order
    if n < one_sided:
        raise ValueError(
            f"axis has {n} points; scheme order {scheme_order} derivative {order} needs {one_sided}"
        )
    offs = np.arange(-half, half + 1)
    interior_w = fd_weights(offs * h, 0.0, order)
    boundary = {}
    for i in range(half):
        # leading edge
        nodes = np.arange(one_sided) * h
        boundary[i] = (0, fd_weights(nodes - i * h, 0.0, order))
        # trailing edge
        j = n - 1 - i
        nodes = (np.arange(one_sided) + n - one_sided) * h
        boundary[j] = (n - one_sided, fd_weights(nodes - j * h, 0.0, order))
    return offs, interior_w, boundary


def derivative_values(
    values: NDArray[np.float64],
    h: float,
    axis: int,
    order: int = 1,
    scheme_order: int = 4,
) -> NDArray[np.float64]:
    """Apply a 1D derivative stencil along an axis of a 2D array."""
    if order not in (1, 2):
        raise ValueError("derivative order must be 1 or 2")
    if scheme_order not in (2, 4, 6):
        # 6 is for diagnostics that may converge faster than the dynamics
        raise ValueError("scheme order must be 2, 4 or 6")
    vals = values if axis == 0 else values.T
    n = vals.shape[0]
    offs, wint, boundary = _stencil_1d(n, h, order, scheme_order)
    half = offs[-1]
    out = np.zeros_like(vals)
    core = slice(half, n - half)
    for o, w in zip(offs, wint):
        out[core] += w * vals[half + o : n - half + o]
    for i, (start, w) in boundary.items():
        out[i] = w @ vals[start : start + len(w)]
    return out if axis == 0 else out.T


def derivative(
    fld: ScalarField, axis: str, order: int = 1, scheme_order: int = 4
) -> ScalarField:
    """Discrete d^order/d(axis)^order with central interior and one-sided edges.

    Exact on polynomials of degree <= scheme_order.
    """
    ax = {"x1": 0, "x2": 1}[axis]
    h = fld.grid.h1 if ax == 0 else fld.grid.h2
    vals = derivative_values(fld.values, h, ax, order, scheme_order)
    return ScalarField(fld.grid, vals, fld.time_label).check_finite()


def bump_profile(r2: NDArray[np.float64], smoothness: int = 1) -> NDArray[np.float64]:
    """exp(-1/(1 - r^2))^smoothness on r^2 < 1, exactly zero outside."""
    r2 = np.asarray(r2, dtype=np.float64)
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(-smoothness / (1.0 - r2[inside]))
    return out


def make_bump(
    grid: Grid2D,
    center: tuple[float, float],
    radius: float,
    amplitude: float,
    smoothness: int = 1,
) -> ScalarField:
    """Compactly supported C^inf bump amplitude * exp(-s/(1 - r^2/radius^2))."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    c1, c2 = center
    if (
        c1 - radius < grid.x1_min
        or c1 + radius > grid.x1_max
        or c2 - radius < grid.x2_min
        or c2 + radius > grid.x2_max
    ):
        raise ValueError("bump escapes grid")
    xx1, xx2 = grid.mesh()
    r2 = ((xx1 - c1) ** 2 + (xx2 - c2) ** 2) / radius**2
    return ScalarField(grid, amplitude * bump_profile(r2, smoothness)).check_finite()


def _trapz2(values: NDArray[np.float64], h1: float, h2: float) -> float:
    return float(np.trapezoid(np.trapezoid(values, dx=h2, axis=1), dx=h1, axis=0))


def _hs_square(fld: ScalarField, s: int, scheme_order: int) -> float:
    """Sum of integrals of squared partials up to total order s."""
    grid = fld.grid
    total = 0.0
    # cache[i] = list of all i-th order partial value arrays
    layer = {(): fld.values}
    total += _trapz2(fld.values**2, grid.h1, grid.h2)
    for _ in range(s):
        new_layer = {}
        for key, vals in layer.items():
            for ax in (0, 1):
                # mixed partials commute; keep sorted keys to avoid duplicates
                new_key = tuple(sorted(key + (ax,)))
                if new_key in new_layer:
                    continue
                h = grid.h1 if ax == 0 else grid.h2
                new_layer[new_key] = derivative_values(vals, h, ax, 1, scheme_order)
        for vals in new_layer.values():
            total += _trapz2(vals**2, grid.h1, grid.h2)
        layer = new_layer
    return total


def sobolev_norm(
    pairs: list[tuple[ScalarField, ScalarField]], s: int, scheme_order: int = 4
) -> float:
    """Discrete H^{s+1} x H^s norm of (f, g) pairs via trapezoid quadrature.

    Capped at s <= 4: finite differences above order ~5 are noise-dominated
    at desk resolutions.
    """
    if not 0 <= s <= 4:
        raise ValueError("s must be in 0..4")
    total = 0.0
    for f, g in pairs:
        total += _hs_square(f, s + 1, scheme_order)
        total += _hs_square(g, s, scheme_order)
    return float(np.sqrt(total))


def weighted_l2(
    phi: NDArray[np.float64],
    axes: tuple[NDArray[np.float64], ...],
    weight: NDArray[np.float64] | float = 1.0,
) -> float:
    """Trapezoid quadrature of weight * phi^2 over a slab sampled on a lattice.

    ``axes`` are the 1D coordinate arrays, one per dimension of ``phi``
    (e.g. (xi, eta, x2) for a Goursat slab); ``weight`` broadcasts to phi.
    """
    phi = np.asarray(phi, dtype=np.float64)
    if len(axes) != phi.ndim:
        raise ValueError("one coordinate array per phi dimension required")
    integrand = np.broadcast_to(weight, phi.shape) * phi**2
    out = integrand
    for ax in reversed(range(phi.ndim)):
        out = np.trapezoid(out, x=axes[ax], axis=ax)
    return float(out)


# -- serialization ------------------------------------------------------------


def dump_csv(fld: ScalarField, path_or_buf) -> None:
    """One "x1,x2,value" triple per line, row-major, with a header comment."""
    own = isinstance(path_or_buf, (str, bytes))
    fh = open(path_or_buf, "w") if own else path_or_buf
    try:
        g = fld.grid
        fh.write(
            f"# n1={g.n1} n2={g.n2} x1=[{g.x1_min:.17g},{g.x1_max:.17g}]"
            f" x2=[{g.x2_min:.17g},{g.x2_max:.17g}] t={fld.time_label:.17g}\n"
        )
        fh.write("x1,x2,value\n")
        x1, x2 = g.x1, g.x2
        for i in range(g.n1):
            for j in range(g.n2):
                fh.write(f"{x1[i]:.17g},{x2[j]:.17g},{fld.values[i, j]:.17g}\n")
    finally:
        if own:
            fh.close()


def load_csv(path) -> ScalarField:
    with open(path) as fh:
        header = fh.readline()
        meta = dict(
            item.split("=", 1) for item in header.lstrip("# ").split() if "=" in item
        )
        n1, n2 = int(meta["n1"]), int(meta["n2"])
        x1b = [float(v) for v in meta["x1"].strip("[]").split(",")]
        x2b = [float(v) for v in meta["x2"].strip("[]").split(",")]
        fh.readline()  # column names
        data = np.loadtxt(fh, delimiter=",")
    grid = Grid2D(x1b[0], x1b[1], x2b[0], x2b[1], n1, n2)
    return ScalarField(grid, data[:, 2].reshape(n1, n2), float(meta["t"]))


def dump_binary(fld: ScalarField, path) -> None:
    """Flat binary layout: magic, header struct, row-major float64 values."""
    g = fld.grid
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(
            struct.pack(
                "<iiddddd", g.n1, g.n2, g.x1_min, g.x1_max, g.x2_min, g.x2_max, fld.time_label
            )
        )
        fh.write(np.ascontiguousarray(fld.values).tobytes())


def load_binary(path) -> ScalarField:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not a membrane-lab field file")
        n1, n2, a, b, c, d, t = struct.unpack("<iiddddd", fh.read(8 + 5 * 8))
        vals = np.frombuffer(fh.read(n1 * n2 * 8), dtype=np.float64).reshape(n1, n2)
    return ScalarField(Grid2D(a, b, c, d, n1, n2), vals.copy(), t)
