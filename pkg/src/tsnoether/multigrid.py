"""Rectangular products of time scales in 2 to 4 dimensions.

Fields are scalar sample arrays on a per-axis index window of the product
grid; vector quantities are tuples of fields.  Partial delta derivatives
are forward quotients along one axis (the window loses its top index on
that axis).  The variational machinery mirrors the single-integral case:
the density of a functional is evaluated with the forward-shifted argument
pattern (each gradient slot sees sigma applied on every axis except its
own), Euler-Lagrange expressions live on the doubly shrunk interior, and
first-order gauge operators come with an explicit summation-by-parts
adjoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .report import ResidualReport


@dataclass(frozen=True, eq=False)
class GridD:
    """A d-dimensional rectangle built from one time scale per axis."""

    scales: tuple

    def __post_init__(self):
        scales = tuple(self.scales)
        if not 2 <= len(scales) <= 4:
            raise ValueError("supported dimensions are 2..4")
        object.__setattr__(self, "scales", scales)

    @property
    def d(self) -> int:
        return len(self.scales)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.scales)

    def mu(self, axis: int) -> np.ndarray:
        return self.scales[axis].mu_array()

    def same_as(self, other: "GridD") -> bool:
        return self is other or (
            self.d == other.d and all(a.same_as(b) for a, b in zip(self.scales, other.scales))
        )


@dataclass(frozen=True, eq=False)
class FieldD:
    """Scalar samples on a rectangular index window of a GridD."""

    grid: GridD
    lo: tuple
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        lo = tuple(int(x) for x in self.lo)
        if vals.ndim != self.grid.d or len(lo) != self.grid.d:
            raise ValueError("field dimension does not match the grid")
        for ax, (l, n) in enumerate(zip(lo, vals.shape)):
            if n == 0 or l < 0 or l + n - 1 >= self.grid.shape[ax]:
                raise ValueError(f"window exceeds the grid on axis {ax}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "lo", lo)

    @property
    def hi(self) -> tuple:
        return tuple(l + n - 1 for l, n in zip(self.lo, self.values.shape))

    @property
    def window(self) -> tuple:
        return tuple(zip(self.lo, self.hi))

    def restrict(self, lo, hi) -> "FieldD":
        sl = []
        for ax in range(self.grid.d):
            if lo[ax] < self.lo[ax] or hi[ax] > self.hi[ax] or lo[ax] > hi[ax]:
                raise ValueError(f"not a subwindow on axis {ax}")
            sl.append(slice(lo[ax] - self.lo[ax], hi[ax] - self.lo[ax] + 1))
        return FieldD(self.grid, tuple(lo), self.values[tuple(sl)])

    @staticmethod
    def from_callable(grid: GridD, fn) -> "FieldD":
        coords = np.meshgrid(*[s.points for s in grid.scales], indexing="ij", sparse=True)
        return FieldD(grid, (0,) * grid.d, np.broadcast_to(fn(*coords), grid.shape))

    def _binary(self, other, op) -> "FieldD":
        if isinstance(other, FieldD):
            if not self.grid.same_as(other.grid):
                raise ValueError("fields live on different grids")
            lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
            hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
            if any(l > h for l, h in zip(lo, hi)):
                raise ValueError("windows do not overlap")
            return FieldD(self.grid, lo, op(self.restrict(lo, hi).values, other.restrict(lo, hi).values))
        return FieldD(self.grid, self.lo, op(self.values, float(other)))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    def __rmul__(self, other):
        return self._binary(other, np.multiply)

    def __neg__(self):
        return FieldD(self.grid, self.lo, -self.values)


def partial_delta(f: FieldD, axis: int) -> FieldD:
    """Forward difference quotient along one axis; its top index is lost."""
    n = f.values.shape[axis]
    if n < 2:
        raise ValueError(f"window too small on axis {axis}")
    mu = f.grid.mu(axis)[f.lo[axis] : f.lo[axis] + n - 1]
    shape = [1] * f.grid.d
    shape[axis] = n - 1
    upper = [slice(None)] * f.grid.d
    lower = [slice(None)] * f.grid.d
    upper[axis] = slice(1, None)
    lower[axis] = slice(None, -1)
    vals = (f.values[tuple(upper)] - f.values[tuple(lower)]) / mu.reshape(shape)
    return FieldD(f.grid, f.lo, vals)


def shift_axis(f: FieldD, axis: int, k: int) -> FieldD:
    """Compose with sigma^k (k > 0, pure translation) or rho^|k| (k < 0,
    saturating at the scale minimum) along one axis."""
    if k == 0:
        return f
    npts = f.grid.shape[axis]
    lo_ax, hi_ax = f.lo[axis], f.hi[axis]
    if k > 0:
        new_lo, new_hi = max(lo_ax - k, 0), hi_ax - k
        if new_lo > new_hi:
            raise ValueError("shift exhausts the window")
        idx = np.arange(new_lo, new_hi + 1) + k
    else:
        steps = -k
        new_lo = lo_ax if lo_ax == 0 else lo_ax + steps
        new_hi = min(hi_ax + steps, npts - 1)
        if new_lo > new_hi:
            raise ValueError("shift exhausts the window")
        idx = np.maximum(np.arange(new_lo, new_hi + 1) - steps, 0)
        if idx.min() < lo_ax or idx.max() > hi_ax:
            raise ValueError("shift exhausts the window")
    take = [slice(None)] * f.grid.d
    take[axis] = idx - lo_ax
    lo = list(f.lo)
    lo[axis] = new_lo
    return FieldD(f.grid, tuple(lo), f.values[tuple(take)])


def shift_all_except(f: FieldD, axis: int, k: int = 1) -> FieldD:
    out = f
    for ax in range(f.grid.d):
        if ax != axis:
            out = shift_axis(out, ax, k)
    return out


def shift_all(f: FieldD, k: int = 1) -> FieldD:
    out = f
    for ax in range(f.grid.d):
        out = shift_axis(out, ax, k)
    return out


def multi_integral(f: FieldD) -> float:
    """Iterated delta integral: sum of f * prod(mu_i) over the window with
    the top index excluded on every axis (where mu is defined)."""
    lo = f.lo
    hi = [min(h, n - 2) for h, n in zip(f.hi, f.grid.shape)]
    if any(h < l for l, h in zip(lo, hi)):
        return 0.0
    vals = f.restrict(lo, hi).values.copy()
    for ax in range(f.grid.d):
        mu = f.grid.mu(ax)[lo[ax] : hi[ax] + 1]
        shape = [1] * f.grid.d
        shape[ax] = mu.size
        vals = vals * mu.reshape(shape)
    return float(np.sum(vals))


def greens_residual(M: FieldD, N: FieldD) -> float:
    """|double integral of (dN/dx - dM/dy) - fence circulation| on the common
    rectangle (d = 2 only).

    The fence is walked counterclockwise: delta sums along the bottom and
    right edges, and the reversed (nabla-with-the-traversal) sums along the
    top and left edges, which on a rectangle are delta sums with a minus
    sign.  This pairing telescopes exactly.
    """
    if M.grid.d != 2 or not M.grid.same_as(N.grid):
        raise ValueError("Green residual is defined for two fields on one 2-d grid")
    lo = tuple(max(a, b) for a, b in zip(M.lo, N.lo))
    hi = tuple(min(a, b) for a, b in zip(M.hi, N.hi))
    Mv = M.restrict(lo, hi)
    Nv = N.restrict(lo, hi)
    lhs = multi_integral(partial_delta(Nv, 0) - partial_delta(Mv, 1))
    mux = M.grid.mu(0)[lo[0] : hi[0]]
    muy = M.grid.mu(1)[lo[1] : hi[1]]
    bottom = float(mux @ Mv.values[:-1, 0])
    top = float(mux @ Mv.values[:-1, -1])
    right = float(muy @ Nv.values[-1, :-1])
    left = float(muy @ Nv.values[0, :-1])
    return abs(lhs - (bottom + right - top - left))


@dataclass(frozen=True)
class LagrangianD:
    """Density L(coords, u, g) for a d-fold integral with n path components.

    u has one slot per component, g one slot per (axis, component) pair.
    All callables are vectorized over trailing cell axes: u is passed with
    shape (n, *cells) and g with shape (d, n, *cells); coords is a tuple of
    broadcastable coordinate arrays.
    """

    d: int
    n: int
    density: Callable
    d_u: Callable | None = None
    d_g: Callable | None = None
    fd_step: float = 1e-6

    def partial_u(self, coords, U, G) -> np.ndarray:
        if self.d_u is not None:
            return np.asarray(self.d_u(coords, U, G), dtype=float)
        out = np.empty_like(U)
        for k in range(self.n):
            h = self.fd_step * np.maximum(1.0, np.abs(U[k]))
            up, um = U.copy(), U.copy()
            up[k] = U[k] + h
            um[k] = U[k] - h
            out[k] = (self.density(coords, up, G) - self.density(coords, um, G)) / (2 * h)
        return out

    def partial_g(self, coords, U, G) -> np.ndarray:
        if self.d_g is not None:
            return np.asarray(self.d_g(coords, U, G), dtype=float)
        out = np.empty_like(G)
        for j in range(self.d):
            for k in range(self.n):
                h = self.fd_step * np.maximum(1.0, np.abs(G[j, k]))
                gp, gm = G.copy(), G.copy()
                gp[j, k] = G[j, k] + h
                gm[j, k] = G[j, k] - h
                out[j, k] = (self.density(coords, U, gp) - self.density(coords, U, gm)) / (2 * h)
        return out


def _pattern_args(L: LagrangianD, u: tuple):
    """Shifted-argument slots on the base-cell window shared by all of them.

    The u slot carries sigma on every axis; gradient slot j carries the
    axis-j quotient with sigma on every other axis.
    """
    grid = u[0].grid
    if len(u) != L.n or L.d != grid.d:
        raise ValueError("component or dimension mismatch")
    lo = tuple(max(f.lo[ax] for f in u) for ax in range(grid.d))
    hi = tuple(min(f.hi[ax] for f in u) for ax in range(grid.d))
    cell_hi = tuple(h - 1 for h in hi)
    if any(c < l for l, c in zip(lo, cell_hi)):
        raise ValueError("window too small for the shifted argument pattern")
    U = np.stack([shift_all(f.restrict(lo, hi)).values for f in u])
    G = np.stack(
        [
            np.stack([shift_all_except(partial_delta(f.restrict(lo, hi), j), j).values for f in u])
            for j in range(grid.d)
        ]
    )
    coords = []
    for ax in range(grid.d):
        shape = [1] * grid.d
        shape[ax] = cell_hi[ax] - lo[ax] + 1
        coords.append(grid.scales[ax].points[lo[ax] : cell_hi[ax] + 1].reshape(shape))
    return tuple(coords), U, G, lo, cell_hi


def functional_d(L: LagrangianD, u: tuple) -> float:
    """The d-fold delta integral of the density along the shifted pattern."""
    coords, U, G, lo, cell_hi = _pattern_args(L, u)
    dens = np.broadcast_to(L.density(coords, U, G), U.shape[1:])
    return multi_integral(FieldD(u[0].grid, lo, dens))


def el_expressions_d(L: LagrangianD, u: tuple) -> tuple:
    """Euler-Lagrange expressions dL/du_k - sum_j d/dx_j (dL/dg_jk), one field
    per component, on the doubly shrunk interior."""
    coords, U, G, lo, cell_hi = _pattern_args(L, u)
    grid = u[0].grid
    P = np.broadcast_to(L.partial_u(coords, U, G), U.shape)
    Q = np.broadcast_to(L.partial_g(coords, U, G), G.shape)
    out = []
    for k in range(L.n):
        e = FieldD(grid, lo, P[k])
        for j in range(grid.d):
            e = e - partial_delta(FieldD(grid, lo, Q[j, k]), j)
        out.append(e)
    return tuple(out)


def el_residual_d(L: LagrangianD, u: tuple, tolerance: float = 1e-8) -> ResidualReport:
    es = el_expressions_d(L, u)
    lo = tuple(max(e.lo[ax] for e in es) for ax in range(es[0].grid.d))
    hi = tuple(min(e.hi[ax] for e in es) for ax in range(es[0].grid.d))
    stacked = np.stack([e.restrict(lo, hi).values for e in es])
    return ResidualReport.from_per_point((lo[0], hi[0]), stacked, tolerance)


@dataclass(frozen=True)
class GaugeFamilyD:
    """First-order gauge coefficients: for each component k, a multiplicative
    field a[k][0] and one field a[k][1+j] per axis j weighting the axis-j
    quotient of the parameter taken at the rho-shifted own coordinate."""

    a: tuple

    def __post_init__(self):
        a = tuple(tuple(row) for row in self.a)
        if not a or not a[0]:
            raise ValueError("empty coefficient table")
        grid = a[0][0].grid
        for row in a:
            if len(row) != grid.d + 1:
                raise ValueError("each component needs 1 + d coefficient fields")
            for c in row:
                if not c.grid.same_as(grid):
                    raise ValueError("coefficients must share the grid")
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def grid(self) -> GridD:
        return self.a[0][0].grid

    @staticmethod
    def constant(grid: GridD, table) -> "GaugeFamilyD":
        """table[k] = (a0, a1, ..., ad) constants."""
        rows = []
        for row in table:
            rows.append(
                tuple(FieldD(grid, (0,) * grid.d, np.full(grid.shape, float(c))) for c in row)
            )
        return GaugeFamilyD(tuple(rows))


def _is_zero(f: FieldD) -> bool:
    return bool(np.all(f.values == 0.0))


def gauge_field(fam: GaugeFamilyD, p: FieldD, k: int) -> FieldD:
    """The perturbation of component k:
    a0*p + sum_j a_{j} * (dp/dx_j at the rho_j-shifted point).

    Identically-zero coefficients contribute nothing and are skipped so
    they do not shrink the window.
    """
    row = fam.a[k]
    out = None if _is_zero(row[0]) else row[0] * p
    for j in range(fam.grid.d):
        if _is_zero(row[1 + j]):
            continue
        term = row[1 + j] * shift_axis(partial_delta(p, j), j, -1)
        out = term if out is None else out + term
    if out is None:
        return FieldD(p.grid, (0,) * p.grid.d, np.zeros(p.grid.shape))
    return out


def gauge_field_adjoint(fam: GaugeFamilyD, q: FieldD, k: int) -> FieldD:
    """Summation-by-parts transpose: q*a0 - sum_j d/dx_j (q * a_j)."""
    row = fam.a[k]
    out = None if _is_zero(row[0]) else q * row[0]
    for j in range(fam.grid.d):
        if _is_zero(row[1 + j]):
            continue
        term = partial_delta(q * row[1 + j], j)
        out = -term if out is None else out - term
    if out is None:
        return FieldD(q.grid, (0,) * q.grid.d, np.zeros(q.grid.shape))
    return out


def gauge_pairing(fam: GaugeFamilyD, p: FieldD, q: FieldD, k: int) -> tuple[float, float]:
    """Both sides of the adjoint relation:
    integral of q * (shifted-pattern gauge term of p) versus
    integral of adjoint(q) * p^sigma.  They agree when p vanishes near the
    fence."""
    row = fam.a[k]
    lhs_field = None if _is_zero(row[0]) else row[0] * shift_all(p)
    for j in range(fam.grid.d):
        if _is_zero(row[1 + j]):
            continue
        term = row[1 + j] * shift_all_except(partial_delta(p, j), j)
        lhs_field = term if lhs_field is None else lhs_field + term
    if lhs_field is None:
        return 0.0, 0.0
    lhs = multi_integral(q * lhs_field)
    rhs = multi_integral(gauge_field_adjoint(fam, q, k) * shift_all(p))
    return lhs, rhs


def transform_d(fam: GaugeFamilyD, p: FieldD, u: tuple) -> tuple:
    if len(u) != fam.n:
        raise ValueError("component count mismatch")
    return tuple(u_k + gauge_field(fam, p, k) for k, u_k in enumerate(u))


def random_polynomial_field(grid: GridD, seed, degree: int = 2, amplitude: float = 1.0) -> FieldD:
    """Seeded separable polynomial samples scaled to the given sup amplitude."""
    rng = np.random.default_rng(seed)
    vals = np.zeros(grid.shape)
    for _ in range(3):
        term = np.ones(grid.shape)
        for ax, s in enumerate(grid.scales):
            t = s.points
            span = np.max(np.abs(t))
            coeffs = rng.uniform(-1, 1, degree + 1)
            axis_vals = np.polynomial.polynomial.polyval(t / max(span, 1.0), coeffs)
            shape = [1] * grid.d
            shape[ax] = t.size
            term = term * axis_vals.reshape(shape)
        vals += term
    peak = np.max(np.abs(vals))
    if peak > 0:
        vals *= amplitude / peak
    return FieldD(grid, (0,) * grid.d, vals)


def check_invariance_d(
    L: LagrangianD,
    fam: GaugeFamilyD,
    u: tuple,
    trials: int = 20,
    seed: int = 0,
    amplitude: float = 0.1,
    tolerance: float = 1e-12,
) -> ResidualReport:
    """Functional deviation under seeded random polynomial parameters."""
    base = functional_d(L, u)
    devs = np.empty(trials)
    for trial in range(trials):
        p = random_polynomial_field(fam.grid, seed=[seed, trial], amplitude=amplitude)
        devs[trial] = abs(functional_d(L, transform_d(fam, p, u)) - base)
    tol_eff = tolerance * max(1.0, abs(base))
    return ResidualReport.from_per_point((0, trials - 1), devs, tol_eff)


def noether_identity_d(
    L: LagrangianD, fam: GaugeFamilyD, u: tuple, tolerance: float = 1e-9
) -> ResidualReport:
    """Residual of sum_k adjoint_k(E_k) on the largest interior window."""
    es = el_expressions_d(L, u)
    total = None
    for k in range(fam.n):
        term = gauge_field_adjoint(fam, es[k], k)
        total = term if total is None else total + term
    return ResidualReport.from_per_point((total.lo[0], total.hi[0]), total.values, tolerance)


def double_fundamental_oracle(M: FieldD, tolerance: float = 1e-12) -> tuple[float, float, bool]:
    """Impulse form of the double fundamental lemma on the field's window.

    Pairs M against eta^sigma for every unit impulse eta placed at a point
    whose sigma-preimage is a base cell, by actually evaluating the double
    integral.  Returns (max |pairing|, sup |M| on the base cells, flag that
    both vanish or neither does).
    """
    grid = M.grid
    lo = M.lo
    hi = tuple(min(h, n - 2) for h, n in zip(M.hi, grid.shape))
    if any(h < l for l, h in zip(lo, hi)):
        raise ValueError("no base cells in the window")
    max_integral = 0.0
    for cell in np.ndindex(*(h - l + 1 for l, h in zip(lo, hi))):
        spike = np.zeros(grid.shape)
        spike[tuple(c + l + 1 for c, l in zip(cell, lo))] = 1.0
        eta_sigma = shift_all(FieldD(grid, (0,) * grid.d, spike))
        max_integral = max(max_integral, abs(multi_integral(M * eta_sigma)))
    sup_m = float(np.max(np.abs(M.restrict(lo, hi).values)))
    consistent = (max_integral <= tolerance) == (sup_m <= tolerance)
    return max_integral, sup_m, consistent


def write_csv_d(f: FieldD, path) -> None:
    """Flat CSV: one axis-index column per dimension, then the value."""
    d = f.grid.d
    header = ",".join(f"i{ax}" for ax in range(d)) + ",value"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for cell in np.ndindex(*f.values.shape):
            idx = [c + l for c, l in zip(cell, f.lo)]
            fh.write(",".join(str(i) for i in idx) + "," + repr(float(f.values[cell])) + "\n")


def read_csv_d(grid: GridD, path) -> FieldD:
    """Read a field written by write_csv_d; rows must fill a rectangle."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != [f"i{ax}" for ax in range(grid.d)] + ["value"]:
            raise ValueError("unexpected field CSV header")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if not rows:
        raise ValueError("empty field file")
    idx = np.array([[int(x) for x in r[:-1]] for r in rows])
    vals = np.array([float(r[-1]) for r in rows])
    lo = idx.min(axis=0)
    hi = idx.max(axis=0)
    shape = tuple(hi - lo + 1)
    if len(rows) != int(np.prod(shape)):
        raise ValueError("rows do not fill a rectangular window")
    out = np.empty(shape)
    out[tuple((idx - lo).T)] = vals
    return FieldD(grid, tuple(int(x) for x in lo), out)
