"""Gauge transformation families and the identities they force.

A family of order m with r parameter functions perturbs each path
component by

    sum_j  sum_{i=0..m}  g[j][k][i] * p_j^(sigma^(m-i-1), delta^i)

where the parameter p_j is first shifted (sigma^(m-i-1); the exponent -1
means rho) and then delta-differentiated i times.  An optional second
coefficient table f produces a time reparametrization of the same shape.

On scales with an affine jump law sigma(t) = b1*t + b0, invariance of the
action under such a family forces, for each j, a weighted dependency
among the Euler-Lagrange expressions:

    sum_k sum_i (-1)^i (1/b1)^(i(i+1)/2) ((g[j][k][i])^sigma E_k)^(delta^i) = 0

and, with time transformation, an extra term of the same shape pairing f
with the time-component expression.  This module evaluates those residuals,
checks invariance numerically, and provides the brute-force summation
oracle for the weighted fundamental lemma that underlies them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .report import ResidualReport
from .timescale import (
    GridFunction,
    TimeScale,
    delta_derivative,
    delta_integral,
    explicit_scale,
    mixed,
    shift,
)
from .variational import (
    Lagrangian,
    el_expressions,
    eval_functional,
    lagrangian_along,
    second_el_expression,
)


@dataclass(frozen=True)
class GaugeFamily:
    """Coefficient tables for a gauge transformation family.

    g[j][k][i] is the coefficient multiplying the i-th order term of
    parameter j in component k; the optional f[j][i] plays the same role
    for the time reparametrization.  All coefficients are grid functions
    sharing one scale and one window (the interval the identity lives on).
    """

    g: tuple
    f: tuple | None = None

    def __post_init__(self):
        if not self.g or not self.g[0] or not self.g[0][0]:
            raise ValueError("empty coefficient table")
        g = tuple(tuple(tuple(row) for row in comp) for comp in self.g)
        object.__setattr__(self, "g", g)
        m1 = len(g[0][0])
        ts = g[0][0][0].ts
        lo, hi = g[0][0][0].window
        for comp in g:
            if len(comp) != len(g[0]):
                raise ValueError("ragged coefficient table")
            for row in comp:
                if len(row) != m1:
                    raise ValueError("ragged coefficient table")
                for c in row:
                    if c.n != 1 or not c.ts.same_as(ts) or c.window != (lo, hi):
                        raise ValueError("coefficients must share scale and window")
        if self.f is not None:
            f = tuple(tuple(row) for row in self.f)
            object.__setattr__(self, "f", f)
            if len(f) != len(g):
                raise ValueError("f table must have one row per parameter")
            for row in f:
                if len(row) != m1:
                    raise ValueError("f table order differs from g")
                for c in row:
                    if c.n != 1 or not c.ts.same_as(ts) or c.window != (lo, hi):
                        raise ValueError("coefficients must share scale and window")

    @property
    def r(self) -> int:
        return len(self.g)

    @property
    def n(self) -> int:
        return len(self.g[0])

    @property
    def m(self) -> int:
        return len(self.g[0][0]) - 1

    @property
    def ts(self) -> TimeScale:
        return self.g[0][0][0].ts

    @property
    def window(self) -> tuple[int, int]:
        return self.g[0][0][0].window

    @property
    def has_time(self) -> bool:
        return self.f is not None

    @staticmethod
    def constant(
        ts: TimeScale,
        g,
        f=None,
        window: tuple[int, int] | None = None,
    ) -> "GaugeFamily":
        """Build a family from nested constant tables g[j][k][i] (and f[j][i])."""
        g = np.asarray(g, dtype=float)
        if g.ndim != 3:
            raise ValueError("g must be indexed [parameter][component][order]")
        m = g.shape[2] - 1
        lo, hi = window if window is not None else (0, len(ts) - 1 - m)
        npts = hi - lo + 1

        def const_gf(c: float) -> GridFunction:
            return GridFunction(ts, lo, np.full((npts, 1), c))

        g_t = tuple(
            tuple(tuple(const_gf(g[j, k, i]) for i in range(m + 1)) for k in range(g.shape[1]))
            for j in range(g.shape[0])
        )
        f_t = None
        if f is not None:
            f = np.asarray(f, dtype=float)
            if f.shape != (g.shape[0], m + 1):
                raise ValueError("f must be indexed [parameter][order]")
            f_t = tuple(tuple(const_gf(f[j, i]) for i in range(m + 1)) for j in range(g.shape[0]))
        return GaugeFamily(g_t, f_t)


@dataclass(frozen=True)
class GaugeParams:
    """One parameter grid function per family slot, on an extended window."""

    p: tuple

    def __post_init__(self):
        p = tuple(self.p)
        if not p:
            raise ValueError("no parameter functions")
        for gf in p:
            if gf.n != 1:
                raise ValueError("parameter functions are scalar")
        object.__setattr__(self, "p", p)


def _term_sum(coeffs, p: GridFunction, m: int) -> GridFunction:
    total = None
    for i, c in enumerate(coeffs):
        term = c * mixed(p, m - i - 1, i)
        total = term if total is None else total + term
    return total


def gauge_term(fam: GaugeFamily, params: GaugeParams, k: int, j: int) -> GridFunction:
    """The contribution of parameter j to component k, on the family window."""
    total = _term_sum(fam.g[j][k], params.p[j], fam.m)
    lo, hi = fam.window
    if total.lo > lo or total.hi < hi:
        raise ValueError("parameter window too small for the requested term")
    return total.restrict(lo, hi)


def time_shift_term(fam: GaugeFamily, params: GaugeParams, j: int) -> GridFunction:
    """The contribution of parameter j to the time reparametrization."""
    if fam.f is None:
        raise ValueError("family has no time coefficients")
    total = _term_sum(fam.f[j], params.p[j], fam.m)
    lo, hi = fam.window
    if total.lo > lo or total.hi < hi:
        raise ValueError("parameter window too small for the requested term")
    return total.restrict(lo, hi)


def _perturbation(fam: GaugeFamily, params: GaugeParams, y: GridFunction) -> np.ndarray:
    cols = []
    for k in range(fam.n):
        acc = None
        for j in range(fam.r):
            t = gauge_term(fam, params, k, j)
            acc = t if acc is None else acc + t
        cols.append(acc.restrict(y.lo, y.hi).values)
    return np.hstack(cols)


def transform(fam: GaugeFamily, params: GaugeParams, y: GridFunction):
    """Apply the family to a path.

    Returns (None, ybar) without time coefficients.  With them, returns
    (alpha, ybar) where alpha holds the new times on y's window and ybar
    lives on the image scale alpha(points); alpha must come out strictly
    increasing.
    """
    if len(params.p) != fam.r:
        raise ValueError(f"family expects {fam.r} parameters")
    if y.n != fam.n:
        raise ValueError("component count mismatch")
    flo, fhi = fam.window
    if y.lo < flo or y.hi > fhi:
        raise ValueError("family coefficients do not cover the path window")
    ybar_vals = y.values + _perturbation(fam, params, y)
    if fam.f is None:
        return None, GridFunction(y.ts, y.lo, ybar_vals)
    hsum = None
    for j in range(fam.r):
        t = time_shift_term(fam, params, j)
        hsum = t if hsum is None else hsum + t
    alpha_vals = y.ts.points[y.lo : y.hi + 1] + hsum.restrict(y.lo, y.hi).values[:, 0]
    if not np.all(np.diff(alpha_vals) > 0):
        raise ValueError("time reparametrization is not strictly increasing")
    alpha = GridFunction(y.ts, y.lo, alpha_vals)
    image = explicit_scale(alpha_vals)
    return alpha, GridFunction(image, 0, ybar_vals)


def random_gauge_params(fam: GaugeFamily, seed, amplitude: float = 0.1) -> GaugeParams:
    """Seeded polynomial probes of degree m+2 scaled to the given sup amplitude,
    defined on the whole scale."""
    rng = np.random.default_rng(seed)
    ts = fam.ts
    t = ts.points
    ps = []
    for _ in range(fam.r):
        coeffs = rng.uniform(-1, 1, fam.m + 3)
        vals = np.polynomial.polynomial.polyval(t, coeffs)
        peak = np.max(np.abs(vals))
        if peak > 0:
            vals = vals * (amplitude / peak)
        ps.append(GridFunction(ts, 0, vals))
    return GaugeParams(tuple(ps))


def check_invariance(
    L: Lagrangian,
    fam: GaugeFamily,
    y: GridFunction,
    trials: int = 20,
    seed: int = 0,
    amplitude: float = 0.1,
    tolerance: float = 1e-12,
) -> ResidualReport:
    """Action deviation |action(y) - action(ybar)| over seeded random probes.

    The verdict tolerance is scaled by max(1, |action(y)|).  Families with
    time coefficients are evaluated on the image scale of each trial.
    """
    base = eval_functional(L, y)
    devs = np.empty(trials)
    for trial in range(trials):
        params = random_gauge_params(fam, seed=[seed, trial], amplitude=amplitude)
        _, ybar = transform(fam, params, y)
        devs[trial] = abs(eval_functional(L, ybar) - base)
    tol_eff = tolerance * max(1.0, abs(base))
    return ResidualReport.from_per_point(y.window, devs, tol_eff)


def necessary_condition_residual(
    L: Lagrangian, fam: GaugeFamily, y: GridFunction, params: GaugeParams
) -> float:
    """Value of the first-variation pairing of the path with the family's
    perturbation; zero (to rounding) whenever the action is invariant."""
    pert = GridFunction(y.ts, y.lo, _perturbation(fam, params, y))
    pu = lagrangian_along(L, y, "u")
    pv = lagrangian_along(L, y, "v")
    integrand = pu * shift(pert, 1) + pv * delta_derivative(pert, 1)
    return float(np.sum(delta_integral(integrand)))


def _identity_weight(b1: float, i: int) -> float:
    return (-1.0) ** i * (1.0 / b1) ** ((i * (i + 1)) // 2)


def _require_condition_h(ts: TimeScale) -> float:
    if ts.condition_h is None:
        raise ValueError("identity evaluation needs an affine jump law sigma(t) = b1*t + b0")
    return ts.condition_h[0]


def noether_identity(
    L: Lagrangian, fam: GaugeFamily, y: GridFunction, tolerance: float = 1e-9
) -> list[ResidualReport]:
    """Per-parameter residual of the gauge dependency among the
    Euler-Lagrange expressions, on the largest window all terms share."""
    b1 = _require_condition_h(y.ts)
    E = el_expressions(L, y)
    reports = []
    for j in range(fam.r):
        total = _identity_sum(fam.g[j], E, b1, fam.m)
        reports.append(ResidualReport.from_per_point(total.window, total.values, tolerance))
    return reports


def noether_identity_time(
    L: Lagrangian, fam: GaugeFamily, y: GridFunction, tolerance: float = 1e-9
) -> list[ResidualReport]:
    """Time-transformed variant: adds the f-weighted time-component term.

    With identically zero f coefficients this reproduces noether_identity
    bitwise (the extra term is skipped, not added as zeros).
    """
    if fam.f is None:
        raise ValueError("time variant needs a family with f coefficients")
    b1 = _require_condition_h(y.ts)
    E = el_expressions(L, y)
    Es = second_el_expression(L, y)
    reports = []
    for j in range(fam.r):
        total = _identity_sum(fam.g[j], E, b1, fam.m)
        if any(np.any(c.values != 0.0) for c in fam.f[j]):
            extra = _identity_sum((fam.f[j],), Es, b1, fam.m)
            total = total + extra
        reports.append(ResidualReport.from_per_point(total.window, total.values, tolerance))
    return reports


def _identity_sum(comp_tables, E: GridFunction, b1: float, m: int) -> GridFunction:
    total = None
    for k, coeffs in enumerate(comp_tables):
        for i, g in enumerate(coeffs):
            term = shift(g, 1) * E.component(k)
            if i:
                term = delta_derivative(term, i)
            term = _identity_weight(b1, i) * term
            total = term if total is None else total + term
    return total


def second_el_via_reparametrization(L: Lagrangian, y: GridFunction) -> GridFunction:
    """Finite-difference oracle for the time-component expression.

    Time is adjoined as a path component s with s(t) = t and the density
    rescaled accordingly; the ordinary Euler-Lagrange expression of the s
    component, computed purely by finite differences, must match
    second_el_expression.
    """
    ts = y.ts
    pts = ts.points
    gaps = np.append(np.diff(pts), 0.0)

    def mu_of(t: float) -> float:
        i = int(np.searchsorted(pts, t))
        if i >= pts.size or abs(pts[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError("time not on the scale")
        return float(gaps[i])

    def density(t, U, V):
        return L.eval(U[0] - mu_of(t) * V[0], U[1:], V[1:] / V[0]) * V[0]

    augmented = Lagrangian(n=L.n + 1, eval=density)
    s = GridFunction(ts, y.lo, pts[y.lo : y.hi + 1])
    z = GridFunction.stack([s, y])
    return el_expressions(augmented, z).component(0)


# Independent single-scale forms of the identity, used to cross-check the
# generic weights on uniform and geometric grids.  These work on raw sample
# arrays with their own difference quotients (constant-step division for
# uniform grids, (q-1)*t division for geometric ones).

def identity_lhs_h_calculus(L: Lagrangian, g_funcs, t: np.ndarray, y: np.ndarray, h: float, m: int) -> np.ndarray:
    """sum_k sum_i (-1)^i [g(t+h) * E_k]^(i-fold forward difference / h)."""
    y = np.atleast_2d(y.T).T
    E = _el_uniform(L, t, y, h)
    npts = E.shape[0]
    out = np.zeros(npts - m)
    for k in range(y.shape[1]):
        for i in range(m + 1):
            w = np.array([g_funcs[k][i](tv + h) for tv in t[:npts]]) * E[:, k]
            for _ in range(i):
                w = (w[1:] - w[:-1]) / h
            out += (-1.0) ** i * w[: npts - m]
    return out


def _el_uniform(L: Lagrangian, t: np.ndarray, y: np.ndarray, h: float) -> np.ndarray:
    u = y[1:]
    v = (y[1:] - y[:-1]) / h
    pu = np.array([L.partial_u(tv, uu, vv) for tv, uu, vv in zip(t[:-1], u, v)])
    pv = np.array([L.partial_v(tv, uu, vv) for tv, uu, vv in zip(t[:-1], u, v)])
    return pu[:-1] - (pv[1:] - pv[:-1]) / h


def identity_lhs_q_calculus(L: Lagrangian, g_funcs, t: np.ndarray, y: np.ndarray, q: float, m: int) -> np.ndarray:
    """sum_k sum_i (-1)^i (1/q)^(i(i+1)/2) [g(q t) * E_k]^(i-fold q-difference)."""
    y = np.atleast_2d(y.T).T
    u = y[1:]
    v = (y[1:] - y[:-1]) / ((q - 1) * t[:-1])[:, None]
    pu = np.array([L.partial_u(tv, uu, vv) for tv, uu, vv in zip(t[:-1], u, v)])
    pv = np.array([L.partial_v(tv, uu, vv) for tv, uu, vv in zip(t[:-1], u, v)])
    E = pu[:-1] - (pv[1:] - pv[:-1]) / ((q - 1) * t[:-2])[:, None]
    npts = E.shape[0]
    out = np.zeros(npts - m)
    for k in range(y.shape[1]):
        for i in range(m + 1):
            w = np.array([g_funcs[k][i](q * tv) for tv in t[:npts]]) * E[:, k]
            tt = t[:npts]
            for _ in range(i):
                w = (w[1:] - w[:-1]) / ((q - 1) * tt[: w.size - 1])
                tt = tt[: w.size]
            out += (-1.0) ** i * (1.0 / q) ** (i * (i + 1) // 2) * w[: npts - m]
    return out


@dataclass(frozen=True)
class FundamentalLemmaReport:
    """Two-sided check of the weighted fundamental lemma on one instance.

    max_integral: largest |pairing integral| over the impulse basis of
    admissible variations.  conclusion_sup: sup of the weighted alternating
    derivative combination on the window those impulses can reach.
    verdict: both vanish.  consistent: the lemma's biconditional holds.
    """

    m: int
    domain: tuple[int, int]
    max_integral: float
    conclusion_sup: float
    integrals_vanish: bool
    conclusion_vanishes: bool
    verdict: bool
    consistent: bool


def fundamental_lemma_oracle(
    ts: TimeScale, fs, tolerance: float = 1e-10
) -> FundamentalLemmaReport:
    """Brute-force both directions of the weighted fundamental lemma.

    fs = [f_0 .. f_m].  The pairing integral sums
    mu(t) * sum_i f_i(t) * eta^(sigma^(m-i), delta^i)(t) over the integration
    window; every unit impulse eta honoring the boundary-vanishing pattern
    (first m and last m points pinned) spans the admissible variations.
    """
    m = len(fs) - 1
    if m < 0:
        raise ValueError("need at least f_0")
    b1 = _require_condition_h(ts)
    npts = len(ts)
    if npts < 2 * m + 1:
        raise ValueError(f"grid needs at least {2 * m + 1} points for order {m}")
    upper = npts - m if m >= 1 else npts - 1  # summand indices [0, upper-1]
    for f in fs:
        if f.lo > 0 or f.hi < upper - 1:
            raise ValueError("coefficient windows too small")

    free_lo = m if m >= 1 else 0
    free_hi = npts - m - 1 if m >= 1 else npts - 2
    mu = ts.mu_array()

    max_integral = 0.0
    for s in range(free_lo, free_hi + 1):
        eta = GridFunction(ts, 0, _impulse(npts, s))
        integrand = None
        for i, f in enumerate(fs):
            term = f * mixed(eta, m - i, i)
            integrand = term if integrand is None else integrand + term
        lo, hi = integrand.window
        if lo > 0 or hi < upper - 1:
            raise ValueError("variation terms do not cover the integration window")
        val = float(mu[:upper] @ integrand.values[0 - integrand.lo : upper - integrand.lo, 0])
        max_integral = max(max_integral, abs(val))

    conclusion = None
    for i, f in enumerate(fs):
        term = f if i == 0 else delta_derivative(f, i)
        term = (-1.0) ** i * (1.0 / b1) ** ((i * (i - 1)) // 2) * term
        conclusion = term if conclusion is None else conclusion + term
    reach_hi = upper - 1 - m
    window = (0, min(conclusion.hi, reach_hi))
    sup = float(np.max(np.abs(conclusion.restrict(*window).values)))

    ints_ok = max_integral <= tolerance
    concl_ok = sup <= tolerance
    return FundamentalLemmaReport(
        m=m,
        domain=window,
        max_integral=max_integral,
        conclusion_sup=sup,
        integrals_vanish=ints_ok,
        conclusion_vanishes=concl_ok,
        verdict=ints_ok and concl_ok,
        consistent=ints_ok == concl_ok,
    )


def _impulse(npts: int, at: int) -> np.ndarray:
    vals = np.zeros(npts)
    vals[at] = 1.0
    return vals
