"""Single-integral variational calculus on a finite time scale.

The action of a Lagrangian L(t, u, v) over a path y is the delta integral
of L(t, y(sigma(t)), y_delta(t)).  This module evaluates that action, its
first variation, the Euler-Lagrange expressions (both kinds), and solves
discrete Euler-Lagrange boundary value problems by damped Newton.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .report import ResidualReport
from .timescale import GridFunction, TimeScale, delta_derivative, delta_integral, shift


class ConvergenceError(RuntimeError):
    """Newton failed; carries the final residual sup-norm."""

    def __init__(self, message: str, final_residual: float):
        super().__init__(message)
        self.final_residual = final_residual


@dataclass(frozen=True)
class Lagrangian:
    """An evaluable density L(t, u, v) with u, v in R^n.

    Analytic partials are optional; central finite differences with a step
    of fd_step * max(1, |value|) fill in for any that are missing.
    """

    n: int
    eval: Callable[[float, np.ndarray, np.ndarray], float]
    d_t: Callable | None = None
    d_u: Callable | None = None
    d_v: Callable | None = None
    fd_step: float = 1e-6

    def partial_t(self, t: float, u: np.ndarray, v: np.ndarray) -> float:
        if self.d_t is not None:
            return float(self.d_t(t, u, v))
        h = self.fd_step * max(1.0, abs(t))
        return (self.eval(t + h, u, v) - self.eval(t - h, u, v)) / (2 * h)

    def partial_u(self, t: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.d_u is not None:
            return np.asarray(self.d_u(t, u, v), dtype=float)
        return self._fd_vec(lambda uu: self.eval(t, uu, v), u)

    def partial_v(self, t: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.d_v is not None:
            return np.asarray(self.d_v(t, u, v), dtype=float)
        return self._fd_vec(lambda vv: self.eval(t, u, vv), v)

    def _fd_vec(self, f, x: np.ndarray) -> np.ndarray:
        out = np.empty(x.size)
        for k in range(x.size):
            h = self.fd_step * max(1.0, abs(x[k]))
            xp, xm = x.copy(), x.copy()
            xp[k] += h
            xm[k] -= h
            out[k] = (f(xp) - f(xm)) / (2 * h)
        return out

    def self_check(self, seed: int = 0, trials: int = 20, rtol: float = 1e-6) -> float:
        """Worst relative gap between analytic partials and central differences
        on random probe points.  Raises if it exceeds rtol."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(trials):
            t = float(rng.uniform(-2, 2))
            u = rng.uniform(-2, 2, self.n)
            v = rng.uniform(-2, 2, self.n)
            pairs = []
            if self.d_t is not None:
                h = self.fd_step * max(1.0, abs(t))
                fd = (self.eval(t + h, u, v) - self.eval(t - h, u, v)) / (2 * h)
                pairs.append((np.atleast_1d(self.d_t(t, u, v)), np.atleast_1d(fd)))
            if self.d_u is not None:
                pairs.append((np.asarray(self.d_u(t, u, v)), self._fd_vec(lambda uu: self.eval(t, uu, v), u)))
            if self.d_v is not None:
                pairs.append((np.asarray(self.d_v(t, u, v)), self._fd_vec(lambda vv: self.eval(t, u, vv), v)))
            for got, fd in pairs:
                scale = np.maximum(1.0, np.abs(fd))
                worst = max(worst, float(np.max(np.abs(got - fd) / scale)))
        if worst > rtol:
            raise ValueError(f"analytic partials disagree with finite differences: {worst:.3e}")
        return worst


@dataclass(frozen=True)
class BoundaryData:
    """Endpoint values y(a) = alpha, y(b) = beta."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        b = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if a.shape != b.shape:
            raise ValueError("alpha and beta dimensions differ")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)


def _check_dims(L: Lagrangian, y: GridFunction) -> None:
    if y.n != L.n:
        raise ValueError(f"Lagrangian has n={L.n} but path has n={y.n} components")


def _path_args(y: GridFunction):
    """Times, y(sigma(t)) and y_delta(t) on [lo, hi-1]."""
    if y.hi - y.lo < 1:
        raise ValueError("path window too small")
    ysig = shift(y, 1)
    ydel = delta_derivative(y, 1)
    ts = y.ts.points[y.lo : y.hi]
    return ts, ysig.values, ydel.values


def eval_functional(L: Lagrangian, y: GridFunction) -> float:
    """Delta integral of L(t, y(sigma(t)), y_delta(t)) over the path window."""
    _check_dims(L, y)
    ts, us, vs = _path_args(y)
    mu = y.ts.points[y.lo + 1 : y.hi + 1] - y.ts.points[y.lo : y.hi]
    return float(sum(m * L.eval(t, u, v) for m, t, u, v in zip(mu, ts, us, vs)))


def lagrangian_along(L: Lagrangian, y: GridFunction, which: str) -> GridFunction:
    """Sample a partial of L along (t, y(sigma(t)), y_delta(t)) on [lo, hi-1]."""
    _check_dims(L, y)
    ts, us, vs = _path_args(y)
    fn = {"t": L.partial_t, "u": L.partial_u, "v": L.partial_v, "L": L.eval}[which]
    rows = [np.atleast_1d(fn(t, u, v)) for t, u, v in zip(ts, us, vs)]
    return GridFunction(y.ts, y.lo, np.vstack(rows))


def first_variation(L: Lagrangian, y: GridFunction, eta: GridFunction) -> float:
    """Directional derivative of the action at y along an admissible eta."""
    _check_dims(L, y)
    if eta.n != y.n or eta.lo != y.lo or eta.hi != y.hi:
        raise ValueError("eta must share the path window and component count")
    if np.any(eta.values[0] != 0) or np.any(eta.values[-1] != 0):
        raise ValueError("eta must vanish at both endpoints")
    pu = lagrangian_along(L, y, "u")
    pv = lagrangian_along(L, y, "v")
    integrand = pu * shift(eta, 1) + pv * delta_derivative(eta, 1)
    total = delta_integral(integrand)
    return float(np.sum(total))


def el_expressions(L: Lagrangian, y: GridFunction) -> GridFunction:
    """The n Euler-Lagrange expressions dL/du_k - (dL/dv_k)_delta along y.

    The outer delta derivative costs one more point, so the result lives
    on [lo, hi-2].
    """
    _check_dims(L, y)
    if y.hi - y.lo < 2:
        raise ValueError("need at least 3 points to form Euler-Lagrange expressions")
    pu = lagrangian_along(L, y, "u")
    pv = lagrangian_along(L, y, "v")
    return pu.restrict(pu.lo, pu.hi - 1) - delta_derivative(pv, 1)


def el_residual(L: Lagrangian, y: GridFunction, tolerance: float = 1e-8) -> ResidualReport:
    e = el_expressions(L, y)
    return ResidualReport.from_per_point(e.window, e.values, tolerance)


def second_el_expression(L: Lagrangian, y: GridFunction) -> GridFunction:
    """The time-component expression
    dL/dt - (L - sum_k v_k dL/dv_k - mu dL/dt)_delta along y, on [lo, hi-2]."""
    _check_dims(L, y)
    if y.hi - y.lo < 2:
        raise ValueError("need at least 3 points")
    lt = lagrangian_along(L, y, "t")
    lv = lagrangian_along(L, y, "v")
    lval = lagrangian_along(L, y, "L")
    ydel = delta_derivative(y, 1)
    mu = (y.ts.points[y.lo + 1 : y.hi + 1] - y.ts.points[y.lo : y.hi])[:, None]
    inner_vals = lval.values - np.sum(ydel.values * lv.values, axis=1, keepdims=True) - mu * lt.values
    inner = GridFunction(y.ts, y.lo, inner_vals)
    return lt.restrict(lt.lo, lt.hi - 1) - delta_derivative(inner, 1)


def second_el_residual(L: Lagrangian, y: GridFunction, tolerance: float = 1e-8) -> ResidualReport:
    e = second_el_expression(L, y)
    return ResidualReport.from_per_point(e.window, e.values, tolerance)


def solve_extremal(
    L: Lagrangian,
    ts: TimeScale,
    boundary: BoundaryData,
    y0: GridFunction | None = None,
    tol: float = 1e-8,
    max_iter: int = 50,
) -> GridFunction:
    """Solve the Euler-Lagrange system over the full scale window with the
    endpoint rows pinned to the boundary data.

    Newton iteration with step halving (up to 20 times per step) when the
    residual does not decrease.  Success means el sup-norm <= tol.
    """
    n = L.n
    if boundary.alpha.size != n:
        raise ValueError("boundary dimension does not match the Lagrangian")
    npts = len(ts)
    if npts < 3:
        raise ValueError("scale too small for a boundary value problem")
    if y0 is None:
        lam = np.linspace(0.0, 1.0, npts)[:, None]
        start = (1 - lam) * boundary.alpha[None, :] + lam * boundary.beta[None, :]
    else:
        if y0.lo != 0 or y0.hi != npts - 1 or y0.n != n:
            raise ValueError("y0 must cover the full scale with matching components")
        if not (np.allclose(y0.values[0], boundary.alpha) and np.allclose(y0.values[-1], boundary.beta)):
            raise ValueError("y0 does not satisfy the boundary data")
        start = y0.values.copy()

    def residual(z: np.ndarray) -> np.ndarray:
        vals = start.copy()
        vals[1:-1] = z.reshape(npts - 2, n)
        e = el_expressions(L, GridFunction(ts, 0, vals))
        return e.values.ravel()

    z = start[1:-1].ravel().copy()
    r = residual(z)
    for _ in range(max_iter):
        rnorm = float(np.max(np.abs(r))) if r.size else 0.0
        if rnorm <= tol:
            vals = start.copy()
            vals[1:-1] = z.reshape(npts - 2, n)
            return GridFunction(ts, 0, vals)
        jac = _numeric_jacobian(residual, z, r)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Jacobian: {exc}", rnorm) from exc
        # Damping: halve until the residual norm decreases.
        scale = 1.0
        for _ in range(20):
            trial = z + scale * step
            r_trial = residual(trial)
            if np.max(np.abs(r_trial)) < rnorm:
                break
            scale *= 0.5
        z = z + scale * step
        r = residual(z)
    rnorm = float(np.max(np.abs(r)))
    if rnorm <= tol:
        vals = start.copy()
        vals[1:-1] = z.reshape(npts - 2, n)
        return GridFunction(ts, 0, vals)
    raise ConvergenceError(f"Newton did not converge: residual {rnorm:.3e}", rnorm)


def _numeric_jacobian(fn, z: np.ndarray, f0: np.ndarray) -> np.ndarray:
    jac = np.empty((f0.size, z.size))
    for k in range(z.size):
        h = 1e-7 * max(1.0, abs(z[k]))
        zp = z.copy()
        zp[k] += h
        jac[:, k] = (fn(zp) - f0) / h
    return jac


# Built-in densities selectable by name from the command line.

def _quadratic(n: int, cv: float, cu: float, cuv: float) -> Lagrangian:
    return Lagrangian(
        n=n,
        eval=lambda t, u, v: float(cv * v @ v + cu * u @ u + cuv * u @ v),
        d_t=lambda t, u, v: 0.0,
        d_u=lambda t, u, v: 2 * cu * u + cuv * v,
        d_v=lambda t, u, v: 2 * cv * v + cuv * u,
    )


def catalog(name: str) -> Lagrangian:
    """Named 1-D densities: dirichlet, poisson, pair-difference, or an inline
    quadratic "quad:<n>:<cv>:<cu>:<cuv>" meaning cv*|v|^2 + cu*|u|^2 + cuv*u.v."""
    if name == "dirichlet":
        return _quadratic(1, 0.5, 0.0, 0.0)
    if name == "poisson":
        return Lagrangian(
            n=1,
            eval=lambda t, u, v: float(0.5 * v @ v + u[0]),
            d_t=lambda t, u, v: 0.0,
            d_u=lambda t, u, v: np.ones(1),
            d_v=lambda t, u, v: v.copy(),
        )
    if name == "pair-difference":
        return Lagrangian(
            n=2,
            eval=lambda t, u, v: float((v[0] - v[1]) ** 2),
            d_t=lambda t, u, v: 0.0,
            d_u=lambda t, u, v: np.zeros(2),
            d_v=lambda t, u, v: np.array([2 * (v[0] - v[1]), -2 * (v[0] - v[1])]),
        )
    if name.startswith("quad:"):
        try:
            n_s, cv_s, cu_s, cuv_s = name.split(":")[1:]
            return _quadratic(int(n_s), float(cv_s), float(cu_s), float(cuv_s))
        except ValueError as exc:
            raise ValueError(f"bad inline quadratic spec {name!r}") from exc
    raise ValueError(f"unknown Lagrangian {name!r}")
