"""Electromagnetic density on a 4-d lattice of time scales.

Axis 0 is time, axes 1..3 are space.  With pg(A, j) denoting the axis-j
quotient of A evaluated with sigma applied on every other axis, the field
strength entries are the antisymmetric differences pg(A_k, j) - pg(A_j, k),
and the density is

    1/2 |grad A_0 - dA/dt|^2 - 1/2 |curl A|^2.

Adding the axis-k quotient of the rho_k-shifted scalar p to each A_k leaves
every field-strength entry unchanged, so the action is gauge invariant and
the divergence of the four Euler-Lagrange expressions vanishes identically.
When the four shifted continuity (Lorentz) conditions hold, each
Euler-Lagrange expression collapses to a wave operator applied to A_k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .report import ResidualReport
from .multigrid import (
    FieldD,
    GaugeFamilyD,
    GridD,
    LagrangianD,
    el_expressions_d,
    functional_d,
    partial_delta,
    shift_all_except,
    shift_axis,
)


@dataclass(frozen=True)
class EMField:
    """Four potential components on one 4-d grid."""

    grid: GridD
    A: tuple

    def __post_init__(self):
        if self.grid.d != 4 or len(self.A) != 4:
            raise ValueError("need a 4-d grid and 4 components")
        for a in self.A:
            if not a.grid.same_as(self.grid):
                raise ValueError("components must share the grid")
        object.__setattr__(self, "A", tuple(self.A))


# Field strength index pairs appearing in the density: electric (i, 0) and
# the three cyclic magnetic pairs.
_ELECTRIC = ((1, 0), (2, 0), (3, 0))
_MAGNETIC = ((2, 3), (3, 1), (1, 2))


def em_lagrangian() -> LagrangianD:
    def density(coords, U, G):
        out = 0.0
        for j, k in _ELECTRIC:
            out = out + 0.5 * (G[j, k] - G[k, j]) ** 2
        for j, k in _MAGNETIC:
            out = out - 0.5 * (G[j, k] - G[k, j]) ** 2
        return out

    def d_u(coords, U, G):
        return np.zeros_like(U)

    def d_g(coords, U, G):
        out = np.zeros_like(G)
        for j, k in _ELECTRIC:
            F = G[j, k] - G[k, j]
            out[j, k] += F
            out[k, j] -= F
        for j, k in _MAGNETIC:
            F = G[j, k] - G[k, j]
            out[j, k] -= F
            out[k, j] += F
        return out

    return LagrangianD(d=4, n=4, density=density, d_u=d_u, d_g=d_g)


def _pg(A: FieldD, axis: int) -> FieldD:
    """Axis quotient with sigma on every other axis (the density's pattern)."""
    return shift_all_except(partial_delta(A, axis), axis)


def em_density(F: EMField) -> FieldD:
    """The density as a field on the base-cell window."""
    total = None
    for j, k in _ELECTRIC:
        w = _pg(F.A[k], j) - _pg(F.A[j], k)
        term = 0.5 * (w * w)
        total = term if total is None else total + term
    for j, k in _MAGNETIC:
        w = _pg(F.A[k], j) - _pg(F.A[j], k)
        total = total - 0.5 * (w * w)
    return total


def em_functional(F: EMField) -> float:
    return functional_d(em_lagrangian(), F.A)


def em_gauge(F: EMField, p: FieldD) -> EMField:
    """A_k picks up the axis-k quotient of p at the rho_k-shifted point."""
    newA = tuple(
        A_k + shift_axis(partial_delta(p, k), k, -1) for k, A_k in enumerate(F.A)
    )
    return EMField(F.grid, newA)


def em_gauge_family(grid: GridD) -> GaugeFamilyD:
    """The same transformation in gauge-family form: a0 = 0 and the axis-k
    coefficient of component k equal to one."""
    table = []
    for k in range(4):
        row = [0.0] * 5
        row[1 + k] = 1.0
        table.append(tuple(row))
    return GaugeFamilyD.constant(grid, table)


def em_el_expressions(F: EMField) -> tuple:
    return el_expressions_d(em_lagrangian(), F.A)


def em_noether_residual(F: EMField, tolerance: float = 1e-9) -> ResidualReport:
    """Residual of sum_k d/dx_k E_k on the interior window."""
    field = em_noether_field(F)
    return ResidualReport.from_per_point((field.lo[0], field.hi[0]), field.values, tolerance)


def em_noether_field(F: EMField) -> FieldD:
    es = em_el_expressions(F)
    total = None
    for k, e in enumerate(es):
        term = partial_delta(e, k)
        total = term if total is None else total + term
    return total


def _div_spatial(F: EMField) -> FieldD:
    out = None
    for i in (1, 2, 3):
        term = partial_delta(F.A[i], i)
        out = term if out is None else out + term
    return out


def em_lorentz_check(F: EMField, tolerance: float = 1e-10) -> ResidualReport:
    """Residual of div A = dA_0/dt at the four shifted argument patterns
    (sigma on every axis except one in turn)."""
    div = _div_spatial(F)
    dA0 = partial_delta(F.A[0], 0)
    per = []
    domain = None
    for k in range(4):
        resid = shift_all_except(div, k) - shift_all_except(dA0, k)
        per.append(resid.values.ravel())
        domain = (resid.lo[0], resid.hi[0])
    return ResidualReport.from_per_point(domain, np.concatenate(per), tolerance)


def em_wave_form(F: EMField) -> tuple:
    """The wave operator each Euler-Lagrange expression equals under the
    Lorentz conditions: the second time quotient at (t0, sigma...) minus the
    spatial operator sum_i d^2/dx_i^2 at (sigma on all axes but i).

    For this density the time component carries the operator with a plus
    sign and the spatial components with a minus sign; expanding E_k and
    substituting the continuity conditions forces the split (the quadratic
    cross terms cancel with opposite orientations for k = 0 and k > 0).
    """
    out = []
    for k, A_k in enumerate(F.A):
        wave = shift_all_except(partial_delta(partial_delta(A_k, 0), 0), 0)
        for i in (1, 2, 3):
            wave = wave - shift_all_except(partial_delta(partial_delta(A_k, i), i), i)
        out.append(wave if k == 0 else -wave)
    return tuple(out)


def em_wave_reduction_residual(F: EMField, tolerance: float = 1e-9) -> ResidualReport:
    """Gap between the Euler-Lagrange expressions and the wave form; small
    only when the Lorentz conditions hold."""
    es = em_el_expressions(F)
    waves = em_wave_form(F)
    per = []
    domain = None
    for e, w in zip(es, waves):
        gap = e - w
        per.append(gap.values.ravel())
        domain = (gap.lo[0], gap.hi[0])
    return ResidualReport.from_per_point(domain, np.concatenate(per), tolerance)


def default_lattice(points_per_axis: int = 6) -> GridD:
    from .timescale import h_uniform

    return GridD(tuple(h_uniform(1.0, 0.0, points_per_axis - 1.0) for _ in range(4)))


def random_em_field(grid: GridD, seed, degree: int = 2, amplitude: float = 1.0) -> EMField:
    from .multigrid import random_polynomial_field

    comps = tuple(
        random_polynomial_field(grid, seed=[seed, k], degree=degree, amplitude=amplitude)
        for k in range(4)
    )
    return EMField(grid, comps)


def lorentz_field(grid: GridD) -> EMField:
    """A field satisfying the continuity conditions exactly: A_0 = t0*t1,
    A_1 the axis-1 delta antiderivative of t1, A_2 = A_3 = 0, so that
    div A and dA_0/dt both equal t1 as fields."""
    t0 = grid.scales[0].points
    t1 = grid.scales[1].points
    shape = grid.shape
    zeros = np.zeros(shape)
    A0 = (t0[:, None] * t1[None, :])[:, :, None, None] * np.ones((1, 1, shape[2], shape[3]))
    anti = np.concatenate(([0.0], np.cumsum(grid.mu(1) * t1[:-1])))
    A1 = anti[None, :, None, None] * np.ones((shape[0], 1, shape[2], shape[3]))
    lo = (0, 0, 0, 0)
    return EMField(
        grid,
        (
            FieldD(grid, lo, A0),
            FieldD(grid, lo, A1),
            FieldD(grid, lo, zeros),
            FieldD(grid, lo, zeros),
        ),
    )
