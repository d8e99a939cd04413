"""Finite time scales and exact delta calculus on them.

A time scale here is a finite, strictly increasing grid of real points.
The jump operators sigma/rho act on indices (saturating at the ends),
the graininess mu(i) is the gap to the next point, and delta derivatives
are forward difference quotients.  Grid functions carry an explicit index
window so that every domain shrink (one point lost from the top per
derivative order) is visible in the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Relative tolerance used when detecting an affine jump law sigma(t) = b1*t + b0.
AFFINE_JUMP_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class TimeScale:
    """A strictly increasing grid of at least two real points.

    ``condition_h`` is the affine jump law ``(b1, b0)`` with
    ``sigma(t) = b1*t + b0`` at every non-maximal point, or ``None`` when no
    such law fits.  The uniform and geometric constructors set it exactly;
    explicit grids get it fitted from the first two gaps and validated
    against all points.
    """

    points: np.ndarray
    kind: str  # "explicit" | "h-uniform" | "q-geometric" | "real-approx"
    condition_h: tuple[float, float] | None = None
    param: float | None = field(default=None)  # h or q for the tagged families

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("time scale needs at least 2 points")
        if not np.all(np.diff(pts) > 0):
            raise ValueError("time scale points must be strictly increasing")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.condition_h is not None:
            b1, b0 = self.condition_h
            if b1 <= 0:
                raise ValueError("condition (H) slope b1 must be positive")
            if not _affine_jump_holds(pts, b1, b0):
                raise ValueError("points do not satisfy the declared jump law")

    def __len__(self) -> int:
        return self.points.size

    @property
    def n_points(self) -> int:
        return self.points.size

    def t(self, i: int) -> float:
        return float(self.points[i])

    def sigma(self, i: int) -> int:
        """Index of the next point; the maximum maps to itself."""
        self._check_index(i)
        return min(i + 1, self.points.size - 1)

    def rho(self, i: int) -> int:
        """Index of the previous point; the minimum maps to itself."""
        self._check_index(i)
        return max(i - 1, 0)

    def mu(self, i: int) -> float:
        """Graininess sigma(t) - t; zero only at the maximal point."""
        self._check_index(i)
        return float(self.points[self.sigma(i)] - self.points[i])

    def mu_array(self) -> np.ndarray:
        """Gaps points[i+1] - points[i] for i = 0 .. n-2."""
        return np.diff(self.points)

    def same_as(self, other: "TimeScale") -> bool:
        return self is other or (
            self.points.size == other.points.size
            and bool(np.array_equal(self.points, other.points))
        )

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.points.size:
            raise ValueError(f"index {i} out of range [0, {self.points.size - 1}]")


def _affine_jump_holds(pts: np.ndarray, b1: float, b0: float) -> bool:
    predicted = b1 * pts[:-1] + b0
    tol = AFFINE_JUMP_RTOL * np.maximum(1.0, np.abs(pts[:-1]))
    return bool(np.all(np.abs(pts[1:] - predicted) <= tol))


def _fit_affine_jump(pts: np.ndarray) -> tuple[float, float] | None:
    """Fit sigma(t) = b1*t + b0 from the first two gaps, validate everywhere."""
    if pts.size < 2:
        return None
    if pts.size == 2:
        return (1.0, float(pts[1] - pts[0]))
    denom = pts[1] - pts[0]
    if denom <= 0:
        return None
    b1 = float((pts[2] - pts[1]) / denom)
    b0 = float(pts[1] - b1 * pts[0])
    if b1 > 0 and _affine_jump_holds(pts, b1, b0):
        return (b1, b0)
    return None


def h_uniform(h: float, a: float, b: float) -> TimeScale:
    """Uniform grid a, a+h, ..., b.  Requires b - a to be a multiple of h."""
    return _uniform(h, a, b, kind="h-uniform")


def real_approx(h: float, a: float, b: float) -> TimeScale:
    """Uniform grid used as a stand-in for a dense interval."""
    return _uniform(h, a, b, kind="real-approx")


def _uniform(h: float, a: float, b: float, kind: str) -> TimeScale:
    if h <= 0:
        raise ValueError("step h must be positive")
    if b <= a:
        raise ValueError("need b > a")
    steps = (b - a) / h
    n = round(steps)
    if n < 1 or abs(steps - n) > 1e-9 * max(1.0, abs(steps)):
        raise ValueError("b - a must be a positive multiple of h")
    pts = a + h * np.arange(n + 1)
    return TimeScale(pts, kind=kind, condition_h=(1.0, h), param=h)


def q_geometric(q: float, a: float, count: int) -> TimeScale:
    """Geometric grid a, a*q, ..., a*q**(count-1) with q > 1, a > 0."""
    if q <= 1:
        raise ValueError("ratio q must exceed 1")
    if a <= 0:
        raise ValueError("start a must be positive")
    if count < 2:
        raise ValueError("need at least 2 points")
    # Cumulative products keep sigma(t) == q*t exact in floating point.
    pts = np.empty(count)
    pts[0] = a
    for i in range(1, count):
        pts[i] = pts[i - 1] * q
    return TimeScale(pts, kind="q-geometric", condition_h=(float(q), 0.0), param=q)


def explicit_scale(points) -> TimeScale:
    """Explicit point list; the affine jump law is detected, not asserted."""
    pts = np.asarray(points, dtype=float)
    return TimeScale(pts, kind="explicit", condition_h=_fit_affine_jump(pts))


def parse_scale_spec(spec: str) -> TimeScale:
    """Parse "h:<h>:<a>:<b>", "q:<q>:<a>:<count>", "real:<h>:<a>:<b>",
    or "explicit:@<path>" (one point per line)."""
    parts = spec.split(":")
    try:
        head = parts[0]
        if head == "h" and len(parts) == 4:
            return h_uniform(float(parts[1]), float(parts[2]), float(parts[3]))
        if head == "real" and len(parts) == 4:
            return real_approx(float(parts[1]), float(parts[2]), float(parts[3]))
        if head == "q" and len(parts) == 4:
            return q_geometric(float(parts[1]), float(parts[2]), int(parts[3]))
        if head == "explicit" and len(parts) == 2 and parts[1].startswith("@"):
            with open(parts[1][1:]) as fh:
                pts = [float(line) for line in fh if line.strip()]
            return explicit_scale(pts)
    except (ValueError, OSError) as exc:
        raise ValueError(f"bad scale spec {spec!r}: {exc}") from exc
    raise ValueError(f"bad scale spec {spec!r}")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Vector-valued samples on the index window [lo, hi] of a time scale.

    values has shape (hi - lo + 1, n).  All arithmetic restricts to the
    window intersection of the operands.
    """

    ts: TimeScale
    lo: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] == 0:
            raise ValueError("values must be a nonempty (npoints, n) array")
        if self.lo < 0 or self.lo + vals.shape[0] - 1 >= len(self.ts):
            raise ValueError("window [lo, hi] does not fit inside the scale")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def hi(self) -> int:
        return self.lo + self.values.shape[0] - 1

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    def times(self) -> np.ndarray:
        return self.ts.points[self.lo : self.hi + 1]

    def at(self, i: int) -> np.ndarray:
        """Sample at global scale index i."""
        if not self.lo <= i <= self.hi:
            raise ValueError(f"index {i} outside window [{self.lo}, {self.hi}]")
        return self.values[i - self.lo]

    def component(self, k: int) -> "GridFunction":
        return GridFunction(self.ts, self.lo, self.values[:, k : k + 1])

    def restrict(self, lo: int, hi: int) -> "GridFunction":
        if lo < self.lo or hi > self.hi or lo > hi:
            raise ValueError(f"[{lo}, {hi}] is not a subwindow of [{self.lo}, {self.hi}]")
        return GridFunction(self.ts, lo, self.values[lo - self.lo : hi - self.lo + 1])

    @staticmethod
    def from_callable(ts: TimeScale, fn, lo: int = 0, hi: int | None = None) -> "GridFunction":
        hi = len(ts) - 1 if hi is None else hi
        rows = [np.atleast_1d(np.asarray(fn(ts.t(i)), dtype=float)) for i in range(lo, hi + 1)]
        return GridFunction(ts, lo, np.vstack(rows))

    @staticmethod
    def stack(parts: list["GridFunction"]) -> "GridFunction":
        lo, hi = common_window(*parts)
        cols = [p.values[lo - p.lo : hi - p.lo + 1] for p in parts]
        return GridFunction(parts[0].ts, lo, np.hstack(cols))

    def _binary(self, other, op) -> "GridFunction":
        if isinstance(other, GridFunction):
            if not self.ts.same_as(other.ts):
                raise ValueError("grid functions live on different scales")
            lo, hi = common_window(self, other)
            a = self.values[lo - self.lo : hi - self.lo + 1]
            b = other.values[lo - other.lo : hi - other.lo + 1]
            if a.shape[1] != b.shape[1] and 1 not in (a.shape[1], b.shape[1]):
                raise ValueError("component counts differ")
            return GridFunction(self.ts, lo, op(a, b))
        return GridFunction(self.ts, self.lo, op(self.values, float(other)))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __radd__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    def __rmul__(self, other):
        return self._binary(other, np.multiply)

    def __neg__(self):
        return GridFunction(self.ts, self.lo, -self.values)


def common_window(*fns: GridFunction) -> tuple[int, int]:
    lo = max(f.lo for f in fns)
    hi = min(f.hi for f in fns)
    if lo > hi:
        raise ValueError("windows do not overlap")
    return lo, hi


def delta_derivative(f: GridFunction, order: int = 1) -> GridFunction:
    """Iterated forward difference quotient (f(sigma(t)) - f(t)) / mu(t).

    Each order consumes one point from the top of the window.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    out = f
    for _ in range(order):
        if out.hi - out.lo < 1:
            raise ValueError("window too small for another delta derivative")
        mu = out.ts.points[out.lo + 1 : out.hi + 1] - out.ts.points[out.lo : out.hi]
        vals = (out.values[1:] - out.values[:-1]) / mu[:, None]
        out = GridFunction(out.ts, out.lo, vals)
    return out


def shift(f: GridFunction, k: int) -> GridFunction:
    """Composition with sigma^k; negative k composes with rho^|k|.

    Positive k is a pure index translation, so the window moves down and
    may gain the scale maximum only through values that already exist.
    Negative k uses the saturating rho, so at the scale minimum the value
    repeats (sigma(rho(t)) = t holds off the minimum only).
    """
    if k == 0:
        return f
    n_pts = len(f.ts)
    if k > 0:
        idx = [i + k for i in range(max(f.lo - k, 0), min(f.hi - k, n_pts - 1) + 1)]
        new_lo = max(f.lo - k, 0)
    else:
        steps = -k
        lo = f.lo if f.lo == 0 else f.lo + steps
        hi = min(f.hi + steps, n_pts - 1)
        idx = []
        for i in range(lo, hi + 1):
            j = i
            for _ in range(steps):
                j = max(j - 1, 0)
            idx.append(j)
        new_lo = lo
    if not idx:
        raise ValueError("shift exhausts the window")
    for j in idx:
        if not f.lo <= j <= f.hi:
            raise ValueError("shift exhausts the window")
    return GridFunction(f.ts, new_lo, f.values[[j - f.lo for j in idx]])


def mixed(f: GridFunction, s: int, d: int) -> GridFunction:
    """Shift by sigma^s first, then apply d delta derivatives."""
    if d < 0:
        raise ValueError("derivative order must be >= 0")
    out = shift(f, s)
    if d:
        out = delta_derivative(out, d)
    return out


def delta_integral(f: GridFunction, a_idx: int | None = None, b_idx: int | None = None) -> np.ndarray:
    """Delta integral from points[a_idx] to points[b_idx]: sum of mu(i) * f(i)
    over a_idx <= i < b_idx.  The upper limit itself is never sampled, so it
    may sit one index past the window (the default integrates the whole
    window)."""
    top = min(f.hi + 1, len(f.ts) - 1)
    a_idx = f.lo if a_idx is None else a_idx
    b_idx = top if b_idx is None else b_idx
    if not (f.lo <= a_idx <= b_idx <= top):
        raise ValueError("integration limits outside the window")
    if a_idx == b_idx:
        return np.zeros(f.n)
    mu = f.ts.points[a_idx + 1 : b_idx + 1] - f.ts.points[a_idx : b_idx]
    chunk = f.values[a_idx - f.lo : b_idx - f.lo]
    return mu @ chunk


def write_csv(f: GridFunction, path) -> None:
    """Serialize as CSV with header t,y1..yn, one row per window index."""
    header = "t," + ",".join(f"y{k + 1}" for k in range(f.n))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for t, row in zip(f.times(), f.values):
            fh.write(",".join(repr(float(v)) for v in (t, *row)) + "\n")


def read_csv(ts: TimeScale, path) -> GridFunction:
    """Read a GridFunction written by write_csv; rows must match scale points."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("t,"):
            raise ValueError("missing t,y1..yn header")
        rows = [[float(x) for x in line.split(",")] for line in fh if line.strip()]
    if not rows:
        raise ValueError("empty grid function file")
    data = np.asarray(rows)
    t0 = data[0, 0]
    lo = int(np.searchsorted(ts.points, t0))
    hi = lo + data.shape[0] - 1
    if hi >= len(ts) or not np.allclose(ts.points[lo : hi + 1], data[:, 0], rtol=0, atol=1e-12):
        raise ValueError("CSV times do not match the scale points")
    return GridFunction(ts, lo, data[:, 1:])
