"""Per-point residual summaries shared by all checkers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ResidualReport:
    """Residual values on an index window plus their norms and a verdict.

    sup_norm is the max absolute entry, l2_norm the plain Euclidean norm
    over all entries.  verdict is sup_norm <= tolerance.  For results on a
    multi-axis grid, domain records the first-axis window; for trial-based
    checks it records the window the trials were evaluated on (or the trial
    range where noted).
    """

    domain: tuple[int, int]
    per_point: np.ndarray
    sup_norm: float
    l2_norm: float
    tolerance: float
    verdict: bool

    @staticmethod
    def from_per_point(domain: tuple[int, int], per_point, tolerance: float) -> "ResidualReport":
        arr = np.atleast_1d(np.asarray(per_point, dtype=float))
        sup = float(np.max(np.abs(arr))) if arr.size else 0.0
        l2 = float(np.sqrt(np.sum(arr * arr)))
        return ResidualReport(
            domain=(int(domain[0]), int(domain[1])),
            per_point=arr,
            sup_norm=sup,
            l2_norm=l2,
            tolerance=float(tolerance),
            verdict=bool(sup <= tolerance),
        )

    def to_json(self, include_per_point: bool = False) -> dict:
        out = {
            "domain": list(self.domain),
            "sup_norm": self.sup_norm,
            "l2_norm": self.l2_norm,
            "tolerance": self.tolerance,
            "verdict": "pass" if self.verdict else "fail",
        }
        if include_per_point:
            out["per_point"] = self.per_point.tolist()
        return out
