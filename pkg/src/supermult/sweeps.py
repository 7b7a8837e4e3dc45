"""p-sweeps of the Werner-Holevo violation gap."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .analysis import violation_report
from .channels import werner_holevo
from .optimize import OptimizerConfig


@dataclass
class SweepResult:
    d: int
    rows: list = field(default_factory=list)
    bracket: Optional[tuple] = None
    p_star: Optional[float] = None
    verdict: str = ""

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "verdict": self.verdict,
            "bracket": None if self.bracket is None else list(self.bracket),
            "p_star": self.p_star,
            "rows": self.rows,
        }


def sweep_wh(p_grid, d=3, config=None, tol=1e-3) -> SweepResult:
    """Gap ``||(N (x) N)(Phi)||_p - nu_p(N)^2`` of the Werner-Holevo channel over ``p_grid``.

    The first grid interval where the gap turns from ``<= 0`` to ``> 0`` is
    refined by bisection to width ``tol``; ``p_star`` is its midpoint.
    """
    p_grid = [float(p) for p in p_grid]
    if not p_grid:
        raise ValueError("empty p grid")
    if any(b <= a for a, b in zip(p_grid, p_grid[1:])):
        raise ValueError("p grid must be strictly ascending")
    if p_grid[0] <= 1:
        raise ValueError("p values must exceed 1")
    config = config or OptimizerConfig()
    ch = werner_holevo(d)

    def gap(p):
        return violation_report(ch, ch, p, "max_entangled", config)

    out = SweepResult(d=d)
    for p in p_grid:
        rep = gap(p)
        out.rows.append(
            {
                "p": p,
                "gap": rep.gap,
                "tensor_lower": rep.tensor_lower,
                "product": rep.product,
                "certified": rep.certified,
            }
        )
    for left, right in zip(out.rows, out.rows[1:]):
        if left["gap"] <= 0 < right["gap"]:
            lo, hi = left["p"], right["p"]
            out.bracket = (lo, hi)
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if gap(mid).gap > 0:
                    hi = mid
                else:
                    lo = mid
            out.p_star = 0.5 * (lo + hi)
            out.verdict = "crossing found"
            return out
    out.verdict = "no crossing in range"
    return out
