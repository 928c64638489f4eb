"""Row type shared by the sweep drivers and the CSV writer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class SpectrumRecord:
    k: float
    rho: Optional[float]
    n_analytic: Optional[float]
    n_numeric: Optional[float] = None
    wronskian_drift: Optional[float] = None
    spread: Optional[float] = None
    status: str = "ok"

    @property
    def rel_diff(self) -> Optional[float]:
        """Relative numeric-vs-analytic difference; defined only when both exist."""
        if self.n_analytic is None or self.n_numeric is None:
            return None
        if self.n_analytic == 0.0:
            return abs(self.n_numeric)
        return abs(self.n_numeric - self.n_analytic) / abs(self.n_analytic)
