"""
驗證結果的資料結構
"""

from dataclasses import dataclass, field, replace
from typing import List, Literal, Optional

import numpy as np

CheckKind = Literal["at_most", "at_least"]


@dataclass(frozen=True)
class Check:
    """
    單一項檢查：量測值 error 與門檻 tol

    - at_most: error <= tol 才通過 (一般誤差)
    - at_least: error > tol 才通過 (例如非最佳點的殘差必須夠大)

    scalable=False 的檢查 (收斂階數等) 不受 --tol 覆寫影響。
    """
    name: str
    error: float
    tol: float
    kind: CheckKind = "at_most"
    scalable: bool = True

    @property
    def passed(self) -> bool:
        if self.error != self.error:  # NaN
            return False
        if self.kind == "at_least":
            return self.error > self.tol
        return self.error <= self.tol

    def with_tol(self, tol: Optional[float]) -> "Check":
        if tol is None or not self.scalable or self.kind != "at_most":
            return self
        return replace(self, tol=float(tol))


@dataclass
class SuiteReport:
    suite: str
    checks: List[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]


def relative_error(value, reference) -> float:
    value = np.asarray(value, dtype=float)
    reference = np.asarray(reference, dtype=float)
    scale = max(float(np.max(np.abs(reference))), 1e-300)
    return float(np.max(np.abs(value - reference)) / scale)


def ladder_ratio_check(name: str, errors: List[float], low: float = 1.8, high: float = 2.2) -> Check:
    """連續兩層誤差比需落在 [low, high]；error 為最偏離 2 的比值與 2 的距離"""
    ratios = [a / b for a, b in zip(errors, errors[1:]) if b > 0]
    if len(ratios) != len(errors) - 1:
        return Check(name, float("nan"), (high - low) / 2, scalable=False)
    worst = max(abs(r - 0.5 * (low + high)) for r in ratios)
    return Check(name, worst, 0.5 * (high - low), scalable=False)
