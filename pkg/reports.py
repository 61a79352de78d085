"""Отчёт об оценке: измеренная левая часть, правая часть, допуск и флаг выполнения."""

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class EstimateReport:
    """
    pass ⇔ lhs ≤ rhs·(1 + tolerance).
    details: информационные измерения, на флаг выполнения не влияют.
    """

    name: str
    lhs: float
    rhs: float
    tolerance: float
    provenance: str
    details: dict[str, float] = field(default_factory=dict)
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        ok = (
            math.isfinite(self.lhs)
            and math.isfinite(self.rhs)
            and self.lhs <= self.rhs * (1.0 + self.tolerance)
        )
        object.__setattr__(self, "passed", bool(ok))

    @property
    def ratio(self) -> float:
        """lhs/rhs (0 при нулевых обеих частях)."""
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs


def all_passed(reports: list[EstimateReport]) -> bool:
    return all(r.passed for r in reports)
