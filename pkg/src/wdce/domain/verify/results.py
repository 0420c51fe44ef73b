"""Verification outcomes."""
from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["PropertyResult", "SuiteReport"]


@dataclass(frozen=True, slots=True)
class PropertyResult:
    """One checked property: the measured value against its bound."""

    name: str
    value: float
    bound: float
    passed: bool

    @classmethod
    def below(cls, name: str, value: float, bound: float) -> PropertyResult:
        """Passes when ``value < bound``."""
        return cls(name=name, value=float(value), bound=bound, passed=bool(value < bound))


@dataclass(slots=True)
class SuiteReport:
    """All properties of one suite."""

    suite: str
    results: list[PropertyResult] = field(default_factory=list)

    def add(self, result: PropertyResult) -> None:
        """Record a property."""
        self.results.append(result)

    @property
    def passed(self) -> bool:
        """Whether every property held."""
        return all(result.passed for result in self.results)

    @property
    def failed(self) -> list[str]:
        """Names of failed properties, qualified by suite."""
        return [f"{self.suite}.{result.name}" for result in self.results if not result.passed]

    @property
    def max_error(self) -> float:
        """Largest measured value in the suite."""
        return max((result.value for result in self.results), default=0.0)
