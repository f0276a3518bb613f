"""Validation reports: violations are data, not exceptions."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Violation:
    rule: str
    location: str
    magnitude: float

    def __str__(self) -> str:
        return f"{self.rule} at {self.location}: {self.magnitude:.3e}"


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @classmethod
    def from_violations(cls, violations: list[Violation]) -> "ValidationReport":
        return cls(passed=not violations, violations=tuple(violations))

    def merged(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport.from_violations(list(self.violations) + list(other.violations))

    def summary(self) -> str:
        if self.passed:
            return "passed"
        lines = [str(v) for v in self.violations]
        return "failed:\n  " + "\n  ".join(lines)


class Checker:
    """Accumulates rule violations; `close()` freezes them into a report."""

    def __init__(self) -> None:
        self._violations: list[Violation] = []

    def expect(self, ok: bool, rule: str, location: str, magnitude: float) -> None:
        if not ok:
            self._violations.append(Violation(rule, location, float(magnitude)))

    def expect_small(self, magnitude: float, tol: float, rule: str, location: str = "-") -> None:
        self.expect(magnitude <= tol, rule, location, magnitude)

    def close(self) -> ValidationReport:
        return ValidationReport.from_violations(self._violations)
