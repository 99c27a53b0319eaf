"""Pass/fail records shared by certificates and audits."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Check:
    """One inequality ``lhs <= rhs`` (or a boolean fact) with its verdict."""

    name: str
    passed: bool
    lhs: float | None = None
    rhs: float | None = None
    witness: float | None = None
    detail: str = ""


@dataclass
class AuditReport:
    title: str
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __bool__(self):
        return self.passed

    def add(self, name, passed, lhs=None, rhs=None, witness=None, detail=""):
        self.checks.append(Check(name, bool(passed), lhs, rhs, witness, detail))
        return self.checks[-1]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def table(self):
        def fmt(x):
            return "" if x is None else f"{x:.6g}"

        rows = [("check", "status", "lhs", "rhs", "witness", "detail")]
        for c in self.checks:
            rows.append((c.name, "PASS" if c.passed else "FAIL", fmt(c.lhs), fmt(c.rhs),
                         fmt(c.witness), c.detail))
        widths = [max(len(r[i]) for r in rows) for i in range(6)]
        lines = [self.title]
        for r in rows:
            lines.append("  ".join(s.ljust(wd) for s, wd in zip(r, widths)).rstrip())
        return "\n".join(lines)
