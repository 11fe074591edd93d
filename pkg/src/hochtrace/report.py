"""Validation reports: named checks with witnesses, failure is data."""
from __future__ import annotations


class Report:
    """A list of named checks.  Truthiness = all checks passed."""

    def __init__(self, title):
        self.title = title
        self.checks = []  # (name, ok, witness)

    def record(self, name, ok, witness=None):
        self.checks.append((name, bool(ok), witness))
        return ok

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.checks)

    def __bool__(self):
        return self.ok

    @property
    def first_failure(self):
        for name, ok, witness in self.checks:
            if not ok:
                return name, witness
        return None

    def merge(self, other: "Report"):
        for name, ok, witness in other.checks:
            self.checks.append((f"{other.title}: {name}", ok, witness))
        return self

    def summary(self) -> str:
        lines = [f"{self.title}: {'PASS' if self.ok else 'FAIL'}"]
        for name, ok, witness in self.checks:
            mark = "ok" if ok else "FAIL"
            line = f"  [{mark}] {name}"
            if witness is not None and not ok:
                line += f"  witness: {witness}"
            lines.append(line)
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "ok": self.ok,
            "checks": [
                {"name": name, "ok": ok,
                 **({"witness": repr(witness)} if witness is not None and not ok else {})}
                for name, ok, witness in self.checks
            ],
        }

    def __repr__(self):
        return self.summary()
