"""Verification reports: one record per check, emitted as text or JSON lines.

Reports are deterministic for a fixed (input, bound, seed): check records are
sorted by name before emission and timing is excluded from the output unless
explicitly requested, keeping default output byte-identical across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional


@dataclass
class CheckRecord:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    construction: str
    bound: int
    seed: Optional[int] = None
    checks: list[CheckRecord] = field(default_factory=list)
    timing_s: Optional[float] = None

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(CheckRecord(name, passed, detail))

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def sorted_checks(self) -> list[CheckRecord]:
        return sorted(self.checks, key=lambda c: c.name)

    def to_text(self, with_timing: bool = False) -> str:
        lines = [f"# {self.construction} (bound={self.bound}"
                 + (f", seed={self.seed}" if self.seed is not None else "") + ")"]
        for c in self.sorted_checks():
            status = "PASS" if c.passed else "FAIL"
            line = f"{status}  {c.name}"
            if c.detail:
                line += f"  -- {c.detail}"
            lines.append(line)
        lines.append(f"result: {'PASS' if self.ok else 'FAIL'}")
        if with_timing and self.timing_s is not None:
            lines.append(f"time: {self.timing_s:.2f}s")
        return "\n".join(lines) + "\n"

    def to_machine(self, with_timing: bool = False) -> str:
        header = {
            "record": "header",
            "construction": self.construction,
            "bound": self.bound,
            "seed": self.seed,
            "result": "pass" if self.ok else "fail",
        }
        if with_timing and self.timing_s is not None:
            header["time_s"] = round(self.timing_s, 2)
        lines = [json.dumps(header, sort_keys=True)]
        for c in self.sorted_checks():
            lines.append(json.dumps({
                "record": "check",
                "name": c.name,
                "status": "pass" if c.passed else "fail",
                "detail": c.detail,
            }, sort_keys=True))
        return "\n".join(lines) + "\n"
