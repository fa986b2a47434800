"""Check results and the JSON report envelope shared by all verifiers."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    metric: float
    tolerance: float
    details: str = ""
    claim: str = ""

    @classmethod
    def measure(cls, name: str, metric: float, tolerance: float, details: str = "", claim: str = ""):
        """Pass iff ``metric <= tolerance``."""
        metric = float(metric)
        status = PASS if metric <= tolerance else FAIL
        return cls(name, status, metric, float(tolerance), details, claim)

    @classmethod
    def skipped(cls, name: str, details: str = "", claim: str = ""):
        return cls(name, SKIPPED, 0.0, 0.0, details, claim)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def as_dict(self) -> dict:
        d = asdict(self)
        for key in ("metric", "tolerance"):
            if not math.isfinite(d[key]):
                d[key] = str(d[key])
        return d


def summarize(checks) -> dict:
    out = {PASS: 0, FAIL: 0, SKIPPED: 0}
    for c in checks:
        out[c.status] += 1
    return {"passed": out[PASS], "failed": out[FAIL], "skipped": out[SKIPPED]}


def render_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def render_text(checks) -> str:
    checks = list(checks)
    if not checks:
        return ""
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  status   {'metric':>12}  {'tolerance':>10}  details"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {c.status:<7}  {c.metric:>12.4e}  {c.tolerance:>10.2e}  {c.details}")
    s = summarize(checks)
    lines.append(f"{s['passed']} passed, {s['failed']} failed, {s['skipped']} skipped")
    return "\n".join(lines) + "\n"
