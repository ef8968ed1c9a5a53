"""Verification reports and deterministic JSON serialization."""
import json
import math
from dataclasses import dataclass, field

import numpy as np


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    return obj


def dumps(obj) -> str:
    """Stable JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


@dataclass
class VerificationReport:
    name: str
    passed: bool
    max_defect: float
    tolerance: float
    defects: list = field(default_factory=list)
    excluded: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "max_defect": self.max_defect,
            "tolerance": self.tolerance,
            "n_samples": len(self.defects),
            "defects": list(self.defects),
            "excluded": list(self.excluded),
            "details": self.details,
        }

    def summary(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name}: max defect {self.max_defect:.3e} (tol {self.tolerance:.1e})"


def make_report(name, defects, tolerance, excluded=(), details=None, strict=False):
    """Report whose pass flag is ``max(defects) <= tolerance`` (``<`` when strict)."""
    defects = [float(d) for d in defects]
    worst = max(defects) if defects else 0.0
    ok = bool(defects) and (worst < tolerance if strict else worst <= tolerance)
    return VerificationReport(
        name=name,
        passed=ok,
        max_defect=worst,
        tolerance=tolerance,
        defects=defects,
        excluded=list(excluded),
        details=dict(details or {}),
    )
