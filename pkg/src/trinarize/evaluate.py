"""Scoring trimaps against ground truth, the acrosome-ratio check, (a, c) sweeps."""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .grid import L0, LMID, as_trimap, grid_spec
from .pipeline import segment_lenient
from .solver import default_params

# class 1 = head (grey), class 2 = acrosome (black)
CLASS_LABELS = {"class1": LMID, "class2": L0}

WHO_RANGE = (0.40, 0.70)


@dataclass(frozen=True)
class ClassScore:
    tp: int
    fp: int
    fn: int
    tn: int
    f1: float
    accuracy: float


@dataclass(frozen=True)
class EvalReport:
    class1: ClassScore
    class2: ClassScore
    average_f1: float
    average_accuracy: float

    def to_dict(self) -> dict:
        return {
            "class1": asdict(self.class1),
            "class2": asdict(self.class2),
            "averages": {"f1": self.average_f1, "accuracy": self.average_accuracy},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def f1_from_counts(tp: int, fp: int, fn: int) -> float:
    """``tp / (tp + (fp + fn)/2)``; a class absent from both maps scores 1."""
    denom = tp + 0.5 * (fp + fn)
    if denom == 0:
        return 1.0
    return tp / denom


def class_score(pred_bits, truth_bits) -> ClassScore:
    p = np.asarray(pred_bits, dtype=bool)
    t = np.asarray(truth_bits, dtype=bool)
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    tn = int(p.size - tp - fp - fn)
    return ClassScore(tp=tp, fp=fp, fn=fn, tn=tn, f1=f1_from_counts(tp, fp, fn),
                      accuracy=(tp + tn) / p.size)


def score(pred, truth) -> EvalReport:
    """One-vs-rest scores for the head (LMID) and acrosome (L0) classes."""
    pred = as_trimap(pred)
    truth = as_trimap(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"prediction {pred.shape} and truth {truth.shape} differ in shape")
    scores = {name: class_score(pred == label, truth == label)
              for name, label in CLASS_LABELS.items()}
    c1, c2 = scores["class1"], scores["class2"]
    return EvalReport(class1=c1, class2=c2,
                      average_f1=(c1.f1 + c2.f1) / 2.0,
                      average_accuracy=(c1.accuracy + c2.accuracy) / 2.0)


def who_ratio(t) -> tuple[float, bool]:
    """Acrosome share of the head area and whether it is within 40-70 %."""
    t = as_trimap(t)
    acrosome = int(np.count_nonzero(t == L0))
    head = int(np.count_nonzero(t == LMID))
    if acrosome + head == 0:
        raise ValueError("trimap has no head or acrosome pixels")
    ratio = acrosome / (acrosome + head)
    lo, hi = WHO_RANGE
    return ratio, lo <= ratio <= hi


@dataclass
class SweepGrid:
    a_values: np.ndarray
    c_values: np.ndarray
    f1_matrix: np.ndarray  # NaN where a >= b or c <= b
    fixed_b: float

    def cells(self):
        """Valid ``(a, c, avg_f1)`` triples, a-major."""
        for i, a in enumerate(self.a_values):
            for j, c in enumerate(self.c_values):
                v = self.f1_matrix[i, j]
                if not math.isnan(v):
                    yield float(a), float(c), float(v)

    def best(self) -> tuple[float, float, float]:
        return max(self.cells(), key=lambda cell: cell[2])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("a,c,avg_f1\n")
        for a, c, v in self.cells():
            buf.write(f"{a:.10g},{c:.10g},{v:.10g}\n")
        return buf.getvalue()


def sweep(u0, truth, a_values, c_values, b: float = 0.65, *, disk_radius: int = 20,
          keep_largest: bool = True, **param_overrides) -> SweepGrid:
    """Average F1 of the PDE pipeline for every valid (a, c) pair at fixed b."""
    a_values = np.sort(np.asarray(list(a_values), dtype=np.float64))
    c_values = np.sort(np.asarray(list(c_values), dtype=np.float64))
    if a_values.size == 0 or c_values.size == 0:
        raise ValueError("sweep needs at least one a value and one c value")
    truth = as_trimap(truth)
    g = grid_spec(u0)
    out = np.full((a_values.size, c_values.size), np.nan)
    for i, a in enumerate(a_values):
        for j, c in enumerate(c_values):
            if not (0.0 < a < b < c < 1.0):
                continue
            params = default_params(g, a=float(a), b=b, c=float(c), **param_overrides)
            pred, _ = segment_lenient(u0, "pde", params=params, disk_radius=disk_radius,
                                      keep_largest=keep_largest)
            out[i, j] = score(pred, truth).average_f1
    return SweepGrid(a_values=a_values, c_values=c_values, f1_matrix=out, fixed_b=b)
