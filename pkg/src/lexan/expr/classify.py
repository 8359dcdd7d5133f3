"""Syntactic classification and numeric local-boundedness probing.

The log-order and exponential-number fields are syntactic nesting depths and
hence upper bounds.  Local boundedness of an ``exp`` argument with respect to
a reference set is probed numerically: for every point of the reference set
that lies on a closed face of one of its boxes, the argument is evaluated
along a geometric sequence approaching that point from inside the box.  Such
verdicts are evidence, not proofs.  Points interior to an open box only get a
spot evaluation, since a continuous function is bounded near them.
"""

from __future__ import annotations

import enum
import json
import math
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ..errors import LexanError, ValidationError
from ..rational import as_fraction
from .evaluate import eval_expr
from .nodes import Expr, exp_arguments, exp_depth, log_depth, to_text


class Verdict(enum.Enum):
    BOUNDED = "BoundedEvidence"
    UNBOUNDED = "UnboundedEvidence"
    UNKNOWN = "Unknown"


def merge_verdicts(verdicts: Iterable[Verdict]) -> Verdict:
    """Order-independent merge: any unbounded wins, then any unknown."""
    vs = set(verdicts)
    if Verdict.UNBOUNDED in vs:
        return Verdict.UNBOUNDED
    if Verdict.UNKNOWN in vs:
        return Verdict.UNKNOWN
    return Verdict.BOUNDED


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValidationError(f"empty interval ({self.lo}, {self.hi})")
        if self.lo_closed and math.isinf(self.lo) or self.hi_closed and math.isinf(self.hi):
            raise ValidationError("an infinite endpoint cannot be closed")

    def interior_sample(self, rng: random.Random) -> float:
        lo, hi = self.lo, self.hi
        if math.isinf(lo) and math.isinf(hi):
            lo, hi = -1.0, 1.0
        elif math.isinf(lo):
            lo = hi - 2.0
        elif math.isinf(hi):
            hi = lo + 2.0
        return lo + (hi - lo) * (0.1 + 0.8 * rng.random())

    def width(self) -> float:
        return self.hi - self.lo

    def to_json(self) -> dict:
        return {"lo": _num_json(self.lo), "hi": _num_json(self.hi),
                "lo_closed": self.lo_closed, "hi_closed": self.hi_closed}


def _num_json(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _num(v) -> float:
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return math.inf
        if s in ("-inf", "-infinity"):
            return -math.inf
        return float(as_fraction(s))
    return float(v)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box: one interval per variable name."""

    intervals: tuple[tuple[str, Interval], ...]

    @classmethod
    def of(cls, **intervals: Interval) -> "Box":
        return cls(tuple(sorted(intervals.items())))

    def as_dict(self) -> dict[str, Interval]:
        return dict(self.intervals)


@dataclass(frozen=True)
class ReferenceDomain:
    """Finite union of boxes with open or closed faces."""

    boxes: tuple[Box, ...]

    def variables(self) -> frozenset[str]:
        return frozenset(name for b in self.boxes for name, _ in b.intervals)

    def to_json(self) -> dict:
        return {"boxes": [{n: iv.to_json() for n, iv in b.intervals} for b in self.boxes]}

    @classmethod
    def from_json(cls, data) -> "ReferenceDomain":
        if isinstance(data, dict) and "boxes" in data:
            data = data["boxes"]
        if isinstance(data, dict):
            data = [data]
        boxes = []
        for raw in data:
            ivs = {}
            for name, spec in raw.items():
                ivs[name] = Interval(_num(spec["lo"]), _num(spec["hi"]),
                                     bool(spec.get("lo_closed", False)), bool(spec.get("hi_closed", False)))
            boxes.append(Box.of(**ivs))
        if not boxes:
            raise ValidationError("reference domain needs at least one box")
        return cls(tuple(boxes))

    @classmethod
    def parse(cls, text: str) -> "ReferenceDomain":
        """Parse JSON or the compact form ``"x:[0,1); t1:(0,inf) | x:(1,2]"``."""
        text = text.strip()
        if text.startswith("{") or text.startswith("["):
            return cls.from_json(json.loads(text))
        boxes = []
        for part in text.split("|"):
            ivs = {}
            for item in filter(None, (s.strip() for s in part.split(";"))):
                m = _COMPACT.fullmatch(item)
                if m is None:
                    raise ValidationError(f"cannot parse interval {item!r}; use name:[lo,hi)")
                ivs[m["name"]] = Interval(_num(m["lo"]), _num(m["hi"]), m["l"] == "[", m["r"] == "]")
            boxes.append(Box.of(**ivs))
        return cls(tuple(boxes))


_COMPACT = re.compile(r"(?P<name>[A-Za-z_]\w*)\s*:\s*(?P<l>[\[(])\s*(?P<lo>[^,]+?)\s*,\s*(?P<hi>[^\])]+?)\s*(?P<r>[\])])")


@dataclass
class ClassificationReport:
    log_order_bound: int
    exp_number_bound: int
    exp_subterms: list[tuple[Expr, Verdict]] = field(default_factory=list)

    @property
    def verdict(self) -> Verdict:
        """Restricted-LEA evidence: bounded only if every exp argument is."""
        return merge_verdicts(v for _, v in self.exp_subterms)

    def to_json(self) -> dict:
        return {
            "log_order_bound": self.log_order_bound,
            "exp_number_bound": self.exp_number_bound,
            "exp_subterms": [{"expr": to_text(e), "verdict": v.value} for e, v in self.exp_subterms],
            "restricted_lea": self.verdict.value,
        }


@dataclass(frozen=True)
class ProbeSchedule:
    """Geometric approach distances ``scale * ratio**k`` for ``k = 1..steps``."""

    steps: int = 12
    ratio: float = 0.1
    interior_points: int = 3
    extra_anchors: int = 2
    precision: int = 30

    def distances(self, width: float) -> list[float]:
        scale = min(1.0, width / 2)
        return [scale * self.ratio ** k for k in range(1, self.steps + 1)]


def _grows_without_bound(mags: Sequence[float], window: int = 4) -> bool:
    """Increasing, non-decaying increments over the tail: unbounded evidence.

    Convergent monotone sequences have geometrically shrinking increments;
    ``log``-type growth keeps them constant and poles make them grow.
    """
    if len(mags) < window + 1 or any(math.isinf(m) for m in mags[-window:]):
        return any(math.isinf(m) for m in mags)
    tail = mags[-(window + 1):]
    inc = [b - a for a, b in zip(tail, tail[1:])]
    if not all(d > 0 for d in inc):
        return False
    return inc[-1] >= 0.5 * inc[0] and tail[-1] > 1.0


@dataclass(frozen=True)
class _Probe:
    points: tuple[dict[str, float], ...]  # approach sequence (or a single spot point)
    spot: bool = False


def _face_probes(box: Box, schedule: ProbeSchedule, rng: random.Random) -> list[_Probe]:
    ivs = box.as_dict()
    names = sorted(ivs)
    probes: list[_Probe] = []
    faces = []
    for name in names:
        iv = ivs[name]
        if iv.lo_closed:
            faces.append((name, iv.lo, +1))
        if iv.hi_closed:
            faces.append((name, iv.hi, -1))
    for name, endpoint, direction in faces:
        iv = ivs[name]
        anchors = [{n: (ivs[n].interior_sample(random.Random(0)) if n != name else endpoint) for n in names}]
        corner = {n: endpoint if n == name else (ivs[n].lo if ivs[n].lo_closed else ivs[n].hi if ivs[n].hi_closed else None)
                  for n in names}
        if all(v is not None for v in corner.values()) and len(names) > 1:
            anchors.append(corner)
        for _ in range(schedule.extra_anchors):
            anchors.append({n: (ivs[n].interior_sample(rng) if n != name else endpoint) for n in names})
        for anchor in anchors:
            seq = []
            for delta in schedule.distances(iv.width()):
                pt = {}
                for n in names:
                    if n == name:
                        pt[n] = endpoint + direction * delta
                    elif anchor[n] == ivs[n].lo and ivs[n].lo_closed:
                        pt[n] = anchor[n] + delta * min(1.0, ivs[n].width() / 2)
                    elif anchor[n] == ivs[n].hi and ivs[n].hi_closed:
                        pt[n] = anchor[n] - delta * min(1.0, ivs[n].width() / 2)
                    else:
                        pt[n] = anchor[n]
                seq.append(pt)
            probes.append(_Probe(tuple(seq)))
    for _ in range(schedule.interior_points):
        probes.append(_Probe(({n: ivs[n].interior_sample(rng) for n in names},), spot=True))
    return probes


def _run_probe(h: Expr, probe: _Probe, precision: int) -> Verdict:
    mags = []
    for pt in probe.points:
        try:
            value = eval_expr(h, pt, precision)
        except LexanError:
            return Verdict.UNKNOWN
        mags.append(float(abs(value)) if abs(value) < 1e300 else math.inf)
    if probe.spot:
        return Verdict.BOUNDED if all(math.isfinite(m) for m in mags) else Verdict.UNKNOWN
    return Verdict.UNBOUNDED if _grows_without_bound(mags) else Verdict.BOUNDED


def probe_boundedness(
    h: Expr,
    reference: ReferenceDomain,
    probe_budget: int = 2000,
    schedule: ProbeSchedule = ProbeSchedule(),
    seed: int = 0,
    jobs: int = 1,
) -> Verdict:
    """Local-boundedness evidence for ``h`` on ``reference``.

    ``probe_budget`` caps the number of function evaluations; probes that do
    not fit are skipped and turn a would-be bounded verdict into ``Unknown``.
    """
    if probe_budget < 1:
        raise ValidationError("probe_budget must be >= 1")
    missing = h.free_vars() - reference.variables()
    if missing:
        raise ValidationError(f"reference domain does not constrain {sorted(missing)}")
    probes: list[_Probe] = []
    for box in reference.boxes:
        # seeded by box content so adding boxes never moves existing probes
        probes.extend(_face_probes(box, schedule, random.Random(f"{seed}:{box!r}")))
    used, scheduled, skipped = 0, [], False
    for probe in probes:
        if used + len(probe.points) > probe_budget:
            skipped = True
            continue
        used += len(probe.points)
        scheduled.append(probe)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda p: _run_probe(h, p, schedule.precision), scheduled))
    else:
        results = [_run_probe(h, p, schedule.precision) for p in scheduled]
    if skipped:
        results.append(Verdict.UNKNOWN)
    return merge_verdicts(results)


def classify(
    e: Expr,
    reference: Optional[ReferenceDomain] = None,
    probe_budget: int = 2000,
    seed: int = 0,
    jobs: int = 1,
    schedule: ProbeSchedule = ProbeSchedule(),
) -> ClassificationReport:
    """Nesting bounds plus a boundedness verdict for every ``exp`` argument.

    Without a reference domain the exp arguments are reported ``Unknown``.
    """
    report = ClassificationReport(log_order_bound=log_depth(e), exp_number_bound=exp_depth(e))
    for h in exp_arguments(e):
        if reference is None:
            verdict = Verdict.UNKNOWN
        else:
            verdict = probe_boundedness(h, reference, probe_budget, schedule, seed, jobs)
        report.exp_subterms.append((h, verdict))
    return report
