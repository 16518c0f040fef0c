"""One-frame-overlap detection evaluation with per-class P/R/F reporting.

A detection matches an annotation of the same label when their inclusive frame
ranges overlap by at least one frame; matching is one-to-one. The default
"greedy-max" policy seeds the assignment with the greedy preference order
(maximal overlap, ties to the earliest detection) and then completes it to
maximum cardinality with augmenting paths, so TP/FP/FN counts agree with an
exhaustive optimal matcher. "greedy-pure" keeps the raw greedy assignment.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..core.types import DomainError, EventDocument, TransitionEvent, VideoIdError

MATCH_POLICIES = ("greedy-max", "greedy-pure")


def f_score(p: float, r: float) -> float:
    """Harmonic mean 2pr/(p+r); 0 when p + r = 0."""
    if not 0.0 <= p <= 1.0 or not 0.0 <= r <= 1.0:
        raise DomainError(f"precision/recall outside [0, 1]: p={p}, r={r}")
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def overlap_frames(a: TransitionEvent, b: TransitionEvent) -> int:
    return max(0, min(a.end_frame, b.end_frame) - max(a.start_frame, b.start_frame) + 1)


@dataclass
class LabelCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f(self) -> float:
        return f_score(self.precision, self.recall)

    def add(self, other: "LabelCounts") -> None:
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn

    def to_json(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f_score": self.f,
        }


@dataclass
class EvalReport:
    per_label: dict[str, LabelCounts] = field(default_factory=dict)
    overall: LabelCounts = field(default_factory=LabelCounts)
    policy: str = "greedy-max"
    mode: str = "strict"  # or "combined": labels ignored during matching

    def to_json(self) -> dict:
        return {
            "policy": self.policy,
            "mode": self.mode,
            "per_label": {k: v.to_json() for k, v in sorted(self.per_label.items())},
            "overall": self.overall.to_json(),
        }

    def format_table(self) -> str:
        rows = [f"{'label':<14} {'TP':>6} {'FP':>6} {'FN':>6} {'P':>7} {'R':>7} {'F':>7}"]
        for label, c in sorted(self.per_label.items()):
            rows.append(
                f"{label:<14} {c.tp:>6} {c.fp:>6} {c.fn:>6} "
                f"{c.precision:>7.3f} {c.recall:>7.3f} {c.f:>7.3f}"
            )
        c = self.overall
        rows.append(
            f"{'overall':<14} {c.tp:>6} {c.fp:>6} {c.fn:>6} "
            f"{c.precision:>7.3f} {c.recall:>7.3f} {c.f:>7.3f}"
        )
        return "\n".join(rows)


def _greedy_assignment(dets: list[TransitionEvent], anns: list[TransitionEvent]) -> dict[int, int]:
    """Annotation index -> detection index; max overlap, ties to earliest detection."""
    taken: set[int] = set()
    assignment: dict[int, int] = {}
    order = sorted(range(len(anns)), key=lambda ai: (anns[ai].start_frame, anns[ai].end_frame, ai))
    for ai in order:
        best_key, best_di = None, None
        for di, det in enumerate(dets):
            if di in taken:
                continue
            ov = overlap_frames(det, anns[ai])
            if ov < 1:
                continue
            key = (-ov, det.start_frame, di)
            if best_key is None or key < best_key:
                best_key, best_di = key, di
        if best_di is not None:
            taken.add(best_di)
            assignment[ai] = best_di
    return assignment


def _augment_to_maximum(
    dets: list[TransitionEvent], anns: list[TransitionEvent], assignment: dict[int, int]
) -> dict[int, int]:
    """Grow a one-to-one assignment to maximum cardinality (Kuhn augmenting paths)."""
    adjacency = [
        [di for di, det in enumerate(dets) if overlap_frames(det, anns[ai]) >= 1]
        for ai in range(len(anns))
    ]
    det_owner: dict[int, int] = {di: ai for ai, di in assignment.items()}

    def try_assign(ai: int, visited: set[int]) -> bool:
        for di in adjacency[ai]:
            if di in visited:
                continue
            visited.add(di)
            if di not in det_owner or try_assign(det_owner[di], visited):
                det_owner[di] = ai
                return True
        return False

    for ai in range(len(anns)):
        if ai not in assignment:
            try_assign(ai, set())
    return {ai: di for di, ai in det_owner.items()}


def match_events(
    dets: list[TransitionEvent], anns: list[TransitionEvent], policy: str = "greedy-max"
) -> dict[int, int]:
    if policy not in MATCH_POLICIES:
        raise DomainError(f"unknown matching policy {policy!r}; choose from {MATCH_POLICIES}")
    assignment = _greedy_assignment(dets, anns)
    if policy == "greedy-max":
        assignment = _augment_to_maximum(dets, anns, assignment)
    return assignment


def _as_events(obj) -> tuple[str | None, list[TransitionEvent]]:
    if isinstance(obj, EventDocument):
        return obj.video_id, obj.events
    return None, list(obj)


def evaluate(
    detections,
    annotations,
    policy: str = "greedy-max",
    mode: str = "strict",
) -> EvalReport:
    """Per-transition TP/FP/FN for one video; accepts EventDocuments or event lists."""
    det_id, dets = _as_events(detections)
    ann_id, anns = _as_events(annotations)
    if det_id is not None and ann_id is not None and det_id != ann_id:
        raise VideoIdError(f"detections are for {det_id!r} but annotations for {ann_id!r}")
    if mode not in ("strict", "combined"):
        raise DomainError(f"unknown mode {mode!r}")

    report = EvalReport(policy=policy, mode=mode)
    if mode == "combined":
        groups = {"combined": (dets, anns)}
    else:
        labels = sorted({e.label.value for e in dets} | {e.label.value for e in anns})
        groups = {
            label: (
                [e for e in dets if e.label.value == label],
                [e for e in anns if e.label.value == label],
            )
            for label in labels
        }
    for label, (d, a) in groups.items():
        assignment = match_events(d, a, policy=policy)
        counts = LabelCounts(tp=len(assignment), fp=len(d) - len(assignment), fn=len(a) - len(assignment))
        report.per_label[label] = counts
        report.overall.add(counts)
    return report


def evaluate_corpus(
    pairs: list[tuple[EventDocument, EventDocument]],
    policy: str = "greedy-max",
    mode: str = "strict",
    averaging: str = "per_transition",
) -> dict:
    """Aggregate over videos: per_transition sums counts; per_sequence averages P/R/F."""
    if averaging not in ("per_transition", "per_sequence"):
        raise DomainError(f"unknown averaging {averaging!r}")
    reports = [evaluate(d, a, policy=policy, mode=mode) for d, a in pairs]
    if averaging == "per_transition":
        total = EvalReport(policy=policy, mode=mode)
        for rep in reports:
            for label, counts in rep.per_label.items():
                total.per_label.setdefault(label, LabelCounts()).add(counts)
            total.overall.add(rep.overall)
        return {"averaging": averaging, "report": total.to_json(), "videos": len(reports)}
    per_video = [r.overall for r in reports]
    n = max(1, len(per_video))
    return {
        "averaging": averaging,
        "precision": sum(c.precision for c in per_video) / n,
        "recall": sum(c.recall for c in per_video) / n,
        "f_score": sum(c.f for c in per_video) / n,
        "videos": len(reports),
    }
