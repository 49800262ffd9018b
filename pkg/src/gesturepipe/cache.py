"""Similarity cache over interpreted windows.

Windows embed to a deterministic 66-dimensional indicator vector (averaged
over the window's keyframes, then L2-normalized), so equal discrete
signatures always collide at cosine 1.0 and the whole cache is reproducible
offline. Lookup is a brute-force cosine scan; at desk-scale cardinality that
is also the correctness oracle an accelerated index would have to match.

Persistence is a single NDJSON append log, loaded fully at startup:
    {"vector": [...], "context": text, "name": ..., "meaning": ..., "task": ...,
     "created_at_us": int, "hit_count": int}
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path

from .errors import DegenerateVector
from .features import CompassBucket, FingerId
from .gateway import BackendKind, GestureInterpretation
from .keyframes import MagnitudeClass
from .rendering import ContextDocument

# Per-keyframe layout: 5 extension bits, 5x8 direction one-hots, 10 pairwise
# same-group bits, 8 trajectory-direction one-hots, 3 magnitude one-hots
# (Still leaves direction and magnitude blocks all zero).
VECTOR_DIM = 66
_EXT_BASE = 0
_DIR_BASE = 5
_PAIR_BASE = 45
_TRAJ_DIR_BASE = 55
_MAG_BASE = 63

FINGER_PAIRS = tuple(combinations(FingerId, 2))  # canonical order, 10 pairs
_MAG_SLOT = {MagnitudeClass.Small: 0, MagnitudeClass.Medium: 1, MagnitudeClass.Large: 2}

DEFAULT_SIMILARITY_THRESHOLD = 0.98


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]

    @classmethod
    def from_indicators(cls, raw: list[float]) -> "FeatureVector":
        norm = math.sqrt(sum(v * v for v in raw))
        if norm < 1e-12:
            raise DegenerateVector("all indicators zero")
        return cls(values=tuple(v / norm for v in raw))


def cosine(a: FeatureVector, b: FeatureVector) -> float:
    """Dot product of unit vectors, clamped into [-1, 1].

    Equal vectors short-circuit to exactly 1.0 so that identical windows
    survive a threshold of 1.0 despite float rounding in the dot product.
    """
    if a.values == b.values:
        return 1.0
    dot = sum(x * y for x, y in zip(a.values, b.values))
    return max(-1.0, min(1.0, dot))


def _keyframe_indicators(kf) -> list[float]:
    vec = [0.0] * VECTOR_DIM
    fs = kf.features
    for state in fs.states:
        i = int(state.finger)
        if state.extended:
            vec[_EXT_BASE + i] = 1.0
            vec[_DIR_BASE + i * 8 + state.direction.bucket.value] = 1.0
    same_group = {}
    for group in fs.groups:
        for a in group:
            for b in group:
                if a < b:
                    same_group[(a, b)] = True
    for slot, pair in enumerate(FINGER_PAIRS):
        if same_group.get(pair):
            vec[_PAIR_BASE + slot] = 1.0
    seg = kf.incoming
    if seg is not None and seg.magnitude is not MagnitudeClass.Still:
        vec[_TRAJ_DIR_BASE + seg.direction.bucket.value] = 1.0
        vec[_MAG_BASE + _MAG_SLOT[seg.magnitude]] = 1.0
    return vec


def embed(ctx: ContextDocument) -> FeatureVector:
    """Indicator embedding of a window: mean over keyframes, L2-normalized.

    Raises DegenerateVector when nothing is set (a motionless fist window
    has no indicators at all); such windows simply bypass the cache.
    """
    acc = [0.0] * VECTOR_DIM
    for kf in ctx.window:
        for i, v in enumerate(_keyframe_indicators(kf)):
            acc[i] += v
    n = len(ctx.window)
    return FeatureVector.from_indicators([v / n for v in acc])


@dataclass(frozen=True)
class CacheEntry:
    vector: FeatureVector
    context_text: str
    interpretation: GestureInterpretation
    created_at_us: int
    hit_count: int = 0


class RecognitionCache:
    """Append-mostly vector store with cosine lookup.

    Single writer, many readers. `max_size` enables eviction of the
    least-hit (oldest first) entry; default unbounded. In-memory hit counts
    are not flushed back to the log; the log is an insert journal.
    """

    def __init__(self, path: str | Path | None = None,
                 threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
                 max_size: int | None = None):
        if not 0.0 < threshold <= 1.0:
            raise ValueError("threshold must be in (0, 1]")
        self.path = Path(path) if path else None
        self.threshold = threshold
        self.max_size = max_size
        self._entries: list[CacheEntry] = []
        self._last_created_us = 0
        if self.path is not None and self.path.exists():
            self._load()

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> tuple[CacheEntry, ...]:
        return tuple(self._entries)

    def _load(self) -> None:
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            entry = CacheEntry(
                vector=FeatureVector(values=tuple(float(v) for v in rec["vector"])),
                context_text=rec["context"],
                interpretation=GestureInterpretation(
                    name=rec["name"], meaning=rec["meaning"], task_text=rec["task"],
                    backend=BackendKind.Cache),
                created_at_us=int(rec["created_at_us"]),
                hit_count=int(rec.get("hit_count", 0)),
            )
            self._entries.append(entry)
            self._last_created_us = max(self._last_created_us, entry.created_at_us)

    def _next_created_us(self) -> int:
        now = time.time_ns() // 1000
        self._last_created_us = max(now, self._last_created_us + 1)
        return self._last_created_us

    def make_entry(self, vector: FeatureVector, ctx: ContextDocument,
                   interpretation: GestureInterpretation) -> CacheEntry:
        return CacheEntry(vector=vector, context_text=ctx.text,
                          interpretation=interpretation,
                          created_at_us=self._next_created_us())

    def insert(self, entry: CacheEntry) -> None:
        norm = math.sqrt(sum(v * v for v in entry.vector.values))
        if norm < 1e-12:
            raise DegenerateVector("refusing to store an all-zero vector")
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"entry vector not unit-norm (|v|={norm!r})")
        self._entries.append(entry)
        if self.path is not None:
            record = {
                "vector": list(entry.vector.values),
                "context": entry.context_text,
                "name": entry.interpretation.name,
                "meaning": entry.interpretation.meaning,
                "task": entry.interpretation.task_text,
                "created_at_us": entry.created_at_us,
                "hit_count": entry.hit_count,
            }
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, separators=(",", ":")) + "\n")
        if self.max_size is not None and len(self._entries) > self.max_size:
            # evict the least-hit (oldest on ties) among the established
            # entries; the newcomer is exempt or a full cache would never
            # admit anything new
            candidates = self._entries[:-1]
            victim = min(candidates, key=lambda e: (e.hit_count, e.created_at_us))
            self._entries.remove(victim)

    def lookup(self, vector: FeatureVector,
               threshold: float | None = None) -> CacheEntry | None:
        """Best entry by cosine if it clears the threshold; ties go to the
        earliest created_at. A hit increments the entry's hit count."""
        limit = self.threshold if threshold is None else threshold
        best_idx = -1
        best_score = -2.0
        for i, entry in enumerate(self._entries):
            score = cosine(vector, entry.vector)
            if score > best_score or (
                    score == best_score and best_idx >= 0
                    and entry.created_at_us < self._entries[best_idx].created_at_us):
                best_idx, best_score = i, score
        if best_idx < 0 or best_score < limit:
            return None
        hit = replace(self._entries[best_idx],
                      hit_count=self._entries[best_idx].hit_count + 1)
        self._entries[best_idx] = hit
        return hit

    def best_below_threshold(self, vector: FeatureVector) -> tuple[CacheEntry, float] | None:
        """Top-1 near miss, for the optional few-shot exemplar mode."""
        best = None
        best_score = -2.0
        for entry in self._entries:
            score = cosine(vector, entry.vector)
            if score > best_score:
                best, best_score = entry, score
        if best is None or best_score >= self.threshold:
            return None
        return best, best_score
