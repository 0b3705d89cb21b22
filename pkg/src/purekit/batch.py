"""Batched instance layout: one stacked token matrix plus (start, length)
offsets per instance.

Stacking keeps padding structurally impossible: every row in the matrix
belongs to exactly one instance, so no masking is needed downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DuplicateId, GapInOffsets, OutOfRange, OverlappingOffsets


@dataclass
class InstanceBatch:
    """Stacked token rows for a sequence of instances.

    ``offsets[i] = (start, length)`` selects the rows of instance ``i``. The
    offsets must partition ``[0, total_rows)``: lengths >= 1, no overlap, no
    gaps. ``ids`` default to the decimal instance index; ``labels`` are
    optional integer class labels.
    """

    tokens: np.ndarray
    offsets: list[tuple[int, int]]
    ids: list[str] = field(default_factory=list)
    labels: list[int] | None = None

    def __post_init__(self) -> None:
        total = self.tokens.shape[0]
        if not self.ids:
            self.ids = [str(i) for i in range(len(self.offsets))]
        if len(self.ids) != len(self.offsets):
            raise OutOfRange("ids and offsets must have equal length")
        if self.labels is not None and len(self.labels) != len(self.offsets):
            raise OutOfRange("labels and offsets must have equal length")
        seen_ids = set()
        for ident in self.ids:
            if ident in seen_ids:
                raise DuplicateId(f"duplicate instance id {ident!r}")
            seen_ids.add(ident)
        claimed: list[tuple[int, int, str]] = []
        for (start, length), ident in zip(self.offsets, self.ids):
            if length < 1:
                raise OutOfRange(f"instance {ident!r} has length {length} < 1")
            if start < 0 or start + length > total:
                raise OutOfRange(
                    f"instance {ident!r} spans [{start}, {start + length}) "
                    f"outside the {total}-row matrix"
                )
            claimed.append((start, start + length, ident))
        claimed.sort()
        cursor = 0
        for start, end, ident in claimed:
            if start < cursor:
                raise OverlappingOffsets(f"instance {ident!r} overlaps a previous instance")
            if start > cursor:
                raise GapInOffsets(f"rows [{cursor}, {start}) belong to no instance")
            cursor = end
        if cursor != total:
            raise GapInOffsets(f"rows [{cursor}, {total}) belong to no instance")

    def __len__(self) -> int:
        return len(self.offsets)

    def instance(self, i: int) -> np.ndarray:
        """Token rows of instance ``i`` (a view into the stacked matrix)."""
        start, length = self.offsets[i]
        return self.tokens[start : start + length]

    def instances(self) -> list[np.ndarray]:
        return [self.instance(i) for i in range(len(self))]

    def with_tokens(self, tokens: np.ndarray) -> "InstanceBatch":
        """Same layout over a replacement token matrix of equal row count."""
        return InstanceBatch(
            tokens=tokens,
            offsets=list(self.offsets),
            ids=list(self.ids),
            labels=None if self.labels is None else list(self.labels),
        )
