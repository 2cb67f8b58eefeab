"""Participant-disjoint train/test splitting.

Splits are always by participant, never by image, so no person appears on
both sides. The participant list is shuffled with a seeded permutation and
the first floor(ratio * P) participants go to train; the remainder tests.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ..errors import ArgumentError, DatasetError


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple
    test: tuple
    seed: int
    ratio: float

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ArgumentError(f"ratio must lie in (0, 1), got {self.ratio}")
        train_p = {r.participant_id for r in self.train}
        test_p = {r.participant_id for r in self.test}
        overlap = train_p & test_p
        if overlap:
            raise ArgumentError(f"participants appear on both sides: {sorted(overlap)}")
        object.__setattr__(self, "train", tuple(self.train))
        object.__setattr__(self, "test", tuple(self.test))

    @property
    def train_participants(self) -> set[str]:
        return {r.participant_id for r in self.train}

    @property
    def test_participants(self) -> set[str]:
        return {r.participant_id for r in self.test}


def split_by_participant(records, ratio: float, seed: int) -> DatasetSplit:
    """Deterministic participant-level split of a record list."""
    if not 0.0 < ratio < 1.0:
        raise ArgumentError(f"ratio must lie in (0, 1), got {ratio}")
    participants = sorted({r.participant_id for r in records})
    if len(participants) < 2:
        raise DatasetError(
            f"need at least 2 distinct participants, got {len(participants)}"
        )
    random.Random(seed).shuffle(participants)
    # tiny epsilon absorbs binary-float slop in ratio * P (e.g. 170 * 0.8)
    n_train = math.floor(ratio * len(participants) + 1e-9)
    train_ids = set(participants[:n_train])
    train = tuple(r for r in records if r.participant_id in train_ids)
    test = tuple(r for r in records if r.participant_id not in train_ids)
    return DatasetSplit(train=train, test=test, seed=seed, ratio=ratio)
