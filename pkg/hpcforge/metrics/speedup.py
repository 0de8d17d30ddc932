"""Speedup magnitude buckets."""

import enum
from typing import Dict, Iterable

from ..errors import NonPositive


class SpeedupBucket(str, enum.Enum):
    DEG_GT10 = "DEG_GT10"
    DEG_5_10 = "DEG_5_10"
    DEG_2_5 = "DEG_2_5"
    DEG_1_2 = "DEG_1_2"
    IMP_1_2 = "IMP_1_2"
    IMP_2_5 = "IMP_2_5"
    IMP_5_10 = "IMP_5_10"
    IMP_GT10 = "IMP_GT10"

    @property
    def improvement(self) -> bool:
        return self.value.startswith("IMP")


_IMPROVEMENTS = ((10.0, SpeedupBucket.IMP_GT10), (5.0, SpeedupBucket.IMP_5_10),
                 (2.0, SpeedupBucket.IMP_2_5), (1.0, SpeedupBucket.IMP_1_2))
_DEGRADATIONS = ((10.0, SpeedupBucket.DEG_GT10), (5.0, SpeedupBucket.DEG_5_10),
                 (2.0, SpeedupBucket.DEG_2_5), (1.0, SpeedupBucket.DEG_1_2))


def bucket_speedup(speedup: float) -> SpeedupBucket:
    """Bucket on left-closed intervals [1,2), [2,5), [5,10), [10,inf).

    Slowdowns (speedup < 1) are bucketed by ``1 / speedup`` on the same bounds.

    Raises:
        NonPositive: If ``speedup`` is not positive
    """
    if not speedup > 0:
        raise NonPositive(f"speedup must be positive, got {speedup}")
    table, magnitude = (_IMPROVEMENTS, speedup) if speedup >= 1 else (_DEGRADATIONS, 1.0 / speedup)
    for bound, bucket in table:
        if magnitude >= bound:
            return bucket
    return table[-1][1]


def bucket_histogram(speedups: Iterable[float]) -> Dict[SpeedupBucket, int]:
    """Counts for all eight buckets, zeros included; sums to the number of inputs."""
    counts = dict.fromkeys(SpeedupBucket, 0)
    for speedup in speedups:
        counts[bucket_speedup(speedup)] += 1
    return counts
