"""The bound report container shared by the Hermitian and SVD bound modules."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional

SLACK_RTOL = 1e-8
TINY_RHS = 1e-12


class BoundId(str, Enum):
    HW = "HW"
    DK = "DK"
    LISUN = "LiSun"
    COMBINED_ALL = "CombinedAll"
    COMBINED_SINGLE = "CombinedSingle"
    COR_SIN_F = "CorSinF"
    COR_SIN_ONLY = "CorSinOnly"
    TOTAL_B = "TotalB"
    GAP_LOWER = "GapLower"
    MVT = "MVT"
    MIRSKY = "Mirsky"
    SVD_COMBINED_ALL = "SvdCombinedAll"
    SVD_COMBINED_SINGLE = "SvdCombinedSingle"
    SVD_COR_SIN = "SvdCorSin"
    SVD_GAP_LOWER = "SvdGapLower"
    SVD_MVT = "SvdMVT"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class BoundReport:
    """One evaluated inequality ``lhs <= rhs``.

    ``applicable`` is False when a hypothesis of the inequality fails; lhs and
    rhs are still reported. ``block`` names the target block of single-block
    bounds (0-based).
    """

    bound_id: BoundId
    lhs: float
    rhs: float
    applicable: bool = True
    condition_note: str = ""
    components: Dict[str, float] = field(default_factory=dict)
    block: Optional[int] = None

    @property
    def slack(self):
        # Equal sides (including two infinities) have zero slack.
        if self.lhs == self.rhs:
            return 0.0
        return self.rhs - self.lhs

    @property
    def relative_slack(self):
        """Slack relative to rhs, or absolute when ``rhs < 1e-12``."""
        if not math.isfinite(self.rhs) or abs(self.rhs) < TINY_RHS:
            return self.slack
        return self.slack / abs(self.rhs)

    @property
    def satisfied(self):
        """True unless the bound applies and is violated beyond roundoff."""
        if not self.applicable:
            return True
        # NaN compares False, so an undefined slack counts as a violation.
        return bool(self.relative_slack >= -SLACK_RTOL)

    def to_dict(self):
        return {
            "bound_id": self.bound_id.value,
            "block": self.block,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "applicable": self.applicable,
            "satisfied": self.satisfied,
            "condition_note": self.condition_note,
            "components": dict(self.components),
        }


def weighted(weight, value):
    """``weight * value`` with the convention that a zero factor wins over ``inf``."""
    if weight == 0.0 or value == 0.0:
        return 0.0
    return weight * value
