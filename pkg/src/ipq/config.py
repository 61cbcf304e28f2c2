from __future__ import annotations

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Constants:
    """Constants hidden inside the asymptotic bounds.

    Attributes:
        c_k: multiplier on the BFE row-sample count K.
        c_gamma: multiplier on the SAU attempt budget.
        exact_fallback: when K >= n ln n, read every row sum instead of sampling
            (exact, and no worse than the sampled run in queries).
    """

    c_k: float = 1.0
    c_gamma: float = 4.0
    exact_fallback: bool = False

    @classmethod
    def from_env(cls, **overrides) -> "Constants":
        """Defaults, overridden by ``IPQ_CK`` / ``IPQ_CGAMMA``, then by keyword arguments."""
        values = {}
        if "IPQ_CK" in os.environ:
            values["c_k"] = float(os.environ["IPQ_CK"])
        if "IPQ_CGAMMA" in os.environ:
            values["c_gamma"] = float(os.environ["IPQ_CGAMMA"])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
