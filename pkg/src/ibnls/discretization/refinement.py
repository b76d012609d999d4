"""Observed convergence order from runs at successive resolutions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional


@dataclass(frozen=True)
class RefinementResult:
    order: Optional[float]
    status: str  # "converging" or "machine-limited"
    errors: tuple
    resolutions: tuple


def grid_refinement_estimate(compute: Callable[[int], float], n: int, reference=None,
                             machine_tol: float = 1e-10) -> RefinementResult:
    """Observed order of ``compute`` between resolutions n and 2n.

    With a ``reference`` value the errors are |compute(k) - reference|.
    Without one, three levels n, 2n, 4n are run and successive differences
    are used (Richardson).
    """
    if reference is not None:
        ns = (n, 2 * n)
        errs = tuple(abs(compute(k) - reference) for k in ns)
    else:
        ns = (n, 2 * n, 4 * n)
        q = [compute(k) for k in ns]
        errs = (abs(q[0] - q[1]), abs(q[1] - q[2]))
    scale = max(1.0, abs(reference) if reference is not None else 1.0)
    if max(errs) < machine_tol * scale:
        return RefinementResult(None, "machine-limited", errs, ns)
    if errs[1] == 0:
        return RefinementResult(math.inf, "converging", errs, ns)
    return RefinementResult(math.log2(errs[0] / errs[1]), "converging", errs, ns)
