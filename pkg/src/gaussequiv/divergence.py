"""J-divergence of centered Gaussian vectors and the dichotomy diagnostic.

The symmetrized divergence between two centered Gaussian laws with SPD
covariances R1, R2 on n points is

    J(n) = (tr(R1 R2^{-1}) + tr(R2 R1^{-1})) / 2 - n,

the sum of the two Kullback-Leibler divergences (their log-determinant terms
cancel).  Along nested designs J(n) is non-decreasing; boundedness of the
whole family is the equivalence side of the Gaussian dichotomy, linear
growth the orthogonal side.  The diagnostic below turns a finite trace into
a labeled, threshold-based verdict and always ships the raw numbers with it.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ContractError
from .kernels import CovarianceKernel, Design, GramMatrix, gram

__all__ = [
    "DivergenceTrace",
    "VerdictLabel",
    "DichotomyVerdict",
    "gaussian_logpdf",
    "j_divergence",
    "j_divergence_trace",
    "dichotomy_diagnostic",
    "trace_to_csv",
    "trace_to_json",
]

LOG_2PI = math.log(2.0 * math.pi)

# Deterministic thresholds of the verdict rule.  The growth ratio is taken
# across one doubling of n; see dichotomy_diagnostic.
RATIO_ORTHOGONAL = 1.5
RATIO_EQUIVALENT = 1.05
SLOPE_FRACTION = 0.05


def gaussian_logpdf(g: GramMatrix, y) -> float:
    """Log-density of the centered Gaussian with covariance ``g`` at ``y``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (g.n,):
        raise ContractError(f"observation vector must have length {g.n}")
    w = g.half_solve(y)
    return -0.5 * float(w @ w) - 0.5 * g.log_det - 0.5 * g.n * LOG_2PI


def j_divergence(g1: GramMatrix, g2: GramMatrix) -> float:
    """Symmetrized divergence between two centered Gaussians on n points.

    Both traces are accumulated as squared Frobenius norms of triangular
    solves (``tr(R1 R2^{-1}) = ||L2^{-1} L1||_F^2``), so no inverse is formed.
    The result is symmetric in its arguments and nonnegative up to roundoff.
    """
    if g1.n != g2.n:
        raise ContractError("Gram matrices must have equal size")
    m12 = solve_triangular(g2.chol, g1.chol, lower=True)
    m21 = solve_triangular(g1.chol, g2.chol, lower=True)
    return 0.5 * (float(np.sum(m12 * m12)) + float(np.sum(m21 * m21))) - g1.n


@dataclass(frozen=True, eq=False)
class DivergenceTrace:
    """Divergence values along a nested sequence of designs.

    ``slope_estimate`` is the least-squares slope of J(n) against n over the
    last half of the recorded points (at least two).
    """

    sizes: tuple[int, ...]
    values: np.ndarray
    slope_estimate: float

    def __len__(self) -> int:
        return len(self.sizes)


def _slope(sizes: Sequence[int], values: np.ndarray) -> float:
    if len(sizes) < 2:
        return 0.0
    k = max(2, (len(sizes) + 1) // 2)
    return float(np.polyfit(np.asarray(sizes[-k:], dtype=float), values[-k:], 1)[0])


def j_divergence_trace(
    k1: CovarianceKernel, k2: CovarianceKernel, designs: Sequence[Design]
) -> DivergenceTrace:
    """Evaluate J(n) for both kernels along strictly nested designs.

    Designs must be prefix-extensions of each other.  Tiny negative values
    from roundoff are clamped to zero so the trace is a valid nonnegative,
    non-decreasing sequence.
    """
    designs = list(designs)
    if not designs:
        raise ContractError("need at least one design")
    for a, b in zip(designs, designs[1:]):
        if len(b) <= len(a) or not a.is_prefix_of(b):
            raise ContractError("designs must be strictly nested prefix-extensions")
    sizes = tuple(len(d) for d in designs)
    values = np.array(
        [max(0.0, j_divergence(gram(k1, d), gram(k2, d))) for d in designs]
    )
    return DivergenceTrace(sizes=sizes, values=values, slope_estimate=_slope(sizes, values))


class VerdictLabel(enum.Enum):
    EQUIVALENCE = "EquivalenceIndicated"
    ORTHOGONALITY = "OrthogonalityIndicated"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class DichotomyVerdict:
    label: VerdictLabel
    statistic: float
    rationale: str


def dichotomy_diagnostic(trace: DivergenceTrace) -> DichotomyVerdict:
    """Deterministic threshold rule on a finite divergence trace.

    Let r be the ratio of the final J to the J recorded at the size nearest
    n_last / 2.  Then r >= 1.5 indicates orthogonality (J keeps growing with
    n); r <= 1.05 together with a flat tail,
    ``slope * n_last <= 0.05 * J(n_last) + 1e-9``, indicates equivalence;
    anything else is inconclusive.  The statistic reported is always the
    tail slope estimate.  A finite trace cannot prove either side of the
    dichotomy; treat the label as a diagnostic reading of the raw trace.
    """
    if len(trace) < 4:
        raise ContractError("dichotomy diagnostic needs a trace of length >= 4")
    sizes = np.asarray(trace.sizes, dtype=float)
    n_last = sizes[-1]
    j_last = float(trace.values[-1])
    half_idx = int(np.argmin(np.abs(sizes - n_last / 2.0)))
    j_half = float(trace.values[half_idx])
    if j_half == 0.0:
        ratio = 1.0 if j_last == 0.0 else math.inf
    else:
        ratio = j_last / j_half
    slope = trace.slope_estimate
    if ratio >= RATIO_ORTHOGONAL:
        return DichotomyVerdict(
            VerdictLabel.ORTHOGONALITY,
            statistic=slope,
            rationale=(
                f"J grew by a factor {ratio:.3g} across a doubling of n "
                f"(threshold {RATIO_ORTHOGONAL}); tail slope {slope:.3g}"
            ),
        )
    if ratio <= RATIO_EQUIVALENT and slope * n_last <= SLOPE_FRACTION * j_last + 1e-9:
        return DichotomyVerdict(
            VerdictLabel.EQUIVALENCE,
            statistic=slope,
            rationale=(
                f"J is flat: doubling ratio {ratio:.3g} <= {RATIO_EQUIVALENT} and "
                f"slope*n = {slope * n_last:.3g} within {SLOPE_FRACTION:.0%} of J(n)"
            ),
        )
    return DichotomyVerdict(
        VerdictLabel.INCONCLUSIVE,
        statistic=slope,
        rationale=f"doubling ratio {ratio:.3g} between thresholds; tail slope {slope:.3g}",
    )


def trace_to_csv(trace: DivergenceTrace, path) -> None:
    """Write the trace with header ``n,J,slope_estimate``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "J", "slope_estimate"])
        for n, v in zip(trace.sizes, trace.values):
            w.writerow([n, repr(float(v)), repr(trace.slope_estimate)])


def trace_to_json(trace: DivergenceTrace, verdict: DichotomyVerdict | None = None) -> dict:
    """JSON-ready record of the trace, optionally with its verdict."""
    out: dict = {
        "sizes": list(trace.sizes),
        "values": [float(v) for v in trace.values],
        "slope_estimate": trace.slope_estimate,
    }
    if verdict is not None:
        out["verdict"] = {
            "label": verdict.label.value,
            "statistic": verdict.statistic,
            "rationale": verdict.rationale,
        }
    return out
