"""Seeded simulation of centered Gaussian vectors with a given Gram matrix.

Replicates are rows of ``Z @ L'`` where L is the cached lower Cholesky factor
and Z holds i.i.d. standard normals from a seeded PCG64 generator (NumPy's
default; its normal transform is fixed per NumPy release).  Identical
(gram, m, seed) inputs therefore reproduce batches bit for bit on one
platform and release.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .kernels import Design, GramMatrix

__all__ = [
    "SampleBatch",
    "sample_paths",
    "empirical_covariance",
    "derive_seed",
    "batch_to_csv",
]


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """m replicates of a centered Gaussian vector on a design."""

    samples: np.ndarray
    seed: int
    design: Design | None = None

    @property
    def replicates(self) -> int:
        return self.samples.shape[0]


def derive_seed(base: int, *parts: int) -> int:
    """Deterministic sub-seed from a base seed and an integer path."""
    ss = np.random.SeedSequence([int(base), *(int(p) for p in parts)])
    return int(ss.generate_state(1)[0])


def sample_paths(g: GramMatrix, m: int, seed: int, design: Design | None = None) -> SampleBatch:
    """Draw m independent centered Gaussian vectors with covariance ``g``.

    Each replicate is ``L z`` with fresh standard normals z, so scaling the
    Gram by c^2 scales the batch by c exactly under the same seed.
    """
    if m < 1:
        raise ContractError("replicate count must be >= 1")
    if seed < 0:
        raise ContractError("seed must be unsigned")
    if design is not None and len(design) != g.n:
        raise ContractError("design size must match the Gram size")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    z = rng.standard_normal((m, g.n))
    return SampleBatch(samples=z @ g.chol.T, seed=int(seed), design=design)


def empirical_covariance(batch: SampleBatch) -> np.ndarray:
    """Second-moment matrix ``(1/m) sum_i y_i y_i'`` (no mean subtraction)."""
    if batch.replicates < 2:
        raise ContractError("empirical covariance needs at least 2 replicates")
    y = batch.samples
    return (y.T @ y) / batch.replicates


def batch_to_csv(batch: SampleBatch, path) -> None:
    """Write the batch, one replicate per row, no header."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in batch.samples:
            w.writerow([repr(float(v)) for v in row])
