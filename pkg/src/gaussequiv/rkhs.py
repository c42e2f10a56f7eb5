"""Finite-design reproducing-kernel Hilbert space computations.

On a finite design the RKHS of a strictly positive-definite kernel is R^n
with inner product ``<v, w> = v' R(n)^{-1} w``.  Everything here goes through
the cached triangular factor of the Gram matrix; no inverse is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .kernels import Design, GramMatrix

__all__ = [
    "FiniteFunction",
    "rkhs_inner",
    "rkhs_norm",
    "reproducing_check",
    "tensor_norm_finite",
]

TENSOR_SYMMETRY_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class FiniteFunction:
    """A function known through its values on a design."""

    design: Design
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.atleast_1d(np.asarray(self.values, dtype=float)))
        if self.values.ndim != 1 or len(self.values) != len(self.design):
            raise ContractError("value vector length must match the design size")


def _check_vector(g: GramMatrix, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (g.n,):
        raise ContractError(f"expected a vector of length {g.n}")
    return v


def rkhs_inner(g: GramMatrix, v, w) -> float:
    """Inner product ``v' R(n)^{-1} w`` via two triangular solves."""
    a = g.half_solve(_check_vector(g, v))
    b = g.half_solve(_check_vector(g, w))
    return float(a @ b)


def rkhs_norm(g: GramMatrix, f: FiniteFunction) -> float:
    """RKHS norm of a finite function, ``sqrt(f' R(n)^{-1} f)``."""
    sq = rkhs_inner(g, f.values, f.values)
    return float(np.sqrt(max(sq, 0.0)))


def reproducing_check(g: GramMatrix, f: FiniteFunction, i: int) -> float:
    """Residual ``|<f, R(., t_i)> - f(t_i)|`` of the reproducing identity.

    The i-th representer restricted to the design is the i-th column of the
    Gram matrix, so the residual is pure solver error; well-conditioned
    matrices keep it below 1e-9 * (1 + |f(t_i)|).
    """
    if not 0 <= i < g.n:
        raise ContractError("representer index out of range")
    if len(f.values) != g.n:
        raise ContractError("function length must match the Gram size")
    col = g.entries[:, i]
    return abs(rkhs_inner(g, f.values, col) - float(f.values[i]))


def tensor_norm_finite(g1: GramMatrix, diff: np.ndarray) -> float:
    """Squared tensor-RKHS norm of a kernel difference restricted to a design.

    For a symmetric matrix D holding the restriction of a kernel difference,
    the squared norm in the tensor product of the finite-design RKHS with
    itself is ``trace(R^{-1} D R^{-1} D')``, computed here as the squared
    Frobenius norm of ``L^{-1} D L^{-T}``.  Restriction norms are
    non-decreasing under design nesting, so nested evaluations bracket the
    full-domain norm from below.
    """
    d = np.asarray(diff, dtype=float)
    if d.shape != (g1.n, g1.n):
        raise ContractError("difference matrix shape must match the Gram size")
    if float(np.max(np.abs(d - d.T))) > TENSOR_SYMMETRY_ATOL:
        raise ContractError("difference matrix must be symmetric")
    m = g1.half_solve(d)
    w = g1.half_solve(m.T)
    return float(np.sum(w * w))
