"""Covariance kernels, evaluation designs, and Gram-matrix assembly.

Three kernel families are provided: Brownian motion ``sigma^2 * min(s, t)``
on the half line, the stationary exponential kernel
``sigma^2 * exp(-beta |s - t|)`` on the line, and isotropic kernels on the
unit sphere ``S^{d-1}`` defined through a truncated Schoenberg coefficient
sequence.  Spherical kernels are evaluated zonally: the degree-k block of
spherical harmonics contributes ``h(k) * G_k(<s, t>)`` where ``h(k)`` is the
harmonic dimension and ``G_k`` the Gegenbauer polynomial normalized to
``G_k(1) = 1`` (addition theorem), so no individual harmonic is ever built.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.linalg.lapack import dpotrf

from .errors import ContractError, SingularGramError

__all__ = [
    "Geometry",
    "Point",
    "Design",
    "SchoenbergSpectrum",
    "CovarianceKernel",
    "BrownianKernel",
    "ExponentialKernel",
    "SchoenbergKernel",
    "GramMatrix",
    "eval_kernel",
    "gram",
    "gram_from_matrix",
    "harmonic_dimension",
    "harmonic_dimensions",
    "gegenbauer_normalized",
    "kernel_from_json",
    "kernel_to_json",
]

SPHERE_NORM_TOL = 1e-12
SYMMETRY_RTOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Geometry:
    """Domain of a design: Euclidean space R^dim or the sphere S^{dim-1} in R^dim."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in ("euclidean", "sphere"):
            raise ContractError(f"unknown geometry kind {self.kind!r}")
        if self.dim < 1:
            raise ContractError("geometry dimension must be >= 1")

    @staticmethod
    def euclidean(dim: int) -> "Geometry":
        return Geometry("euclidean", dim)

    @staticmethod
    def sphere(dim: int) -> "Geometry":
        if dim < 2:
            raise ContractError("sphere geometry needs ambient dimension >= 2")
        return Geometry("sphere", dim)


@dataclass(frozen=True, eq=False)
class Point:
    """A single evaluation site, stored as a coordinate vector."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _readonly(np.atleast_1d(self.coords)))
        if self.coords.ndim != 1:
            raise ContractError("point coordinates must be a 1-d vector")

    @staticmethod
    def scalar(x: float) -> "Point":
        return Point(np.array([float(x)]))

    @property
    def dim(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True, eq=False)
class Design:
    """Ordered finite set of pairwise-distinct points sharing one geometry.

    Duplicate points are rejected because they make the Gram matrix of any
    strictly positive-definite kernel singular.
    """

    points: tuple[Point, ...]
    geometry: Geometry

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.points) == 0:
            raise ContractError("design must contain at least one point")
        for p in self.points:
            if p.dim != self.geometry.dim:
                raise ContractError(
                    f"point of dimension {p.dim} in {self.geometry.dim}-dimensional design"
                )
        coords = np.array([p.coords for p in self.points], dtype=float)
        if self.geometry.kind == "sphere":
            norms = np.linalg.norm(coords, axis=1)
            if np.max(np.abs(norms - 1.0)) > SPHERE_NORM_TOL:
                raise ContractError("spherical design points must have unit norm")
        if np.unique(coords, axis=0).shape[0] != coords.shape[0]:
            raise ContractError("design points must be pairwise distinct")

    @cached_property
    def coords(self) -> np.ndarray:
        """(n, dim) coordinate array, read-only."""
        return _readonly(np.array([p.coords for p in self.points]))

    def __len__(self) -> int:
        return len(self.points)

    def prefix(self, n: int) -> "Design":
        if not 1 <= n <= len(self):
            raise ContractError("prefix length out of range")
        return Design(self.points[:n], self.geometry)

    def is_prefix_of(self, other: "Design") -> bool:
        if self.geometry != other.geometry or len(self) > len(other):
            return False
        return bool(np.array_equal(self.coords, other.coords[: len(self)]))

    @staticmethod
    def interval(values: Sequence[float]) -> "Design":
        """Design of scalar points on the real line."""
        return Design(tuple(Point.scalar(v) for v in values), Geometry.euclidean(1))

    @staticmethod
    def on_sphere(coords: np.ndarray) -> "Design":
        """Design from an (n, d) array of unit vectors."""
        coords = np.asarray(coords, dtype=float)
        if coords.ndim != 2:
            raise ContractError("sphere design expects an (n, d) array")
        pts = tuple(Point(row) for row in coords)
        return Design(pts, Geometry.sphere(coords.shape[1]))

    def to_json(self) -> dict:
        return {
            "geometry": {"kind": self.geometry.kind, "dim": self.geometry.dim},
            "points": self.coords.tolist(),
        }

    @staticmethod
    def from_json(obj: dict) -> "Design":
        geom = Geometry(obj["geometry"]["kind"], int(obj["geometry"]["dim"]))
        pts = tuple(Point(np.asarray(row, dtype=float)) for row in obj["points"])
        return Design(pts, geom)


# ---------------------------------------------------------------------------
# special functions for spherical kernels
# ---------------------------------------------------------------------------


def harmonic_dimension(d: int, k: int) -> int:
    """Dimension of the space of degree-k spherical harmonics on S^{d-1}.

    Computed as ``C(k+d-1, d-1) - C(k+d-3, d-1)`` with the convention
    ``C(m, j) = 0`` for ``m < j``; equals ``2k+1`` when ``d = 3``.
    """
    if d < 3:
        raise ContractError("harmonic dimension requires d >= 3")
    if k < 0:
        raise ContractError("degree k must be nonnegative")
    if k == 0:
        return 1
    first = math.comb(k + d - 1, d - 1)
    second = math.comb(k + d - 3, d - 1) if k + d - 3 >= d - 1 else 0
    return first - second


def harmonic_dimensions(d: int, max_degree: int) -> np.ndarray:
    """Vector of harmonic dimensions for degrees 0..max_degree."""
    return np.array([harmonic_dimension(d, k) for k in range(max_degree + 1)], dtype=float)


def _check_gegenbauer_domain(x: np.ndarray) -> np.ndarray:
    if np.max(np.abs(x)) > 1.0 + 1e-12:
        raise ContractError("Gegenbauer argument must lie in [-1, 1]")
    return np.clip(x, -1.0, 1.0)


def gegenbauer_normalized(k: int, d: int, x) -> float | np.ndarray:
    """Gegenbauer polynomial ``C_k^lambda(x) / C_k^lambda(1)`` with ``lambda = (d-2)/2``.

    Evaluated by the three-term recurrence in already-normalized form,

        G_k(x) = (2 (k+lambda-1) x G_{k-1}(x) - (k-1) G_{k-2}(x)) / (k + 2 lambda - 1),

    which keeps ``G_k(1) = 1`` exact and all values in [-1, 1] on the domain.
    For ``d = 3`` this is the Legendre polynomial of degree k.

    Parameters
    ----------
    k : int
        Polynomial degree, >= 0.
    d : int
        Ambient dimension of the sphere, >= 3.
    x : float or ndarray
        Arguments in [-1, 1] (a slack of 1e-12 is clamped).
    """
    if d < 3:
        raise ContractError("gegenbauer_normalized requires d >= 3")
    if k < 0:
        raise ContractError("degree k must be nonnegative")
    scalar = np.isscalar(x) or np.ndim(x) == 0
    xa = _check_gegenbauer_domain(np.asarray(x, dtype=float))
    lam = (d - 2) / 2.0
    g_prev = np.ones_like(xa)
    if k == 0:
        return float(g_prev) if scalar else g_prev
    g = xa.copy()
    for j in range(2, k + 1):
        g, g_prev = (2 * (j + lam - 1) * xa * g - (j - 1) * g_prev) / (j + 2 * lam - 1), g
    return float(g) if scalar else g


def _zonal_sum(d: int, coeffs: np.ndarray, hdims: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Sum_k coeffs[k] * h(k) * G_k(x), accumulated with a rolling recurrence."""
    lam = (d - 2) / 2.0
    weights = coeffs * hdims
    g_prev = np.ones_like(x)
    acc = weights[0] * g_prev
    if len(weights) == 1:
        return acc
    g = x.copy()
    acc = acc + weights[1] * g
    for k in range(2, len(weights)):
        g, g_prev = (2 * (k + lam - 1) * x * g - (k - 1) * g_prev) / (k + 2 * lam - 1), g
        acc = acc + weights[k] * g
    return acc


@dataclass(frozen=True, eq=False)
class SchoenbergSpectrum:
    """Nonnegative degree-wise coefficients of an isotropic kernel on S^{d-1}.

    The sequence is an explicit truncation: entries beyond the stored list are
    treated as zero.  ``tail_term`` reports the magnitude of the last stored
    term ``h(K) * a(K)`` as a truncation diagnostic.
    """

    sphere_dim: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.sphere_dim < 3:
            raise ContractError("Schoenberg spectrum requires sphere_dim >= 3")
        object.__setattr__(self, "coeffs", _readonly(np.atleast_1d(self.coeffs)))
        if self.coeffs.ndim != 1 or len(self.coeffs) == 0:
            raise ContractError("coefficients must form a nonempty 1-d sequence")
        if not np.all(np.isfinite(self.coeffs)):
            raise ContractError("coefficients must be finite")
        if np.any(self.coeffs < 0):
            raise ContractError("coefficients must be nonnegative")

    @property
    def truncation(self) -> int:
        """Largest stored degree K."""
        return len(self.coeffs) - 1

    @cached_property
    def harmonic_dims(self) -> np.ndarray:
        return harmonic_dimensions(self.sphere_dim, self.truncation)

    @property
    def positive_count(self) -> int:
        return int(np.count_nonzero(self.coeffs > 0))

    @property
    def trace_value(self) -> float:
        """Value on the diagonal, sum_k h(k) * a(k)."""
        return float(self.harmonic_dims @ self.coeffs)

    @property
    def tail_term(self) -> float:
        return float(self.harmonic_dims[-1] * self.coeffs[-1])


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


class CovarianceKernel(ABC):
    """Symmetric positive-definite covariance kernel on a fixed geometry."""

    @abstractmethod
    def check_geometry(self, geometry: Geometry) -> None:
        """Raise ContractError if the kernel cannot act on the geometry."""

    @abstractmethod
    def check_point(self, p: Point) -> None:
        """Raise ContractError if a single point is incompatible."""

    @abstractmethod
    def value(self, s: np.ndarray, t: np.ndarray) -> float:
        """Kernel value at a coordinate pair (assumed already validated)."""

    @abstractmethod
    def matrix(self, coords: np.ndarray) -> np.ndarray:
        """Dense kernel matrix over an (n, d) coordinate array."""


@dataclass(frozen=True)
class BrownianKernel(CovarianceKernel):
    """Brownian-motion covariance ``sigma^2 * min(s, t)`` for scalar s, t >= 0."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ContractError("sigma must be strictly positive")

    def check_geometry(self, geometry: Geometry) -> None:
        if geometry != Geometry.euclidean(1):
            raise ContractError("Brownian kernel is defined on scalar points")

    def check_point(self, p: Point) -> None:
        if p.dim != 1:
            raise ContractError("Brownian kernel expects scalar points")
        if p.coords[0] < 0:
            raise ContractError("Brownian kernel requires t >= 0")

    def value(self, s: np.ndarray, t: np.ndarray) -> float:
        return self.sigma**2 * float(min(s[0], t[0]))

    def matrix(self, coords: np.ndarray) -> np.ndarray:
        t = coords[:, 0]
        if np.any(t < 0):
            raise ContractError("Brownian kernel requires t >= 0")
        return self.sigma**2 * np.minimum.outer(t, t)


@dataclass(frozen=True)
class ExponentialKernel(CovarianceKernel):
    """Stationary exponential covariance ``sigma^2 * exp(-beta |s - t|)`` on the line."""

    sigma: float
    beta: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ContractError("sigma must be strictly positive")
        if not self.beta > 0:
            raise ContractError("beta must be strictly positive")

    def check_geometry(self, geometry: Geometry) -> None:
        if geometry != Geometry.euclidean(1):
            raise ContractError("exponential kernel is defined on scalar points")

    def check_point(self, p: Point) -> None:
        if p.dim != 1:
            raise ContractError("exponential kernel expects scalar points")

    def value(self, s: np.ndarray, t: np.ndarray) -> float:
        return self.sigma**2 * float(np.exp(-self.beta * abs(s[0] - t[0])))

    def matrix(self, coords: np.ndarray) -> np.ndarray:
        t = coords[:, 0]
        dist = np.abs(t[:, None] - t[None, :])
        return self.sigma**2 * np.exp(-self.beta * dist)


@dataclass(frozen=True)
class SchoenbergKernel(CovarianceKernel):
    """Isotropic kernel on S^{d-1} with an explicit coefficient truncation.

    ``R(s, t) = sum_k a(k) h(k) G_k(<s, t>)``; the rank of the kernel equals
    ``sum_{a(k)>0} h(k)``, so Gram matrices on more points than that are
    singular by construction.
    """

    spectrum: SchoenbergSpectrum

    def check_geometry(self, geometry: Geometry) -> None:
        if geometry != Geometry.sphere(self.spectrum.sphere_dim):
            raise ContractError(
                f"Schoenberg kernel lives on the unit sphere in R^{self.spectrum.sphere_dim}"
            )

    def check_point(self, p: Point) -> None:
        if p.dim != self.spectrum.sphere_dim:
            raise ContractError("point dimension does not match sphere dimension")
        if abs(np.linalg.norm(p.coords) - 1.0) > SPHERE_NORM_TOL:
            raise ContractError("Schoenberg kernel expects unit-norm points")

    def value(self, s: np.ndarray, t: np.ndarray) -> float:
        x = _check_gegenbauer_domain(np.asarray(float(s @ t)))
        return float(
            _zonal_sum(self.spectrum.sphere_dim, self.spectrum.coeffs,
                       self.spectrum.harmonic_dims, x)
        )

    def matrix(self, coords: np.ndarray) -> np.ndarray:
        # broadcasting keeps the per-entry reduction order fixed, so the dot
        # matrix is exactly symmetric regardless of BLAS threading
        dots = (coords[:, None, :] * coords[None, :, :]).sum(axis=-1)
        dots = np.clip(dots, -1.0, 1.0)
        return _zonal_sum(self.spectrum.sphere_dim, self.spectrum.coeffs,
                          self.spectrum.harmonic_dims, dots)


# ---------------------------------------------------------------------------
# Gram matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """SPD kernel matrix with its cached lower Cholesky factor and log-determinant."""

    entries: np.ndarray
    chol: np.ndarray
    log_det: float

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def half_solve(self, b: np.ndarray) -> np.ndarray:
        """Solve ``L x = b`` against the cached lower factor."""
        return solve_triangular(self.chol, b, lower=True)

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve ``R x = b`` via the two triangular solves."""
        y = solve_triangular(self.chol, b, lower=True)
        return solve_triangular(self.chol.T, y, lower=False)


def gram_from_matrix(entries: np.ndarray, jitter: float = 0.0) -> GramMatrix:
    """Factor an explicit symmetric matrix into a :class:`GramMatrix`.

    Parameters
    ----------
    entries : ndarray
        Square matrix, symmetric to 1e-12 relative.
    jitter : float
        Optional diagonal boost for exploratory use.  Defaults to 0; when
        nonzero it is added before factorization and the stored entries
        include it, so the cached factor always matches ``entries``.

    Raises
    ------
    SingularGramError
        If the (jittered) matrix is not numerically positive definite; the
        error carries the zero-based index of the failing pivot.
    """
    a = np.array(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractError("Gram entries must form a square matrix")
    scale = max(1.0, float(np.max(np.abs(a))))
    if float(np.max(np.abs(a - a.T))) > SYMMETRY_RTOL * scale:
        raise ContractError("Gram entries must be symmetric")
    if jitter < 0:
        raise ContractError("jitter must be nonnegative")
    if jitter:
        a = a + jitter * np.eye(a.shape[0])
    c, info = dpotrf(a, lower=1, clean=1, overwrite_a=0)
    if info != 0:
        raise SingularGramError(pivot=int(info) - 1)
    log_det = 2.0 * float(np.sum(np.log(np.diag(c))))
    return GramMatrix(entries=_readonly(a), chol=_readonly(c), log_det=log_det)


def gram(kernel: CovarianceKernel, design: Design, jitter: float = 0.0) -> GramMatrix:
    """Assemble and factor the kernel matrix of ``kernel`` over ``design``.

    Fails hard (``SingularGramError``) when the matrix is not numerically
    positive definite; pass a small ``jitter`` only for exploratory work,
    since regularization biases divergence values.
    """
    kernel.check_geometry(design.geometry)
    return gram_from_matrix(kernel.matrix(design.coords), jitter=jitter)


def eval_kernel(kernel: CovarianceKernel, s: Point, t: Point) -> float:
    """Evaluate ``R(s, t)`` after validating both points against the kernel."""
    kernel.check_point(s)
    kernel.check_point(t)
    return kernel.value(s.coords, t.coords)


# ---------------------------------------------------------------------------
# JSON descriptions
# ---------------------------------------------------------------------------


def kernel_from_json(obj: dict) -> CovarianceKernel:
    """Build a kernel from its JSON description.

    Recognized forms::

        {"variant": "brownian", "sigma": 2.0}
        {"variant": "exponential", "sigma": 1.0, "beta": 1.0}
        {"variant": "schoenberg", "d": 3, "coeffs": [1.0, 0.5, ...]}
    """
    try:
        variant = obj["variant"]
    except (TypeError, KeyError):
        raise ContractError("kernel description must be an object with a 'variant' key")
    if variant == "brownian":
        return BrownianKernel(sigma=float(obj["sigma"]))
    if variant == "exponential":
        return ExponentialKernel(sigma=float(obj["sigma"]), beta=float(obj["beta"]))
    if variant == "schoenberg":
        spectrum = SchoenbergSpectrum(int(obj["d"]), np.asarray(obj["coeffs"], dtype=float))
        return SchoenbergKernel(spectrum)
    raise ContractError(f"unknown kernel variant {variant!r}")


def kernel_to_json(kernel: CovarianceKernel) -> dict:
    if isinstance(kernel, BrownianKernel):
        return {"variant": "brownian", "sigma": kernel.sigma}
    if isinstance(kernel, ExponentialKernel):
        return {"variant": "exponential", "sigma": kernel.sigma, "beta": kernel.beta}
    if isinstance(kernel, SchoenbergKernel):
        return {
            "variant": "schoenberg",
            "d": kernel.spectrum.sphere_dim,
            "coeffs": kernel.spectrum.coeffs.tolist(),
        }
    raise ContractError(f"cannot serialize kernel of type {type(kernel).__name__}")
