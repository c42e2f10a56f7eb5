"""Generators for nested evaluation designs.

All sequences here are prefix-stable: the design of size m is literally the
first m points of the design of size n > m, which is what the nested
divergence traces require.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import ContractError
from .kernels import Design

__all__ = [
    "dyadic_interval_points",
    "dyadic_interval_designs",
    "equispaced_interval_design",
    "sphere_sequence",
    "fibonacci_sphere_designs",
    "is_prefix_nested",
]

_GOLDEN_FRAC = (np.sqrt(5.0) - 1.0) / 2.0


def _van_der_corput(i: int) -> float:
    """Base-2 radical inverse of a positive integer."""
    x, f = 0.0, 0.5
    while i:
        x += f * (i & 1)
        i >>= 1
        f *= 0.5
    return x


def dyadic_interval_points(max_size: int, domain: tuple[float, float] = (0.0, 1.0)) -> np.ndarray:
    """Prefix-ordered dyadic grid of (a, b], left endpoint excluded.

    The first 2^l points enumerate the grid {a + (b-a) i / 2^l : i = 1..2^l},
    each level appending the new odd multiples.  Excluding the left endpoint
    keeps Brownian Gram matrices nonsingular.
    """
    if max_size < 2 or max_size & (max_size - 1):
        raise ContractError("dyadic design size must be a power of two, >= 2")
    a, b = float(domain[0]), float(domain[1])
    if not b > a:
        raise ContractError("domain must satisfy a < b")
    fracs = [0.5, 1.0]
    level = 2
    while len(fracs) < max_size:
        step = 0.5**level
        fracs.extend((2 * j - 1) * step for j in range(1, 2 ** (level - 1) + 1))
        level += 1
    return a + (b - a) * np.array(fracs)


def dyadic_interval_designs(max_size: int, domain: tuple[float, float] = (0.0, 1.0)) -> list[Design]:
    """Nested designs of sizes 2, 4, ..., max_size on a dyadic grid."""
    pts = dyadic_interval_points(max_size, domain)
    sizes = [2**l for l in range(1, max_size.bit_length())]
    return [Design.interval(pts[:n]) for n in sizes]


def equispaced_interval_design(n: int, domain: tuple[float, float] = (0.0, 1.0)) -> Design:
    """n equispaced points spanning [a, b], endpoints included."""
    if n < 1:
        raise ContractError("design size must be >= 1")
    a, b = float(domain[0]), float(domain[1])
    if not b > a:
        raise ContractError("domain must satisfy a < b")
    return Design.interval(np.linspace(a, b, n))


def sphere_sequence(n: int, sphere_dim: int = 3) -> np.ndarray:
    """First n points of a quasi-uniform, prefix-stable sequence on S^{d-1}.

    For d = 3 the sequence is an incremental Fibonacci lattice: base-2
    stratified heights combined with golden-angle azimuth increments.  For
    other d, a Halton sequence is pushed through the inverse normal CDF and
    normalized, which is quasi-uniform on the sphere for any dimension.
    """
    if n < 1:
        raise ContractError("need at least one point")
    if sphere_dim < 2:
        raise ContractError("sphere ambient dimension must be >= 2")
    if sphere_dim == 3:
        out = np.empty((n, 3))
        for i in range(1, n + 1):
            z = 1.0 - 2.0 * _van_der_corput(i)
            r = np.sqrt(max(0.0, 1.0 - z * z))
            theta = 2.0 * np.pi * ((i * _GOLDEN_FRAC) % 1.0)
            out[i - 1] = (r * np.cos(theta), r * np.sin(theta), z)
        return out
    halton = qmc.Halton(d=sphere_dim, scramble=False)
    halton.fast_forward(1)  # skip the all-zero first point
    u = halton.random(n)
    g = ndtri(u)
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def fibonacci_sphere_designs(sizes: Sequence[int], sphere_dim: int = 3) -> list[Design]:
    """Nested sphere designs cut as prefixes of one quasi-uniform sequence."""
    sizes = [int(s) for s in sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise ContractError("sizes must be positive")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ContractError("sizes must be strictly increasing")
    pts = sphere_sequence(sizes[-1], sphere_dim)
    return [Design.on_sphere(pts[:n]) for n in sizes]


def is_prefix_nested(designs: Sequence[Design]) -> bool:
    """True when each design extends the previous one as an exact prefix."""
    return all(a.is_prefix_of(b) for a, b in zip(designs, designs[1:]))
