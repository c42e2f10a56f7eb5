"""Spectral equivalence criteria for stationary Gaussian distributions.

Two kinds of criterion sums are computed.  On the sphere, the weighted sum
``sum_k h(k) (1 - a1(k)/a2(k))^2`` over Schoenberg coefficients decides
equivalence of the corresponding isotropic Gaussian laws.  For purely atomic
spectral measures the analogue is the dimension-weighted atom sum
``sum_n d(a_n) (1 - m1(a_n)/m2(a_n))^2``; with all dimensions equal to one
this is the classical criterion on locally compact abelian groups.

Partial sums alone never prove convergence, so verdicts are only issued when
either the stored lists are the entire (finitely supported) spectrum, or a
closed-form ratio model supplies an analytic tail bound.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np

from .errors import AtomMismatchError, ContractError
from .kernels import SchoenbergSpectrum, harmonic_dimensions

__all__ = [
    "Verdict",
    "CriterionResult",
    "AtomicSpectralMeasure",
    "RatioModel",
    "PowerLawRatio",
    "ConstantRatio",
    "sphere_equivalence_sum",
    "chow_sum",
    "check_shared_atoms",
    "spectra_from_ratio_model",
    "atomic_measure_from_spectrum",
    "criterion_to_csv",
]


class Verdict(enum.Enum):
    FINITE = "Finite"
    DIVERGENT = "Divergent"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True, eq=False)
class CriterionResult:
    """Partial sums of a criterion series plus its convergence verdict.

    ``indices`` holds the term indices (degrees k for the sphere sum, 1-based
    atom ordinals for atomic measures).  ``tail_bound`` is an analytic upper
    bound on the omitted tail when one is available, else None.
    """

    indices: np.ndarray
    terms: np.ndarray
    partial_sums: np.ndarray
    final: float
    verdict: Verdict
    tail_bound: float | None


@dataclass(frozen=True, eq=False)
class AtomicSpectralMeasure:
    """Purely atomic spectral measure: labeled atoms with masses and dimensions."""

    labels: tuple[str, ...]
    masses: np.ndarray
    dims: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(l) for l in self.labels))
        masses = np.atleast_1d(np.asarray(self.masses, dtype=float))
        dims = np.atleast_1d(np.asarray(self.dims, dtype=int))
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "dims", dims)
        if not (len(self.labels) == len(masses) == len(dims)):
            raise ContractError("labels, masses and dims must have equal length")
        if len(set(self.labels)) != len(self.labels):
            raise ContractError("atom labels must be unique")
        if not np.all(masses > 0):
            raise ContractError("atom masses must be strictly positive")
        if not np.all(dims >= 1):
            raise ContractError("atom dimensions must be integers >= 1")

    def __len__(self) -> int:
        return len(self.labels)

    @staticmethod
    def from_json(obj: dict) -> "AtomicSpectralMeasure":
        """Load from ``{"atoms": [{"label": ..., "mass": ..., "dim": ...}, ...]}``."""
        try:
            atoms = obj["atoms"]
        except (TypeError, KeyError):
            raise ContractError("measure description must contain an 'atoms' list")
        return AtomicSpectralMeasure(
            labels=tuple(str(a["label"]) for a in atoms),
            masses=np.array([float(a["mass"]) for a in atoms]),
            dims=np.array([int(a["dim"]) for a in atoms]),
        )

    def to_json(self) -> dict:
        return {
            "atoms": [
                {"label": l, "mass": float(m), "dim": int(d)}
                for l, m, d in zip(self.labels, self.masses, self.dims)
            ]
        }


# ---------------------------------------------------------------------------
# closed-form tail models
# ---------------------------------------------------------------------------


class RatioModel:
    """Closed-form model of the coefficient ratio a1(k)/a2(k) for all k.

    Subclasses that understand their own tails override the two assessment
    hooks; the base class declines to judge, yielding Inconclusive verdicts.
    """

    def ratio(self, k: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def tail_sphere(self, sphere_dim: int, last_k: int) -> tuple[Verdict, float | None]:
        """Verdict for the sphere sum with harmonic-dimension weights."""
        return Verdict.INCONCLUSIVE, None

    def tail_flat(self, last_n: int, weight_bound: float = 1.0) -> tuple[Verdict, float | None]:
        """Verdict for an atom sum whose dimensions stay below weight_bound."""
        return Verdict.INCONCLUSIVE, None


@dataclass(frozen=True)
class PowerLawRatio(RatioModel):
    """Ratio model ``a1(k)/a2(k) = 1 + c (k+1)^(-s)``.

    The squared deviation is ``c^2 (k+1)^(-2s)``.  With weights growing like
    ``(k+1)^p`` the series converges iff ``2s > p + 1``, which the integral
    test turns into an explicit tail bound.  Harmonic dimensions on S^{d-1}
    satisfy ``h(k) <= 2 (k+1)^(d-2)`` (and are bounded below by a positive
    multiple of the same power), so p = d - 2 on the sphere.
    """

    c: float
    s: float

    def __post_init__(self):
        if self.c <= -1.0:
            raise ContractError("ratio offset c must exceed -1 to keep coefficients positive")

    def ratio(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return 1.0 + self.c * (k + 1.0) ** (-self.s)

    def _tail(self, power: float, scale: float, last: int) -> tuple[Verdict, float | None]:
        if self.c == 0.0:
            return Verdict.FINITE, 0.0
        if 2.0 * self.s <= power + 1.0:
            return Verdict.DIVERGENT, None
        expo = power - 2.0 * self.s
        bound = scale * self.c**2 * (last + 1.0) ** (expo + 1.0) / (-expo - 1.0)
        return Verdict.FINITE, float(bound)

    def tail_sphere(self, sphere_dim: int, last_k: int) -> tuple[Verdict, float | None]:
        return self._tail(power=sphere_dim - 2.0, scale=2.0, last=last_k)

    def tail_flat(self, last_n: int, weight_bound: float = 1.0) -> tuple[Verdict, float | None]:
        return self._tail(power=0.0, scale=float(weight_bound), last=last_n)


@dataclass(frozen=True)
class ConstantRatio(RatioModel):
    """Constant ratio ``a1(k)/a2(k) = alpha``: finite only in the trivial case."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ContractError("constant ratio must be strictly positive")

    def ratio(self, k: np.ndarray) -> np.ndarray:
        return np.full(np.shape(k), self.alpha, dtype=float)

    def _tail(self) -> tuple[Verdict, float | None]:
        if self.alpha == 1.0:
            return Verdict.FINITE, 0.0
        return Verdict.DIVERGENT, None

    def tail_sphere(self, sphere_dim: int, last_k: int) -> tuple[Verdict, float | None]:
        return self._tail()

    def tail_flat(self, last_n: int, weight_bound: float = 1.0) -> tuple[Verdict, float | None]:
        return self._tail()


def ratio_model_from_json(obj: dict) -> RatioModel:
    """Build a tail model from ``{"type": "power", "c": ..., "s": ...}`` or
    ``{"type": "constant", "alpha": ...}``."""
    try:
        kind = obj["type"]
    except (TypeError, KeyError):
        raise ContractError("ratio model must be an object with a 'type' key")
    if kind == "power":
        return PowerLawRatio(c=float(obj["c"]), s=float(obj["s"]))
    if kind == "constant":
        return ConstantRatio(alpha=float(obj["alpha"]))
    raise ContractError(f"unknown ratio model type {kind!r}")


def spectra_from_ratio_model(
    model: RatioModel, sphere_dim: int, last_k: int
) -> tuple[SchoenbergSpectrum, SchoenbergSpectrum]:
    """Spectra (a1, a2) with a2 = 1 and a1 = ratio(k), for degrees 0..last_k."""
    ks = np.arange(last_k + 1)
    a2 = np.ones(last_k + 1)
    a1 = model.ratio(ks)
    if np.any(a1 < 0):
        raise ContractError("ratio model produced negative coefficients")
    return SchoenbergSpectrum(sphere_dim, a1), SchoenbergSpectrum(sphere_dim, a2)


# ---------------------------------------------------------------------------
# criterion sums
# ---------------------------------------------------------------------------


def _pad(coeffs: np.ndarray, length: int) -> np.ndarray:
    out = np.zeros(length)
    m = min(length, len(coeffs))
    out[:m] = coeffs[:m]
    return out


def sphere_equivalence_sum(
    s1: SchoenbergSpectrum,
    s2: SchoenbergSpectrum,
    last_k: int,
    tail_model: RatioModel | None = None,
) -> CriterionResult:
    """Weighted criterion sum ``sum_{k<=K} h(k) (1 - a1(k)/a2(k))^2``.

    Degrees absent from both spectra contribute zero; a degree present in
    exactly one raises :class:`AtomMismatchError`, since distinct supports
    already settle the dichotomy on the orthogonal side.  Without a tail
    model the stored lists are taken to be the whole spectra, so the sum is
    finite by construction; with a model the verdict and tail bound come
    from the model's analytic tail.
    """
    if s1.sphere_dim != s2.sphere_dim:
        raise ContractError("spectra must share the sphere dimension")
    if last_k < 0:
        raise ContractError("last_k must be nonnegative")
    a1 = _pad(s1.coeffs, last_k + 1)
    a2 = _pad(s2.coeffs, last_k + 1)
    only_one = (a1 > 0) != (a2 > 0)
    if np.any(only_one):
        k_bad = int(np.argmax(only_one))
        raise AtomMismatchError(
            f"spectra have different supports at degree {k_bad}; "
            "the distributions are orthogonal"
        )
    h = harmonic_dimensions(s1.sphere_dim, last_k)
    terms = np.zeros(last_k + 1)
    shared = a2 > 0
    terms[shared] = h[shared] * (1.0 - a1[shared] / a2[shared]) ** 2
    partial = np.cumsum(terms)
    if tail_model is None:
        verdict, tail = Verdict.FINITE, 0.0
    else:
        verdict, tail = tail_model.tail_sphere(s1.sphere_dim, last_k)
    return CriterionResult(
        indices=np.arange(last_k + 1),
        terms=terms,
        partial_sums=partial,
        final=float(partial[-1]),
        verdict=verdict,
        tail_bound=tail,
    )


def chow_sum(
    m1: AtomicSpectralMeasure,
    m2: AtomicSpectralMeasure,
    n_atoms: int,
    tail_model: RatioModel | None = None,
    tail_weight_bound: float | None = None,
) -> CriterionResult:
    """Dimension-weighted atom sum ``sum_{n<=N} d(a_n) (1 - m1/m2)^2``.

    The first ``n_atoms`` atoms of both measures must align label by label;
    any mismatch raises :class:`AtomMismatchError`.  With every dimension
    equal to one this reduces to the unweighted criterion for stationary
    processes on locally compact abelian groups.
    """
    if n_atoms < 1:
        raise ContractError("n_atoms must be >= 1")
    if len(m1) < n_atoms or len(m2) < n_atoms:
        raise ContractError("both measures must list at least n_atoms atoms")
    for i in range(n_atoms):
        if m1.labels[i] != m2.labels[i]:
            raise AtomMismatchError(
                f"atom {i} differs: {m1.labels[i]!r} vs {m2.labels[i]!r}; "
                "the distributions are orthogonal"
            )
    if np.any(m1.dims[:n_atoms] != m2.dims[:n_atoms]):
        raise ContractError("aligned atoms must carry equal dimensions")
    ratio = m1.masses[:n_atoms] / m2.masses[:n_atoms]
    terms = m1.dims[:n_atoms] * (1.0 - ratio) ** 2
    partial = np.cumsum(terms)
    if tail_model is None:
        verdict, tail = Verdict.FINITE, 0.0
    else:
        bound = float(tail_weight_bound) if tail_weight_bound is not None else float(np.max(m1.dims[:n_atoms]))
        verdict, tail = tail_model.tail_flat(n_atoms, weight_bound=bound)
    return CriterionResult(
        indices=np.arange(1, n_atoms + 1),
        terms=terms,
        partial_sums=partial,
        final=float(partial[-1]),
        verdict=verdict,
        tail_bound=tail,
    )


def check_shared_atoms(m1: AtomicSpectralMeasure, m2: AtomicSpectralMeasure) -> bool:
    """True iff the two measures carry exactly the same set of atom labels."""
    return set(m1.labels) == set(m2.labels)


def atomic_measure_from_spectrum(spectrum: SchoenbergSpectrum) -> AtomicSpectralMeasure:
    """Atomic measure induced by a spectrum: one atom per positive degree.

    Degree k maps to label ``"k<k>"``, dimension h(k) and mass a(k) h(k), the
    bookkeeping under which the sphere criterion is the atom criterion.
    """
    mask = spectrum.coeffs > 0
    ks = np.nonzero(mask)[0]
    if len(ks) == 0:
        raise ContractError("spectrum has no positive coefficients")
    h = spectrum.harmonic_dims[ks]
    return AtomicSpectralMeasure(
        labels=tuple(f"k{k}" for k in ks),
        masses=spectrum.coeffs[ks] * h,
        dims=h.astype(int),
    )


def criterion_to_csv(result: CriterionResult, path) -> None:
    """Write partial sums with header ``n,partial_sum``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "partial_sum"])
        for i, p in zip(result.indices, result.partial_sums):
            w.writerow([int(i), repr(float(p))])
