import numpy as np
import pytest


def make_spd(rng, n, eig_lo=0.5, eig_hi=2.0):
    """Well-conditioned random SPD matrix with eigenvalues in [eig_lo, eig_hi]."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigs = rng.uniform(eig_lo, eig_hi, n)
    a = (q * eigs) @ q.T
    return (a + a.T) / 2.0


def random_unit_vectors(rng, m, d):
    v = rng.standard_normal((m, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
