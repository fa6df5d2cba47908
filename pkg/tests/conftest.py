import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_membership(rng, d, n=1):
    """Random element of (A+B+I)^{(x)n} built from random site factors."""
    from gbitlab.subspaces import site_superoperator
    from gbitlab.tensor import apply_site_maps

    D = (d + 1) ** n
    M = rng.standard_normal((D, D))
    return apply_site_maps(M, [site_superoperator("ABI", d)] * n, d + 1)
