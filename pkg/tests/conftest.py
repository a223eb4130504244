import numpy as np
import pytest

from fraclab import QuadratureSpec


@pytest.fixture(scope="session")
def fast_spec():
    """Lighter quadrature for unit tests. Acceptance runs the defaults."""
    return QuadratureSpec(radial_nodes=12, angular_order=8, mc_samples=20_000, rel_tol=1e-5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
