import numpy as np
import pytest

from quasispin import build_frame


@pytest.fixture(scope="session")
def tetra():
    return build_frame("tetrahedron")


@pytest.fixture(scope="session")
def cardinal():
    return build_frame("cardinal6")


def random_axes(rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniform unit 3-vectors."""
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
