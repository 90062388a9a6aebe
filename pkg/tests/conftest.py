import json
import pathlib

import numpy as np
import pytest

from parabranch import kernels as K

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def special_ref():
    return json.loads((FIXTURES / "special_reference.json").read_text())


def random_kernel(rng: np.random.Generator, z_floor: float = 1e-3) -> K.PartitionKernel:
    """One kernel drawn across all five families (seeded loops use this as
    the kernel zoo)."""
    fam = rng.integers(0, 5)
    if fam == 0:
        return K.Uniform()
    if fam == 1:
        return K.Equal()
    if fam == 2:
        return K.Deterministic(float(rng.uniform(z_floor, 0.5)))
    if fam == 3:
        return K.BetaSym(float(rng.uniform(-0.95, 30.0)))
    n = int(rng.integers(1, 6))
    zs = rng.uniform(z_floor, 0.5 - 1e-9, n)
    ws = rng.uniform(0.05, 1.0, n)
    ps = ws / (2.0 * ws.sum())
    return K.FinitePoint(tuple(zip(zs.tolist(), ps.tolist())))
