import numpy as np
import pytest
from hypothesis import strategies as st

from magic_spread.pauli import PauliString


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pauli_strings(n_sites):
    """Hypothesis strategy for Hermitian strings on ``n_sites`` sites."""
    codes = st.lists(st.integers(0, 3), min_size=n_sites, max_size=n_sites)
    return st.builds(PauliString.from_codes, codes, st.sampled_from([1, -1]))
