import numpy as np
import pytest
from hypothesis import strategies as st

from stabneg import Bipartition, CommutationMatrix, PauliOperator, StabilizerModel


def bell_model(t=1.0) -> StabilizerModel:
    gens = (PauliOperator.from_string("XX"), PauliOperator.from_string("ZZ"))
    return StabilizerModel(gens, (t, t), Bipartition(2, {0}))


@pytest.fixture
def bell():
    return bell_model()


def random_c(rng: np.random.Generator, k: int, density: float = 0.5) -> CommutationMatrix:
    upper = np.triu(rng.random((k, k)) < density, 1).astype(np.uint8)
    return CommutationMatrix(upper + upper.T)


@st.composite
def commutation_matrices(draw, max_k=8, max_edges=None):
    k = draw(st.integers(1, max_k))
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    flags = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    chosen = [p for p, f in zip(pairs, flags) if f]
    if max_edges is not None:
        chosen = chosen[:max_edges]
    bits = np.zeros((k, k), dtype=np.uint8)
    for i, j in chosen:
        bits[i, j] = bits[j, i] = 1
    return CommutationMatrix(bits)


def couplings_for(k):
    return st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=k, max_size=k)
