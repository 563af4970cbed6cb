"""Hypothesis strategies shared by the property tests."""

from hypothesis import strategies as st

from condent.states import sample_random

seeds = st.integers(min_value=0, max_value=2**63 - 1)
small_dims = st.tuples(st.integers(1, 3), st.integers(1, 3))
bipartite_dims = st.tuples(st.integers(2, 3), st.integers(2, 3))


@st.composite
def states(draw, dims=bipartite_dims, kind="ginibre"):
    return sample_random(draw(dims), kind, draw(seeds))
