import os

import hypothesis.strategies as st
import pytest
from hypothesis import HealthCheck, settings

from oracle_lab.trees import parse_bracketed, random_tree

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

EXAMPLE_TREE = "(S (NP The public) (VP is (ADVP still) (ADJP cautious)) .)"

EXAMPLE_TOP_DOWN = (
    "NT_S NT_NP SH SH RE NT_VP SH NT_ADVP SH RE NT_ADJP SH RE RE SH RE"
).split()

EXAMPLE_IN_ORDER = (
    "SH NT_NP SH RE NT_S SH NT_VP SH NT_ADVP RE SH NT_ADJP RE RE SH RE FI"
).split()


@pytest.fixture
def example_tree():
    return parse_bracketed(EXAMPLE_TREE)


def trees(max_tokens=5, labels=("X", "Y", "Z")):
    """Hypothesis strategy for small random trees."""
    return st.builds(
        random_tree,
        st.integers(min_value=1, max_value=max_tokens),
        st.just(list(labels)),
        st.integers(min_value=0, max_value=10**6),
    )
