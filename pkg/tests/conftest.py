import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from linktomo.graph import build_extended_graph, build_graph

K4_LINKS = [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")]
F1_TRUTH = {
    ("a", "b"): 1.0,
    ("a", "c"): 2.0,
    ("a", "d"): 3.0,
    ("b", "c"): 4.0,
    ("b", "d"): 5.0,
    ("c", "d"): 6.0,
}


@pytest.fixture(scope="session")
def f1_graph():
    return build_graph(["a", "b", "c", "d"], K4_LINKS)


@pytest.fixture(scope="session")
def f1_extended(f1_graph):
    return build_extended_graph(f1_graph, ["a", "b", "c"])


@pytest.fixture(scope="session")
def f1_pipeline(f1_extended):
    from linktomo.paths import build_pipeline

    return build_pipeline(f1_extended)


@pytest.fixture(scope="session")
def f1_truth():
    return dict(F1_TRUTH)
