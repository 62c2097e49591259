import numpy as np
import pytest

from pafparse.core import TREE, Scene, Topology, topology_preset


@pytest.fixture
def chain3():
    """Three parts in a line: head - mid - tail."""
    return Topology(("head", "mid", "tail"), ((0, 1), (1, 2)), TREE, (0, 1))


@pytest.fixture
def mpii():
    return topology_preset("mpii14")


@pytest.fixture
def two_person_scene(chain3):
    """Two well separated vertical chains on a 64x64 canvas."""
    a = np.array([[20.0, 10.0], [20.0, 25.0], [20.0, 40.0]])
    b = np.array([[44.0, 12.0], [44.0, 27.0], [44.0, 42.0]])
    return Scene(64, 64, [a, b])
