import os
from itertools import combinations

import numpy as np
import pytest

from polycheck.model import PolyhedralModelFile, SimplexRecord, build_poset, read_model
from polycheck.synthetic import strip_model

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURES, name)


def read_labels(name):
    with open(fixture_path(name), encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f if line.strip()]


def random_complex(rng, points=6, tops=4, atoms=("p", "q", "r"), max_dim=2, atom_probability=0.4):
    """Small random simplicial complex, cells in shuffled order."""
    faces = set()
    for _ in range(tops):
        k = int(rng.integers(1, max_dim + 2))
        top = sorted(rng.choice(points, size=k, replace=False).tolist())
        for m in range(1, k + 1):
            faces.update(combinations(top, m))
    ordered = sorted(faces, key=lambda f: (len(f), f))
    ordered = [ordered[i] for i in rng.permutation(len(ordered))]
    simplexes = [
        SimplexRecord(f"S{i}", list(face), [a for a in atoms if rng.random() < atom_probability])
        for i, face in enumerate(ordered)
    ]
    coords = rng.random((points, 3)).tolist()
    return PolyhedralModelFile(list(atoms), points, coords, simplexes)


@pytest.fixture
def strip():
    return strip_model()


@pytest.fixture
def strip_poset():
    return build_poset(read_model(fixture_path("strip.json")))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_random_complex():
    return random_complex
