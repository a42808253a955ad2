"""Fixtures compartilhadas da suíte do laboratório."""

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "scripts"))
sys.path.insert(0, str(ROOT))

from homology import get_lattice  # noqa: E402


@pytest.fixture
def rng():
    """Gerador semeado (resultados reprodutíveis)."""
    return np.random.default_rng(12345)


@pytest.fixture
def lattice2():
    return get_lattice(2)


@pytest.fixture
def lattice3():
    return get_lattice(3)


@pytest.fixture
def lattice4():
    return get_lattice(4)


@pytest.fixture(params=[2, 3, 4])
def lattice(request):
    """Toros pequenos de lado 2, 3 e 4."""
    return get_lattice(request.param)
