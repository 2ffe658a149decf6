import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from samegibbs.io import bundled_network_path, load_network_file


@pytest.fixture(scope="session")
def koller():
    """The bundled five-variable student network with its true CPTs."""
    return load_network_file(bundled_network_path("koller"))
