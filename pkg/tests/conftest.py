import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from csm.fixtures import FIXTURES, load  # noqa: E402


@pytest.fixture(scope="session")
def scenarios() -> dict:
    """All well-formed bundled scenarios, parsed once."""
    return {name: load(name) for name in FIXTURES}
