import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hiddenrole.games import card_game, matching_pennies  # noqa: E402
from hiddenrole.transform import build_mediator_game  # noqa: E402


@pytest.fixture(scope="session")
def mp3():
    return build_mediator_game(matching_pennies(3))


@pytest.fixture(scope="session")
def cards():
    return build_mediator_game(card_game(False))
