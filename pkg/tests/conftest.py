import pytest

from mttequiv import TermStore


@pytest.fixture
def store():
    return TermStore()
