import pytest

from helpers import SSH


@pytest.fixture
def ssh_source():
    return SSH
