import pytest

from condsim import parse_network

from helpers import NET_A_SOURCE, NET_C_SOURCE


@pytest.fixture(scope="session")
def net_a():
    return parse_network(NET_A_SOURCE)


@pytest.fixture(scope="session")
def net_c():
    return parse_network(NET_C_SOURCE)


@pytest.fixture()
def net_a_path(tmp_path):
    path = tmp_path / "net_a.bnet"
    path.write_text(NET_A_SOURCE, encoding="utf-8")
    return str(path)


@pytest.fixture()
def net_c_path(tmp_path):
    path = tmp_path / "net_c.bnet"
    path.write_text(NET_C_SOURCE, encoding="utf-8")
    return str(path)
