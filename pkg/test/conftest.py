import logging

import pytest

from hmcst_model.nfa import (build_next_nfa, build_nonroot_status_nfa,
                             build_root_status_nfa)
from hmcst_model.protocol import Protocol
from hmcst_model.topology import (Topology, nonroot_config, root_config,
                                  solo_config)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: exhaustive preset explorations (minutes)")


@pytest.fixture
def root_nfa():
    return build_root_status_nfa()


@pytest.fixture
def nonroot_nfa():
    return build_nonroot_status_nfa()


@pytest.fixture
def next_nfa():
    return build_next_nfa()


@pytest.fixture
def root():
    return root_config()


@pytest.fixture
def nonroot():
    return nonroot_config()


@pytest.fixture
def solo():
    """One thread alone on a single root level."""
    return solo_config(levels=1)


@pytest.fixture
def solo2():
    """One thread alone on a two-level tree."""
    return solo_config(levels=2)


@pytest.fixture
def pair():
    """Two threads on a single root level, one round each."""
    return root_config().with_overrides(thread_count=2, rounds=1)


@pytest.fixture
def protocol_for():
    def make(config, variant=None):
        topology = Topology(config.validate())
        return Protocol(topology) if variant is None else Protocol(topology, variant)
    return make


@pytest.fixture
def no_warnings(caplog):
    yield
    for when in ("setup", "call"):
        messages = [
            x.message for x in caplog.get_records(when) if x.levelno == logging.WARNING
        ]
        if messages:
            pytest.fail(
                "warning messages encountered during testing: {}".format(messages)
            )


@pytest.fixture
def logs_warning(caplog):
    yield
    messages = [
        x.message for x in caplog.get_records("call") if x.levelno == logging.WARNING
    ]
    if not messages:
        pytest.fail(
            f"No warning messages were logged: {messages}"
        )
