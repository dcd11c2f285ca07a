"""
Shared pytest fixtures for the WLP engine tests.
"""

import logging

import numpy as np
import pytest

from wlp.corpus import load_fixture
from wlp.logging_setup import ROOT_LOGGER


@pytest.fixture(autouse=True)
def reset_engine_logger():
    """The CLI installs its own handlers with propagate=False; undo that."""
    yield
    logger = logging.getLogger(ROOT_LOGGER)
    logger.handlers = []
    logger.propagate = True
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def graph4():
    return load_fixture('graph4').combined()


@pytest.fixture
def fsa6():
    return load_fixture('fsa6').combined()


@pytest.fixture
def fsa6_01():
    return load_fixture('fsa6_01').combined()
