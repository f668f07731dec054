import logging

import pytest

from coillink.logger import PACKAGE_LOGGER_NAME
from coillink.lsk_analysis import MismatchSpec
from coillink.presets import get_preset

PARASITIC = 12e-12
CORRECTED_C_S1 = 17.03e-12


@pytest.fixture(autouse=True)
def reset_package_logger():
    """CLI runs attach handlers to the package logger; undo that between tests"""
    yield
    logger = logging.getLogger(PACKAGE_LOGGER_NAME)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    logger.propagate = True
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def flat():
    return get_preset("flat")


@pytest.fixture
def bended():
    return get_preset("bended")


@pytest.fixture
def parasitic(flat):
    """Flat preset with a 12 pF parasitic across the secondary tank"""
    return flat.with_c_p(PARASITIC)


@pytest.fixture
def primary_mismatch():
    return MismatchSpec(c_p_override=PARASITIC, c_s1_relative_error=0.01)
