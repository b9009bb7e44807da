# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import pytest

def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: statistical checks over many pulses')

@pytest.fixture
def tmp_out(tmp_path):
    'Output prefix inside a temporary directory'
    return tmp_path / 'out'
