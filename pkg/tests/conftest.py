import pytest

from uwarrant import FirmCapitalStructure, MarketObservables

# Filled by test_acceptance.py; echoed in the terminal summary.
ACCEPTANCE_LINES = []


@pytest.fixture
def example_cap():
    return FirmCapitalStructure(n_shares=50, m_warrants=100, k_ratio=1, j_payment=50)


@pytest.fixture
def example_mkt():
    return MarketObservables(stock_price=100, stock_vol=0.04, rate=0.04, horizon=3, drift=0.02)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
