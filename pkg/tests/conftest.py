import pytest

from cvpurify import SqueezedStateSpec, calibrate_vp

# 3.55 dB of measured squeezing
VX_MEASURED = 10 ** (-3.55 / 10)


@pytest.fixture(scope="session")
def calibrated_spec():
    """Measured squeezing with antisqueezing fitted to a product of 7.6 at sigma = 0.304."""
    return SqueezedStateSpec(VX_MEASURED, calibrate_vp(VX_MEASURED, 0.304, 7.6))


_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record a one-line acceptance verdict; all lines print in the terminal summary."""

    def _report(tag, passed, detail):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {tag}: {detail}")
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
