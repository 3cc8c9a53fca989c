from __future__ import annotations

import pytest
from hypothesis import settings

from cofl.fixtures import kernel_mini

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

# lines appended by the acceptance suite, echoed in the terminal summary
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def km():
    return kernel_mini()


@pytest.fixture(scope="session")
def km_lines(km):
    """Map statement id -> first source line for the kernel-mini model."""
    return {s.id: s.span.line_start for s in km.model}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
