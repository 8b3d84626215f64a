import numpy as np
import pytest

from subspline import cases
from subspline.extended_system import build_extended_system

ACCEPTANCE_LINES = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = "criterion %2d: %s  %s" % (number, "PASS" if ok else "FAIL", detail)
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(2024))


def system_of(cfg, **kw):
    return build_extended_system(cfg.spaces, cfg.geometry, **kw)


@pytest.fixture(scope="session")
def nested_patches_sys():
    return system_of(cases.nested_patches(2, 4))


@pytest.fixture(scope="session")
def polar_sys():
    return system_of(cases.polar_three_patch(2, 0))
