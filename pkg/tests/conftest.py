import pytest

from dynsub import build_example, build_model, frequency_grid, oracle_frf

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def record():
    def _record(criterion: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
        return ok
    return _record


@pytest.fixture(scope="session")
def example():
    return build_example()


@pytest.fixture(scope="session")
def grid():
    return frequency_grid(20.0, 500.0, 0.25)


@pytest.fixture(scope="session")
def oracle_ab(example, grid):
    return oracle_frf(example[2], grid)


@pytest.fixture(scope="session")
def accel_models(example):
    return [build_model(example[0], "accel"), build_model(example[1], "accel")]


@pytest.fixture(scope="session")
def disp_models(example):
    return [build_model(example[0], "disp"), build_model(example[1], "disp")]

