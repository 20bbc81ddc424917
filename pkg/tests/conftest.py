import contextlib
import time

import pytest

from satsynth.solve import SolverConfig, find_solver

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture(scope="session")
def solver():
    exe = find_solver()
    if exe is None:
        pytest.skip("no SAT solver available (install kissat or set SATSYNTH_SOLVER)")
    return SolverConfig(exe)


@pytest.fixture
def criterion(request):
    """``with criterion(n, title, limit):`` times the block and records PASS/FAIL."""
    lines = request.config.stash[_LINES]

    @contextlib.contextmanager
    def run(num, title, limit):
        t0 = time.monotonic()
        try:
            yield
        except BaseException as exc:
            lines.append(f"FAIL {num:>2} {title} ({time.monotonic() - t0:.1f}s): {type(exc).__name__}: {exc}"[:300])
            raise
        elapsed = time.monotonic() - t0
        ok = elapsed < limit
        lines.append(f"{'PASS' if ok else 'FAIL'} {num:>2} {title} ({elapsed:.1f}s, limit {limit:g}s)")
        assert ok, f"criterion {num} took {elapsed:.1f}s, limit {limit:g}s"

    return run


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1])):
        terminalreporter.write_line(line)
