import time

import pytest

_LINES: list[str] = []


class Criterion:
    """Times one acceptance criterion and records a PASS/FAIL line."""

    def __init__(self, number: int, title: str, bound: float):
        self.number, self.title, self.bound = number, title, bound
        self.checks: list[tuple[str, bool]] = []

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def check(self, label: str, ok: bool) -> bool:
        self.checks.append((label, bool(ok)))
        return bool(ok)

    def __exit__(self, exc_type, exc, tb):
        self.elapsed = time.perf_counter() - self.start
        self.check(f"runtime {self.elapsed:.2f}s < {self.bound:g}s", self.elapsed < self.bound)
        ok = exc_type is None and all(ok for _, ok in self.checks)
        bad = [label for label, good in self.checks if not good]
        detail = "; ".join(bad) if bad else "; ".join(label for label, _ in self.checks)
        if exc_type is not None:
            detail = f"error {exc_type.__name__}: {exc}"
        line = f"criterion {self.number:2d} {'PASS' if ok else 'FAIL'}  {self.title}: {detail}"
        _LINES.append(line)
        print(line)
        return False

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES):
            terminalreporter.write_line(line)
