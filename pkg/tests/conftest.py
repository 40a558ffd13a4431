import itertools

import pytest


def brute_sumset(A, s, limit_n):
    return {sum(t) for t in itertools.product(sorted(set(A)), repeat=s) if sum(t) <= limit_n}


def brute_counts(A, s, limit_n):
    counts = {}
    for t in itertools.combinations_with_replacement(sorted(set(A)), s):
        if sum(t) <= limit_n:
            counts[sum(t)] = counts.get(sum(t), 0) + 1
    return counts


@pytest.fixture
def oracles():
    return {"sumset": brute_sumset, "counts": brute_counts}


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for the acceptance summary, then assert."""
    def record(number, ok, detail):
        ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
