"""Process-wide operation counters used by tests and the benchmark harness."""

from collections import Counter

COUNTERS: Counter = Counter()


def snapshot() -> dict:
    return dict(COUNTERS)


def reset(*keys) -> None:
    """Zero the given counters, or all of them when called without arguments."""
    if not keys:
        COUNTERS.clear()
        return
    for key in keys:
        COUNTERS.pop(key, None)
