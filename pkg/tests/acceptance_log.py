"""Shared record of acceptance outcomes, printed at the end of the session."""

import time
from contextlib import contextmanager

# criterion number -> (title, "PASS" | "FAIL", seconds, note)
RESULTS = {}


@contextmanager
def criterion(n, title, limit=None):
    """Record PASS/FAIL for one criterion; a time limit is part of the check."""
    start = time.perf_counter()
    note = ""
    try:
        yield
    except BaseException as exc:
        RESULTS[n] = (title, "FAIL", time.perf_counter() - start, str(exc).splitlines()[0][:120] if str(exc) else type(exc).__name__)
        print(f"FAIL criterion {n}: {title}")
        raise
    secs = time.perf_counter() - start
    if limit is not None and secs > limit:
        note = f"took {secs:.1f}s, limit {limit}s"
        RESULTS[n] = (title, "FAIL", secs, note)
        print(f"FAIL criterion {n}: {title} ({note})")
        raise AssertionError(note)
    RESULTS[n] = (title, "PASS", secs, note)
    print(f"PASS criterion {n}: {title} ({secs:.1f}s)")
