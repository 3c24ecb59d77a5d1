"""Worker pool plumbing owned by the command-line front end.

Computation functions accept a ``mapper`` with the signature of the builtin
``map``; results come back in submission order, so output never depends on
the number of workers.
"""

from __future__ import annotations

import contextlib
from concurrent.futures import ProcessPoolExecutor


@contextlib.contextmanager
def worker_map(workers: int = 1):
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield lambda fn, jobs: pool.map(fn, list(jobs))
