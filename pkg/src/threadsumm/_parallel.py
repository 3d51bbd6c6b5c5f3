from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from itertools import islice
from typing import Callable, Iterable, Iterator, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1,
                batch_size: int = 256) -> Iterator[R]:
    """Map ``fn`` over ``items`` with up to ``jobs`` worker processes.

    Results come back in input order whatever ``jobs`` is. Input is consumed
    in bounded batches so lazy sources stay lazy.
    """
    if jobs <= 1:
        yield from map(fn, items)
        return
    it = iter(items)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        while True:
            batch = list(islice(it, batch_size * jobs))
            if not batch:
                break
            chunk = max(1, len(batch) // (jobs * 4))
            yield from pool.map(fn, batch, chunksize=chunk)
