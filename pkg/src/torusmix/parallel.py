"""Order-preserving task map used by every ensemble loop."""

from concurrent.futures import ThreadPoolExecutor


def ordered_map(fn, items, threads: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool.

    Results come back in input order, and every task derives its own random
    stream, so the output never depends on ``threads``.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def chunked(n: int, size: int):
    """Consecutive ``range`` blocks covering ``0..n-1``."""
    return [range(i, min(i + size, n)) for i in range(0, n, size)]
