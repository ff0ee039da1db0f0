import time

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from torusmix.parallel import chunked, ordered_map
from torusmix.streams import stream_rng


def test_streams_are_deterministic_and_distinct():
    a = stream_rng(1, 2, 3).random(5)
    assert np.array_equal(a, stream_rng(1, 2, 3).random(5))
    assert not np.array_equal(a, stream_rng(1, 2, 4).random(5))
    assert not np.array_equal(a, stream_rng(2, 2, 3).random(5))
    assert not np.array_equal(stream_rng(0).random(5), stream_rng(0, 0).random(5))


def test_ordered_map_keeps_input_order():
    def slow_square(x):
        time.sleep(0.001 * (5 - x % 5))
        return x * x

    assert ordered_map(slow_square, range(20), threads=4) == [x * x for x in range(20)]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100), st.integers(1, 17))
def test_chunked_covers_range(n, size):
    blocks = chunked(n, size)
    assert [i for b in blocks for i in b] == list(range(n))
    assert all(len(b) <= size for b in blocks)
