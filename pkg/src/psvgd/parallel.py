"""Shared-memory worker pool with fixed row partitioning.

Every data-parallel phase splits the particle rows into fixed-size chunks.
The chunk layout depends only on the row count and ``chunk_size``, never on
the number of workers, so each chunk is computed by exactly the same numpy
calls whichever worker picks it up.  Results are therefore bitwise identical
for any worker count.  Returning from :meth:`WorkerPool.fill` is the barrier
that separates one phase from the next.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from psvgd.errors import ConfigurationError

DEFAULT_CHUNK = 16


class WorkerPool:
    def __init__(self, workers=1, chunk_size=DEFAULT_CHUNK):
        if workers < 1:
            raise ConfigurationError("need at least one worker")
        if chunk_size < 1:
            raise ConfigurationError("chunk size must be positive")
        self.workers = int(workers)
        self.chunk_size = int(chunk_size)
        self._executor = ThreadPoolExecutor(max_workers=self.workers) if self.workers > 1 else None

    def chunks(self, n_rows):
        return [slice(start, min(start + self.chunk_size, n_rows)) for start in range(0, n_rows, self.chunk_size)]

    def fill(self, fn, n_rows, out=None):
        """Evaluate ``fn(rows)`` on every chunk and stack the row blocks.

        ``fn`` receives a slice and returns an array whose leading axis
        matches the slice length.  Workers write into disjoint row ranges.
        """
        chunks = self.chunks(n_rows)
        if self._executor is None:
            blocks = [fn(rows) for rows in chunks]
        else:
            blocks = list(self._executor.map(fn, chunks))
        if out is None:
            first = np.asarray(blocks[0])
            out = np.empty((n_rows,) + first.shape[1:], dtype=first.dtype)
        for rows, block in zip(chunks, blocks):
            out[rows] = block
        return out

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


_SERIAL = None


def serial_pool():
    """Process-wide single-worker pool used when callers pass none."""
    global _SERIAL
    if _SERIAL is None:
        _SERIAL = WorkerPool(1)
    return _SERIAL
