"""Reproducible, splittable random streams."""

import numpy as np


class RngStream:
    """A PCG64 stream addressed by ``(seed, stream_id)`` plus an optional split path.

    Equal addresses replay bit-identical draw sequences; distinct addresses
    give statistically independent streams (numpy ``SeedSequence`` spawning).
    A stream is owned by exactly one chain or replicate and must not be
    shared across concurrent samplers.
    """

    __slots__ = ("seed", "stream_id", "path", "gen")

    def __init__(self, seed: int = 0, stream_id: int = 0, path: tuple = ()):
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream_id, *self.path)
        )
        self.gen = np.random.Generator(np.random.PCG64(ss))

    def split(self, index: int) -> "RngStream":
        """Derive an independent child stream, deterministic in ``index``."""
        return RngStream(self.seed, self.stream_id, self.path + (int(index),))

    @property
    def key(self) -> tuple:
        return (self.seed, self.stream_id) + self.path

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, path={self.path})"
