"""Seedable counter-based sampling state.

Philox is a counter-based generator, so a state is fully determined by its
128-bit key, and independent streams come from independent keys. Child
states are forked by hashing the parent key together with integer labels;
the embedder forks once per (gadget, block, attempt), which makes every
candidate attempt reproducible and order-independent.
"""

from __future__ import annotations

import hashlib

from numpy.random import Generator, Philox

_U64 = (1 << 64) - 1


_KEY_MASK = (1 << 128) - 1


def _key_from_labels(root: int, labels: tuple[int, ...]) -> int:
    payload = root.to_bytes(32, "big", signed=False)
    for lab in labels:
        payload += lab.to_bytes(8, "big", signed=False)
    digest = hashlib.sha256(b"pdws-rng|" + payload).digest()
    return int.from_bytes(digest[:16], "big")


class SamplerState:
    """A forkable stream of uniform variates backed by Philox."""

    __slots__ = ("seed", "_labels", "_gen")

    def __init__(self, seed: int, _labels: tuple[int, ...] = ()):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = seed
        self._labels = _labels
        self._gen = None

    @property
    def generator(self) -> Generator:
        if self._gen is None:
            key = self.seed if not self._labels else _key_from_labels(self.seed, self._labels)
            self._gen = Generator(Philox(key=key & _KEY_MASK))
        return self._gen

    def fork(self, *labels: int) -> "SamplerState":
        """Independent child stream; equal (seed, labels) gives equal streams."""
        child = SamplerState.__new__(SamplerState)
        child.seed = self.seed
        child._labels = self._labels + labels
        child._gen = None
        return child

    def random(self) -> float:
        return float(self.generator.random())

    def randbelow(self, n: int) -> int:
        return int(self.generator.integers(0, n))

    def randbytes(self, n: int) -> bytes:
        return self.generator.bytes(n)
