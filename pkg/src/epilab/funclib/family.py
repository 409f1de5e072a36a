"""Indexed families ``n -> f_n`` together with a candidate limit."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .serialize import spec_from_json


@dataclass(eq=False)
class FunctionSeq:
    """A sequence of function oracles and its candidate limit.

    Members and limit only need ``dim`` and a vectorized ``values``; they are
    usually :class:`~epilab.funclib.nodes.ConvexSpec` trees, but slope
    functions and other non-convex oracles are accepted as well.
    """

    generator: Callable[[int], object]
    limit: object
    ladder: tuple[int, ...]
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.ladder = tuple(int(n) for n in self.ladder)
        if any(a >= b for a, b in zip(self.ladder, self.ladder[1:])) or not self.ladder:
            raise ValueError("index ladder must be nonempty and strictly increasing")
        if any(n < 1 for n in self.ladder):
            raise ValueError("indices are positive integers")

    @property
    def dim(self) -> int:
        return self.limit.dim

    def member(self, n: int):
        if n not in self._cache:
            f = self.generator(n)
            if f.dim != self.dim:
                raise ValueError(f"member {n} has dimension {f.dim}, limit has {self.dim}")
            self._cache[n] = f
        return self._cache[n]

    def tail(self) -> tuple[int, ...]:
        """Last third of the ladder (at least two rungs)."""
        k = max(2, -(-len(self.ladder) // 3))
        return self.ladder[-k:]

    def map(self, fn: Callable[[object], object]) -> "FunctionSeq":
        """Family ``n -> fn(f_n)`` with limit ``fn(f)``."""
        return FunctionSeq(lambda n: fn(self.member(n)), fn(self.limit), self.ladder)

    @classmethod
    def from_json(cls, member: dict, limit: dict, ladder, dim: int) -> "FunctionSeq":
        return cls(lambda n: spec_from_json(member, n, dim), spec_from_json(limit, None, dim), tuple(ladder))
