from __future__ import annotations

from enum import IntEnum

EMPTY = 0


class Species(IntEnum):
    """Atom species. The integer values double as occupancy codes."""

    A = 1
    B = 2

    @property
    def other(self) -> "Species":
        return Species.B if self is Species.A else Species.A

    @classmethod
    def parse(cls, text: str) -> "Species":
        try:
            return cls[text.upper()]
        except KeyError:
            raise ValueError(f"unknown species {text!r}") from None


def other(code: int) -> int:
    """Swap species codes 1 <-> 2 without going through the enum."""
    return 3 - code
