"""Reduced words in a free group on index-labelled generators.

A letter is a pair ``(i, e)`` with generator index ``i >= 0`` and sign
``e = +1 / -1``.  Words are immutable and always freely reduced.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

Letter = tuple[int, int]


def _reduce_letters(raw: Iterable[Letter]) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for i, e in raw:
        i, e = int(i), int(e)
        if e not in (1, -1):
            raise ValueError(f"letter sign must be +1 or -1, got {e}")
        if stack and stack[-1][0] == i and stack[-1][1] == -e:
            stack.pop()
        else:
            stack.append((i, e))
    return tuple(stack)


@dataclass(frozen=True)
class Word:
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", _reduce_letters(self.letters))

    @classmethod
    def identity(cls) -> "Word":
        return cls(())

    @classmethod
    def generator(cls, i: int, sign: int = 1) -> "Word":
        return cls(((i, sign),))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def is_identity(self) -> bool:
        return not self.letters

    def __mul__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __invert__(self) -> "Word":
        return invert(self)

    def relabel(self, mapping: Mapping[int, int]) -> "Word":
        return Word(tuple((mapping[i], e) for i, e in self.letters))

    def drop(self, index: int) -> "Word":
        """Image under the map killing generator ``index``."""
        return Word(tuple(l for l in self.letters if l[0] != index))

    def format(self, labels: Mapping[int, str] | None = None) -> str:
        if not self.letters:
            return "e"
        out = []
        for i, e in self.letters:
            name = labels[i] if labels is not None else str(i)
            out.append(f"g{name}" if e == 1 else f"g{name}^-1")
        return " ".join(out)

    def __str__(self) -> str:
        return self.format()


def reduce(raw: Iterable[Letter]) -> Word:
    return Word(tuple(raw))


def concat(a: Word, b: Word) -> Word:
    return Word(a.letters + b.letters)


def invert(a: Word) -> Word:
    return Word(tuple((i, -e) for i, e in reversed(a.letters)))


_TOKEN = re.compile(r"^g(\d+)(?:\^(-?1))?$")


def parse_word(text: str) -> Word:
    """Inverse of ``str(word)``: ``"g3 g7^-1 g3"``, identity as ``"e"``."""
    text = text.strip()
    if text in ("", "e"):
        return Word()
    letters = []
    for tok in text.split():
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError(f"bad word token {tok!r}")
        letters.append((int(m.group(1)), int(m.group(2) or 1)))
    return Word(tuple(letters))
