"""Weighted generator alphabets and plain words.

An alphabet bundles the surface parameters (g, n) and fixes the generator
order x_1 < ... < x_g < y_1 < ... < y_g < z_1 < ... < z_n for good.  The
x and y generators have weight 1, the z generators weight 2.  Letters are
represented as integers 0 .. 2g+n-1 in that order, words as tuples of
letters.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Alphabet:
    g: int
    n: int

    def __post_init__(self):
        if self.g < 0 or self.n < 0:
            raise ValueError("genus and boundary count must be nonnegative")

    @property
    def size(self) -> int:
        return 2 * self.g + self.n

    def letters(self):
        return range(self.size)

    def weight(self, letter: int) -> int:
        if not 0 <= letter < self.size:
            raise ValueError(f"letter {letter} out of range for {self}")
        return 2 if letter >= 2 * self.g else 1

    def word_weight(self, word) -> int:
        if self.n == 0:
            return len(word)
        first_z = 2 * self.g
        w = len(word)
        for letter in word:
            if letter >= first_z:
                w += 1
        return w

    def x(self, i: int) -> int:
        if not 1 <= i <= self.g:
            raise ValueError(f"x_{i} not in alphabet {self}")
        return i - 1

    def y(self, i: int) -> int:
        if not 1 <= i <= self.g:
            raise ValueError(f"y_{i} not in alphabet {self}")
        return self.g + i - 1

    def z(self, j: int) -> int:
        if not 1 <= j <= self.n:
            raise ValueError(f"z_{j} not in alphabet {self}")
        return 2 * self.g + j - 1

    def z_letters(self):
        return [2 * self.g + j for j in range(self.n)]

    def name(self, letter: int) -> str:
        if not 0 <= letter < self.size:
            raise ValueError(f"letter {letter} out of range for {self}")
        if letter < self.g:
            return f"x{letter + 1}"
        if letter < 2 * self.g:
            return f"y{letter - self.g + 1}"
        return f"z{letter - 2 * self.g + 1}"

    def letter(self, name: str) -> int:
        kind, _, idx = name[0], name, name[1:]
        if kind not in "xyz" or not idx.isdigit():
            raise ValueError(f"unknown generator name {name!r}")
        i = int(idx)
        if kind == "x":
            return self.x(i)
        if kind == "y":
            return self.y(i)
        return self.z(i)

    def format_word(self, word) -> str:
        return " ".join(self.name(l) for l in word)

    def parse_word(self, text: str):
        return tuple(self.letter(tok) for tok in text.split())


def rotations(word):
    return [word[i:] + word[:i] for i in range(len(word))]


def canonical_rotation(word):
    """Lexicographically least rotation; the canonical cyclic representative."""
    return min(rotations(word))


def same_context(a, b):
    return a.alphabet == b.alphabet and a.cut == b.cut
