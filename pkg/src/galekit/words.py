"""Finite binary words, the standard enumeration, pairing, and sequence generators.

Words are plain Python strings over the characters 0 and 1; the empty
string is the empty word. The enumeration orders words by length and then
lexicographically, so indices 0, 1, 2, 3, ... name the words
"", "0", "1", "00", "01", ...
"""

from math import isqrt
from typing import Callable

Word = str

EMPTY: Word = ""


def lex_index(w: Word) -> int:
    """Position of w in the length-then-lexicographic enumeration."""
    # block of length L starts at index 2^L - 1; within the block the word
    # is read as a binary numeral
    return (1 << len(w)) - 1 + (int(w, 2) if w else 0)


def lex_word(i: int) -> Word:
    """Inverse of lex_index."""
    if i < 0:
        raise ValueError("enumeration index must be nonnegative")
    length = (i + 1).bit_length() - 1
    offset = i - ((1 << length) - 1)
    return format(offset, f"0{length}b") if length else EMPTY


def is_prefix(x: Word, y: Word) -> bool:
    """True iff y extends x (y = x + z for some word z)."""
    return y.startswith(x)


def pair(x: Word, y: Word) -> Word:
    """Bijective pairing of word pairs into words.

    Runs the Cantor diagonal pairing on enumeration indices, so both
    directions are polynomial-time and every word decodes uniquely.
    """
    m, n = lex_index(x), lex_index(y)
    return lex_word((m + n) * (m + n + 1) // 2 + n)


def unpair(z: Word) -> tuple[Word, Word]:
    """Inverse of pair."""
    k = lex_index(z)
    t = (isqrt(8 * k + 1) - 1) // 2  # diagonal number: t(t+1)/2 <= k
    n = k - t * (t + 1) // 2
    return lex_word(t - n), lex_word(n)


class SeqGen:
    """Deterministic generator of one infinite binary sequence.

    Bits are produced on demand and cached, so repeated queries agree and
    prefix(n) is always an initial segment of prefix(m) for n <= m.
    """

    def __init__(self, kind: str, *, bit_at: Callable[[int], str] | None = None,
                 grow: Callable[[int], Word] | None = None):
        if (bit_at is None) == (grow is None):
            raise ValueError("exactly one of bit_at/grow required")
        self.kind = kind
        self._bit_at = bit_at
        self._grow = grow
        self._cache: Word = EMPTY

    def prefix(self, n: int) -> Word:
        """First n bits."""
        if len(self._cache) < n:
            if self._grow is not None:
                grown = self._grow(n)
                if not grown.startswith(self._cache) or len(grown) < n:
                    raise ValueError("sequence supplier not prefix-coherent")
                self._cache = grown
            else:
                self._cache += "".join(self._bit_at(i) for i in range(len(self._cache), n))
        return self._cache[:n]

    def bit(self, n: int) -> str:
        """Bit at position n (0-based)."""
        return self.prefix(n + 1)[n]


def eventually_constant(head: Word, tail_bit: str) -> SeqGen:
    """head followed by tail_bit forever."""
    return SeqGen("eventually-constant",
                  bit_at=lambda i: head[i] if i < len(head) else tail_bit)


def periodic(pattern: Word) -> SeqGen:
    """pattern repeated forever; pattern must be nonempty."""
    if not pattern:
        raise ValueError("periodic pattern must be nonempty")
    return SeqGen("periodic", bit_at=lambda i: pattern[i % len(pattern)])


def finite_language_characteristic(members: frozenset[Word]) -> SeqGen:
    """Characteristic sequence of a finite set of words under the standard enumeration."""
    return SeqGen("finite-language-characteristic",
                  bit_at=lambda i: "1" if lex_word(i) in members else "0")
