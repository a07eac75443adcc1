"""Coverings by words and their exchange with betting strategies.

A cover oracle answers queries (A, i) with a word of length A[i] (or None
in partial mode); a family of sequences is covered when every member
extends some emitted word. Winning betting strategies yield covers by
scanning for high-capital words at scheduled lengths, and covers yield
winning strategies by riding the emitted words.
"""

from fractions import Fraction
from typing import Iterable

from .countable import prefix_free_shorter
from .errors import CapExceeded, ConfigError, ContractViolation
from .gales import CapitalFn, OddsFunctional
from .measures import f_O, g_O, oddsprod
from .rules import (EMPTY, OddsFrequent, OddsLength, OddsRule, ONE, SeqGen, Word,
                    _check_word)

ZERO = Fraction(0)
TWO = Fraction(2)


class CoverOracle:
    """Answers emit(A, i): a word of length A[i], or None in partial mode."""

    mode = "total"

    def emit(self, A: list[int], i: int):
        raise NotImplementedError


class SeqCover(CoverOracle):
    """Always covers one fixed sequence: emits its prefix of the asked length."""

    def __init__(self, S: SeqGen):
        self.S = S

    def emit(self, A: list[int], i: int) -> Word:
        return self.S.prefix(A[i])


class TableCover(CoverOracle):
    """Explicit index -> word table; missing answers make it partial."""

    def __init__(self, entries: dict[int, Word], mode: str = "total"):
        if mode not in ("total", "partial"):
            raise ConfigError(f"unknown cover mode {mode!r}")
        self.mode = mode
        self.entries = {int(i): (None if w is None else _check_word(w))
                        for i, w in entries.items()}
        if mode == "total" and any(w is None for w in self.entries.values()):
            raise ConfigError("a total cover table cannot hold missing answers")

    def emit(self, A: list[int], i: int):
        answer = self.entries.get(int(i))
        if answer is None:
            if self.mode == "total":
                raise ContractViolation(f"total cover has no answer at index {i}")
            return None
        if len(answer) != A[i]:
            raise ContractViolation(
                f"cover answer at index {i} has length {len(answer)}, asked {A[i]}")
        return answer


def _check_lengths(A: list[int]) -> list[int]:
    A = [int(a) for a in A]
    if not A or any(a <= 0 for a in A) or any(b <= a for a, b in zip(A, A[1:])):
        raise ContractViolation("length schedule must be positive and strictly increasing")
    return A


# ---------------------------------------------------------------------------
# scanning for high-capital words


def _lex_level(n: int) -> Iterable[Word]:
    if n == 0:
        yield EMPTY
        return
    for i in range(1 << n):
        yield format(i, f"0{n}b")


def _scan_hits(d: CapitalFn, length: int, threshold: Fraction, strict: bool,
               scan_cap: int, mode: str):
    """Lex-ordered words of the given length whose capital clears the threshold.

    Exhaustive when the level fits the scan cap; otherwise restricted to
    the strategy's declared support (sound: capital is zero off-support,
    and the threshold is positive). Returns (hits, stats) or (None, stats)
    when a partial-mode scan is impossible.
    """
    if (1 << length) <= scan_cap:
        candidates = _lex_level(length)
        evals = 1 << length
        how = "brute"
    else:
        support = d.support_at(length)
        if support is None:
            if mode == "partial":
                return None, {"how": "skipped", "evals": 0}
            raise CapExceeded(
                f"level {length} exceeds the scan cap and the strategy declares no support")
        candidates = sorted(set(support))
        evals = len(candidates)
        how = "sparse"
    if strict:
        hits = [w for w in candidates if d.value(w) > threshold]
    else:
        hits = [w for w in candidates if d.value(w) >= threshold]
    return hits, {"how": how, "evals": evals}


def _auto_threshold(root_value: Fraction) -> Fraction:
    t = ONE
    while root_value / t >= 1:
        t *= TWO
    return t


def parse_cover_obj(obj: dict) -> CoverOracle:
    """Build a cover oracle from a decoded config tree."""
    from .rules import parse_rule_obj
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("cover config must be an object with a 'kind' tag")
    kind = obj["kind"]
    if kind == "cover-seq":
        seq = parse_rule_obj(obj.get("seq", {"kind": "?"}))
        if not isinstance(seq, SeqGen):
            raise ConfigError("cover-seq needs a sequence under 'seq'")
        return SeqCover(seq)
    if kind == "cover-table":
        entries = obj.get("entries", {})
        if not isinstance(entries, dict):
            raise ConfigError("cover-table needs an 'entries' object")
        return TableCover({int(i): w for i, w in entries.items()},
                          obj.get("mode", "total"))
    raise ConfigError(f"unknown cover kind {kind!r}")


# ---------------------------------------------------------------------------
# extraction: geometric block schedule


class ExtractedCover(CoverOracle):
    """Cover extracted from a betting strategy on a geometric block schedule.

    Index blocks double in size: block n holds indices 2^(n+1)-2 through
    2^(n+2)-3, and its scan length is the last scheduled length of the
    block. The induced odds double capital exactly at scan lengths, so a
    winning strategy must push many words over the threshold there; the
    i-th index emits the (i - 2^(n+1) + 3)-rd hit, cut to length A[i].
    """

    def __init__(self, F: OddsFunctional, A: list[int], mode: str = "total",
                 scan_cap: int = 1 << 14, threshold: Fraction | None = None):
        if mode not in ("total", "partial"):
            raise ConfigError(f"unknown cover mode {mode!r}")
        self.mode = mode
        self.A = _check_lengths(A)
        self.blocks = 0
        while (1 << (self.blocks + 2)) - 3 <= len(self.A) - 1:
            self.blocks += 1
        if self.blocks == 0:
            raise ContractViolation("length schedule too short for even one block")
        self.scan_lengths = [self.A[(1 << (n + 2)) - 3] for n in range(self.blocks)]
        self.odds = OddsLength({m: TWO for m in self.scan_lengths}, ONE, "{1,2}")
        self.capital = F.build(self.odds)
        self.threshold = (_auto_threshold(self.capital.value(EMPTY))
                          if threshold is None else Fraction(threshold))
        self.scan_cap = int(scan_cap)
        self._hits: dict[int, list[Word] | None] = {}
        self.block_stats: dict[int, dict] = {}

    def _block_of(self, i: int) -> tuple[int, int]:
        if not 0 <= i < len(self.A):
            raise ContractViolation(f"index {i} outside the length schedule")
        n = (i + 2).bit_length() - 2
        if n >= self.blocks:
            raise ContractViolation(f"index {i} falls beyond the last complete block")
        return n, i - (1 << (n + 1)) + 3

    def hits(self, n: int):
        if n not in self._hits:
            found, stats = _scan_hits(self.capital, self.scan_lengths[n], self.threshold,
                                      False, self.scan_cap, self.mode)
            self._hits[n] = found
            self.block_stats[n] = stats
        return self._hits[n]

    def emit(self, A: list[int], i: int):
        if list(A) != self.A:
            raise ContractViolation("this cover answers only its extraction schedule")
        n, c = self._block_of(i)
        hits = self.hits(n)
        if hits is None or c > len(hits):
            return "0" * self.A[i] if self.mode == "total" else None
        return hits[c - 1][:self.A[i]]


def extract_cover(F: OddsFunctional, A: list[int], mode: str = "total",
                  scan_cap: int = 1 << 14, threshold: Fraction | None = None) -> ExtractedCover:
    """Extract a cover on the geometric block schedule from a betting strategy."""
    return ExtractedCover(F, A, mode, scan_cap, threshold)


# ---------------------------------------------------------------------------
# extraction: triangular block schedule


def _triangle_block(i: int) -> tuple[int, int]:
    n = 0
    while n * (n + 1) // 2 + n < i:
        n += 1
    return n, i - n * (n + 1) // 2 + 1


class FrequentExtractedCover(CoverOracle):
    """Cover extracted on the triangular schedule: block n holds n+1 indices.

    The induced odds grow capital by (n+2)/(n+1) at block n's scan length,
    so the total growth to block n is n+2; words strictly over the
    threshold there number at most n+1, and all of them are emitted across
    the block's indices.
    """

    def __init__(self, F: OddsFunctional, A: list[int], mode: str = "total",
                 scan_cap: int = 1 << 14, threshold: Fraction | None = None):
        if mode not in ("total", "partial"):
            raise ConfigError(f"unknown cover mode {mode!r}")
        self.mode = mode
        self.A = _check_lengths(A)
        self.blocks = 0
        while (self.blocks + 1) * (self.blocks + 2) // 2 + self.blocks + 1 <= len(self.A) - 1:
            self.blocks += 1
        self.blocks += 1  # block 0 needs only index 0
        self.scan_lengths = [self.A[n * (n + 1) // 2 + n] for n in range(self.blocks)]
        self.odds = OddsFrequent(self.scan_lengths)
        self.capital = F.build(self.odds)
        self.threshold = (_auto_threshold(self.capital.value(EMPTY))
                          if threshold is None else Fraction(threshold))
        self.scan_cap = int(scan_cap)
        self._hits: dict[int, list[Word] | None] = {}
        self.block_stats: dict[int, dict] = {}

    def hits(self, n: int):
        if n not in self._hits:
            found, stats = _scan_hits(self.capital, self.scan_lengths[n], self.threshold,
                                      True, self.scan_cap, self.mode)
            self._hits[n] = found
            self.block_stats[n] = stats
        return self._hits[n]

    def emit(self, A: list[int], i: int):
        if list(A) != self.A:
            raise ContractViolation("this cover answers only its extraction schedule")
        if not 0 <= i < len(self.A):
            raise ContractViolation(f"index {i} outside the length schedule")
        n, c = _triangle_block(i)
        if n >= self.blocks:
            raise ContractViolation(f"index {i} falls beyond the last complete block")
        hits = self.hits(n)
        if hits is None or c > len(hits):
            return "0" * self.A[i] if self.mode == "total" else None
        return hits[c - 1][:self.A[i]]


def extract_frequent_cover(F: OddsFunctional, A: list[int], mode: str = "total",
                           scan_cap: int = 1 << 14,
                           threshold: Fraction | None = None) -> FrequentExtractedCover:
    """Extract a cover on the triangular block schedule from a betting strategy."""
    return FrequentExtractedCover(F, A, mode, scan_cap, threshold)


# ---------------------------------------------------------------------------
# covers back to betting strategies


class CoverGale(CapitalFn):
    """Rides each emitted word and then its all-zeros continuation.

    For target exponents 2i+n the schedule A_i lists the first lengths
    where every odds product reaches 2^(2i+n); the rider on emission
    (i, n) carries weight 2^-(i+n), so capital on a covered sequence
    reaches 2^(2i+n) * 2^-(i+n) = 2^i at the emitted word.
    """

    def __init__(self, M: CoverOracle, odds: OddsRule, i_max: int, n_max: int, *,
                 cap: int = 4096):
        super().__init__("O-supermartingale", odds)
        self.riders: list[tuple[Word, Fraction, int, int]] = []
        self.schedules: list[list[int]] = []
        self._prods: dict[Word, Fraction] = {}
        for i in range(i_max + 1):
            lengths = [f_O(odds, Fraction(2) ** (2 * i + n), cap=cap) for n in range(n_max + 1)]
            if any(b <= a for a, b in zip(lengths, lengths[1:])):
                raise ContractViolation(
                    f"target lengths for exponent block {i} are not strictly increasing")
            self.schedules.append(lengths)
            for n in range(n_max + 1):
                w = M.emit(lengths, n)
                if w is None:
                    if M.mode == "total":
                        raise ContractViolation(f"total cover withheld an answer at ({i}, {n})")
                    continue
                if len(w) != lengths[n]:
                    raise ContractViolation(
                        f"cover answer for ({i}, {n}) has length {len(w)}, asked {lengths[n]}")
                self.riders.append((w, Fraction(1, 1 << (i + n)), i, n))

    @staticmethod
    def _active(w: Word, v: Word) -> bool:
        if v.startswith(w):
            return "1" not in v[len(w):]
        return w.startswith(v)

    def value(self, v: Word) -> Fraction:
        total = sum((weight for w, weight, _, _ in self.riders if self._active(w, v)), ZERO)
        if total == ZERO:
            return ZERO
        return total * oddsprod(self.odds_ctx, v, self._prods)

    def component_value(self, i: int, v: Word) -> Fraction:
        total = sum((weight for w, weight, wi, _ in self.riders
                     if wi == i and self._active(w, v)), ZERO)
        if total == ZERO:
            return ZERO
        return total * oddsprod(self.odds_ctx, v, self._prods)


def cover_to_gale(M: CoverOracle, odds: OddsRule, i_max: int, n_max: int, *,
                  cap: int = 4096) -> CoverGale:
    """Betting strategy that wins on everything the cover reaches."""
    return CoverGale(M, odds, i_max, n_max, cap=cap)


class FrequentCoverGale(CapitalFn):
    """Staged strategy over a triangular cover schedule.

    Stage lengths follow the recursion l_b = f_O(2 (b+1) g_O(l_(b-1))):
    by then every word's odds product is 2 (b+1) times the largest at the
    previous stage. Block b asks for lengths l_b .. l_b + b and prunes the
    answers to their shortest prefix-free representatives. Each kept word
    u gets a base rider worth 1/((b+1) 2^(b+1)) up to u; the base capital
    it earns at u is then re-staked, split b ways, on u's kept extensions
    one block later. At most b kept extensions per word keeps the payout
    within the stake that dies at u, so the whole thing stays fair.
    """

    def __init__(self, M: CoverOracle, odds: OddsRule, stages: int, *, cap: int = 4096):
        super().__init__("O-supermartingale", odds)
        if stages < 1:
            raise ContractViolation("need at least one stage")
        self._prods: dict[Word, Fraction] = {}
        lengths: list[int] = []
        self.stage_lengths: list[int] = []
        prev = 0
        for b in range(stages):
            target = 2 * (b + 1) * g_O(odds, prev)
            start = f_O(odds, target, cap=cap)
            self.stage_lengths.append(start)
            block = [start + j for j in range(b + 1)]
            if lengths and block[0] <= lengths[-1]:
                raise ContractViolation(
                    f"stage {b} lengths collide with the previous block; fewer stages fit")
            lengths.extend(block)
            prev = start
        self.A = _check_lengths(lengths)
        # emissions per block, then shortest prefix-free representatives
        emitted: dict[int, list[Word]] = {b: [] for b in range(stages)}
        for i, a in enumerate(self.A):
            b, _ = _triangle_block(i)
            w = M.emit(self.A, i)
            if w is None:
                if M.mode == "total":
                    raise ContractViolation(f"total cover withheld an answer at index {i}")
                continue
            if len(w) != a:
                raise ContractViolation(
                    f"cover answer at index {i} has length {len(w)}, asked {a}")
            emitted[b].append(w)
        self.emitted = emitted
        self.kept = {b: prefix_free_shorter(emitted[b]) for b in range(stages)}
        coeff: dict[Word, Fraction] = {}
        snapshots: list[dict[Word, Fraction]] = []
        stakes = ZERO
        stake_marks: list[Fraction] = []
        for b in range(stages):
            beta = Fraction(1, (b + 1) * (1 << (b + 1)))
            stakes += beta * len(self.kept[b])
            for u in self.kept[b]:
                for j in range(1, len(u) + 1):
                    coeff[u[:j]] = coeff.get(u[:j], ZERO) + beta
            if b > 0:
                prev_beta = Fraction(1, b * (1 << b))
                for x in self.kept[b - 1]:
                    extensions = [w for w in self.kept[b]
                                  if w.startswith(x) and len(w) > len(x)]
                    if len(extensions) > b:
                        raise ContractViolation(
                            f"kept word {x!r} has {len(extensions)} kept extensions, "
                            f"over the stage bound {b}")
                    if not extensions:
                        continue
                    # re-stake the base capital earned at x, split b ways
                    seed = prev_beta * oddsprod(odds, x, self._prods)
                    alpha = seed / (b * oddsprod(odds, x, self._prods))
                    for w in extensions:
                        for j in range(len(x) + 1, len(w) + 1):
                            coeff[w[:j]] = coeff.get(w[:j], ZERO) + alpha
            snapshots.append(dict(coeff))
            stake_marks.append(stakes)
        self._coeff = coeff
        self._snapshots = snapshots
        self._stake_marks = stake_marks
        self._root = stakes

    def value(self, v: Word) -> Fraction:
        if v == EMPTY:
            return self._root
        c = self._coeff.get(v)
        if c is None:
            return ZERO
        return c * oddsprod(self.odds_ctx, v, self._prods)

    def stage_value(self, b: int, v: Word) -> Fraction:
        """Capital at v from the riders laid down through stage b."""
        if not 0 <= b < len(self._snapshots):
            raise ContractViolation(f"no stage {b} in a {len(self._snapshots)}-stage strategy")
        if v == EMPTY:
            return self._stake_marks[b]
        c = self._snapshots[b].get(v)
        if c is None:
            return ZERO
        return c * oddsprod(self.odds_ctx, v, self._prods)

    def component_value(self, b: int, v: Word) -> Fraction:
        """Capital carried by stage b's base riders alone."""
        if not 0 <= b < len(self._snapshots):
            raise ContractViolation(f"no stage {b} in a {len(self._snapshots)}-stage strategy")
        beta = Fraction(1, (b + 1) * (1 << (b + 1)))
        if v == EMPTY:
            return beta * len(self.kept[b])
        covering = sum(1 for u in self.kept[b] if u.startswith(v))
        if covering == 0:
            return ZERO
        return beta * covering * oddsprod(self.odds_ctx, v, self._prods)


def frequent_cover_to_gale(M: CoverOracle, odds: OddsRule, stages: int, *,
                           cap: int = 4096) -> FrequentCoverGale:
    """Betting strategy with polynomial growth along frequently covered sequences."""
    return FrequentCoverGale(M, odds, stages, cap=cap)


# ---------------------------------------------------------------------------
# exhaustive search over finite covers


def finite_cover_search(tree: Iterable[Word], lengths: list[int]):
    """First assignment of tree words to some subset of lengths covering all leaves.

    The tree must be downward closed; leaves are its maximal words.
    Assignments are tried by subset size, then lexicographic subset, then
    per-index lexicographic word choice; the first success is returned as
    {length: word}, and None means provably no cover exists.
    """
    from itertools import combinations, product

    words = {_check_word(w) for w in tree}
    if EMPTY not in words:
        raise ContractViolation("the tree must contain the empty word")
    for w in words:
        if w and w[:-1] not in words:
            raise ContractViolation(f"tree is not downward closed at {w!r}")
    lengths = sorted({int(a) for a in lengths})
    if not lengths or lengths[0] <= 0:
        raise ContractViolation("need positive cover lengths")
    leaves = [w for w in words if w + "0" not in words and w + "1" not in words]
    by_length = {a: sorted(w for w in words if len(w) == a) for a in lengths}
    for size in range(len(lengths) + 1):
        for subset in combinations(lengths, size):
            if any(not by_length[a] for a in subset):
                continue
            for choice in product(*(by_length[a] for a in subset)):
                if all(any(leaf.startswith(w) for w in choice) for leaf in leaves):
                    return dict(zip(subset, choice))
    return None
