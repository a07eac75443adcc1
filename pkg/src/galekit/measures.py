"""Measures induced by odds rules, and finite-depth certificates about them.

An odds rule O assigns each nonempty word a factor at least 1; the induced
premeasure is mu(w) = 1 / prod of the factors along w's nonempty prefixes.
Everything here is exact rational and checked only to an explicit depth.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import CapExceeded, ConfigError
from .rules import EMPTY, NormalizedOdds, ODDS_RANGES, OddsRule, ONE, Word


def oddsprod(O: OddsRule, w: Word, cache: dict[Word, Fraction] | None = None) -> Fraction:
    """Product of O over the nonempty prefixes of w; 1 at the empty word.

    With a cache the walk resumes from the longest cached prefix, so
    repeated queries along a tree cost one new factor per new node.
    """
    if cache is None:
        product = ONE
        for k in range(1, len(w) + 1):
            product *= O.value(w[:k])
        return product
    k = len(w)
    while k > 0 and w[:k] not in cache:
        k -= 1
    product = cache[w[:k]] if k > 0 else ONE
    for j in range(k + 1, len(w) + 1):
        product *= O.value(w[:j])
        cache[w[:j]] = product
    return product


def mu(O: OddsRule, w: Word, cache: dict[Word, Fraction] | None = None) -> Fraction:
    """Premeasure of the cylinder at w under the odds rule O."""
    return ONE / oddsprod(O, w, cache)


@dataclass
class PremeasureReport:
    """Outcome of a finite-depth premeasure check, with the first violation."""

    ok: bool
    depth: int
    failure: str | None = None  # "monotone" or "subadditive"
    word: Word | None = None
    lhs: Fraction | None = None
    rhs: Fraction | None = None


def check_premeasure(O: OddsRule, depth: int) -> PremeasureReport:
    """Certify monotonicity and subadditivity of mu at every node above depth.

    At each word w with |w| < depth this checks mu(wa) <= mu(w) for both
    children and mu(w) <= mu(w0) + mu(w1), reporting the first failure.
    """
    cache: dict[Word, Fraction] = {}
    level = [EMPTY]
    for _ in range(depth):
        next_level = []
        for w in level:
            here = mu(O, w, cache)
            m0, m1 = mu(O, w + "0", cache), mu(O, w + "1", cache)
            for child, value in ((w + "0", m0), (w + "1", m1)):
                if value > here:
                    return PremeasureReport(False, depth, "monotone", child, value, here)
            if m0 + m1 < here:
                return PremeasureReport(False, depth, "subadditive", w, here, m0 + m1)
            next_level.append(w + "0")
            next_level.append(w + "1")
        level = next_level
    return PremeasureReport(True, depth)


def normalize_range(O: OddsRule, target_range: str) -> OddsRule:
    """Rewrite O so every value lands in the target range.

    The identity for the unrestricted range; otherwise a deterministic
    path-dependent rewrite whose odds product over any prefix is at most
    3 times the original, so mu_O <= 3 * mu of the rewritten rule.
    """
    if target_range not in ODDS_RANGES:
        raise ConfigError(f"unknown odds range {target_range!r}")
    if target_range == "[1,inf)":
        return O
    return NormalizedOdds(O, target_range)


_NODE_BUDGET = 1 << 18  # guard for brute per-level enumeration


def _level_products(O: OddsRule, n: int, cache: dict[Word, Fraction]) -> list[Fraction]:
    if (1 << n) > _NODE_BUDGET:
        raise CapExceeded(f"level {n} needs {1 << n} nodes, over the enumeration budget")
    return [oddsprod(O, format(i, f"0{n}b") if n else EMPTY, cache) for i in range(1 << n)]


def f_O(O: OddsRule, target: Fraction, *, cap: int = 4096) -> int:
    """Least length m at which every word's odds product reaches the target.

    Length-dependent rules use the shared per-level factor; general rules
    enumerate levels, bounded by an internal node budget. Raises when no
    length up to cap works.
    """
    target = Fraction(target)
    if O.length_dependent:
        product = ONE
        for m in range(cap + 1):
            if product >= target:
                return m
            product *= O.value_at_length(m + 1)
        raise CapExceeded(
            f"worst-case odds product stalled below the target through length {cap}",
            achieved=product)
    cache: dict[Word, Fraction] = {}
    worst = ONE
    for m in range(cap + 1):
        worst = min(_level_products(O, m, cache))
        if worst >= target:
            return m
    raise CapExceeded(
        f"worst-case odds product stalled below the target through length {cap}",
        achieved=worst)


def g_O(O: OddsRule, n: int) -> Fraction:
    """Largest odds product over words of length n; 1 at n = 0."""
    if n < 0:
        raise ConfigError("length must be nonnegative")
    if O.length_dependent:
        product = ONE
        for k in range(1, n + 1):
            product *= O.value_at_length(k)
        return product
    return max(_level_products(O, n, {}))
