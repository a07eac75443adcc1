"""Betting against countable families of constructed sequences.

A constructor grows one infinite sequence by repeatedly extending a word.
A finite roster of constructors yields one exact betting strategy that
doubles along every constructed sequence per odds factor; a weak
constructor only names at most b candidate words per level, and still
admits a width-aware strategy whose capital doubles at each confirmed
level along any surviving candidate path.
"""

from fractions import Fraction
from typing import Callable

from .errors import ConfigError, ContractViolation
from .measures import oddsprod
from .rules import EMPTY, ONE, OddsRule, SeqGen, Word, _check_word
from .gales import CapitalFn

ZERO = Fraction(0)

FAMILY_RANGES = frozenset({"[1,2]", "{1,2}", "(1,2]"})


class Constructor:
    """Deterministic word-extender; iterating from the empty word grows a sequence."""

    def __init__(self, step: Callable[[Word], Word], config: dict | None = None):
        self._step = step
        self.config = config

    def step(self, w: Word) -> Word:
        out = self._step(w)
        if not isinstance(out, str) or not out.startswith(w) or len(out) <= len(w) \
                or any(c not in "01" for c in out):
            raise ContractViolation(f"constructor step at {w!r} must strictly extend it", witness=w)
        return out

    def result_seq(self) -> SeqGen:
        state = {"word": EMPTY}

        def grow(n: int) -> Word:
            while len(state["word"]) < n:
                state["word"] = self.step(state["word"])
            return state["word"]

        gen = SeqGen("constructor-result", grow=grow)
        if self.config is not None:
            gen.config = {"kind": "seq-constructor-result", "constructor": self.config}
        return gen


def parse_constructor(obj: dict) -> Constructor:
    """Build a constructor from a decoded config tree."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("constructor config must be an object with a 'kind' tag")
    kind = obj["kind"]
    if kind == "constructor-append-constant":
        bits = _check_word(obj.get("bits", ""))
        if not bits:
            raise ConfigError("constructor-append-constant needs nonempty bits")
        return Constructor(lambda w: w + bits, obj)
    if kind == "constructor-append-characteristic-bit":
        members = frozenset(int(n) for n in obj.get("members", []))
        if any(n < 0 for n in members):
            raise ConfigError("members must be natural numbers")
        return Constructor(lambda w: w + ("1" if len(w) in members else "0"), obj)
    if kind == "constructor-table":
        entries = {_check_word(w): _check_word(v) for w, v in obj.get("entries", {}).items()}
        filler = _check_word(obj.get("filler", "0"))
        if not filler:
            raise ConfigError("constructor-table filler must be nonempty")
        for w, v in entries.items():
            if not v.startswith(w) or len(v) <= len(w):
                raise ConfigError(f"table step at {w!r} must strictly extend it")
        return Constructor(lambda w: entries.get(w, w + filler), obj)
    raise ConfigError(f"unknown constructor kind {kind!r}")


def parse_constructor_list(obj) -> list[Constructor]:
    if not isinstance(obj, list) or not obj:
        raise ConfigError("expected a nonempty JSON array of constructor configs")
    return [parse_constructor(item) for item in obj]


# ---------------------------------------------------------------------------
# exact family strategy


class FamilyGale(CapitalFn):
    """Sum of one exact betting component per constructed sequence.

    Component i stakes 2^-i at the root and rides sequence R_i: its value
    is 2^-i times the odds product on R_i's prefixes and 0 elsewhere, an
    exact O-martingale. The declared odds range must stay within [1,2] so
    the truncation error after |w| + r components is at most 2^-r.
    """

    def __init__(self, constructors: list[Constructor], odds: OddsRule):
        if not constructors:
            raise ContractViolation("need at least one constructor")
        if odds.declared_range not in FAMILY_RANGES:
            raise ContractViolation(
                f"family strategy needs odds declared within [1,2], got {odds.declared_range}")
        super().__init__("O-martingale", odds)
        self.sequences = [c.result_seq() for c in constructors]

    def _component(self, i: int, w: Word) -> Fraction:
        # No product cache here: evaluations must query the odds rule
        # afresh so instrumented rules see every probe.
        if self.sequences[i].prefix(len(w)) != w:
            return ZERO
        return Fraction(1, 1 << i) * oddsprod(self.odds_ctx, w)

    def value(self, w: Word) -> Fraction:
        return sum((self._component(i, w) for i in range(len(self.sequences))), ZERO)

    def partial_value(self, r: int, w: Word) -> Fraction:
        """Sum of the first |w| + r + 1 components; off by at most 2^-r."""
        if r < 0:
            raise ContractViolation("partial evaluation needs a nonnegative certificate index")
        top = min(len(self.sequences) - 1, len(w) + r)
        return sum((self._component(i, w) for i in range(top + 1)), ZERO)

    def support_at(self, n: int):
        return sorted({seq.prefix(n) for seq in self.sequences})


class FamilyGaleFunctional:
    """Builds the family strategy once an odds rule is fixed."""

    def __init__(self, constructors: list[Constructor]):
        self.constructors = list(constructors)

    def build(self, odds: OddsRule) -> CapitalFn:
        return FamilyGale(self.constructors, odds)


# ---------------------------------------------------------------------------
# weak constructors


class WeakConstructor:
    """Level sets of at most `width` candidate words each.

    An empty level means the constructor has given up; later levels must
    stay empty.
    """

    def __init__(self, levels: list[list[Word]], width: int):
        self.width = int(width)
        if self.width < 1:
            raise ConfigError("weak constructor width must be at least 1")
        self.levels = [[_check_word(w) for w in level] for level in levels]
        exhausted = False
        for n, level in enumerate(self.levels):
            if len(level) > self.width:
                raise ConfigError(f"level {n} lists {len(level)} words, over width {self.width}")
            if len(set(level)) != len(level):
                raise ConfigError(f"level {n} repeats a word")
            if exhausted and level:
                raise ConfigError(f"level {n} is nonempty after an empty level")
            exhausted = exhausted or not level
        self._max_len = max((len(w) for level in self.levels for w in level), default=0)


def parse_weak_constructor(obj: dict) -> WeakConstructor:
    if not isinstance(obj, dict) or obj.get("kind") != "weak-constructor":
        raise ConfigError("expected an object with kind 'weak-constructor'")
    levels = obj.get("levels")
    if not isinstance(levels, list):
        raise ConfigError("weak-constructor needs a 'levels' array")
    return WeakConstructor(levels, obj.get("width", 1))


def parse_weak_constructor_list(obj) -> list[WeakConstructor]:
    if not isinstance(obj, list) or not obj:
        raise ConfigError("expected a nonempty JSON array of weak-constructor configs")
    return [parse_weak_constructor(item) for item in obj]


def prefix_free_shorter(words: list[Word]) -> list[Word]:
    """Keep each word unless a kept shorter (or equal) word is its prefix."""
    kept: list[Word] = []
    for w in sorted(words, key=lambda x: (len(x), x)):
        if not any(w.startswith(k) for k in kept):
            kept.append(w)
    return kept


class WeakGale(CapitalFn):
    """Width-aware strategy against a roster of weak constructors.

    One component per constructor index k and per guessed spread c >= 1:
    the component repeatedly waits for the first level whose words all
    carry odds product at least 2c times the current branch's, gives up
    if that level is wider than c, and otherwise splits its stake evenly
    across the surviving candidates, at least doubling along each. The
    total stakes 2^-k-c on component (k, c); only finitely many
    components ever leave the root, so values are finite sums.
    """

    def __init__(self, family: list[WeakConstructor], odds: OddsRule):
        if not family:
            raise ContractViolation("need at least one weak constructor")
        super().__init__("O-supermartingale", odds)
        self.family = list(family)
        self._prods: dict[Word, Fraction] = {}
        self._root_value = 2 - Fraction(1, 1 << (len(family) - 1))
        # combined[v] = sum over components of weight * rider coefficient at v
        self._combined: dict[Word, Fraction] = {}
        self._per_component: dict[tuple[int, int], dict[Word, Fraction]] = {}
        for k, cons in enumerate(self.family):
            top = max((oddsprod(odds, w, self._prods)
                       for level in cons.levels for w in level), default=ZERO)
            c = 0
            while True:
                c += 1
                if 2 * c > top:
                    break  # such a component never finds a qualifying level
                riders = self._component_riders(cons, c)
                if riders:
                    self._per_component[(k, c)] = riders
                    weight = Fraction(1, 1 << (k + c))
                    for v, coeff in riders.items():
                        self._combined[v] = self._combined.get(v, ZERO) + weight * coeff

    def _component_riders(self, cons: WeakConstructor, c: int) -> dict[Word, Fraction]:
        riders: dict[Word, Fraction] = {}
        stack: list[tuple[Word, int, Fraction]] = [(EMPTY, -1, ONE)]
        while stack:
            w, entry, capital = stack.pop()
            base = oddsprod(self.odds_ctx, w, self._prods)
            bar = 2 * c * base
            found = None
            for n in range(entry + 1, len(cons.levels)):
                level = cons.levels[n]
                if not level:
                    break
                if all(oddsprod(self.odds_ctx, x, self._prods) >= bar for x in level):
                    found = n
                    break
            if found is None:
                continue
            level = cons.levels[found]
            if len(level) > c:
                continue
            alpha = capital / (c * base)
            for x in prefix_free_shorter(level):
                if len(x) <= len(w) or not x.startswith(w):
                    continue
                for j in range(len(w) + 1, len(x) + 1):
                    riders[x[:j]] = riders.get(x[:j], ZERO) + alpha
                stack.append((x, found, alpha * oddsprod(self.odds_ctx, x, self._prods)))
        return riders

    def value(self, w: Word) -> Fraction:
        if w == EMPTY:
            return self._root_value
        coeff = self._combined.get(w)
        if coeff is None:
            return ZERO
        return coeff * oddsprod(self.odds_ctx, w, self._prods)

    def component_value(self, k: int, c: int, w: Word) -> Fraction:
        """One component's capital at w (1 at the root by convention)."""
        if w == EMPTY:
            return ONE
        coeff = self._per_component.get((k, c), {}).get(w, ZERO)
        return coeff * oddsprod(self.odds_ctx, w, self._prods)

    def partial_value(self, r: int, w: Word) -> Fraction:
        """Finite component sum within 2^-r of the full value (never above it)."""
        if r < 0:
            raise ContractViolation("partial evaluation needs a nonnegative certificate index")
        bound = Fraction(1, 1 << r)
        if w == EMPTY:
            # dead components live only at the root; cut the double sum along
            # the diagonal k + c <= t, leaving an analytic tail (K+1) 2^-t
            t = r + len(self.family).bit_length()
            total = ZERO
            for k in range(len(self.family)):
                for c in range(1, t - k + 1):
                    total += Fraction(1, 1 << (k + c))
            return total
        # off the root only computed components matter; take them in diagonal
        # order until the exact remainder fits the certificate
        product = oddsprod(self.odds_ctx, w, self._prods)
        values = sorted(
            ((k + c, Fraction(1, 1 << (k + c)) * riders[w] * product)
             for (k, c), riders in self._per_component.items() if w in riders),
            key=lambda item: item[0])
        total = sum((v for _, v in values), ZERO)
        running = ZERO
        for _, v in values:
            if total - running <= bound:
                break
            running += v
        return running


class WeakGaleFunctional:
    """Builds the weak-constructor strategy once an odds rule is fixed."""

    def __init__(self, family: list[WeakConstructor]):
        self.family = list(family)

    def build(self, odds: OddsRule) -> CapitalFn:
        return WeakGale(self.family, odds)


def weak_gale(family: list[WeakConstructor], odds: OddsRule) -> WeakGale:
    """The combined width-aware strategy for a roster of weak constructors."""
    return WeakGale(family, odds)


def family_gale(constructors: list[Constructor], odds: OddsRule) -> FamilyGale:
    """The exact betting strategy along every constructed sequence."""
    return FamilyGale(constructors, odds)
