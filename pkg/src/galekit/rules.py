"""Evaluable rules: odds functions, gauges, prediction orders, predictors.

Every rule is a finite, deterministic, exact-rational description of an
infinite object: a finite table with a default, or a named parametric
family. Rules parse from a JSON config tree whose rational values are
written as strings like "3/4" or "2", and serialize back canonically.
"""

import json
from fractions import Fraction

from .errors import CapExceeded, ConfigError, RangeViolation
from .words import EMPTY, SeqGen, Word, eventually_constant, finite_language_characteristic, periodic

ODDS_RANGES = ("[1,2]", "[1,inf)", "{1,2}", "(1,2]")

ONE = Fraction(1)
TWO = Fraction(2)


def parse_rational(value) -> Fraction:
    """Exact rational from an int or a "p/q" / integer string."""
    if isinstance(value, bool) or isinstance(value, float):
        raise ConfigError(f"rational values must be exact strings or integers, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"bad rational {value!r}: {exc}") from None


def format_rational(value: Fraction) -> str:
    """Lowest-terms "p/q", or plain integer form when the denominator is 1."""
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def range_contains(declared_range: str, value: Fraction) -> bool:
    if declared_range == "[1,2]":
        return ONE <= value <= TWO
    if declared_range == "[1,inf)":
        return value >= ONE
    if declared_range == "{1,2}":
        return value == ONE or value == TWO
    if declared_range == "(1,2]":
        return ONE < value <= TWO
    raise ConfigError(f"unknown odds range {declared_range!r}")


def _check_word(w) -> Word:
    if not isinstance(w, str) or any(c not in "01" for c in w):
        raise ConfigError(f"not a binary word: {w!r}")
    return w


def _check_bit(a) -> str:
    if a not in ("0", "1"):
        raise ConfigError(f"not a bit: {a!r}")
    return a


# ---------------------------------------------------------------------------
# odds rules


class OddsRule:
    """Word -> rational odds, total and deterministic, inside a declared range."""

    kind = "odds"
    length_dependent = False  # True when the value depends on |w| only

    def __init__(self, declared_range: str):
        if declared_range not in ODDS_RANGES:
            raise ConfigError(f"unknown odds range {declared_range!r}")
        self.declared_range = declared_range

    def value(self, w: Word) -> Fraction:
        v = self._raw(w)
        if not range_contains(self.declared_range, v):
            raise RangeViolation(
                f"odds value {format_rational(v)} at {w!r} outside declared range {self.declared_range}")
        return v

    def _raw(self, w: Word) -> Fraction:
        raise NotImplementedError

    def value_at_length(self, n: int) -> Fraction:
        """Shared value of all words of length n; only for length-dependent rules."""
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


class OddsConst(OddsRule):
    kind = "odds-const"
    length_dependent = True

    def __init__(self, const: Fraction, declared_range: str = "[1,inf)"):
        super().__init__(declared_range)
        self.const = Fraction(const)
        if not range_contains(declared_range, self.const):
            raise RangeViolation(
                f"odds value {format_rational(self.const)} outside declared range {declared_range}")

    def _raw(self, w: Word) -> Fraction:
        return self.const

    def value_at_length(self, n: int) -> Fraction:
        return self.const

    def to_config(self) -> dict:
        return {"kind": self.kind, "value": format_rational(self.const), "range": self.declared_range}


class OddsTable(OddsRule):
    """Explicit per-word entries with a default; validated eagerly."""

    kind = "odds-table"

    def __init__(self, entries: dict[Word, Fraction], default: Fraction,
                 declared_range: str = "[1,inf)"):
        super().__init__(declared_range)
        self.entries = {
            _check_word(w): Fraction(v) for w, v in entries.items()}
        self.default = Fraction(default)
        for w, v in self.entries.items():
            if not range_contains(declared_range, v):
                raise RangeViolation(
                    f"odds value {format_rational(v)} at entry {w!r} outside declared range {declared_range}")
        if not range_contains(declared_range, self.default):
            raise RangeViolation(
                f"odds default {format_rational(self.default)} outside declared range {declared_range}")

    def _raw(self, w: Word) -> Fraction:
        return self.entries.get(w, self.default)

    def to_config(self) -> dict:
        return {"kind": self.kind,
                "entries": {w: format_rational(v) for w, v in sorted(self.entries.items())},
                "default": format_rational(self.default),
                "range": self.declared_range}


class OddsLength(OddsRule):
    """Length-indexed entries with a default."""

    kind = "odds-length"
    length_dependent = True

    def __init__(self, entries: dict[int, Fraction], default: Fraction,
                 declared_range: str = "[1,inf)"):
        super().__init__(declared_range)
        self.entries = {int(n): Fraction(v) for n, v in entries.items()}
        self.default = Fraction(default)
        if any(n < 0 for n in self.entries):
            raise ConfigError("odds-length entries need nonnegative lengths")
        for n, v in self.entries.items():
            if not range_contains(declared_range, v):
                raise RangeViolation(
                    f"odds value {format_rational(v)} at length {n} outside declared range {declared_range}")
        if not range_contains(declared_range, self.default):
            raise RangeViolation(
                f"odds default {format_rational(self.default)} outside declared range {declared_range}")

    def _raw(self, w: Word) -> Fraction:
        return self.value_at_length(len(w))

    def value_at_length(self, n: int) -> Fraction:
        return self.entries.get(n, self.default)

    def to_config(self) -> dict:
        return {"kind": self.kind,
                "entries": {str(n): format_rational(v) for n, v in sorted(self.entries.items())},
                "default": format_rational(self.default),
                "range": self.declared_range}


class OddsGaugeQuotient(OddsRule):
    """O(w) = h(|w|-1)/h(|w|) for a gauge h; O at the empty word is 1.

    The quotient lands in [1,2] exactly when h is non-increasing and never
    halves faster than 2 per step; violations surface as range errors.
    """

    kind = "odds-gauge-quotient"
    length_dependent = True

    def __init__(self, gauge: "GaugeRule"):
        super().__init__("[1,2]")
        self.gauge = gauge

    def _raw(self, w: Word) -> Fraction:
        return self.value_at_length(len(w))

    def value_at_length(self, n: int) -> Fraction:
        if n == 0:
            return ONE
        return self.gauge.value(n - 1) / self.gauge.value(n)

    def to_config(self) -> dict:
        return {"kind": self.kind, "gauge": self.gauge.to_config(), "range": self.declared_range}


class OddsFrequent(OddsRule):
    """Odds (n+2)/(n+1) at the n-th listed length, 1 everywhere else."""

    kind = "odds-frequent"
    length_dependent = True

    def __init__(self, lengths: list[int]):
        super().__init__("[1,2]")
        self.lengths = [int(n) for n in lengths]
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])) or \
                any(n <= 0 for n in self.lengths):
            raise ConfigError("odds-frequent lengths must be positive and strictly increasing")
        self._slot = {m: n for n, m in enumerate(self.lengths)}

    def _raw(self, w: Word) -> Fraction:
        return self.value_at_length(len(w))

    def value_at_length(self, n: int) -> Fraction:
        slot = self._slot.get(n)
        return ONE if slot is None else Fraction(slot + 2, slot + 1)

    def to_config(self) -> dict:
        return {"kind": self.kind, "lengths": list(self.lengths), "range": self.declared_range}


class NormalizedOdds(OddsRule):
    """Range-normalized view of a base rule.

    Values are produced by a deterministic walk down the tree; over every
    prefix the rewritten odds product is at most 3 times the original one,
    so capital transfers with at most a constant-3 loss.

    Per target range:
      [1,inf) is served by the identity at parse time (never reaches here).
      [1,2]   clamps values above 2 down to 2.
      {1,2}   emits 2 whenever the accumulated unspent product reaches 2,
              else 1, carrying the remainder as debt.
      (1,2]   clamps above 2, rounds interior values 1+a to 1+3a/4, and
              replaces each maximal run of odds 1 by a converging stretch
              1+1/2, 1+1/4, ... that ends once the original product over
              the stretched region reaches 3.
    """

    kind = "odds-normalized"

    def __init__(self, base: OddsRule, target_range: str):
        if target_range not in ("[1,2]", "{1,2}", "(1,2]"):
            raise ConfigError(f"cannot normalize into range {target_range!r}")
        super().__init__(target_range)
        self.base = base
        # state handed to the children of a word:
        #   ("free",)                  no bookkeeping pending
        #   ("debt", carried)          {1,2} accumulator
        #   ("stretch", orig_prod, k)  (1,2] active stretch, next exponent k+1
        self._state: dict[Word, tuple] = {EMPTY: ("debt", ONE) if target_range == "{1,2}" else ("free",)}
        self._memo: dict[Word, Fraction] = {}

    def _raw(self, w: Word) -> Fraction:
        if w == EMPTY:
            # the empty word carries no odds factor; serve a fixed in-range value
            return TWO
        if w not in self._memo:
            self._walk(w)
        return self._memo[w]

    def _walk(self, w: Word) -> None:
        parent = w[:-1]
        if parent not in self._state:
            self._walk(parent)
        state = self._state[parent]
        original = self.base.value(w)
        if self.declared_range == "[1,2]":
            value, child = min(original, TWO), ("free",)
        elif self.declared_range == "{1,2}":
            carried = state[1] * original
            if carried >= TWO:
                value, child = TWO, ("debt", carried / TWO)
            else:
                value, child = ONE, ("debt", carried)
        else:  # (1,2]
            if state[0] == "stretch" and state[1] < 3:
                k = state[2]
                value = ONE + Fraction(1, 1 << (k + 1))
                child = ("stretch", state[1] * original, k + 1)
            elif original > TWO:
                value, child = TWO, ("free",)
            elif original == TWO:
                value, child = TWO, ("free",)
            elif original == ONE:
                value = ONE + Fraction(1, 2)
                child = ("stretch", original, 1)
            else:  # original = 1 + a with 0 < a < 1: midpoint of [1+a/2, 1+a]
                value, child = ONE + 3 * (original - ONE) / 4, ("free",)
        self._memo[w] = value
        self._state[w] = child

    def to_config(self) -> dict:
        return {"kind": self.kind, "base": self.base.to_config(), "range": self.declared_range}


# ---------------------------------------------------------------------------
# gauges and prediction orders


class GaugeRule:
    """n -> positive rational, non-increasing; the probe bound caps certified indices."""

    kind = "gauge"

    def __init__(self, probe_bound: int = 64):
        self.probe_bound = int(probe_bound)
        if self.probe_bound < 0:
            raise ConfigError("gauge probe bound must be nonnegative")

    def value(self, n: int) -> Fraction:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


class GaugePowers(GaugeRule):
    kind = "gauge-powers"

    def __init__(self, base: Fraction, probe_bound: int = 64):
        super().__init__(probe_bound)
        self.base = Fraction(base)
        if not 0 < self.base <= 1:
            raise ConfigError("gauge-powers base must lie in (0,1]")

    def value(self, n: int) -> Fraction:
        return self.base ** n

    def to_config(self) -> dict:
        return {"kind": self.kind, "base": format_rational(self.base), "probe": self.probe_bound}


class GaugeHarmonic(GaugeRule):
    kind = "gauge-harmonic"

    def value(self, n: int) -> Fraction:
        return Fraction(1, n + 1)

    def to_config(self) -> dict:
        return {"kind": self.kind, "probe": self.probe_bound}


class GaugeConst(GaugeRule):
    kind = "gauge-const"

    def __init__(self, const: Fraction, probe_bound: int = 64):
        super().__init__(probe_bound)
        self.const = Fraction(const)
        if self.const <= 0:
            raise ConfigError("gauge values must be positive")

    def value(self, n: int) -> Fraction:
        return self.const

    def to_config(self) -> dict:
        return {"kind": self.kind, "value": format_rational(self.const), "probe": self.probe_bound}


class GaugeTable(GaugeRule):
    """Explicit values with a constant default tail; non-increasing, validated."""

    kind = "gauge-table"

    def __init__(self, entries: dict[int, Fraction], default: Fraction, probe_bound: int = 64):
        super().__init__(probe_bound)
        self.entries = {int(n): Fraction(v) for n, v in entries.items()}
        self.default = Fraction(default)
        if any(v <= 0 for v in self.entries.values()) or self.default <= 0:
            raise ConfigError("gauge values must be positive")
        seq = [self.entries.get(n, self.default) for n in range(max(self.entries, default=0) + 2)]
        for n, (a, b) in enumerate(zip(seq, seq[1:])):
            if a < b:
                raise ConfigError(f"gauge not non-increasing between {n} and {n + 1}")

    def value(self, n: int) -> Fraction:
        return self.entries.get(int(n), self.default)

    def to_config(self) -> dict:
        return {"kind": self.kind,
                "entries": {str(n): format_rational(v) for n, v in sorted(self.entries.items())},
                "default": format_rational(self.default),
                "probe": self.probe_bound}


class PredictionOrder:
    """n -> nonnegative rational, nondecreasing loss budget."""

    kind = "order"

    def value(self, n: int) -> Fraction:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


class OrderLinear(PredictionOrder):
    kind = "order-linear"

    def __init__(self, slope: Fraction = ONE):
        self.slope = Fraction(slope)
        if self.slope <= 0:
            raise ConfigError("order-linear slope must be positive")

    def value(self, n: int) -> Fraction:
        return self.slope * n

    def to_config(self) -> dict:
        return {"kind": self.kind, "slope": format_rational(self.slope)}


class OrderTable(PredictionOrder):
    kind = "order-table"

    def __init__(self, entries: dict[int, Fraction]):
        self.entries = {int(n): Fraction(v) for n, v in entries.items()}
        if not self.entries or sorted(self.entries) != list(range(len(self.entries))):
            raise ConfigError("order-table entries must cover 0..N without gaps")
        seq = [self.entries[n] for n in range(len(self.entries))]
        if any(v < 0 for v in seq):
            raise ConfigError("order values must be nonnegative")
        if any(a > b for a, b in zip(seq, seq[1:])):
            raise ConfigError("order-table not nondecreasing")

    def value(self, n: int) -> Fraction:
        if int(n) not in self.entries:
            raise ConfigError(f"prediction order probed beyond its table at {n}")
        return self.entries[int(n)]

    def to_config(self) -> dict:
        return {"kind": self.kind,
                "entries": {str(n): format_rational(v) for n, v in sorted(self.entries.items())}}


# ---------------------------------------------------------------------------
# predictors


class PredictorRule:
    """(Word, bit) -> rational in [0,1] with p(w,0)+p(w,1) <= 1 (= 1 when strict)."""

    kind = "predictor"
    strict = False

    def value(self, w: Word, a: str) -> Fraction:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


def _check_prediction_pair(p0: Fraction, p1: Fraction, strict: bool, where: str) -> None:
    if not (0 <= p0 <= 1 and 0 <= p1 <= 1):
        raise ConfigError(f"predictions at {where} outside [0,1]")
    total = p0 + p1
    if total > 1 or (strict and total != 1):
        raise ConfigError(
            f"predictions at {where} sum to {format_rational(total)}, "
            f"need {'exactly' if strict else 'at most'} 1")


class PredictorConst(PredictorRule):
    kind = "predictor-const"
    strict = True

    def __init__(self, p0: Fraction):
        self.p0 = Fraction(p0)
        _check_prediction_pair(self.p0, 1 - self.p0, True, "predictor-const")

    def value(self, w: Word, a: str) -> Fraction:
        return self.p0 if _check_bit(a) == "0" else 1 - self.p0

    def to_config(self) -> dict:
        return {"kind": self.kind, "p0": format_rational(self.p0)}


class PredictorTable(PredictorRule):
    kind = "predictor-table"

    def __init__(self, entries: dict[Word, tuple[Fraction, Fraction]],
                 default: tuple[Fraction, Fraction], strict: bool = False):
        self.entries = {_check_word(w): (Fraction(p0), Fraction(p1))
                        for w, (p0, p1) in entries.items()}
        self.default = (Fraction(default[0]), Fraction(default[1]))
        self.strict = bool(strict)
        for w, (p0, p1) in self.entries.items():
            _check_prediction_pair(p0, p1, self.strict, f"entry {w!r}")
        _check_prediction_pair(*self.default, self.strict, "default")

    def value(self, w: Word, a: str) -> Fraction:
        pair = self.entries.get(w, self.default)
        return pair[0] if _check_bit(a) == "0" else pair[1]

    def to_config(self) -> dict:
        return {"kind": self.kind,
                "entries": {w: [format_rational(p0), format_rational(p1)]
                            for w, (p0, p1) in sorted(self.entries.items())},
                "default": [format_rational(self.default[0]), format_rational(self.default[1])],
                "strict": self.strict}


# ---------------------------------------------------------------------------
# acceptability probing


def probe_acceptability(O: OddsRule, S: SeqGen, target: Fraction, *, cap: int = 4096) -> int:
    """Least n with prod_{k<n} O(S[0..k-1]) >= target, searched up to cap.

    This is a finite divergence certificate along one sequence; the product
    starts at the empty word and takes one factor per proper prefix.
    """
    target = Fraction(target)
    if target < 1:
        raise ConfigError("acceptability target must be at least 1")
    product = ONE
    for n in range(cap + 1):
        if product >= target:
            return n
        product *= O.value(S.prefix(n))
    raise CapExceeded(
        f"odds product along the probed sequence reached only "
        f"{format_rational(product)} after {cap} factors (target {format_rational(target)})",
        achieved=product)


# ---------------------------------------------------------------------------
# config parsing


def _require(obj: dict, key: str):
    if key not in obj:
        raise ConfigError(f"config {obj.get('kind', '?')!r} missing key {key!r}")
    return obj[key]


def _parse_odds(obj: dict) -> OddsRule:
    kind = obj["kind"]
    rng = obj.get("range", "[1,inf)")
    if kind == "odds-const":
        return OddsConst(parse_rational(_require(obj, "value")), rng)
    if kind == "odds-table":
        entries = {_check_word(w): parse_rational(v) for w, v in _require(obj, "entries").items()}
        return OddsTable(entries, parse_rational(obj.get("default", 1)), rng)
    if kind == "odds-length":
        entries = {_parse_index(n): parse_rational(v) for n, v in _require(obj, "entries").items()}
        return OddsLength(entries, parse_rational(obj.get("default", 1)), rng)
    if kind == "odds-gauge-quotient":
        return OddsGaugeQuotient(_parse_gauge(_require(obj, "gauge")))
    if kind == "odds-frequent":
        return OddsFrequent([_parse_index(n) for n in _require(obj, "lengths")])
    if kind == "odds-normalized":
        base = _parse_odds(_require(obj, "base"))
        target = _require(obj, "range")
        if target == "[1,inf)":
            return base
        return NormalizedOdds(base, target)
    raise ConfigError(f"unknown odds kind {kind!r}")


def _parse_index(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, str)):
        raise ConfigError(f"bad index {n!r}")
    try:
        return int(n)
    except ValueError:
        raise ConfigError(f"bad index {n!r}") from None


def _parse_gauge(obj: dict) -> GaugeRule:
    kind = obj["kind"]
    probe = _parse_index(obj.get("probe", 64))
    if kind == "gauge-powers":
        return GaugePowers(parse_rational(_require(obj, "base")), probe)
    if kind == "gauge-harmonic":
        return GaugeHarmonic(probe)
    if kind == "gauge-const":
        return GaugeConst(parse_rational(_require(obj, "value")), probe)
    if kind == "gauge-table":
        entries = {_parse_index(n): parse_rational(v) for n, v in _require(obj, "entries").items()}
        return GaugeTable(entries, parse_rational(_require(obj, "default")), probe)
    raise ConfigError(f"unknown gauge kind {kind!r}")


def _parse_order(obj: dict) -> PredictionOrder:
    kind = obj["kind"]
    if kind == "order-linear":
        return OrderLinear(parse_rational(obj.get("slope", 1)))
    if kind == "order-table":
        entries = {_parse_index(n): parse_rational(v) for n, v in _require(obj, "entries").items()}
        return OrderTable(entries)
    raise ConfigError(f"unknown order kind {kind!r}")


def _parse_predictor(obj: dict) -> PredictorRule:
    kind = obj["kind"]
    if kind == "predictor-const":
        return PredictorConst(parse_rational(_require(obj, "p0")))
    if kind == "predictor-table":
        entries = {}
        for w, pair_ in _require(obj, "entries").items():
            if not isinstance(pair_, list) or len(pair_) != 2:
                raise ConfigError(f"predictor entry at {w!r} must be a [p0, p1] pair")
            entries[_check_word(w)] = (parse_rational(pair_[0]), parse_rational(pair_[1]))
        default = obj.get("default", ["1/2", "1/2"])
        if not isinstance(default, list) or len(default) != 2:
            raise ConfigError("predictor default must be a [p0, p1] pair")
        return PredictorTable(entries, (parse_rational(default[0]), parse_rational(default[1])),
                              bool(obj.get("strict", False)))
    raise ConfigError(f"unknown predictor kind {kind!r}")


def _parse_seq(obj: dict) -> SeqGen:
    kind = obj["kind"]
    if kind == "seq-eventually-constant":
        head = _check_word(obj.get("head", EMPTY))
        gen = eventually_constant(head, _check_bit(str(_require(obj, "tail"))))
    elif kind == "seq-periodic":
        gen = periodic(_check_word(_require(obj, "pattern")))
    elif kind == "seq-finite-language":
        members = frozenset(_check_word(w) for w in _require(obj, "members"))
        gen = finite_language_characteristic(members)
    elif kind == "seq-constructor-result":
        from .countable import parse_constructor  # config plumbing, not a core dependency
        gen = parse_constructor(_require(obj, "constructor")).result_seq()
    else:
        raise ConfigError(f"unknown sequence kind {kind!r}")
    gen.config = obj
    return gen


_PARSERS = {
    "odds": _parse_odds,
    "gauge": _parse_gauge,
    "order": _parse_order,
    "predictor": _parse_predictor,
    "seq": _parse_seq,
}


def parse_rule_obj(obj):
    """Parse an already-decoded config tree into a rule object."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("rule config must be an object with a 'kind' tag")
    family = str(obj["kind"]).split("-", 1)[0]
    parser = _PARSERS.get(family)
    if parser is None:
        raise ConfigError(f"unknown rule kind {obj['kind']!r}")
    return parser(obj)


def parse_rule(text: str):
    """Parse a JSON config document into a rule object.

    Malformed JSON raises a config error carrying the decoder's
    line/column position.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_rule_obj(obj)


def canonical_json(obj) -> str:
    """Deterministic JSON rendering: sorted keys, two-space indent, newline at end."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def serialize_rule(rule) -> str:
    """Canonical config for a rule; inverse of parse_rule on canonical configs."""
    if isinstance(rule, SeqGen):
        config = getattr(rule, "config", None)
        if config is None:
            raise ConfigError("this sequence was built in code and has no config form")
    else:
        config = rule.to_config()
    return canonical_json(config)


def normalize_config(text: str) -> str:
    """Canonical re-rendering of a config document, without reinterpreting values."""
    try:
        return canonical_json(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
