"""Capital functions on binary words and finite-depth verification.

A capital function carries a kind tag naming the fairness law it claims:

  O-supermartingale  d(w) >= d(w0)/O(w0) + d(w1)/O(w1)   (O-martingale: equality)
  s-supergale        d(w) >= 2^-s * (d(w0) + d(w1))      (s-gale: equality)
  supermartingale    2 d(w) >= d(w0) + d(w1)             (martingale: equality)

All arithmetic is exact; fractional s = p/q is checked radical-free by
comparing 2^p d(w)^q against (d(w0)+d(w1))^q.
"""

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Protocol

from .errors import CapExceeded, ConfigError, ContractViolation
from .measures import mu, oddsprod
from .rules import (EMPTY, GaugeRule, GaugeTable, OddsGaugeQuotient, OddsRule, ONE,
                    SeqGen, Word, canonical_json, format_rational, parse_rational,
                    parse_rule_obj)

KINDS = ("O-supermartingale", "O-martingale", "s-supergale", "s-gale",
         "supermartingale", "martingale")
EXACT_KINDS = frozenset({"O-martingale", "s-gale", "martingale"})


class CapitalFn:
    """Total word -> nonnegative rational map claiming one fairness law.

    odds_ctx is the odds rule for O-kinds, the rational exponent s for
    s-kinds, and None for the plain kinds.
    """

    def __init__(self, kind: str, odds_ctx=None):
        if kind not in KINDS:
            raise ContractViolation(f"unknown capital kind {kind!r}")
        if kind.startswith("O-"):
            if not isinstance(odds_ctx, OddsRule):
                raise ContractViolation(f"kind {kind} needs an odds rule context")
        elif kind.startswith("s-"):
            if not isinstance(odds_ctx, Fraction) or odds_ctx < 0:
                raise ContractViolation(f"kind {kind} needs a nonnegative rational s")
        elif odds_ctx is not None:
            raise ContractViolation(f"kind {kind} takes no odds context")
        self.kind = kind
        self.odds_ctx = odds_ctx

    def value(self, w: Word) -> Fraction:
        raise NotImplementedError

    def support_at(self, n: int):
        """Words of length n that can carry nonzero capital, when finitely known."""
        return None

    def partial_value(self, r: int, w: Word) -> Fraction:
        raise ContractViolation("this capital function offers no partial-evaluation contract")


class LambdaCapital(CapitalFn):
    """Capital function from a plain callable; the workhorse for fixtures."""

    def __init__(self, kind: str, fn: Callable[[Word], Fraction], odds_ctx=None,
                 support=None):
        super().__init__(kind, odds_ctx)
        self._fn = fn
        self._support = support

    def value(self, w: Word) -> Fraction:
        return Fraction(self._fn(w))

    def support_at(self, n: int):
        return None if self._support is None else self._support(n)


class TableCapital(CapitalFn):
    """Finite table of values; probing past the table is a contract error
    unless a default is declared."""

    def __init__(self, kind: str, entries: dict[Word, Fraction], default=None,
                 odds_ctx=None):
        super().__init__(kind, odds_ctx)
        self.entries = {w: Fraction(v) for w, v in entries.items()}
        self.default = None if default is None else Fraction(default)

    def value(self, w: Word) -> Fraction:
        if w in self.entries:
            return self.entries[w]
        if self.default is None:
            raise ContractViolation(f"capital table has no value at {w!r}", witness=w)
        return self.default


def parse_capital_obj(obj: dict) -> CapitalFn:
    """Build a table-backed capital function from a decoded config tree."""
    if not isinstance(obj, dict) or obj.get("kind") != "capital-table":
        raise ConfigError("capital config must be an object with kind 'capital-table'")
    law = obj.get("law")
    if law not in KINDS:
        raise ConfigError(f"capital law must be one of {', '.join(KINDS)}")
    if law.startswith("O-"):
        ctx = parse_rule_obj(obj["rule"]) if "rule" in obj else None
        if not isinstance(ctx, OddsRule):
            raise ConfigError(f"law {law} needs an odds 'rule' entry")
    elif law.startswith("s-"):
        if "s" not in obj:
            raise ConfigError(f"law {law} needs an exponent 's' entry")
        ctx = parse_rational(obj["s"])
    else:
        ctx = None
    entries = {w: parse_rational(v) for w, v in obj.get("entries", {}).items()}
    default = parse_rational(obj["default"]) if "default" in obj else None
    return TableCapital(law, entries, default, ctx)


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerifyReport:
    """Outcome of a finite-depth fairness check."""

    ok: bool
    kind: str
    depth: int
    checks: int
    evals: int
    exact: bool  # every checked node held with equality
    failure: str | None = None  # "negative" or "fairness"
    word: Word | None = None
    lhs: Fraction | None = None
    rhs: Fraction | None = None

    def describe(self) -> str:
        if self.ok:
            law = "with equality everywhere" if self.exact else "with slack somewhere"
            return (f"{self.kind}: pass to depth {self.depth} "
                    f"({self.checks} checks, {self.evals} evaluations, {law})")
        if self.failure == "negative":
            return f"{self.kind}: fail at {self.word!r}: negative value {format_rational(self.lhs)}"
        return (f"{self.kind}: fail at {self.word!r}: "
                f"{format_rational(self.lhs)} < {format_rational(self.rhs)}")


def _sides(d: CapitalFn, w: Word, v: Fraction, v0: Fraction, v1: Fraction):
    """(lhs, rhs) with the fairness law reading lhs >= rhs."""
    if d.kind.startswith("O-"):
        O = d.odds_ctx
        return v, v0 / O.value(w + "0") + v1 / O.value(w + "1")
    if d.kind.startswith("s-"):
        s: Fraction = d.odds_ctx
        p, q = s.numerator, s.denominator
        return Fraction(2) ** p * v ** q, (v0 + v1) ** q
    return 2 * v, v0 + v1


def verify(d: CapitalFn, depth: int) -> VerifyReport:
    """Check d's fairness law at every word shorter than depth.

    Values at depths 0..depth are each computed once; the first violation
    (a negative value or a broken inequality) stops the walk.
    """
    values: dict[Word, Fraction] = {}

    def val(w: Word) -> Fraction:
        if w not in values:
            values[w] = d.value(w)
        return values[w]

    checks = 0
    exact = True
    level = [EMPTY]
    for _ in range(depth):
        next_level = []
        for w in level:
            v = val(w)
            if v < 0:
                return VerifyReport(False, d.kind, depth, checks, len(values), exact,
                                    "negative", w, v, None)
            v0, v1 = val(w + "0"), val(w + "1")
            for child, cv in ((w + "0", v0), (w + "1", v1)):
                if cv < 0:
                    return VerifyReport(False, d.kind, depth, checks, len(values), exact,
                                        "negative", child, cv, None)
            lhs, rhs = _sides(d, w, v, v0, v1)
            checks += 1
            if lhs < rhs or (d.kind in EXACT_KINDS and lhs != rhs):
                return VerifyReport(False, d.kind, depth, checks, len(values), exact,
                                    "fairness", w, lhs, rhs)
            if lhs != rhs:
                exact = False
            next_level.append(w + "0")
            next_level.append(w + "1")
        level = next_level
    return VerifyReport(True, d.kind, depth, checks, len(values), exact)


# ---------------------------------------------------------------------------
# combinations and measure changes


def weighted_sum(parts: list[tuple[Fraction, CapitalFn]]) -> CapitalFn:
    """Positive-weighted sum; requires one shared kind and odds context."""
    if not parts:
        raise ContractViolation("weighted sum needs at least one part")
    kind = parts[0][1].kind
    ctx = parts[0][1].odds_ctx
    for weight, part in parts:
        if Fraction(weight) <= 0:
            raise ContractViolation("weights must be positive")
        if part.kind != kind:
            raise ContractViolation(f"kind mismatch: {part.kind} vs {kind}")
        same = part.odds_ctx is ctx or part.odds_ctx == ctx
        if not same:
            raise ContractViolation("odds context mismatch in weighted sum")
    frozen = [(Fraction(weight), part) for weight, part in parts]
    return LambdaCapital(kind, lambda w: sum((wt * p.value(w) for wt, p in frozen), Fraction(0)),
                         odds_ctx=ctx)


_TO_ODDS = {"supermartingale": "O-supermartingale", "martingale": "O-martingale"}
_FROM_ODDS = {"O-supermartingale": "supermartingale", "O-martingale": "martingale"}


class _ViaMu(CapitalFn):
    def __init__(self, inner: CapitalFn, O: OddsRule, to_odds: bool):
        kind = (_TO_ODDS if to_odds else _FROM_ODDS)[inner.kind]
        super().__init__(kind, O if to_odds else None)
        self.inner = inner
        self.odds = O
        self.to_odds = to_odds
        self._cache: dict[Word, Fraction] = {}

    def value(self, w: Word) -> Fraction:
        product = oddsprod(self.odds, w, self._cache)
        scale = Fraction(1, 1 << len(w))
        if self.to_odds:
            return self.inner.value(w) * product * scale
        return self.inner.value(w) / (product * scale)

    def support_at(self, n: int):
        return self.inner.support_at(n)


def via_mu(d: CapitalFn, O: OddsRule, direction: str) -> CapitalFn:
    """Exchange the uniform measure for mu_O in d's fairness law.

    to-odds multiplies by oddsprod(w)/2^|w| and turns a plain
    (super)martingale into an O-(super)martingale; from-odds inverts.
    Exponent-s kinds have no mu_O counterpart here.
    """
    if direction not in ("to-odds", "from-odds"):
        raise ConfigError(f"unknown direction {direction!r}")
    to_odds = direction == "to-odds"
    table = _TO_ODDS if to_odds else _FROM_ODDS
    if d.kind not in table:
        raise ContractViolation(f"cannot change measure for kind {d.kind}")
    if to_odds and isinstance(d.odds_ctx, OddsRule) and d.odds_ctx is not O:
        raise ContractViolation("capital already carries a different odds context")
    return _ViaMu(d, O, to_odds)


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    """A finite table of per-step statistics, exportable as CSV or JSON."""

    headers: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    @staticmethod
    def _cell(value) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, Fraction):
            return format_rational(value)
        return str(value)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.headers)
        for row in self.rows:
            writer.writerow([self._cell(cell) for cell in row])
        return out.getvalue()

    def to_json(self) -> str:
        rows = [[cell if isinstance(cell, (bool, int)) and not isinstance(cell, Fraction)
                 else self._cell(cell) for cell in row] for row in self.rows]
        return canonical_json({"headers": list(self.headers), "rows": rows})


def gauge_success(d: CapitalFn, S: SeqGen, g: GaugeRule, n_max: int,
                  mode: str = "limsup", threshold: Fraction = ONE) -> Trajectory:
    """Capital against the gauge bar 2^n g(n) along S, up to n_max.

    The capital column is the mode statistic: the running maximum of the
    ratio d(S[0..n-1]) / (2^n g(n)) for limsup, the forward minimum for
    liminf. The crossed column marks rows where the raw ratio itself
    reaches the threshold.
    """
    if mode not in ("limsup", "liminf"):
        raise ConfigError(f"unknown success mode {mode!r}")
    threshold = Fraction(threshold)
    raws = [d.value(S.prefix(n)) / ((1 << n) * g.value(n)) for n in range(n_max + 1)]
    if mode == "limsup":
        stats, best = [], None
        for r in raws:
            best = r if best is None else max(best, r)
            stats.append(best)
    else:
        stats = [None] * len(raws)
        best = None
        for n in range(len(raws) - 1, -1, -1):
            best = raws[n] if best is None else min(best, raws[n])
            stats[n] = best
    rows = [(n, stats[n], threshold, raws[n] >= threshold) for n in range(n_max + 1)]
    return Trajectory(("n", "capital", "threshold", "crossed"), rows)


# ---------------------------------------------------------------------------
# functionals: uniform builders indexed by a rule


class OddsFunctional(Protocol):
    """Builds a capital function once an odds rule is fixed."""

    def build(self, odds: OddsRule) -> CapitalFn: ...


class GaugeFunctional(Protocol):
    """Builds a capital function once a gauge is fixed."""

    def build(self, gauge: GaugeRule) -> CapitalFn: ...


class LambdaFunctional:
    """Functional from a plain builder callable."""

    def __init__(self, builder: Callable):
        self._builder = builder

    def build(self, rule) -> CapitalFn:
        return self._builder(rule)


# ---------------------------------------------------------------------------
# reductions between gauge success and odds success


@dataclass
class GaugeToOddsResult:
    """Plain capital function built from an odds functional and a gauge."""

    capital: CapitalFn
    gauge: GaugeRule  # clamped so consecutive values never halve faster than 2
    odds: OddsRule


class _GaugeWindowCapital(CapitalFn):
    def __init__(self, inner: CapitalFn, clamped: list[Fraction], window: int):
        kind = "martingale" if inner.kind == "O-martingale" else "supermartingale"
        super().__init__(kind)
        self.inner = inner
        self._clamped = clamped
        self._window = window

    def value(self, w: Word) -> Fraction:
        if len(w) > self._window:
            raise ContractViolation(
                f"probed depth {len(w)} beyond the gauge window {self._window}", witness=w)
        return self.inner.value(w) * (1 << len(w)) * self._clamped[len(w)]

    def support_at(self, n: int):
        return self.inner.support_at(n)


def smz_to_sdz(F: OddsFunctional, h: GaugeRule) -> GaugeToOddsResult:
    """Turn an odds-indexed betting strategy into one capital falling under h.

    The gauge is first clamped backward over its probe window so it never
    halves faster than 2 per step; its step quotients then form a valid
    odds rule O in [1,2], and G(w) = F_O(w) * 2^|w| * h'(|w|) is a plain
    (super)martingale whose h-performance matches F_O's O-performance.
    Values beyond the probe window are out of contract.
    """
    window = h.probe_bound
    if window < 1:
        raise ContractViolation("gauge probe window must cover at least one step")
    clamped = [Fraction(0)] * (window + 1)
    clamped[window] = h.value(window)
    for n in range(window - 1, -1, -1):
        clamped[n] = min(h.value(n), 2 * clamped[n + 1])
    clamped_rule = GaugeTable({n: clamped[n] for n in range(window + 1)},
                              default=clamped[window], probe_bound=window)
    odds = OddsGaugeQuotient(clamped_rule)
    inner = F.build(odds)
    if not inner.kind.startswith("O-"):
        raise ContractViolation(f"the functional built kind {inner.kind}, not an O-kind")
    return GaugeToOddsResult(_GaugeWindowCapital(inner, clamped, window), clamped_rule, odds)


@dataclass
class OddsToGaugeResult:
    """Odds capital function built from a gauge functional and an odds rule."""

    capital: CapitalFn
    gauge: GaugeRule  # h(n) = largest mu_O over words of length n
    odds: OddsRule


def sdz_to_smz(G: GaugeFunctional, O: OddsRule, depth: int) -> OddsToGaugeResult:
    """Turn a gauge-indexed betting strategy into one betting at odds O.

    The induced gauge is h(n) = max mu_O over length-n words, tabulated to
    depth; O must shrink some cylinder below 1 by then. The plain capital
    G_h is then carried across the measure change, giving an O-kind F with
    F(S[0..n-1]) >= G_h(S[0..n-1]) / (2^n h(n)) along every sequence.
    """
    if depth < 1:
        raise ContractViolation("need at least one tabulated depth")
    if O.length_dependent:
        values, product = [], ONE
        for n in range(depth + 1):
            values.append(ONE / product)
            product *= O.value_at_length(n + 1)
    else:
        cache: dict[Word, Fraction] = {}
        if (1 << depth) > (1 << 18):
            raise CapExceeded(f"depth {depth} needs {1 << depth} nodes, over the enumeration budget")
        values = [max(mu(O, format(i, f"0{n}b") if n else EMPTY, cache) for i in range(1 << n))
                  for n in range(depth + 1)]
    if values[depth] >= 1:
        raise CapExceeded(
            f"largest cylinder still has measure {format_rational(values[depth])} at depth {depth}",
            achieved=values[depth])
    gauge = GaugeTable({n: values[n] for n in range(depth + 1)},
                       default=values[depth], probe_bound=depth)
    inner = G.build(gauge)
    if inner.kind not in _TO_ODDS:
        raise ContractViolation(f"the functional built kind {inner.kind}, not a plain kind")
    return OddsToGaugeResult(via_mu(inner, O, "to-odds"), gauge, O)
