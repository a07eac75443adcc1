"""Staged diagonalization against a finite roster of betting functionals.

Each roster member proposes a capital function once it sees the odds; the
adversary grows the odds rule in stages, always placing the next doubled
length strictly beyond every length any member has queried so far, so no
already-confirmed small capital can have anticipated it. Query counting
and per-evaluation budgets keep every member's information finite and
auditable.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .errors import CapExceeded, ContractViolation
from .gales import CapitalFn
from .rules import ONE, OddsRule, SeqGen, TWO, Word


class BudgetExhausted(CapExceeded):
    """An evaluation used more odds queries than its budget allows."""


class StagedOdds(OddsRule):
    """Mutable length rule: 2 at marked lengths, 1 elsewhere.

    Marks are only ever added beyond all lengths queried so far, which
    keeps earlier answers consistent.
    """

    kind = "odds-staged"
    length_dependent = True

    def __init__(self):
        super().__init__("{1,2}")
        self.marked: set[int] = set()

    def add_mark(self, n: int) -> None:
        self.marked.add(int(n))

    def _raw(self, w: Word) -> Fraction:
        return self.value_at_length(len(w))

    def value_at_length(self, n: int) -> Fraction:
        return TWO if n in self.marked else ONE

    def to_config(self) -> dict:
        return {"kind": "odds-length",
                "entries": {str(n): "2" for n in sorted(self.marked)},
                "default": "1", "range": self.declared_range}


class CountingOdds(OddsRule):
    """Per-member view of a shared odds rule that logs every query length."""

    kind = "odds-counting"

    def __init__(self, inner: OddsRule):
        super().__init__(inner.declared_range)
        self.inner = inner
        self.length_dependent = inner.length_dependent
        self.log: list[int] = []
        self._budget: int | None = None
        self._spent = 0

    def start_evaluation(self, budget: int | None) -> None:
        self._budget = budget
        self._spent = 0

    def _count(self, n: int) -> None:
        self.log.append(n)
        self._spent += 1
        if self._budget is not None and self._spent > self._budget:
            raise BudgetExhausted("odds-query budget exhausted")

    def _raw(self, w: Word) -> Fraction:
        self._count(len(w))
        return self.inner.value(w)

    def value_at_length(self, n: int) -> Fraction:
        self._count(n)
        return self.inner.value_at_length(n)


class BudgetedFunctional:
    """An odds functional plus a per-evaluation query budget (None: unlimited).

    The budget is a function of the evaluated word's length.
    """

    def __init__(self, functional, budget: Callable[[int], int] | None = None):
        self.functional = functional
        self.budget = budget

    def build(self, odds: OddsRule) -> CapitalFn:
        return self.functional.build(odds)


@dataclass
class MemberReport:
    index: int
    activation_n: int
    max_capital: Fraction | None
    histogram: dict[int, int]
    timeouts: int
    verdict: bool

    def to_obj(self) -> dict:
        from .rules import format_rational
        return {"index": self.index,
                "activation_n": self.activation_n,
                "max_capital": None if self.max_capital is None else format_rational(self.max_capital),
                "histogram": {str(n): self.histogram[n] for n in sorted(self.histogram)},
                "timeouts": self.timeouts,
                "verdict": self.verdict}


@dataclass
class DiagonalizationReport:
    odds: StagedOdds
    marked: list[int]
    stage_ns: list[int]
    stage_ms: list[int]
    members: list[MemberReport] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {"marked": sorted(self.marked),
                "stage_ns": self.stage_ns,
                "stage_ms": self.stage_ms,
                "members": [m.to_obj() for m in self.members]}


class _Active:
    def __init__(self, index: int, member: BudgetedFunctional, counter: CountingOdds):
        self.index = index
        self.member = member
        self.counter = counter
        self.capital = member.build(counter)
        self.activation_n: int | None = None
        self.timeouts = 0

    def _evaluate(self, w: Word, use_partial: bool):
        budget = None if self.member.budget is None else self.member.budget(len(w))
        self.counter.start_evaluation(budget)
        try:
            if use_partial:
                try:
                    return self.capital.partial_value(1, w)
                except ContractViolation:
                    return self.capital.value(w)
            return self.capital.value(w)
        except BudgetExhausted:
            self.timeouts += 1
            return None
        finally:
            self.counter.start_evaluation(None)

    def confirmed_small(self, w: Word) -> bool:
        """True when the capital is certified at most 1/2 at w; timeouts block."""
        v = self._evaluate(w, use_partial=True)
        return v is not None and v <= Fraction(1, 2)

    def probe(self, w: Word):
        return self._evaluate(w, use_partial=False)


def diagonalize(roster: list[BudgetedFunctional], S: SeqGen, stages: int,
                window: int = 64) -> DiagonalizationReport:
    """Grow a staged odds rule under which no roster member's capital doubles.

    Stage s first activates member s (if any), building it against the
    odds marked so far. It then finds the least n beyond the last mark
    where every active member's capital is confirmed at most 1/2 on
    S[0..n-1], probes all active members on every prefix up to n, and
    places the next mark one past everything queried or probed. After the
    last stage each member's capital is scanned beyond its activation
    point up to the window; the verdict asks it to stay below 2.
    """
    if stages < 1:
        raise ContractViolation("need at least one stage")
    if len(roster) > stages:
        raise ContractViolation("every roster member needs a stage to activate in")
    shared = StagedOdds()
    active: list[_Active] = []
    stage_ns: list[int] = []
    stage_ms: list[int] = []
    m_prev = 0
    for s in range(stages):
        log_marks = {id(a): len(a.counter.log) for a in active}
        if s < len(roster):
            newcomer = _Active(s, roster[s], CountingOdds(shared))
            active.append(newcomer)
            log_marks[id(newcomer)] = 0  # build-time queries count toward the mark
        n = None
        for candidate in range(m_prev + 1, window + 1):
            w = S.prefix(candidate)
            if all(a.confirmed_small(w) for a in active):
                n = candidate
                break
        if n is None:
            raise CapExceeded(f"no confirmation point found within the window at stage {s}")
        if s < len(roster):
            active[-1].activation_n = n
        for a in active:
            for j in range(n + 1):
                a.probe(S.prefix(j))
        fresh = [length for a in active for length in a.counter.log[log_marks[id(a)]:]]
        m = 1 + max(fresh + [n, m_prev])
        shared.add_mark(m)
        stage_ns.append(n)
        stage_ms.append(m)
        m_prev = m
    report = DiagonalizationReport(shared, sorted(shared.marked), stage_ns, stage_ms)
    for a in active:
        start = a.activation_n if a.activation_n is not None else 0
        best = None
        for j in range(start + 1, window + 1):
            v = a.probe(S.prefix(j))
            if v is not None and (best is None or v > best):
                best = v
        histogram: dict[int, int] = {}
        for length in a.counter.log:
            histogram[length] = histogram.get(length, 0) + 1
        verdict = a.timeouts == 0 and (best is None or best < 2)
        report.members.append(MemberReport(a.index, start, best, histogram,
                                           a.timeouts, verdict))
    return report
