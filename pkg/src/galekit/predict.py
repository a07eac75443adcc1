"""Predictors as betting strategies: losses, order-success, hint oracles.

A predictor assigns each (word, next bit) a probability; its running
product along a sequence is both the chance it gives the observed prefix
and, rescaled by 2^n, a martingale. Loss is the negated log of that
product, kept exact as the product itself and rendered to floats only
for display.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import CapExceeded, ContractViolation
from .gales import CapitalFn, Trajectory
from .rules import EMPTY, ONE, PredictionOrder, PredictorRule, SeqGen, Word

ZERO = Fraction(0)


class PredictorCapital(CapitalFn):
    """d(empty) = 1, d(wa) = 2 d(w) pi(w, a); a martingale iff pi is strict."""

    def __init__(self, pi: PredictorRule):
        super().__init__("martingale" if pi.strict else "supermartingale")
        self.pi = pi
        self._memo: dict[Word, Fraction] = {EMPTY: ONE}

    def value(self, w: Word) -> Fraction:
        k = len(w)
        while w[:k] not in self._memo:
            k -= 1
        acc = self._memo[w[:k]]
        for j in range(k, len(w)):
            acc = 2 * acc * self.pi.value(w[:j], w[j])
            self._memo[w[:j + 1]] = acc
        return acc


def pi_to_d(pi: PredictorRule) -> CapitalFn:
    """The capital function that backs the predictor's forecasts at even odds."""
    return PredictorCapital(pi)


class DerivedPredictor(PredictorRule):
    """pi(w, a) = d(wa) / (2 d(w)), falling back to 1/2 once capital dies."""

    kind = "predictor-derived"

    def __init__(self, d: CapitalFn):
        if d.kind not in ("supermartingale", "martingale"):
            raise ContractViolation(f"cannot read predictions out of kind {d.kind}")
        self.d = d
        self.strict = d.kind == "martingale"

    def value(self, w: Word, a: str) -> Fraction:
        here = self.d.value(w)
        if here == 0:
            return Fraction(1, 2)
        return self.d.value(w + a) / (2 * here)

    def to_config(self) -> dict:
        raise ContractViolation("a derived predictor has no config form")


def d_to_pi(d: CapitalFn) -> PredictorRule:
    """The forecasts implicit in a plain (super)martingale's bets."""
    return DerivedPredictor(d)


# ---------------------------------------------------------------------------
# loss accounting


@dataclass
class LossLedger:
    """Exact running products P(n) along a sequence, with the blow-up point.

    P(n) is the probability the predictor assigned to the first n bits;
    loss is -log2 P(n), infinite from the first zero factor onward.
    """

    probabilities: list[Fraction]
    infinite_from: int | None

    def display_loss(self, n: int) -> float:
        if self.infinite_from is not None and n >= self.infinite_from:
            return math.inf
        p = self.probabilities[n]
        return math.log2(p.denominator) - math.log2(p.numerator)

    def trajectory(self) -> Trajectory:
        rows = []
        for n, p in enumerate(self.probabilities):
            shown = self.display_loss(n)
            rows.append((n, p, "inf" if math.isinf(shown) else f"{shown:.6f}"))
        return Trajectory(("n", "P", "loss"), rows)


def loss(pi: PredictorRule, S: SeqGen, n_max: int) -> LossLedger:
    """Track the predictor's probability of each prefix of S up to n_max."""
    probabilities = [ONE]
    infinite_from = None
    acc = ONE
    for k in range(n_max):
        acc *= pi.value(S.prefix(k), S.bit(k))
        probabilities.append(acc)
        if acc == 0 and infinite_from is None:
            infinite_from = k + 1
    return LossLedger(probabilities, infinite_from)


def _beats_neg_power(x: Fraction, exponent: Fraction) -> bool:
    """x > 2^-exponent, decided radical-free for rational exponents >= 0."""
    if x <= 0:
        return False
    p, q = exponent.numerator, exponent.denominator
    return x.numerator ** q * 2 ** p > x.denominator ** q


def h_success(pi: PredictorRule, S: SeqGen, h: PredictionOrder, n_max: int) -> Trajectory:
    """Rows (n, P, h(n), witness): witness marks P(S[0..n-1]) > 2^-h(n).

    A witness certifies the loss so far sits strictly inside the budget h.
    """
    ledger = loss(pi, S, n_max)
    rows = []
    for n, p in enumerate(ledger.probabilities):
        budget = Fraction(h.value(n))
        rows.append((n, p, budget, _beats_neg_power(p, budget)))
    return Trajectory(("n", "P", "h(n)", "witness"), rows)


# ---------------------------------------------------------------------------
# predictor from a hint oracle


HintOracle = Callable[[int, Word], tuple[str, Word]]


class HintedPredictor(PredictorRule):
    """Predictor following a hint oracle along one target sequence.

    The oracle delta(n, w) answers with a favored next bit b and an
    alternative word x of length n starting with the other bit; it
    promises that the target continues through one of them. The predictor
    walks a chain of seed words along the target. At a seed with running
    probability Q it puts p = 1 - 2^-j on b and 2^-j on x's first bit,
    with j least so that Q p still beats the loss budget one step ahead,
    and n least so that Q 2^-j beats the budget at depth |w| + n; inside
    x it predicts with certainty. Every prediction pair sums to at most 1,
    and both successor seeds keep their loss strictly inside the budget.
    """

    kind = "predictor-hinted"
    strict = False

    def __init__(self, delta: HintOracle, h: PredictionOrder, S: SeqGen, *,
                 j_cap: int = 1024, n_cap: int = 1 << 14):
        self.delta = delta
        self.h = h
        self.S = S
        self.j_cap = j_cap
        self.n_cap = n_cap
        # seed word -> (Q, j, n, b, x); only seeds on the target expand
        self._seeds: dict[Word, tuple] = {}
        self._root = (EMPTY, ONE)

    def _expand(self, w: Word, Q: Fraction) -> tuple:
        if w in self._seeds:
            return self._seeds[w]
        if not self.S.prefix(len(w)) == w:
            raise ContractViolation(f"seed {w!r} left the target sequence", witness=w)
        j = 0
        while True:
            j += 1
            if j > self.j_cap:
                raise CapExceeded(f"no split survives the loss budget above seed {w!r}")
            p = ONE - Fraction(1, 1 << j)
            if _beats_neg_power(Q * p, Fraction(self.h.value(len(w) + 1))):
                break
        reserve = Q * Fraction(1, 1 << j)
        n = 0
        while True:
            n += 1
            if n > self.n_cap:
                raise CapExceeded(f"loss budget never outgrows the reserve above seed {w!r}")
            if _beats_neg_power(reserve, Fraction(self.h.value(len(w) + n))):
                break
        b, x = self.delta(n, w)
        if b not in ("0", "1") or len(x) != n or any(c not in "01" for c in x):
            raise ContractViolation(f"hint oracle returned a malformed answer at {w!r}")
        if x[0] == b:
            raise ContractViolation(f"hint alternative at {w!r} must start with the other bit")
        if self.S.prefix(len(w) + 1) != w + b and self.S.prefix(len(w) + n) != w + x:
            raise ContractViolation(f"hint at {w!r} misses the target sequence", witness=w)
        info = (Q, j, n, b, x)
        self._seeds[w] = info
        return info

    def _locate(self, v: Word):
        """(kind, data) for v: a seed, an interior alternative node, or off-tree."""
        w, Q = self._root
        while True:
            if self.S.prefix(len(w)) != w:
                return ("off", None)  # below a leaf seed that left the target
            Q, j, n, b, x = self._expand(w, Q)
            if v == w:
                return ("seed", (Q, j, b, x))
            a = v[len(w)]
            if a == b:
                w, Q = w + b, Q * (ONE - Fraction(1, 1 << j))
                continue
            # alternative branch: must follow x
            rest = v[len(w):]
            if rest[:n] != x[:len(rest[:n])]:
                return ("off", None)
            if len(rest) < n:
                return ("interior", x[len(rest)])
            w, Q = w + x, Q * Fraction(1, 1 << j)

    def value(self, v: Word, a: str) -> Fraction:
        if a not in ("0", "1"):
            raise ContractViolation(f"not a bit: {a!r}")
        kind, data = self._locate(v)
        if kind == "off":
            return ZERO
        if kind == "interior":
            return ONE if a == data else ZERO
        Q, j, b, x = data
        if a == b:
            return ONE - Fraction(1, 1 << j)
        return Fraction(1, 1 << j)

    def branch_points(self, n_max: int) -> list[int]:
        """Depths (>= 1) of the expanded seeds lying on the target, up to n_max."""
        depths = []
        w, Q = self._root
        while len(w) <= n_max:
            Q_, j, n, b, x = self._expand(w, Q)
            if w != EMPTY:
                depths.append(len(w))
            if self.S.prefix(len(w) + 1) == w + b:
                w, Q = w + b, Q * (ONE - Fraction(1, 1 << j))
            else:
                w, Q = w + x, Q * Fraction(1, 1 << j)
        return [d for d in depths if d <= n_max]

    def to_config(self) -> dict:
        raise ContractViolation("a hinted predictor has no config form")


def almost_constructible_predictor(delta: HintOracle, h: PredictionOrder,
                                   S: SeqGen) -> HintedPredictor:
    """Build the hint-following predictor for one target sequence."""
    return HintedPredictor(delta, h, S)
