"""Rule objects: parsing, serialization, ranges, and acceptability probes."""

import json
from fractions import Fraction

import pytest

from galekit import (CapExceeded, ConfigError, GaugeHarmonic, GaugePowers,
                     GaugeTable, OddsConst, OddsFrequent, OddsGaugeQuotient,
                     OddsLength, OddsTable, OrderLinear, OrderTable,
                     PredictorConst, PredictorTable, RangeViolation,
                     canonical_json, format_rational, parse_rational, parse_rule,
                     parse_rule_obj, probe_acceptability, serialize_rule,
                     eventually_constant)


def test_rationals_parse_from_quotient_strings_and_integers() -> None:
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational("2") == Fraction(2)
    assert parse_rational(5) == Fraction(5)


def test_rationals_reject_floats_and_garbage() -> None:
    with pytest.raises(ConfigError):
        parse_rational(0.5)
    with pytest.raises(ConfigError):
        parse_rational(True)
    with pytest.raises(ConfigError):
        parse_rational("one half")


def test_rationals_format_in_lowest_terms() -> None:
    assert format_rational(Fraction(6, 4)) == "3/2"
    assert format_rational(Fraction(8, 4)) == "2"
    assert format_rational(Fraction(0)) == "0"


def test_constant_odds_evaluate_everywhere() -> None:
    O = OddsConst(Fraction(3, 2), "[1,2]")
    assert O.value("") == Fraction(3, 2)
    assert O.value("0110") == Fraction(3, 2)
    assert O.value_at_length(7) == Fraction(3, 2)


def test_odds_outside_the_declared_range_are_rejected_eagerly() -> None:
    with pytest.raises(RangeViolation):
        OddsConst(Fraction(3), "[1,2]")
    with pytest.raises(RangeViolation):
        OddsTable({"0": Fraction(5, 2)}, Fraction(1), "[1,2]")
    with pytest.raises(RangeViolation):
        OddsLength({0: Fraction(1)}, Fraction(1, 2), "[1,inf)")
    with pytest.raises(RangeViolation):
        OddsConst(Fraction(3, 2), "{1,2}")


def test_table_odds_fall_back_to_the_default() -> None:
    O = OddsTable({"0": Fraction(2)}, Fraction(1), "[1,2]")
    assert O.value("0") == 2
    assert O.value("1") == 1
    assert O.value("00") == 1


def test_length_odds_index_by_word_length() -> None:
    O = OddsLength({2: Fraction(2)}, Fraction(1), "{1,2}")
    assert O.value("01") == 2
    assert O.value("0") == 1
    assert O.value_at_length(2) == 2


def test_gauge_quotient_odds_start_at_one() -> None:
    O = OddsGaugeQuotient(GaugePowers(Fraction(1, 2)))
    assert O.value("") == 1
    assert O.value("0") == 2
    assert O.value("01") == 2


def test_gauge_quotient_outside_two_is_a_range_violation() -> None:
    # halving faster than 2 per step pushes the quotient above 2
    g = GaugeTable({0: Fraction(1), 1: Fraction(1, 4)}, Fraction(1, 4))
    O = OddsGaugeQuotient(g)
    with pytest.raises(RangeViolation):
        O.value("0")


def test_frequent_odds_pay_on_listed_lengths_only() -> None:
    O = OddsFrequent([1, 3, 6])
    assert O.value_at_length(1) == 2
    assert O.value_at_length(2) == 1
    assert O.value_at_length(3) == Fraction(3, 2)
    assert O.value_at_length(6) == Fraction(4, 3)
    assert O.value_at_length(7) == 1


def test_frequent_odds_need_strictly_increasing_positive_lengths() -> None:
    with pytest.raises(ConfigError):
        OddsFrequent([2, 2])
    with pytest.raises(ConfigError):
        OddsFrequent([0, 1])


def test_acceptability_probe_finds_the_first_lucky_depth() -> None:
    # product over strict prefixes of S[:n]; odds 2 everywhere reaches 8 at n = 3
    O = OddsConst(Fraction(2), "[1,2]")
    S = eventually_constant("", "0")
    assert probe_acceptability(O, S, Fraction(8)) == 3


def test_acceptability_probe_with_telescoping_odds() -> None:
    # O(w) = (|w|+2)/(|w|+1) telescopes to n+1 over the strict prefixes
    entries = {n: Fraction(n + 2, n + 1) for n in range(16)}
    O = OddsLength(entries, Fraction(1), "[1,2]")
    S = eventually_constant("", "0")
    assert probe_acceptability(O, S, Fraction(10)) == 9


def test_acceptability_probe_reports_progress_when_capped() -> None:
    O = OddsConst(Fraction(1), "[1,2]")
    S = eventually_constant("", "0")
    with pytest.raises(CapExceeded) as info:
        probe_acceptability(O, S, Fraction(2), cap=10)
    assert info.value.achieved == 1


def test_gauge_tables_must_be_non_increasing() -> None:
    with pytest.raises(ConfigError):
        GaugeTable({0: Fraction(1, 4), 1: Fraction(1, 2)}, Fraction(1, 2))
    with pytest.raises(ConfigError):
        # the default tail counts too: the last entry must not sit below it
        GaugeTable({0: Fraction(1), 1: Fraction(1, 8)}, Fraction(1, 4))


def test_gauge_values() -> None:
    assert GaugePowers(Fraction(1, 2)).value(3) == Fraction(1, 8)
    assert GaugeHarmonic().value(3) == Fraction(1, 4)
    assert GaugeHarmonic().value(0) == 1


def test_linear_order_scales_depth() -> None:
    h = OrderLinear(Fraction(2))
    assert h.value(3) == 6
    with pytest.raises(ConfigError):
        OrderLinear(Fraction(0))


def test_order_tables_cover_an_initial_segment() -> None:
    h = OrderTable({0: Fraction(0), 1: Fraction(1), 2: Fraction(1)})
    assert h.value(2) == 1
    with pytest.raises(ConfigError):
        h.value(3)
    with pytest.raises(ConfigError):
        OrderTable({0: Fraction(0), 2: Fraction(1)})
    with pytest.raises(ConfigError):
        OrderTable({0: Fraction(1), 1: Fraction(0)})


def test_constant_predictor_splits_the_unit() -> None:
    pi = PredictorConst(Fraction(3, 4))
    assert pi.value("01", "0") == Fraction(3, 4)
    assert pi.value("01", "1") == Fraction(1, 4)
    with pytest.raises(ConfigError):
        PredictorConst(Fraction(5, 4))


def test_table_predictors_enforce_their_strictness() -> None:
    with pytest.raises(ConfigError):
        PredictorTable({"": (Fraction(1, 2), Fraction(1, 4))},
                       (Fraction(1, 2), Fraction(1, 2)), strict=True)
    pi = PredictorTable({"": (Fraction(1, 2), Fraction(1, 4))},
                        (Fraction(1, 2), Fraction(1, 2)), strict=False)
    assert pi.value("", "1") == Fraction(1, 4)
    assert pi.value("0", "1") == Fraction(1, 2)
    with pytest.raises(ConfigError):
        PredictorTable({"": (Fraction(3, 4), Fraction(1, 2))},
                       (Fraction(1, 2), Fraction(1, 2)), strict=False)


ROUND_TRIP_CONFIGS = [
    {"kind": "odds-const", "value": "3/2", "range": "[1,2]"},
    {"kind": "odds-table", "entries": {"": "2", "01": "3/2"}, "default": "1",
     "range": "[1,2]"},
    {"kind": "odds-length", "entries": {"2": "2"}, "default": "1", "range": "{1,2}"},
    {"kind": "odds-gauge-quotient",
     "gauge": {"kind": "gauge-powers", "base": "1/2", "probe_bound": 64},
     "range": "[1,2]"},
    {"kind": "odds-frequent", "lengths": [1, 3, 6], "range": "[1,2]"},
    {"kind": "odds-normalized", "base": {"kind": "odds-const", "value": "4",
                                         "range": "[1,inf)"}, "range": "(1,2]"},
    {"kind": "gauge-harmonic", "probe_bound": 64},
    {"kind": "gauge-const", "value": "1", "probe_bound": 64},
    {"kind": "gauge-table", "entries": {"0": "1"}, "default": "1/8",
     "probe_bound": 64},
    {"kind": "order-linear", "slope": "1"},
    {"kind": "order-table", "entries": {"0": "0", "1": "1"}},
    {"kind": "predictor-const", "p0": "1/2"},
    {"kind": "predictor-table", "entries": {"0": ["1/2", "1/4"]},
     "default": ["1/2", "1/2"], "strict": False},
    {"kind": "seq-eventually-constant", "head": "101", "tail": "0"},
    {"kind": "seq-periodic", "pattern": "01"},
    {"kind": "seq-finite-language", "members": ["0", "00"]},
]


@pytest.mark.parametrize("config", ROUND_TRIP_CONFIGS,
                         ids=[c["kind"] for c in ROUND_TRIP_CONFIGS])
def test_configs_round_trip_through_parse_and_serialize(config: dict) -> None:
    text = serialize_rule(parse_rule_obj(config))
    assert serialize_rule(parse_rule(text)) == text


def test_canonical_json_is_sorted_indented_and_newline_terminated() -> None:
    text = canonical_json({"b": 1, "a": [1, 2]})
    assert text == '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'


def test_parse_rule_reports_json_errors_with_position() -> None:
    with pytest.raises(ConfigError) as info:
        parse_rule('{"kind": "odds-const", }')
    assert "line" in str(info.value)


def test_parse_rule_rejects_unknown_kinds() -> None:
    with pytest.raises(ConfigError):
        parse_rule_obj({"kind": "odds-imaginary"})
    with pytest.raises(ConfigError):
        parse_rule_obj({"value": "2"})


def test_parse_rule_accepts_json_text() -> None:
    O = parse_rule(json.dumps({"kind": "odds-const", "value": "2",
                               "range": "[1,inf)"}))
    assert O.value("01") == 2
