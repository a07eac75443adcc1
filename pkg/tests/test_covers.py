"""Covers, extraction from betting strategies, and the reverse constructions."""

from fractions import Fraction

import pytest

from galekit import (CapExceeded, ConfigError, ContractViolation, CoverOracle,
                     ExtractedCover, FamilyGaleFunctional, FrequentExtractedCover,
                     LambdaCapital, OddsConst, SeqCover, TableCover, cover_to_gale,
                     eventually_constant, finite_cover_search, frequent_cover_to_gale,
                     oddsprod, parse_constructor_list, parse_cover_obj, verify)

ZEROS = eventually_constant("", "0")

FOUR = [
    {"kind": "constructor-append-constant", "bits": "0"},
    {"kind": "constructor-append-constant", "bits": "1"},
    {"kind": "constructor-append-constant", "bits": "01"},
    {"kind": "constructor-append-constant", "bits": "10"},
]


def four_family() -> FamilyGaleFunctional:
    return FamilyGaleFunctional(parse_constructor_list(FOUR))


class ShiftedRiders:
    """Rides each sequence with weight 2^-(j+1); root capital stays below 1."""

    def __init__(self, seqs):
        self.seqs = seqs

    def build(self, odds):
        def value(w):
            weight = sum((Fraction(1, 1 << (j + 1))
                          for j, s in enumerate(self.seqs) if s.prefix(len(w)) == w),
                         Fraction(0))
            return weight * oddsprod(odds, w) if weight else Fraction(0)

        return LambdaCapital("O-martingale", value, odds_ctx=odds)


def test_seq_cover_emits_prefixes() -> None:
    cover = SeqCover(eventually_constant("01", "1"))
    assert cover.mode == "total"
    assert cover.emit([1, 3, 5], 1) == "011"
    assert cover.emit([1, 3, 5], 2) == "01111"


def test_table_cover_modes_and_checks() -> None:
    total = TableCover({0: "0", 1: "011"})
    assert total.emit([1, 3], 1) == "011"
    with pytest.raises(ContractViolation):
        total.emit([1, 3], 2)
    with pytest.raises(ContractViolation):
        total.emit([2, 3], 0)  # answer length must match the asked length
    partial = TableCover({0: "0"}, mode="partial")
    assert partial.emit([1, 2], 1) is None
    with pytest.raises(ConfigError):
        TableCover({0: "0"}, mode="sometimes")
    with pytest.raises(ConfigError):
        TableCover({0: None})


def test_parse_cover_obj() -> None:
    cover = parse_cover_obj({"kind": "cover-seq",
                             "seq": {"kind": "seq-periodic", "pattern": "10"}})
    assert cover.emit([4], 0) == "1010"
    table = parse_cover_obj({"kind": "cover-table", "entries": {"0": "11"},
                             "mode": "partial"})
    assert table.emit([2, 3], 0) == "11"
    assert table.emit([2, 3], 1) is None
    with pytest.raises(ConfigError):
        parse_cover_obj({"kind": "cover-mystery"})
    with pytest.raises(ConfigError):
        parse_cover_obj(["cover-seq"])
    with pytest.raises(ConfigError):
        parse_cover_obj({"kind": "cover-seq"})
    with pytest.raises(ConfigError):
        parse_cover_obj({"kind": "cover-table", "entries": [1, 2]})


def test_extraction_schedule_must_increase() -> None:
    with pytest.raises(ContractViolation):
        ExtractedCover(four_family(), [2, 2, 3])
    with pytest.raises(ContractViolation):
        ExtractedCover(four_family(), [0, 1, 2])
    with pytest.raises(ContractViolation):
        ExtractedCover(four_family(), [1])  # too short for one full block


def test_extracted_cover_blocks_double() -> None:
    cov = ExtractedCover(four_family(), list(range(1, 15)))
    assert cov.blocks == 3
    assert cov.scan_lengths == [2, 6, 14]
    # induced odds double capital exactly at scan lengths
    assert cov.odds.value("00") == 2
    assert cov.odds.value("0") == 1
    assert cov.threshold == 2


def test_extracted_cover_hits_and_emissions() -> None:
    A = list(range(1, 15))
    cov = ExtractedCover(four_family(), A)
    assert cov.hits(0) == ["00"]
    assert cov.hits(1) == ["000000", "111111"]
    assert cov.hits(2) == ["0" * 14, "01" * 7, "1" * 14]
    assert [cov.block_stats[n]["how"] for n in range(3)] == ["brute"] * 3
    assert cov.emit(A, 0) == "0"
    assert cov.emit(A, 1) == "00"
    assert cov.emit(A, 2) == "000"
    assert cov.emit(A, 3) == "1111"
    # block 1 has only two hits; later indices fall back to zeros
    assert cov.emit(A, 4) == "00000"
    assert cov.emit(A, 6) == "0000000"
    assert cov.emit(A, 7) == "01010101"
    assert cov.emit(A, 8) == "111111111"


def test_extracted_cover_guards_its_schedule() -> None:
    A = list(range(1, 15))
    cov = ExtractedCover(four_family(), A)
    with pytest.raises(ContractViolation):
        cov.emit([1, 2, 3], 0)
    with pytest.raises(ContractViolation):
        cov.emit(A, 14)  # beyond the last complete block
    with pytest.raises(ContractViolation):
        cov.emit(A, -1)


def test_extracted_cover_sparse_scan_matches_brute() -> None:
    A = list(range(1, 15))
    brute = ExtractedCover(four_family(), A)
    sparse = ExtractedCover(four_family(), A, scan_cap=4)
    for n in range(3):
        assert sparse.hits(n) == brute.hits(n)
    assert sparse.block_stats[1]["how"] == "sparse"
    assert sparse.block_stats[2]["evals"] <= 4


def test_extracted_cover_without_support_needs_the_cap() -> None:
    class Opaque:
        def build(self, odds):
            return LambdaCapital("O-supermartingale",
                                 lambda w: Fraction(1, 2), odds_ctx=odds)

    A = list(range(1, 15))
    total = ExtractedCover(Opaque(), A, scan_cap=4)
    with pytest.raises(CapExceeded):
        total.hits(1)
    partial = ExtractedCover(Opaque(), A, mode="partial", scan_cap=4)
    assert partial.hits(1) is None
    assert partial.block_stats[1]["how"] == "skipped"
    assert partial.emit(A, 2) is None


def test_extracted_cover_threshold_override() -> None:
    A = list(range(1, 15))
    low = ExtractedCover(four_family(), A, threshold=Fraction(1))
    # at length 2 the lone "11" capital of 1 now clears the bar too
    assert low.hits(0) == ["00", "11"]


def test_frequent_extraction_triangular_blocks() -> None:
    B = list(range(1, 16))
    seqs = [eventually_constant("1" * j, "0") for j in range(4)]
    fcov = FrequentExtractedCover(ShiftedRiders(seqs), B, scan_cap=1 << 15)
    assert fcov.blocks == 5
    assert fcov.scan_lengths == [1, 3, 6, 10, 15]
    assert fcov.threshold == 1
    # odds (n+2)/(n+1) at scan lengths only
    assert fcov.odds.value("0") == 2
    assert fcov.odds.value("000") == Fraction(3, 2)
    assert fcov.odds.value("00") == 1


def test_frequent_extraction_capacity_fixture() -> None:
    B = list(range(1, 16))
    seqs = [eventually_constant("1" * j, "0") for j in range(4)]
    fcov = FrequentExtractedCover(ShiftedRiders(seqs), B, scan_cap=1 << 15)
    assert [len(fcov.hits(n)) for n in range(5)] == [0, 1, 1, 2, 2]
    for n in range(5):
        assert len(fcov.hits(n)) <= n + 1
    # hits are strict: weight 1/4 times product 4 is exactly 1 and stays out
    assert fcov.hits(2) == ["000000"]
    assert fcov.hits(3) == ["0" * 10, "1" + "0" * 9]
    assert fcov.emit(B, 0) == "0"  # block 0 has no hits; zeros fallback
    assert fcov.emit(B, 1) == "00"
    assert fcov.emit(B, 7) == "10000000"
    with pytest.raises(ContractViolation):
        fcov.emit(B, 15)
    with pytest.raises(ContractViolation):
        fcov.emit([2, 3], 0)


def test_cover_gale_root_and_components() -> None:
    d = cover_to_gale(SeqCover(ZEROS), OddsConst(2), 3, 2)
    assert d.value("") == Fraction(105, 32)
    assert d.value("") < 4
    assert d.schedules == [[0, 1, 2], [2, 3, 4], [4, 5, 6], [6, 7, 8]]
    for i in range(4):
        won = d.component_value(i, "0" * (2 * i))
        assert won == Fraction(7, 4) * (1 << i)
        assert won >= 1 << i


def test_cover_gale_rides_zero_continuations() -> None:
    d = cover_to_gale(SeqCover(ZEROS), OddsConst(2), 1, 1)
    assert d.value("") == Fraction(9, 4)
    # off the all-zeros path every rider dies
    assert d.value("1") == 0
    assert d.value("01") == 0
    assert verify(d, 8).ok


def test_cover_gale_rejects_colliding_schedules() -> None:
    with pytest.raises(ContractViolation):
        cover_to_gale(SeqCover(ZEROS), OddsConst(4), 1, 2)


def test_cover_gale_partial_covers_skip_riders() -> None:
    class EveryOther(CoverOracle):
        mode = "partial"

        def emit(self, A, i):
            return None if i % 2 else ZEROS.prefix(A[i])

    d = cover_to_gale(EveryOther(), OddsConst(2), 1, 1)
    # only the n = 0 riders of each exponent block survive
    assert d.value("") == Fraction(3, 2)
    assert d.value("00") == 6


def frequent_fixture():
    return frequent_cover_to_gale(SeqCover(ZEROS), OddsConst(2), 5)


def test_frequent_cover_gale_stage_schedule() -> None:
    d = frequent_fixture()
    assert d.stage_lengths == [1, 3, 6, 9, 13]
    assert d.A == [1, 3, 4, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17]
    # nested emissions prune to one kept word per stage
    assert d.kept == {b: ["0" * n] for b, n in enumerate([1, 3, 6, 9, 13])}


def test_frequent_cover_gale_frozen_values() -> None:
    d = frequent_fixture()
    assert d.value("") == Fraction(661, 960)
    assert d.value("") <= 1
    assert d.value("0000") == Fraction(121, 60)
    assert d.value("0" * 13) == Fraction(416, 5)
    assert d.value("1") == 0
    assert d.stage_value(2, "0000") == Fraction(5, 3)
    assert d.stage_value(2, "0" * 6) == Fraction(20, 3)
    assert d.stage_value(0, "") == Fraction(1, 2)
    assert d.component_value(1, "000") == 1
    assert d.component_value(4, "") == Fraction(1, 160)
    assert verify(d, 10).ok


def test_frequent_cover_gale_growth_along_the_sequence() -> None:
    d = frequent_fixture()
    lengths = d.stage_lengths
    for i in range(4):
        bound = Fraction(1 << i, i + 2)
        for k in range(lengths[1 + i], 14):
            assert d.value("0" * k) >= bound


def test_frequent_cover_gale_stage_limits() -> None:
    with pytest.raises(ContractViolation):
        frequent_cover_to_gale(SeqCover(ZEROS), OddsConst(2), 0)
    with pytest.raises(ContractViolation):
        frequent_cover_to_gale(SeqCover(ZEROS), OddsConst(2), 6)
    d = frequent_fixture()
    with pytest.raises(ContractViolation):
        d.stage_value(5, "0")
    with pytest.raises(ContractViolation):
        d.component_value(-1, "0")


def test_frequent_cover_gale_bounds_kept_extensions() -> None:
    cover = TableCover({0: "0", 1: "000", 2: "0010"})
    with pytest.raises(ContractViolation) as exc:
        frequent_cover_to_gale(cover, OddsConst(2), 2)
    assert "kept extensions" in str(exc.value)


def test_frequent_cover_gale_boosts_reuse_dying_stakes() -> None:
    cover = TableCover({0: "0", 1: "000", 2: "1110"})
    d = frequent_cover_to_gale(cover, OddsConst(2), 2)
    assert d.value("") == Fraction(3, 4)
    # the "0" base stake is re-staked onto "000": beta_1 + boost 1/2 per level
    assert d.value("000") == 5
    assert d.value("1110") == 2
    assert verify(d, 6).ok


def path_tree(paths: list[str], depth: int) -> set[str]:
    return {p[:n] for p in paths for n in range(depth + 1) if n <= len(p)}


def test_finite_cover_search_three_paths() -> None:
    tree = path_tree(["000", "100", "110"], 3)
    assert finite_cover_search(tree, [1, 2, 3]) == {1: "1", 2: "00"}


def test_finite_cover_search_single_path() -> None:
    tree = path_tree(["0000"], 4)
    assert finite_cover_search(tree, [2]) == {2: "00"}


def test_finite_cover_search_full_tree_fails() -> None:
    full = {format(i, f"0{n}b") if n else "" for n in range(5) for i in range(1 << n)}
    assert finite_cover_search(full, [1, 2, 3, 4]) is None


def test_finite_cover_search_short_branches_fail() -> None:
    assert finite_cover_search(["", "0", "1", "00", "01"], [1, 2]) is None


def test_finite_cover_search_validates_the_tree() -> None:
    with pytest.raises(ContractViolation):
        finite_cover_search(["0", "00"], [1])
    with pytest.raises(ContractViolation):
        finite_cover_search(["", "0", "011"], [1])
    with pytest.raises(ContractViolation):
        finite_cover_search(["", "0"], [])
    with pytest.raises(ContractViolation):
        finite_cover_search(["", "0"], [0, 1])
