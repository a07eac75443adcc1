"""Exact-rational betting objects on binary strings.

Odds supermartingales, gales, predictors, coverings, constructors, and
the transformations between them, all testable at finite depth with
exact arithmetic.
"""

from .errors import (CapExceeded, ConfigError, ContractViolation, GalekitError,
                     RangeViolation, UsageError)
from .words import (EMPTY, SeqGen, Word, eventually_constant,
                    finite_language_characteristic, is_prefix, lex_index, lex_word,
                    pair, periodic, unpair)
from .rules import (ODDS_RANGES, GaugeConst, GaugeHarmonic, GaugePowers, GaugeRule,
                    GaugeTable, NormalizedOdds, OddsConst, OddsFrequent,
                    OddsGaugeQuotient, OddsLength, OddsRule, OddsTable, OrderLinear,
                    OrderTable, PredictionOrder, PredictorConst, PredictorRule,
                    PredictorTable, canonical_json, format_rational, normalize_config,
                    parse_rational, parse_rule, parse_rule_obj, probe_acceptability,
                    serialize_rule)
from .measures import (PremeasureReport, check_premeasure, f_O, g_O, mu,
                       normalize_range, oddsprod)
from .gales import (EXACT_KINDS, KINDS, CapitalFn, GaugeFunctional, GaugeToOddsResult,
                    LambdaCapital, LambdaFunctional, OddsFunctional, OddsToGaugeResult,
                    TableCapital, Trajectory, VerifyReport, gauge_success,
                    parse_capital_obj, sdz_to_smz, smz_to_sdz, verify, via_mu,
                    weighted_sum)
from .predict import (DerivedPredictor, HintedPredictor, LossLedger, PredictorCapital,
                      almost_constructible_predictor, d_to_pi, h_success, loss,
                      pi_to_d)
from .countable import (FAMILY_RANGES, Constructor, FamilyGale, FamilyGaleFunctional,
                        WeakConstructor, WeakGale, WeakGaleFunctional, family_gale,
                        parse_constructor, parse_constructor_list,
                        parse_weak_constructor, parse_weak_constructor_list,
                        prefix_free_shorter, weak_gale)
from .covers import (CoverGale, CoverOracle, ExtractedCover, FrequentCoverGale,
                     FrequentExtractedCover, SeqCover, TableCover, cover_to_gale,
                     extract_cover, extract_frequent_cover, finite_cover_search,
                     frequent_cover_to_gale, parse_cover_obj)
from .adversary import (BudgetedFunctional, BudgetExhausted, CountingOdds,
                        DiagonalizationReport, MemberReport, StagedOdds, diagonalize)

__all__ = [name for name in dir() if not name.startswith("_")]
