"""Command line interface: exact betting objects from JSON configs.

Every argument that names a rule, capital, sequence, cover, or roster
accepts a shorthand name, a file path, or inline JSON (anything starting
with '{' or '['). All output is byte-deterministic: canonical JSON with
sorted keys, CSV with bare newlines, rationals in lowest terms.

Exit codes: 0 completed run, 2 contract violation, 3 budget exhausted,
64 usage error, 65 bad configuration.
"""

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import adversary, countable, covers, gales, measures, predict
from .errors import CapExceeded, ConfigError, ContractViolation, GalekitError, UsageError
from .rules import (EMPTY, GaugeRule, OddsRule, PredictionOrder, PredictorRule, SeqGen,
                    canonical_json, format_rational, parse_rational, parse_rule_obj)

_SHORTHANDS = {
    "seq": {
        "zeros": {"kind": "seq-eventually-constant", "head": "", "tail": "0"},
        "ones": {"kind": "seq-eventually-constant", "head": "", "tail": "1"},
        "alternating": {"kind": "seq-periodic", "pattern": "01"},
    },
    "gauge": {
        "dyadic": {"kind": "gauge-powers", "base": "1/2"},
        "harmonic": {"kind": "gauge-harmonic"},
        "one": {"kind": "gauge-const", "value": "1"},
    },
    "order": {
        "linear": {"kind": "order-linear", "slope": "1"},
    },
}


def _shorthand(family: str, text: str):
    table = _SHORTHANDS.get(family, {})
    if text in table:
        return dict(table[text])
    if family == "rule" and text.startswith("odds-const-"):
        value = parse_rational(text[len("odds-const-"):])
        rng = "[1,2]" if 1 <= value <= 2 else "[1,inf)"
        return {"kind": "odds-const", "value": format_rational(value), "range": rng}
    if family == "predictor" and text.startswith("const-"):
        return {"kind": "predictor-const", "p0": text[len("const-"):]}
    return None


def _load_obj(family: str, text: str):
    """Shorthand name, then file path, then inline JSON."""
    short = _shorthand(family, text)
    if short is not None:
        return short
    if text.lstrip().startswith(("{", "[")):
        source = text
    else:
        path = Path(text)
        if not path.is_file():
            raise ConfigError(f"no shorthand, file, or inline JSON at {text!r}")
        source = path.read_text()
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _load_rule(text: str, family: str, want: type):
    obj = _load_obj(family, text)
    rule = parse_rule_obj(obj)
    if not isinstance(rule, want):
        raise ConfigError(f"expected a {want.__name__} config, got kind {obj.get('kind')!r}")
    return rule


def _load_lengths(text: str) -> list[int]:
    if ".." in text and not text.lstrip().startswith("["):
        lo, hi = text.split("..", 1)
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError:
            raise ConfigError(f"bad length range {text!r}") from None
    obj = _load_obj("lengths", text)
    if not isinstance(obj, list):
        raise ConfigError("length schedule must be a JSON array or N..M range")
    return [int(a) for a in obj]


# ---------------------------------------------------------------------------
# functionals


class GaugedFunctional:
    """Gauge functional built by rescaling an odds functional over the gauge window."""

    def __init__(self, inner):
        self.inner = inner

    def build(self, gauge: GaugeRule) -> gales.CapitalFn:
        return gales.smz_to_sdz(self.inner, gauge).capital


def parse_functional_obj(obj: dict):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("functional config must be an object with a 'kind' tag")
    kind = obj["kind"]
    if kind == "functional-family-gale":
        return countable.FamilyGaleFunctional(
            countable.parse_constructor_list(obj.get("constructors")))
    if kind == "functional-weak-gale":
        return countable.WeakGaleFunctional(
            countable.parse_weak_constructor_list(obj.get("family")))
    if kind == "functional-const":
        value = parse_rational(obj.get("value", 1))
        if value < 0:
            raise ConfigError("functional-const value must be nonnegative")
        return gales.LambdaFunctional(
            lambda rule: gales.LambdaCapital("martingale", lambda w: value))
    if kind == "functional-gauged":
        return GaugedFunctional(parse_functional_obj(obj.get("inner")))
    raise ConfigError(f"unknown functional kind {kind!r}")


def _load_capital(args) -> gales.CapitalFn:
    obj = _load_obj("capital", args.capital)
    if isinstance(obj, dict) and str(obj.get("kind", "")).startswith("functional-"):
        functional = parse_functional_obj(obj)
        if args.rule is None:
            raise ConfigError("a functional capital needs --rule to instantiate against")
        return functional.build(_load_rule(args.rule, "rule", OddsRule))
    return gales.parse_capital_obj(obj)


def _load_functional(text: str):
    return parse_functional_obj(_load_obj("capital", text))


# ---------------------------------------------------------------------------
# output plumbing


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_trajectory(args, trajectory: gales.Trajectory) -> None:
    fmt = args.format or "csv"
    _emit(args, trajectory.to_csv() if fmt == "csv" else trajectory.to_json())


def _emit_report(args, obj) -> None:
    if args.format == "csv":
        raise ConfigError("this command writes json only")
    _emit(args, canonical_json(obj))


def _capital_table_config(d: gales.CapitalFn, depth: int) -> dict:
    entries = {}
    level = [EMPTY]
    for _ in range(depth + 1):
        for w in level:
            entries[w] = format_rational(d.value(w))
        level = [w + a for w in level for a in "01"]
    config = {"kind": "capital-table", "law": d.kind, "entries": entries}
    if d.kind.startswith("O-"):
        config["rule"] = d.odds_ctx.to_config()
    elif d.kind.startswith("s-"):
        config["s"] = format_rational(d.odds_ctx)
    return config


def _check_word_arg(text: str) -> str:
    if any(c not in "01" for c in text) and text != "-":
        raise ConfigError(f"not a binary word: {text!r}")
    return "" if text == "-" else text


# ---------------------------------------------------------------------------
# subcommands


def _cmd_verify(args) -> None:
    d = _load_capital(args)
    report = gales.verify(d, args.depth)
    law = report.kind
    if report.ok and report.exact:
        law = {"O-supermartingale": "O-martingale", "s-supergale": "s-gale",
               "supermartingale": "martingale"}.get(law, law)
    if report.ok:
        line = (f"{law}: pass to depth {report.depth} "
                f"({report.checks} checks, {report.evals} evaluations)\n")
    elif report.failure == "negative":
        line = (f"{report.kind}: fail at {report.word!r}: "
                f"negative value {format_rational(report.lhs)}\n")
    else:
        line = (f"{report.kind}: fail at {report.word!r}: "
                f"{format_rational(report.lhs)} < {format_rational(report.rhs)}\n")
    _emit(args, line)


def _cmd_mu(args) -> None:
    odds = _load_rule(args.rule, "rule", OddsRule)
    if args.word is not None:
        _emit(args, format_rational(measures.mu(odds, _check_word_arg(args.word))) + "\n")
        return
    if args.seq is None:
        raise ConfigError("mu needs --word or --seq")
    seq = _load_rule(args.seq, "seq", SeqGen)
    rows = [(n, measures.mu(odds, seq.prefix(n))) for n in range(args.n_max + 1)]
    _emit_trajectory(args, gales.Trajectory(("n", "mu"), rows))


def _cmd_normalize(args) -> None:
    odds = _load_rule(args.rule, "rule", OddsRule)
    rewritten = measures.normalize_range(odds, args.range)
    _emit(args, canonical_json(rewritten.to_config()))


def _cmd_convert_via_mu(args) -> None:
    d = _load_capital(args)
    odds = _load_rule(args.rule, "rule", OddsRule)
    out = gales.via_mu(d, odds, args.direction)
    _emit_report(args, _capital_table_config(out, args.depth))


def _cmd_convert_pi_d(args) -> None:
    pi = _load_rule(args.predictor, "predictor", PredictorRule)
    d = predict.pi_to_d(pi)
    _emit_report(args, _capital_table_config(d, args.depth))


def _cmd_convert_smz_sdz(args) -> None:
    functional = _load_functional(args.capital)
    gauge = _load_rule(args.gauge, "gauge", GaugeRule)
    result = gales.smz_to_sdz(functional, gauge)
    depth = min(args.depth, gauge.probe_bound)
    _emit_report(args, {"capital": _capital_table_config(result.capital, depth),
                        "gauge": result.gauge.to_config(),
                        "odds": result.odds.to_config()})


def _cmd_convert_sdz_smz(args) -> None:
    functional = _load_functional(args.capital)
    odds = _load_rule(args.rule, "rule", OddsRule)
    result = gales.sdz_to_smz(functional, odds, args.depth)
    _emit_report(args, {"capital": _capital_table_config(result.capital, args.depth),
                        "gauge": result.gauge.to_config(),
                        "odds": result.odds.to_config()})


def _cmd_success_gauge(args) -> None:
    d = _load_capital(args)
    seq = _load_rule(args.seq, "seq", SeqGen)
    gauge = _load_rule(args.gauge, "gauge", GaugeRule)
    threshold = parse_rational(args.threshold) if args.threshold else Fraction(1)
    _emit_trajectory(args, gales.gauge_success(d, seq, gauge, args.n_max,
                                               mode=args.mode, threshold=threshold))


def _cmd_success_loss(args) -> None:
    pi = _load_rule(args.predictor, "predictor", PredictorRule)
    seq = _load_rule(args.seq, "seq", SeqGen)
    if args.order is not None:
        order = _load_rule(args.order, "order", PredictionOrder)
        _emit_trajectory(args, predict.h_success(pi, seq, order, args.n_max))
        return
    _emit_trajectory(args, predict.loss(pi, seq, args.n_max).trajectory())


def _cmd_family_gale(args) -> None:
    constructors = countable.parse_constructor_list(_load_obj("constructors", args.constructors))
    odds = _load_rule(args.rule, "rule", OddsRule)
    d = countable.family_gale(constructors, odds)
    _emit_report(args, _capital_table_config(d, args.depth))


def _cmd_weak_gale(args) -> None:
    family = countable.parse_weak_constructor_list(_load_obj("family", args.family))
    odds = _load_rule(args.rule, "rule", OddsRule)
    d = countable.weak_gale(family, odds)
    _emit_report(args, _capital_table_config(d, args.depth))


def _cmd_cover_extract(args) -> None:
    functional = _load_functional(args.capital)
    threshold = parse_rational(args.threshold) if args.threshold else None
    lengths = _load_lengths(args.a)
    cover = covers.extract_cover(functional, lengths, args.mode,
                                 scan_cap=args.cap, threshold=threshold)
    emissions = {str(i): cover.emit(lengths, i)
                 for i in range((1 << (cover.blocks + 1)) - 2)}
    _emit_report(args, {"blocks": cover.blocks,
                        "scan_lengths": cover.scan_lengths,
                        "threshold": format_rational(cover.threshold),
                        "odds": cover.odds.to_config(),
                        "emissions": emissions})


def _cmd_cover_frequent_extract(args) -> None:
    functional = _load_functional(args.capital)
    threshold = parse_rational(args.threshold) if args.threshold else None
    lengths = _load_lengths(args.a)
    cover = covers.extract_frequent_cover(functional, lengths, args.mode,
                                          scan_cap=args.cap, threshold=threshold)
    top = cover.blocks * (cover.blocks - 1) // 2 + cover.blocks
    emissions = {str(i): cover.emit(lengths, i) for i in range(top)}
    _emit_report(args, {"blocks": cover.blocks,
                        "scan_lengths": cover.scan_lengths,
                        "threshold": format_rational(cover.threshold),
                        "odds": cover.odds.to_config(),
                        "emissions": emissions})


def _cmd_cover_to_gale(args) -> None:
    oracle = covers.parse_cover_obj(_load_obj("cover", args.cover))
    odds = _load_rule(args.rule, "rule", OddsRule)
    d = covers.cover_to_gale(oracle, odds, args.i_max, args.n_max, cap=args.cap)
    _emit_report(args, _capital_table_config(d, args.depth))


def _cmd_cover_frequent_to_gale(args) -> None:
    oracle = covers.parse_cover_obj(_load_obj("cover", args.cover))
    odds = _load_rule(args.rule, "rule", OddsRule)
    d = covers.frequent_cover_to_gale(oracle, odds, args.stages, cap=args.cap)
    _emit_report(args, {"capital": _capital_table_config(d, args.depth),
                        "stage_lengths": d.stage_lengths})


def _cmd_cover_search(args) -> None:
    tree = _load_obj("tree", args.tree)
    if not isinstance(tree, list):
        raise ConfigError("the tree must be a JSON array of words")
    lengths = _load_lengths(args.a)
    found = covers.finite_cover_search(tree, lengths)
    _emit_report(args, {"cover": None if found is None
                        else {str(a): w for a, w in sorted(found.items())}})


def _cmd_diagonalize(args) -> None:
    roster_obj = _load_obj("roster", args.roster)
    if not isinstance(roster_obj, list) or not roster_obj:
        raise ConfigError("the roster must be a nonempty JSON array of functional configs")
    roster = [adversary.BudgetedFunctional(parse_functional_obj(item)) for item in roster_obj]
    seq = _load_rule(args.seq, "seq", SeqGen)
    report = adversary.diagonalize(roster, seq, args.stages, window=args.cap)
    _emit_report(args, report.to_obj())


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p, *names, depth=8, n_max=32, cap=4096):
    if "depth" in names:
        p.add_argument("--depth", type=int, default=depth)
    if "n-max" in names:
        p.add_argument("--n-max", dest="n_max", type=int, default=n_max)
    if "cap" in names:
        p.add_argument("--cap", type=int, default=cap)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="galekit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check a capital function's fairness law")
    p.add_argument("--capital", required=True)
    p.add_argument("--rule")
    _add_common(p, "depth")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("mu", help="measure of a cylinder under an odds rule")
    p.add_argument("--rule", required=True)
    p.add_argument("--word")
    p.add_argument("--seq")
    _add_common(p, "n-max")
    p.set_defaults(fn=_cmd_mu)

    p = sub.add_parser("normalize", help="rewrite an odds rule into a target range")
    p.add_argument("--rule", required=True)
    p.add_argument("--range", required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_normalize)

    convert = sub.add_parser("convert", help="transformations between object kinds")
    csub = convert.add_subparsers(dest="conversion", required=True)

    p = csub.add_parser("via_mu", help="exchange uniform measure and mu_O")
    p.add_argument("--capital", required=True)
    p.add_argument("--rule", required=True)
    p.add_argument("--direction", choices=("to-odds", "from-odds"), required=True)
    _add_common(p, "depth")
    p.set_defaults(fn=_cmd_convert_via_mu)

    p = csub.add_parser("pi-d", help="capital function backing a predictor")
    p.add_argument("--predictor", required=True)
    _add_common(p, "depth")
    p.set_defaults(fn=_cmd_convert_pi_d)

    p = csub.add_parser("smz-sdz", help="odds functional to gauge-bounded capital")
    p.add_argument("--capital", required=True)
    p.add_argument("--gauge", required=True)
    _add_common(p, "depth")
    p.set_defaults(fn=_cmd_convert_smz_sdz)

    p = csub.add_parser("sdz-smz", help="gauge functional to odds capital")
    p.add_argument("--capital", required=True)
    p.add_argument("--rule", required=True)
    _add_common(p, "depth")
    p.set_defaults(fn=_cmd_convert_sdz_smz)

    success = sub.add_parser("success", help="performance along a sequence")
    ssub = success.add_subparsers(dest="criterion", required=True)

    p = ssub.add_parser("gauge", help="capital against a gauge bar")
    p.add_argument("--capital", required=True)
    p.add_argument("--rule")
    p.add_argument("--seq", required=True)
    p.add_argument("--gauge", required=True)
    p.add_argument("--mode", choices=("limsup", "liminf"), default="limsup")
    p.add_argument("--threshold")
    _add_common(p, "n-max")
    p.set_defaults(fn=_cmd_success_gauge)

    p = ssub.add_parser("loss", help="predictor loss, optionally against an order")
    p.add_argument("--predictor", required=True)
    p.add_argument("--seq", required=True)
    p.add_argument("--order")
    _add_common(p, "n-max")
    p.set_defaults(fn=_cmd_success_loss)

    p = sub.add_parser("family-gale", help="exact strategy for constructed sequences")
    p.add_argument("--constructors", required=True)
    p.add_argument("--rule", required=True)
    _add_common(p, "depth", depth=6)
    p.set_defaults(fn=_cmd_family_gale)

    p = sub.add_parser("weak-gale", help="strategy against weak constructors")
    p.add_argument("--family", required=True)
    p.add_argument("--rule", required=True)
    _add_common(p, "depth", depth=6)
    p.set_defaults(fn=_cmd_weak_gale)

    cover = sub.add_parser("cover", help="coverings and their gales")
    vsub = cover.add_subparsers(dest="action", required=True)

    p = vsub.add_parser("extract", help="cover from a strategy, geometric blocks")
    p.add_argument("--capital", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--mode", choices=("total", "partial"), default="total")
    p.add_argument("--threshold")
    _add_common(p, "cap", cap=1 << 14)
    p.set_defaults(fn=_cmd_cover_extract)

    p = vsub.add_parser("frequent-extract", help="cover from a strategy, triangular blocks")
    p.add_argument("--capital", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--mode", choices=("total", "partial"), default="total")
    p.add_argument("--threshold")
    _add_common(p, "cap", cap=1 << 14)
    p.set_defaults(fn=_cmd_cover_frequent_extract)

    p = vsub.add_parser("to-gale", help="strategy riding a cover")
    p.add_argument("--cover", required=True)
    p.add_argument("--rule", required=True)
    p.add_argument("--i-max", dest="i_max", type=int, default=2)
    _add_common(p, "depth", "n-max", "cap", n_max=2)
    p.set_defaults(fn=_cmd_cover_to_gale)

    p = vsub.add_parser("frequent-to-gale", help="staged strategy riding a frequent cover")
    p.add_argument("--cover", required=True)
    p.add_argument("--rule", required=True)
    p.add_argument("--stages", type=int, required=True)
    _add_common(p, "depth", "cap")
    p.set_defaults(fn=_cmd_cover_frequent_to_gale)

    p = vsub.add_parser("search", help="exhaustive finite cover search")
    p.add_argument("--tree", required=True)
    p.add_argument("--a", required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_cover_search)

    p = sub.add_parser("diagonalize", help="staged odds defeating a roster")
    p.add_argument("--roster", required=True)
    p.add_argument("--seq", required=True)
    p.add_argument("--stages", type=int, required=True)
    _add_common(p, "cap", cap=64)
    p.set_defaults(fn=_cmd_diagonalize)

    return parser


def main(argv=None) -> int:
    threads = os.environ.get("GALEKIT_THREADS")
    if threads is not None:
        try:
            if int(threads) < 1:
                raise ValueError
        except ValueError:
            sys.stderr.write("GALEKIT_THREADS must be an integer >= 1\n")
            return ConfigError.exit_code
    try:
        args = build_parser().parse_args(argv)
        args.fn(args)
        return 0
    except CapExceeded as exc:
        if exc.achieved is not None:
            sys.stdout.write(f"achieved: {format_rational(exc.achieved)}\n")
        sys.stderr.write(f"budget exhausted: {exc}\n")
        return exc.exit_code
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return exc.exit_code
    except GalekitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
