"""Command-line front end: ``lexan <subcommand> [flags]``.

Every subcommand prints one JSON document (keys sorted, so output is
byte-identical across runs) or, with ``--format table``, one ``key<TAB>value``
line per leaf.  Exit codes: 0 success, 2 validation/domain/usage errors,
1 internal errors.  Errors are reported as ``{"error": code, "message": ...}``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from . import gateaux, prepared, scale
from .errors import LexanError, ValidationError
from .expr import ReferenceDomain, classify, differentiate, exp_depth, log_depth, parse, to_text
from .rational import as_fraction, format_fraction, parse_rational_list


class UsageError(ValidationError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage().strip()}")


# -- input helpers ----------------------------------------------------------


def _exponent(text: str, flag: str) -> scale.Exponent:
    if text is None:
        raise UsageError(f"{flag} is required")
    return scale.Exponent(parse_rational_list(text))


def _load_tuple(path: Optional[str]) -> prepared.PreparedTuple:
    if path is None:
        raise UsageError("--tuple FILE is required")
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None
    return prepared.PreparedTuple.from_json(data)


def _params(text: Optional[str]):
    """``--t``: one rational (``t``/``t1``) or a comma list (``t1, t2, ...``)."""
    if text is None:
        return None
    values = parse_rational_list(text)
    return values[0] if len(values) == 1 and "," not in text else list(values)


def _point(text: Optional[str]) -> scale.LogPoint:
    if text is None:
        raise UsageError('--point is required, e.g. \'{"mode":"direct","x":"1/10"}\'')
    try:
        return scale.LogPoint.from_json(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"--point is not valid JSON: {exc}") from None


def _vector(text: Optional[str]) -> list[Fraction]:
    if text is None:
        raise UsageError("--point is required (a JSON list or comma list of coordinates)")
    text = text.strip()
    if text.startswith("["):
        try:
            return [as_fraction(str(c)) for c in json.loads(text)]
        except json.JSONDecodeError as exc:
            raise ValidationError(f"--point is not valid JSON: {exc}") from None
    return list(parse_rational_list(text))


def _derivatives(text: str) -> list:
    out = []
    for item in text.split(","):
        item = item.strip()
        if item.lower() in ("none", "null", "nan"):
            out.append(None)
        else:
            try:
                out.append(mpmath.mpf(item))
            except ValueError:
                raise ValidationError(f"cannot read derivative value {item!r}") from None
    return out


def _num(value, digits: int) -> str:
    return mpmath.nstr(value, digits)


def _oracle(args, m: int):
    if args.oracle_cmd:
        return gateaux.ProcessOracle(args.oracle_cmd.split(), dps=args.precision)
    if args.expr is None:
        raise UsageError("--expr or --oracle-cmd is required")
    return gateaux.ExprOracle(args.expr, m, dps=args.precision)


# -- subcommands ------------------------------------------------------------


def cmd_scale_limit(args) -> dict:
    return {"class": scale.limit_class(_exponent(args.q, "--q")).value}


def cmd_scale_diff(args) -> dict:
    if args.sum is not None:
        s = scale.MonomialSum.from_json(json.loads(args.sum))
    else:
        q = _exponent(args.q, "--q")
        s = scale.MonomialSum.monomial(q)
    d = scale.diff(s)
    out = {"derivative": d.to_json()}
    if len(d):
        c, q = scale.leading_term(d)
        out["leading"] = {"coeff": format_fraction(c), "exp": q.to_json()}
    if args.q is not None and args.sum is None:
        q = _exponent(args.q, "--q")
        if not q.is_zero():
            out["q_diff"] = scale.q_diff(q).to_json()
    return out


def cmd_scale_compare(args) -> dict:
    return {"order": scale.compare(_exponent(args.lhs, "--lhs"), _exponent(args.rhs, "--rhs")).value}


def cmd_eval(args) -> dict:
    f = _load_tuple(args.tuple)
    value = prepared.eval_prepared(f, _params(args.t), _point(args.point), dps=args.precision)
    return {"value": _num(value, args.precision)}


def cmd_split(args) -> dict:
    split = prepared.analytic_split(_load_tuple(args.tuple))
    out = split.to_json()
    if args.t is not None:
        mu = split.mu(_params(args.t), dps=args.precision)
        out["mu"] = None if mu is None else mu.to_json()
    return out


def cmd_ceiling(args) -> dict:
    split = prepared.analytic_split(_load_tuple(args.tuple))
    t = _params(args.t)
    ceiling = prepared.smoothness_ceiling(split, t, dps=args.precision)
    mu = split.mu(t, dps=args.precision)
    return {"ceiling": "Infinity" if math.isinf(ceiling) else ceiling,
            "mu": None if mu is None else mu.to_json()}


def cmd_flat_n(args) -> dict:
    return {"N": prepared.flatness_threshold(_load_tuple(args.tuple))}


def cmd_quasi_check(args) -> dict:
    if args.derivs is None:
        raise UsageError("--derivs is required (comma list of f^(k)(t,0), 'none' if it does not exist)")
    f = _load_tuple(args.tuple)
    return prepared.quasianalytic_check(f, _params(args.t), _derivatives(args.derivs), tol=args.tol).to_json()


def _expr_arg(args):
    if args.expr is None:
        raise UsageError("--expr is required")
    return parse(args.expr)


def cmd_parse(args) -> dict:
    e = _expr_arg(args)
    return {"expr": to_text(e), "free_vars": sorted(e.free_vars()),
            "exp_depth": exp_depth(e), "log_depth": log_depth(e)}


def cmd_classify(args) -> dict:
    e = _expr_arg(args)
    reference = ReferenceDomain.parse(args.domain) if args.domain else None
    return classify(e, reference, seed=args.seed, jobs=args.jobs).to_json()


def cmd_deriv(args) -> dict:
    e = _expr_arg(args)
    d = differentiate(e, args.var)
    return {"derivative": to_text(d), "exp_depth": exp_depth(d), "var": args.var}


def _scheme(args) -> gateaux.FDScheme:
    return gateaux.FDScheme(dps=args.precision)


def cmd_gk_test(args) -> dict:
    u = _vector(args.point)
    oracle = _oracle(args, len(u))
    try:
        result = gateaux.gk_test(oracle, _params(args.t), u, args.k, tol=args.tol, seed=args.seed,
                                 validation_directions=args.directions, scheme=_scheme(args), jobs=args.jobs)
    finally:
        if isinstance(oracle, gateaux.ProcessOracle):
            oracle.close()
    return result.to_json()


def cmd_gk_search(args) -> dict:
    u = _vector(args.point)
    oracle = _oracle(args, len(u))
    try:
        result = gateaux.g_infinity_search(oracle, _params(args.t), u, args.k_max, tol=args.tol, seed=args.seed,
                                           validation_directions=args.directions, scheme=_scheme(args),
                                           jobs=args.jobs)
    finally:
        if isinstance(oracle, gateaux.ProcessOracle):
            oracle.close()
    return result.to_json()


COMMANDS = {
    "scale-limit": (cmd_scale_limit, "limit class of |Y|^q as x -> 0+", ["q"]),
    "scale-diff": (cmd_scale_diff, "exact derivative of a monomial (--q) or monomial sum (--sum)", ["q", "sum"]),
    "scale-compare": (cmd_scale_compare, "dominance order of two monomials", ["lhs", "rhs"]),
    "eval": (cmd_eval, "evaluate a prepared tuple", ["tuple", "t", "point"]),
    "split": (cmd_split, "analytic split of a prepared tuple", ["tuple", "t"]),
    "ceiling": (cmd_ceiling, "smoothness ceiling at a parameter", ["tuple", "t"]),
    "flat-n": (cmd_flat_n, "flatness threshold N", ["tuple"]),
    "quasi-check": (cmd_quasi_check, "quasianalyticity verdict from derivatives at 0", ["tuple", "t", "derivs"]),
    "parse": (cmd_parse, "parse and print an expression canonically", ["expr"]),
    "classify": (cmd_classify, "nesting bounds and exp-boundedness evidence", ["expr", "domain"]),
    "deriv": (cmd_deriv, "symbolic derivative", ["expr", "var"]),
    "gk-test": (cmd_gk_test, "Gateaux G^k test", ["expr", "oracle", "t", "point", "k", "gk"]),
    "gk-search": (cmd_gk_search, "sequential G^1..G^k_max search", ["expr", "oracle", "t", "point", "k_max", "gk"]),
}


def _add_flags(p: argparse.ArgumentParser, groups: Sequence[str]) -> None:
    flags = {
        "q": lambda: p.add_argument("--q", help='exponent vector, e.g. "0,2,-3/2"'),
        "sum": lambda: p.add_argument("--sum", help='JSON list of {"coeff": "p/q", "exp": [...]}'),
        "lhs": lambda: p.add_argument("--lhs", help="left exponent vector"),
        "rhs": lambda: p.add_argument("--rhs", help="right exponent vector"),
        "tuple": lambda: p.add_argument("--tuple", metavar="FILE", help="prepared-tuple/v1 JSON file"),
        "t": lambda: p.add_argument("--t", help='parameter value(s), e.g. "1/2" or "1/2,3"'),
        "point": lambda: p.add_argument("--point", help="evaluation point (JSON)"),
        "derivs": lambda: p.add_argument("--derivs", help='derivatives at 0 of orders 0..N, e.g. "0,0,none"'),
        "expr": lambda: p.add_argument("--expr", help="DSL expression"),
        "domain": lambda: p.add_argument("--domain", help='reference set, e.g. "x:[0,1)" or JSON boxes'),
        "var": lambda: p.add_argument("--var", default="x", help="differentiation variable (default x)"),
        "oracle": lambda: p.add_argument("--oracle-cmd", help="external NDJSON oracle command"),
        "k": lambda: p.add_argument("--k", type=int, default=1, help="derivative order"),
        "k_max": lambda: p.add_argument("--k-max", type=int, default=4, help="largest order to test"),
        "gk": lambda: p.add_argument("--directions", type=int, default=5, help="validation directions"),
    }
    for g in groups:
        flags[g]()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lexan", description="Restricted log-exp-analytic calculus toolbox.")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    for name, (_, help_text, groups) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        _add_flags(p, groups)
        p.add_argument("--precision", type=int, default=30, help="working precision in digits")
        p.add_argument("--seed", type=int, default=0, help="seed for all randomness")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers for probe fan-out")
        p.add_argument("--tol", type=float, default=1e-6, help="tolerance")
        p.add_argument("--format", choices=("json", "table"), default="json")
    return parser


def _table(doc, prefix: str = "") -> list[str]:
    if isinstance(doc, dict):
        return [line for key in sorted(doc) for line in _table(doc[key], f"{prefix}{key}.")]
    if isinstance(doc, list) and any(isinstance(x, (dict, list)) for x in doc):
        return [line for i, x in enumerate(doc) for line in _table(x, f"{prefix}{i}.")]
    value = doc if isinstance(doc, str) else json.dumps(doc)
    return [f"{prefix.rstrip('.')}\t{value}"]


def _emit(doc: dict, fmt: str, stream) -> None:
    if fmt == "table":
        stream.write("\n".join(_table(doc)) + "\n")
    else:
        stream.write(json.dumps(doc, sort_keys=True, ensure_ascii=False) + "\n")


def main(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    fmt = "json"
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        fmt = args.format
        if args.precision < 5:
            raise UsageError("--precision must be at least 5")
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        doc = COMMANDS[args.command][0](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ValidationError as exc:
        _emit({"error": exc.code, "message": str(exc)}, fmt, stdout)
        return 2
    except LexanError as exc:
        _emit({"error": exc.code, "message": str(exc)}, fmt, stdout)
        return 1
    except Exception as exc:  # never leak a traceback
        _emit({"error": "internal", "message": f"{type(exc).__name__}: {exc}"}, fmt, stdout)
        return 1
    _emit(doc, fmt, stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
