"""Command-line driver.

Every subcommand takes its parameters from flags or from ``--config FILE``,
a UTF-8 JSON object whose keys are the flag names (``-`` or ``_``) plus an
optional ``"command"``.  Flags given on the command line override the file.
Data goes to ``--out`` (or stdout); progress goes to stderr.

Exit status: 0 success, 1 precondition or parse error, 2 internal
consistency failure (for example a reduction tree exceeding its depth).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from collections import Counter
from fractions import Fraction
from pathlib import Path

from . import __version__
from .counting import (
    PatternSystem,
    asymptotic_check,
    format_real,
    representability_census,
    write_asymptotic_csv,
    write_census_csv,
)
from .dynamics import mixing_table, vdc_average, weak_mixing_statistic, weyl_discrepancy
from .errors import ConsistencyError, FactViolationError, ParseError, PreconditionError, WmsetsError
from .integer_sets import from_provenance, parse_descriptor, resolve_set
from .pet import build_reduction_tree, verify_reduction_facts
from .polynomials import (
    is_admissible_family,
    is_admissible_sequence,
    is_uniformly_admissible,
    parse_family,
    parse_univariate,
)
from .reals import parse_rational

log = logging.getLogger("wmsets")

MIXING_COLUMNS = ["U", "V", "N", "lag_cap", "f_U", "f_V", "W"]
VDC_COLUMNS = ["N", "H", "K", "lhs_norm", "lhs_norm_sq", "averaged_norm", "cs_bound", "vdc_bound", "split_bound", "slack"]
WEYL_COLUMNS = ["polynomial", "alpha", "delta", "T", "count", "fraction", "target", "gap"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(f"{self.prog}: {message}")


# --- value helpers ------------------------------------------------------------------


def _int_list(value, name: str) -> list[int]:
    """``"1,2,3"``, ``"1..5"``, ``"-3..3,7"`` or a JSON list."""
    if value is None:
        raise PreconditionError(f"--{name} is required")
    if isinstance(value, int) and not isinstance(value, bool):
        return [value]
    if isinstance(value, (list, tuple)):
        out = []
        for v in value:
            out.extend(_int_list(v, name))
        return out
    out = []
    for part in str(value).split(","):
        part = part.strip()
        if not part:
            continue
        lo, dots, hi = part.partition("..")
        try:
            if dots:
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise ParseError(f"--{name}: not an integer list: {value!r}") from None
    if not out:
        raise PreconditionError(f"--{name} is empty")
    return out


def _range2(value, name: str) -> tuple[int, int]:
    vals = _int_list(value, name)
    if len(vals) != 2 and not (isinstance(value, str) and ".." in value):
        raise ParseError(f"--{name} needs two integers lo,hi")
    return min(vals), max(vals)


def _int(value, name: str) -> int:
    if value is None:
        raise PreconditionError(f"--{name} is required")
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ParseError(f"--{name}: not an integer: {value!r}") from None


def _need(value, name: str):
    if value is None or value == "":
        raise PreconditionError(f"--{name} is required")
    return value


def _family(value):
    if isinstance(value, (list, tuple)):
        return parse_family(list(value))
    return parse_family(_need(value, "family"))


def _real_text(x) -> str:
    if isinstance(x, (Fraction, float)):
        return format_real(x)
    return str(x)


def _emit(text: str, out) -> None:
    if out in (None, "", "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(out)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    log.info("wrote %s", path)


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_real_text(r[c]) for c in columns])
    return buf.getvalue()


# --- subcommands --------------------------------------------------------------------


def cmd_gen_set(a) -> int:
    if a.set:
        prov = parse_descriptor(a.set) if isinstance(a.set, str) else dict(a.set)
    else:
        kind = _need(a.kind, "kind")
        parts = [f"horizon={_int(a.horizon, 'horizon')}"]
        for key in ("p", "seed", "modulus", "alpha", "epsilon", "frac_bits", "minus"):
            v = getattr(a, key)
            if v is not None:
                parts.append(f"{key}={v}")
        if a.residues is not None:
            res = a.residues if isinstance(a.residues, str) else ",".join(map(str, a.residues))
            parts.append("residues=" + "+".join(r.strip() for r in res.replace("+", ",").split(",")))
        prov = parse_descriptor(kind + ":" + ",".join(parts))
    t = time.perf_counter()
    A = from_provenance(prov)
    out = _need(a.out, "out")
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    A.save(out)
    log.info("generated %s in %.2fs: horizon %d, %d elements", prov["kind"], time.perf_counter() - t, A.horizon, A.count())
    return 0


def cmd_check_admissible(a) -> int:
    fam = _family(a.family)
    mode = a.mode or "uniform"
    if mode == "sequence":
        polys = []
        for f in fam:
            if f.depends_on_n():
                raise PreconditionError("sequence mode takes polynomials in x only")
            polys.append(f.as_univariate())
        v = is_admissible_sequence(polys)
    elif mode == "uniform":
        v = is_uniformly_admissible(fam)
    elif mode == "family":
        v = is_admissible_family(fam, _int(a.test_horizon, "test-horizon"))
    else:
        raise ParseError(f"unknown mode {mode!r}")
    _emit(_json_text(v.to_json()), a.out)
    return 0


def _univariate_family(value):
    fam = _family(value)
    if any(f.depends_on_n() for f in fam):
        raise PreconditionError("this command takes polynomials in x only")
    return [f.as_univariate() for f in fam]


def cmd_pet_trace(a) -> int:
    fam = _univariate_family(a.family)
    hs = _int_list(a.h, "h")
    tree = build_reduction_tree(
        fam, hs, max_depth=_int(a.max_depth, "max-depth"),
        max_branch=None if a.max_branch is None else _int(a.max_branch, "max-branch"),
        widen=bool(a.widen), truncate=bool(a.truncate),
    )
    problems = tree.validate()
    _emit(_json_text(tree.to_json()), a.out)
    log.info("tree: depth %d, %d nodes", tree.depth, tree.node_count)
    if problems:
        for p, k in Counter(problems).items():
            log.error("%s%s", p, f" (x{k})" if k > 1 else "")
        return 2
    return 0


def cmd_verify_pet(a) -> int:
    fam = _family(a.family)
    h_range = _range2(a.h_range, "h-range")
    t_range = None if a.t_range is None else _range2(a.t_range, "t-range")
    try:
        report = verify_reduction_facts(fam, h_range, t_range, strict=True)
    except FactViolationError as exc:
        _emit(_json_text(exc.report.to_json()), a.out)
        raise
    _emit(_json_text(report.to_json()), a.out)
    return 0


def _system(a) -> PatternSystem:
    fam = _family(a.family)
    A = resolve_set(_need(a.A, "A"))
    B = resolve_set(a.B) if a.B is not None else A
    return PatternSystem(fam, A, B)


def cmd_count_patterns(a) -> int:
    sys_ = _system(a)
    rows = asymptotic_check(sys_, [_int(a.N, "N")], _int(a.M, "M"))
    buf = io.StringIO()
    write_asymptotic_csv(rows, buf)
    _emit(buf.getvalue(), a.out)
    return 0


def cmd_verify_asymptotic(a) -> int:
    sys_ = _system(a)
    Ns = _int_list(a.N, "N")
    M = _int(a.M, "M")
    rows = []
    for N in Ns:
        t = time.perf_counter()
        rows.extend(asymptotic_check(sys_, [N], M))
        log.info("N=%d: deviation %.6g (%.2fs)", N, float(rows[-1].deviation), time.perf_counter() - t)
    buf = io.StringIO()
    write_asymptotic_csv(rows, buf)
    _emit(buf.getvalue(), a.out)
    return 0


def cmd_represent(a) -> int:
    A = resolve_set(_need(a.A, "A"))
    p = parse_univariate(_need(a.p, "p"))
    lo, hi = _range2(a.N_range, "N-range")
    res = representability_census(A, p, range(lo, hi + 1), _int(a.M_cap, "M-cap"))
    buf = io.StringIO()
    write_census_csv(res.records, buf)
    _emit(buf.getvalue(), a.out)
    log.info("representable fraction %s, exceptions %s", res.fraction, res.exceptions)
    return 0


def cmd_mixing_check(a) -> int:
    A = resolve_set(_need(a.A, "A"))
    N, lag = _int(a.N, "N"), _int(a.lag_cap, "lag-cap")
    if a.U is not None or a.V is not None:
        diags = [weak_mixing_statistic(A, _need(a.U, "U"), _need(a.V, "V"), N, lag)]
    else:
        diags = mixing_table(A, _int(a.max_len, "max-len"), N, lag)
    rows = sorted((d.to_row() for d in diags), key=lambda r: (len(r["U"]), r["U"], len(r["V"]), r["V"]))
    _emit(_csv_text(MIXING_COLUMNS, rows), a.out)
    log.info("max W %.6g over %d pairs", max(float(r["W"]) for r in rows), len(rows))
    return 0


def cmd_vdc_demo(a) -> int:
    q = parse_univariate(_need(a.q, "q"))
    rows = []
    for N in _int_list(a.N, "N"):
        for H in _int_list(a.H, "H"):
            r = vdc_average(q, _need(a.alpha, "alpha"), N, H)
            rows.append({
                "N": N, "H": H, "K": r.K, "lhs_norm": r.lhs_norm, "lhs_norm_sq": r.lhs_norm**2,
                "averaged_norm": r.averaged_norm, "cs_bound": r.cs_bound, "vdc_bound": r.vdc_bound,
                "split_bound": r.split_bound, "slack": r.inequality_slack(),
            })
    _emit(_csv_text(VDC_COLUMNS, rows), a.out)
    return 0


def cmd_weyl_check(a) -> int:
    poly = parse_univariate(_need(a.a, "a").replace("t", "x"))
    delta = parse_rational(_need(a.delta, "delta"))
    rows = []
    for T in _int_list(a.T, "T"):
        rows.append(weyl_discrepancy(poly, _need(a.alpha, "alpha"), delta, T, _int(a.frac_bits, "frac-bits")).to_row())
    _emit(_csv_text(WEYL_COLUMNS, rows), a.out)
    return 0


# --- parser -------------------------------------------------------------------------


COMMANDS = {
    "gen-set": cmd_gen_set,
    "check-admissible": cmd_check_admissible,
    "pet-trace": cmd_pet_trace,
    "verify-pet": cmd_verify_pet,
    "count-patterns": cmd_count_patterns,
    "verify-asymptotic": cmd_verify_asymptotic,
    "represent": cmd_represent,
    "mixing-check": cmd_mixing_check,
    "vdc-demo": cmd_vdc_demo,
    "weyl-check": cmd_weyl_check,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wmsets", description="Polynomial patterns in weakly mixing sets.")
    p.add_argument("--version", action="version", version=f"wmsets {__version__}")
    p.add_argument("--config", help="JSON file of parameters (keys are flag names)")
    p.add_argument("-q", "--quiet", action="store_true", help="no progress output")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help="output file (default stdout)")
        return sp

    sp = add("gen-set", "write a WMSET1 set snapshot")
    sp.add_argument("--set", help="descriptor such as bernoulli:p=1/2,horizon=1000,seed=42")
    sp.add_argument("--kind")
    sp.add_argument("--horizon")
    sp.add_argument("--p")
    sp.add_argument("--seed")
    sp.add_argument("--modulus")
    sp.add_argument("--residues")
    sp.add_argument("--alpha")
    sp.add_argument("--epsilon")
    sp.add_argument("--frac-bits")
    sp.add_argument("--minus")

    sp = add("check-admissible", "admissibility verdict as JSON")
    sp.add_argument("--family")
    sp.add_argument("--mode", choices=["sequence", "uniform", "family"], default="uniform")
    sp.add_argument("--test-horizon", default=20)

    sp = add("pet-trace", "reduction tree as JSON")
    sp.add_argument("--family")
    sp.add_argument("--h", help="shift sample, e.g. 1,2,3 or -3..3")
    sp.add_argument("--max-depth", default=12)
    sp.add_argument("--max-branch")
    sp.add_argument("--widen", action="store_true", default=False)
    sp.add_argument("--truncate", action="store_true", default=False)

    sp = add("verify-pet", "grid check of the reduction facts as JSON")
    sp.add_argument("--family")
    sp.add_argument("--h-range", default="-10,10")
    sp.add_argument("--t-range", default="1,10", help="values substituted for N")

    for name, help_ in (("count-patterns", "solution count as CSV"),
                        ("verify-asymptotic", "asymptotic table as CSV")):
        sp = add(name, help_)
        sp.add_argument("--family")
        sp.add_argument("--A", help="set file or descriptor")
        sp.add_argument("--B", help="set file or descriptor (default: A)")
        sp.add_argument("--N")
        sp.add_argument("--M")

    sp = add("represent", "representability census as CSV")
    sp.add_argument("--A")
    sp.add_argument("--p")
    sp.add_argument("--N-range", dest="N_range")
    sp.add_argument("--M-cap", dest="M_cap")

    sp = add("mixing-check", "weak-mixing statistics as CSV")
    sp.add_argument("--A")
    sp.add_argument("--N")
    sp.add_argument("--lag-cap")
    sp.add_argument("--max-len", default=3)
    sp.add_argument("--U")
    sp.add_argument("--V")

    sp = add("vdc-demo", "van der Corput chain as CSV")
    sp.add_argument("--q")
    sp.add_argument("--alpha")
    sp.add_argument("--N")
    sp.add_argument("--H")

    sp = add("weyl-check", "arc-hitting fractions as CSV")
    sp.add_argument("--a")
    sp.add_argument("--alpha")
    sp.add_argument("--delta")
    sp.add_argument("--T")
    sp.add_argument("--frac-bits", default=128)
    return p


def _load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise PreconditionError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ParseError("config must be a JSON object")
    return cfg


_NUMERIC_FLAGS = {"--h", "--h-range", "--t-range", "--N-range", "--N", "--T"}


def _join_negative_values(argv: list[str]) -> list[str]:
    """``--h -3..3`` would read as an option; rewrite it to ``--h=-3..3``."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in _NUMERIC_FLAGS and nxt and len(nxt) > 1 and nxt[0] == "-" and nxt[1].isdigit():
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _parse(argv) -> argparse.Namespace:
    argv = _join_negative_values(list(argv))
    parser = build_parser()
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("-q", "--quiet", action="store_true")
    known, rest = pre.parse_known_args(argv)
    head = ["--quiet"] if known.quiet else []
    if known.config is None:
        ns = parser.parse_args(argv)
    else:
        cfg = _load_config(known.config)
        command = cfg.pop("command", None)
        if not any(r in COMMANDS for r in rest):
            if command is None:
                raise ParseError("no subcommand given and config has no 'command'")
            if command not in COMMANDS:
                raise ParseError(f"unknown subcommand {command!r} in config")
            rest = [command] + rest
        # apply config values as subparser defaults; explicit flags still win
        sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        cmd = next(r for r in rest if r in COMMANDS)
        sp = sub.choices[cmd]
        dests = {a.dest for a in sp._actions}
        defaults = {}
        for key, val in cfg.items():
            dest = key.replace("-", "_")
            if dest not in dests:
                raise ParseError(f"config key {key!r} is not a flag of {cmd}")
            defaults[dest] = val
        sp.set_defaults(**defaults)
        ns = parser.parse_args(head + rest)
    if ns.command is None:
        raise ParseError("no subcommand given")
    return ns


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    quiet = "-q" in argv or "--quiet" in argv
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s: %(message)s", force=True)
    try:
        ns = _parse(argv)
        return COMMANDS[ns.command](ns)
    except ConsistencyError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 2
    except (PreconditionError, WmsetsError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 1
    except KeyError as exc:
        log.error("missing parameter %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
