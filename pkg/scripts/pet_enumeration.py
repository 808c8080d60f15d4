"""Characteristic-vector decrease and reduction-tree termination over an
enumerated class of families.

    python scripts/pet_enumeration.py --config scripts/configs/c05_pet_enumeration.json

Every family of at most ``max_r`` distinct shapes (see
``wmsets.pet.enumerate_shapes``) is reduced at every ``h`` in ``h_range``
outside its exceptional set, and each reduction is checked to lower the
characteristic vector.  Path trees (one non-exceptional ``h`` per node, in
the order of ``tree_h_order``) are then built with ``max_depth``; the tree
pass stops early once ``max_failures`` depth-exceeded families are found
(``null`` runs the whole class).  Output is a JSON summary without timings.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from collections import Counter

from wmsets.errors import DepthExceededError, ExceptionalOnlyError
from wmsets.pet import (
    BASE,
    build_reduction_tree,
    characteristic_vector,
    choose_construction,
    enumerate_families,
    exceptional_h_set,
    reduce_family,
)


def _fam_text(f):
    return [p.to_text() for p in f]


def chi_sweep(families, lo: int, hi: int, keep: int = 20) -> dict:
    checked = 0
    failures = []
    n_fail = 0
    for f in families:
        con = choose_construction(f)
        if con == BASE:
            continue
        chi = characteristic_vector(f)
        exc = exceptional_h_set(f, con)
        for h in range(lo, hi + 1):
            if h in exc:
                continue
            checked += 1
            new = characteristic_vector(reduce_family(f, h, con))
            if not new < chi:
                n_fail += 1
                if len(failures) < keep:
                    failures.append({"family": _fam_text(f), "h": h, "chi": str(chi), "reduced_chi": str(new)})
    return {"reductions_checked": checked, "failures": n_fail, "failure_examples": failures}


def tree_sweep(families, h_sample, max_depth: int, max_failures, keep: int = 25) -> dict:
    hist = Counter()
    exceeded = []
    n_exc = 0
    examined = 0
    aborted = False
    for f in families:
        examined += 1
        try:
            tree = build_reduction_tree(f, h_sample, max_depth=max_depth, max_branch=1, widen=True)
            hist[tree.depth] += 1
        except DepthExceededError:
            n_exc += 1
            if len(exceeded) < keep:
                exceeded.append(_fam_text(f))
        except ExceptionalOnlyError:
            hist["exceptional-only"] += 1
        if max_failures is not None and n_exc >= max_failures:
            aborted = True
            break
    return {
        "families_examined": examined,
        "terminated": sum(v for k, v in hist.items() if isinstance(k, int)),
        "depth_histogram": {str(k): v for k, v in sorted(hist.items(), key=lambda kv: str(kv[0]))},
        "depth_exceeded": n_exc,
        "depth_exceeded_examples": exceeded,
        "aborted_early": aborted,
    }


def h_order(lo: int, hi: int, order: str) -> list[int]:
    hs = [h for h in range(lo, hi + 1) if h != 0]
    if order == "abs":
        return sorted(hs, key=lambda h: (abs(h), -h))
    return hs


def run(cfg: dict) -> dict:
    lo, hi = cfg["h_range"]
    fams = list(enumerate_families(int(cfg["max_r"]), int(cfg["max_degree"]), tuple(cfg["coeff_range"])))
    chi = chi_sweep(fams, lo, hi)
    trees = tree_sweep(fams, h_order(lo, hi, cfg.get("tree_h_order", "abs")), int(cfg["max_depth"]), cfg.get("max_failures"))
    return {
        "config": {k: v for k, v in sorted(cfg.items()) if k not in ("out", "script")},
        "families": len(fams),
        "chi_decrease": chi,
        "trees": trees,
        "passed": chi["failures"] == 0 and trees["depth_exceeded"] == 0 and not trees["aborted_early"],
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    with open(args.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    t = time.perf_counter()
    doc = run(cfg)
    with open(args.out or cfg["out"], "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    tr = doc["trees"]
    print(
        f"{doc['families']} families, {doc['chi_decrease']['reductions_checked']} reductions, "
        f"{doc['chi_decrease']['failures']} chi failures; trees: {tr['terminated']} terminated, "
        f"{tr['depth_exceeded']} depth-exceeded of {tr['families_examined']} examined; "
        f"{time.perf_counter() - t:.1f}s",
        file=sys.stderr,
    )
    return 0 if doc["passed"] else 2


if __name__ == "__main__":
    sys.exit(main())
