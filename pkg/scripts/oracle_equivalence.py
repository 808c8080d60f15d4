"""Compare count_solutions against a plain double loop on random systems.

    python scripts/oracle_equivalence.py --config scripts/configs/c01_oracle_equivalence.json

Writes one CSV row per case.  The loop below uses Python sets built from the
element lists, not the library's membership arrays.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from wmsets.counting import PatternSystem, count_solutions
from wmsets.integer_sets import from_provenance
from wmsets.polynomials import BivariatePolynomial, parse_polynomial

COLUMNS = ["case", "family", "A", "B", "N", "M", "count", "naive", "match"]


def random_poly(rng, max_deg: int) -> BivariatePolynomial:
    kind = rng.integers(3)
    d = int(rng.integers(1, max_deg + 1))
    if kind == 0:
        # x^d plus small lower terms
        terms = {(d, 0): int(rng.integers(1, 3))}
        for i in range(d):
            c = int(rng.integers(-2, 3))
            if c:
                terms[(i, 0)] = c
        cn = int(rng.integers(0, 3))
        if cn:
            terms[(0, 1)] = cn
        return BivariatePolynomial(terms)
    if kind == 1:
        # (N - x)^d
        return parse_polynomial(f"(N-x)^{d}")
    return parse_polynomial(f"x^{d} + {int(rng.integers(0, 4))}*x + N")


def random_set(rng, horizon: int) -> dict:
    k = int(rng.integers(6))
    if k == 0:
        p = ["1/4", "1/2", "3/4"][int(rng.integers(3))]
        return {"kind": "bernoulli", "p": p, "seed": int(rng.integers(1000)), "generator": "philox4x64-10", "horizon": horizon}
    if k == 1:
        m = int(rng.integers(2, 6))
        res = sorted({int(r) for r in rng.integers(0, m, size=int(rng.integers(1, m + 1)))})
        return {"kind": "periodic", "modulus": m, "residues": res, "horizon": horizon}
    if k == 2:
        return {"kind": "normal-champernowne", "horizon": horizon}
    if k == 3:
        return {"kind": "bohr", "alpha": f"sqrt({[2, 3, 5][int(rng.integers(3))]})", "epsilon": "1/5", "frac_bits": 64, "horizon": horizon}
    if k == 4:
        base = {"kind": "bernoulli", "p": "1/2", "seed": int(rng.integers(1000)), "generator": "philox4x64-10", "horizon": horizon}
        return {"kind": "remove-zero-density", "base": base, "removed": "squares", "horizon": horizon}
    return {"kind": "periodic", "modulus": 1, "residues": [0], "horizon": horizon}


def naive(polys, a_elems: set, b_elems: set, N: int, M: int) -> int:
    total = 0
    for n in range(1, N + 1):
        vs = [p(n) for p in polys]
        for m in range(1, M + 1):
            if m in b_elems and all(v + m in a_elems for v in vs):
                total += 1
    return total


def run(cfg: dict) -> list[list[str]]:
    rng = np.random.default_rng(int(cfg["seed"]))
    rows = []
    case = 0
    while case < int(cfg["cases"]):
        r = int(rng.integers(1, int(cfg["max_r"]) + 1))
        fam = [random_poly(rng, int(cfg["max_degree"])) for _ in range(r)]
        N = int(rng.integers(1, int(cfg["max_N"]) + 1))
        M = int(rng.integers(1, int(cfg["max_M"]) + 1))
        polys = [f.specialize(N) for f in fam]
        vals = [p(n) for p in polys for n in range(1, N + 1)]
        if min(vals) < 0:
            continue
        horizon = max(vals) + M + int(rng.integers(0, 20))
        pa, pb = random_set(rng, horizon), random_set(rng, horizon)
        A, B = from_provenance(pa), from_provenance(pb)
        fast = count_solutions(PatternSystem(fam, A, B), N, M).count
        slow = naive(polys, set(int(v) for v in A.elements()), set(int(v) for v in B.elements()), N, M)
        rows.append([
            str(case), ";".join(f.to_text() for f in fam), pa["kind"], pb["kind"],
            str(N), str(M), str(fast), str(slow), "true" if fast == slow else "false",
        ])
        case += 1
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    with open(args.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    out = args.out or cfg["out"]
    t = time.perf_counter()
    rows = run(cfg)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(rows)
    bad = sum(r[-1] == "false" for r in rows)
    print(f"{len(rows)} cases, {bad} mismatches, {time.perf_counter() - t:.2f}s", file=sys.stderr)
    return 0 if bad == 0 else 2


if __name__ == "__main__":
    sys.exit(main())
