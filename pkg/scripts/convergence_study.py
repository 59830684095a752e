"""Oracle error against the closed forms as the time grid is refined.

Writes CSV rows (kind, mask, M, value, exact, rel_error) to stdout or --out.
"""

import argparse
import csv
import sys

from pollcoop.charfun import BASIC_KINDS, cf_value
from pollcoop.cli import parse_config
from pollcoop.game import enumerate_coalitions
from pollcoop.oracle import oracle_cf, relative_error


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", nargs="?", default="configs/g1.json")
    ap.add_argument("--grids", default="125,250,500,1000,2000,4000")
    ap.add_argument("--out")
    args = ap.parse_args(argv)

    spec = parse_config(args.config).spec
    grids = [int(g) for g in args.grids.split(",")]
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["kind", "mask", "M", "value", "exact", "rel_error"])
    for kind in BASIC_KINDS:
        for S in enumerate_coalitions(spec.n)[1:]:
            exact = cf_value(spec, kind, S, spec.x0, spec.t0)
            for M in grids:
                v = oracle_cf(spec, kind, S, M).value
                w.writerow([kind.value, S.mask, M, repr(v), repr(exact), f"{relative_error(v, exact):.3e}"])
    if args.out:
        out.close()


if __name__ == "__main__":
    main()
