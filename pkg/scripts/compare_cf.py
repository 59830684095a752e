"""Print every characteristic function side by side, plus Shapley vectors."""

import argparse

import numpy as np

from pollcoop.charfun import CFKind, cf_table
from pollcoop.cli import parse_config
from pollcoop.game import Coalition
from pollcoop.solutions import shapley

KINDS = (CFKind.alpha, CFKind.delta, CFKind.eta, CFKind.zeta)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config", nargs="?", default="configs/g1.json")
    ap.add_argument("--at-time", type=float)
    ap.add_argument("--at-state", type=float)
    args = ap.parse_args(argv)

    spec = parse_config(args.config).spec
    tables = {k: cf_table(spec, k, args.at_state, args.at_time) for k in KINDS}
    print(f"{'S':<16}" + "".join(f"{k.value:>14}" for k in KINDS))
    for m in range(1 << spec.n):
        print(f"{repr(Coalition(m)):<16}" + "".join(f"{tables[k][m]:14.6f}" for k in KINDS))
    print()
    for k in KINDS:
        print(f"Shapley {k.value:<6}", np.array2string(shapley(tables[k]).as_array(), precision=6))


if __name__ == "__main__":
    main()
