"""Growth of strip sets and their propagation for a few seed patterns.

For each rule prints ``n, |C_n|, |P(C_n)|`` and the fitted log-log slopes;
a pattern in Z^d should give slopes near ``d - 1`` and ``d``.

    python scripts/growth_rates.py --max-n 200
"""

import argparse

from gaborlattice.propagation import PropagationRule, growth_exponents

RULES = {
    "d1-three-point": PropagationRule(((0,), (1,), (2,)), (2,)),
    "d2-triangle": PropagationRule(((0, 0), (1, 0), (0, 1)), (1, 0)),
    "d2-skew": PropagationRule(((0, 0), (2, 1), (1, 2), (1, 1)), (2, 1)),
    "d3-cross": PropagationRule(((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)), (1, 0, 0)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=200)
    ap.add_argument("--max-n-3d", type=int, default=40)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    for name, rule in RULES.items():
        top = args.max_n_3d if rule.d == 3 else args.max_n
        step = max(top // 10, 1)
        ns = list(range(step, top + 1, step))
        res = growth_exponents(rule, ns, workers=args.threads)
        print(f"# {name}: C0={list(rule.C0)} gamma0={rule.gamma0}")
        for row in zip(res.n, res.card_C, res.card_P, res.clipped):
            print("  n={:4d}  |C_n|={:7d}  |P|={:9d}  clipped={}".format(*row))
        print(f"  slope_C={res.slope_C:.4f}  slope_P={res.slope_P:.4f}\n")


if __name__ == "__main__":
    main()
