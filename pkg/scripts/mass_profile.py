"""Exploratory: how much of a window kernel vector can sit deep inside the window.

For a fixed random d = 1 symbol set, the largest share of a unit kernel
vector's mass on the inner half of ``[-R, R]`` is tracked as ``R`` grows.
Non-decaying kernel vectors would keep this share bounded below; the
observed rate is reported without any threshold.

    python scripts/mass_profile.py --R 8:256 --seed 3
"""

import argparse

import numpy as np

from gaborlattice.fiber import certify_nonvanishing, fiberize, random_symbolset, window_solution_mass_profile


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--R", default="8:256", help="lo:hi, doubled from lo")
    ap.add_argument("--shifts", default="-1,0,2")
    ap.add_argument("--inner", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    lo, hi = (int(v) for v in args.R.split(":"))
    Rs = []
    while lo <= hi:
        Rs.append(lo)
        lo *= 2
    rng = np.random.default_rng(args.seed)
    shifts = [int(s) for s in args.shifts.split(",")]
    while True:
        S = random_symbolset(rng, shifts)
        x = float(rng.random())
        if certify_nonvanishing(S, [x], hi, 1e-3):
            break
    F = fiberize(S, [x])
    masses = [window_solution_mass_profile(F, R, args.inner) for R in Rs]
    print("R,inner_mass")
    for R, m in zip(Rs, masses):
        print(f"{R},{m:.17g}")
    m = np.array(masses)
    pos = m > 1e-300
    if pos.sum() >= 2:
        rate = np.polyfit(np.array(Rs)[pos], np.log(m[pos]), 1)[0]
        print(f"# fitted log-mass slope per unit R: {rate:.4g}")


if __name__ == "__main__":
    main()
