"""Where does the box at rest catch most atoms in the wedge?

Scans y_B for each angle and prints the argmax with its 1/sqrt(N) error bar
next to the quoted optima and the corner-touching height w_B (1 + tan a) / tan a.
Optional extra t_f / E_B values show how the optimum moves with them.

    python scripts/rest_optimum_analysis.py --trials 100000
    python scripts/rest_optimum_analysis.py --t-f 10 20 40 --e-b 0.1 0.2
"""
import argparse
import math

from diodebox.boxcatch import BoxSpec, Rest, wedge_rest_optimum_seed
from diodebox.config import grid_values
from diodebox.dynamics import TrapSpec
from diodebox.engine import RunSpec
from diodebox.ensemble import SamplerSpec
from diodebox.sweep import SweepSpec, scan

QUOTED = {30.0: 0.7, 45.0: 0.6, 60.0: 0.75}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--w-b", type=float, default=0.35)
    ap.add_argument("--t-f", type=float, nargs="+", default=[20.0])
    ap.add_argument("--e-b", type=float, nargs="+", default=[0.1])
    ap.add_argument("--profile", action="store_true", help="print F(y_B) for every grid point")
    args = ap.parse_args()

    ys = grid_values(0.1, 1.6, 0.05)
    print(f"w_B/l={args.w_b}  N={args.trials}")
    print("alpha  t_f   E_B   y_op  [lo, hi]      F_max    quoted  seed")
    for a, quoted in QUOTED.items():
        trap = TrapSpec.wedge(a)
        seed = wedge_rest_optimum_seed(args.w_b, math.radians(a))
        for t_f in args.t_f:
            for e_b in args.e_b:
                base = RunSpec(trap, BoxSpec(args.w_b, e_b, Rest()), SamplerSpec(trap), args.trials, t_f)
                res = scan(SweepSpec(base, [("trajectory.y_B", ys)]))
                lo, hi = res.error_bar["trajectory.y_B"]
                print(f"{a:5g} {t_f:4g} {e_b:5g}  {res.argmax[0]:.2f}  [{lo:.2f}, {hi:.2f}]  "
                      f"{res.F_max:.5f}  {quoted:.2f}    {seed:.3f}")
                if args.profile:
                    for (y,), est in sorted(res.grid_F.items()):
                        print(f"        y_B={y:.2f}  F={est.fraction_F:.5f} +- {est.std_error:.5f}")


if __name__ == "__main__":
    main()
