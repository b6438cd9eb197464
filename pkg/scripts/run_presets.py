"""Run every preset (or the ones named) through the CLI.

    python scripts/run_presets.py --scale desk
    python scripts/run_presets.py fig3a-rest-scan fig9-harmonic-linear --trials 20000
"""
import argparse
import sys

from diodebox import cli
from diodebox.presets import PRESETS, SCALES


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("names", nargs="*", help="presets to run (default: all)")
    ap.add_argument("--scale", choices=sorted(SCALES), default="desk")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--out-root", default=None, help="one subdirectory per preset")
    ap.add_argument("--workers", type=int)
    args = ap.parse_args()

    status = 0
    for name in args.names or list(PRESETS):
        argv = ["-v"] + (["--workers", str(args.workers)] if args.workers else [])
        argv += ["preset", name, "--scale", args.scale]
        if args.trials:
            argv += ["--trials", str(args.trials)]
        if args.out_root:
            argv += ["--out", f"{args.out_root}/{name}"]
        status = max(status, cli.main(argv))
    return status


if __name__ == "__main__":
    sys.exit(main())
