"""Write a small synthetic input set for trying the CLI.

    python3 scripts/make_fixtures.py OUT_DIR [--seed 0] [--full]
"""
import argparse
import logging

from sensefit.synthetic import write_fixture_files

log = logging.getLogger("make_fixtures")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--full", action="store_true", help="acceptance-sized worlds instead of the small ones")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    files = write_fixture_files(args.out_dir, seed=args.seed, small=not args.full)
    width = max(map(len, files))
    for role, path in files.items():
        print(f"{role:<{width}}  {path}")


if __name__ == "__main__":
    main()
