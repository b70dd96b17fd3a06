"""Prove every bundled problem and print verdict and time per file.

Usage: python3 scripts/run_goldens.py [--backend dimacs --sat-solver CMD]
"""

import argparse
import io
import time
from pathlib import Path

from hopoterm.cli import CliConfig, run

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--backend", choices=("internal", "dimacs"), default="internal")
    parser.add_argument("--sat-solver")
    parser.add_argument("--verbose", action="store_true", help="print the full proofs")
    args = parser.parse_args()
    for path in sorted(PROBLEMS.iterdir()):
        out, err = io.StringIO(), io.StringIO()
        cfg = CliConfig(str(path), solver_backend=args.backend, sat_solver=args.sat_solver)
        start = time.perf_counter()
        code = run(cfg, out, err)
        secs = time.perf_counter() - start
        verdict = out.getvalue().splitlines()[0] if out.getvalue() else "ERROR"
        print(f"{path.name:20s} {verdict:6s} exit {code}  {secs:6.2f}s")
        if args.verbose:
            print(out.getvalue() + err.getvalue())


if __name__ == "__main__":
    main()
