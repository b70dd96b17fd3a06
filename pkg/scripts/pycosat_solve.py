"""Minimal DIMACS front end for pycosat, usable as ``--sat-solver``.

Usage: python3 scripts/pycosat_solve.py problem.cnf
Prints ``s SATISFIABLE`` with a ``v`` line, or ``s UNSATISFIABLE``.
"""

import sys

import pycosat


def main(path: str) -> None:
    clauses = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line[0] in "cp":
                continue
            clauses.append([int(x) for x in line.split()[:-1]])
    model = pycosat.solve(clauses)
    if model == "UNSAT":
        print("s UNSATISFIABLE")
    else:
        print("s SATISFIABLE")
        print("v " + " ".join(map(str, model)) + " 0")


if __name__ == "__main__":
    main(sys.argv[1])
