"""Command line: ``hopoterm prove FILE``.

Exit codes: 0 YES, 1 MAYBE, 2 input or usage error, 3 timeout.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from .core import TermError
from .parse import ParseError, is_constraint_problem, parse_afs, parse_constraint_problem
from .prover import YES, ProverConfig, SoundnessViolation, orient, proof_to_json, prove_rule_removal, render_proof
from .solve import SolverConfig

EXIT_YES, EXIT_MAYBE, EXIT_INPUT, EXIT_TIMEOUT = 0, 1, 2, 3


@dataclass
class CliConfig:
    input_path: str
    mode: str = "auto"
    max_coefficient: int = 3
    timeout_seconds: float = 60.0
    solver_backend: str = "internal"
    dimacs_out: str | None = None
    sat_solver: str | None = None
    deterministic: bool = False
    dump_constraints: bool = False
    output_format: str = "text"
    seed: int = 0

    def prover_config(self) -> ProverConfig:
        solver = SolverConfig(
            max_coefficient=self.max_coefficient,
            timeout=self.timeout_seconds,
            backend=self.solver_backend,
            sat_solver=self.sat_solver,
            dimacs_out=self.dimacs_out,
        )
        return ProverConfig(solver=solver, timeout=self.timeout_seconds, seed=self.seed, record=self.dump_constraints)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hopoterm", description="Termination proofs with higher-order polynomial interpretations.")
    sub = parser.add_subparsers(dest="command", required=True)
    prove = sub.add_parser("prove", help="prove termination of an AFS or orient a constraint problem")
    prove.add_argument("file", help="an AFS file or a constraint problem (SETTING/CONSTRAINTS)")
    prove.add_argument("--mode", choices=("auto", "rule-removal", "orient"), default="auto")
    prove.add_argument("--max-coefficient", type=int, default=3, help="upper bound on every parameter (default 3)")
    prove.add_argument("--timeout", type=float, default=60.0, help="seconds for the whole proof (default 60)")
    prove.add_argument("--backend", choices=("internal", "dimacs"), default="internal")
    prove.add_argument("--dimacs-out", help="path for the CNF written by the dimacs backend")
    prove.add_argument("--sat-solver", help="SAT solver command; may use {cnf} and {out} placeholders")
    prove.add_argument("--deterministic", action="store_true", help="single-threaded, reproducible run (always the case)")
    prove.add_argument("--dump-constraints", action="store_true", help="print the simplification trace to stderr")
    prove.add_argument("--format", choices=("text", "json"), default="text")
    prove.add_argument("--seed", type=int, default=0, help="seed of the numeric soundness check")
    return parser


def _config(ns: argparse.Namespace) -> CliConfig:
    return CliConfig(
        input_path=ns.file,
        mode=ns.mode,
        max_coefficient=ns.max_coefficient,
        timeout_seconds=ns.timeout,
        solver_backend=ns.backend,
        dimacs_out=ns.dimacs_out,
        sat_solver=ns.sat_solver,
        deterministic=ns.deterministic,
        dump_constraints=ns.dump_constraints,
        output_format=ns.format,
        seed=ns.seed,
    )


def run(cfg: CliConfig, out=sys.stdout, err=sys.stderr) -> int:
    try:
        with open(cfg.input_path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        print(f"hopoterm: cannot read {cfg.input_path}: {e.strerror}", file=err)
        return EXIT_INPUT
    if cfg.max_coefficient < 1 or cfg.timeout_seconds <= 0:
        print("hopoterm: --max-coefficient must be >= 1 and --timeout > 0", file=err)
        return EXIT_INPUT
    constraint_file = is_constraint_problem(text)
    mode = cfg.mode if cfg.mode != "auto" else ("orient" if constraint_file else "rule-removal")
    if (mode == "orient") != constraint_file:
        need = "a constraint problem" if mode == "orient" else "an AFS file"
        print(f"hopoterm: --mode {mode} needs {need}", file=err)
        return EXIT_INPUT
    pcfg = cfg.prover_config()
    try:
        if mode == "orient":
            outcome = orient(parse_constraint_problem(text), pcfg)
        else:
            outcome = prove_rule_removal(parse_afs(text), pcfg)
    except (ParseError, TermError) as e:
        print(f"{cfg.input_path}:{e}", file=err)
        return EXIT_INPUT
    except SoundnessViolation as e:
        print(f"hopoterm: internal error: {e}", file=err)
        return EXIT_MAYBE
    if cfg.dump_constraints:
        for r in outcome.rounds:
            print(f"== round {r.number} ==\n{r.trace}", file=err)
    out.write(proof_to_json(outcome) if cfg.output_format == "json" else render_proof(outcome))
    if outcome.verdict == YES:
        return EXIT_YES
    return EXIT_TIMEOUT if outcome.timed_out else EXIT_MAYBE


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    return run(_config(ns))


if __name__ == "__main__":
    sys.exit(main())
