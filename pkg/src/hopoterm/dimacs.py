"""SAT encoding of bounded ground constraints in DIMACS CNF.

Each parameter is a little-endian vector of ``bit_length(bound)`` propositional
variables.  Sums and products are built from ripple-carry adders and shift-add
multipliers whose width grows with the operands, so no intermediate value can
overflow.  ``lhs >= rhs`` is the negation of a ripple comparator for
``rhs > lhs``.  Constant bits are folded away, so a trivially true constraint
adds no clauses.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from typing import Sequence, Union

from .constraints import ParamConstraint
from .poly import Param, Poly
from .solve import SolverConfig, Unsat, Valuation, params_of, verify

MAX_PARAM_BITS = 16

Lit = Union[int, bool]  # a DIMACS literal, or a constant


class BoundTooLarge(ValueError):
    pass


class SolverOutputError(ValueError):
    pass


@dataclass
class Encoding:
    clauses: list[list[int]] = field(default_factory=list)
    num_vars: int = 0
    bits: dict[Param, list[int]] = field(default_factory=dict)
    unsat: bool = False

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def add(self, clause: Sequence[Lit]) -> None:
        if any(l is True for l in clause):
            return
        lits = [l for l in clause if l is not False]
        if not lits:
            self.unsat = True
            self.clauses.append([])
            return
        self.clauses.append(lits)

    # gates ------------------------------------------------------------------

    def neg(self, a: Lit) -> Lit:
        return (not a) if isinstance(a, bool) else -a

    def and_(self, a: Lit, b: Lit) -> Lit:
        if a is False or b is False:
            return False
        if a is True:
            return b
        if b is True or a == b:
            return a
        if a == -b:
            return False
        g = self.new_var()
        self.add([-g, a])
        self.add([-g, b])
        self.add([g, -a, -b])
        return g

    def or_(self, a: Lit, b: Lit) -> Lit:
        return self.neg(self.and_(self.neg(a), self.neg(b)))

    def xor(self, a: Lit, b: Lit) -> Lit:
        if isinstance(a, bool):
            return self.neg(b) if a else b
        if isinstance(b, bool):
            return self.neg(a) if b else a
        if a == b:
            return False
        if a == -b:
            return True
        g = self.new_var()
        self.add([-g, a, b])
        self.add([-g, -a, -b])
        self.add([g, -a, b])
        self.add([g, a, -b])
        return g

    # arithmetic over little-endian bit vectors ---------------------------------

    def const(self, n: int) -> list[Lit]:
        return [bool((n >> i) & 1) for i in range(n.bit_length())]

    def add_vec(self, a: list[Lit], b: list[Lit]) -> list[Lit]:
        out: list[Lit] = []
        carry: Lit = False
        for i in range(max(len(a), len(b))):
            x = a[i] if i < len(a) else False
            y = b[i] if i < len(b) else False
            s = self.xor(x, y)
            out.append(self.xor(s, carry))
            carry = self.or_(self.and_(x, y), self.and_(s, carry))
        out.append(carry)
        return _trim(out)

    def mul_vec(self, a: list[Lit], b: list[Lit]) -> list[Lit]:
        total: list[Lit] = []
        for i, bit in enumerate(b):
            if bit is False:
                continue
            row: list[Lit] = [False] * i + [self.and_(x, bit) for x in a]
            total = self.add_vec(total, row)
        return _trim(total)

    def greater(self, a: list[Lit], b: list[Lit]) -> Lit:
        """A literal true iff ``a > b``."""
        g: Lit = False
        for i in range(max(len(a), len(b))):
            x = a[i] if i < len(a) else False
            y = b[i] if i < len(b) else False
            here = self.and_(x, self.neg(y))
            same = self.neg(self.xor(x, y))
            g = self.or_(here, self.and_(same, g))
        return g

    def poly(self, p: Poly) -> list[Lit]:
        total: list[Lit] = []
        for m in p.monomials():
            term = self.const(m.coeff)
            for q in m.params:
                term = self.mul_vec(term, self.bits[q])
            total = self.add_vec(total, term)
        return total


def _trim(v: list[Lit]) -> list[Lit]:
    while v and v[-1] is False:
        v.pop()
    return v


def encode(constraints: Sequence[ParamConstraint], cfg: SolverConfig | None = None, width_cap: int = MAX_PARAM_BITS) -> Encoding:
    cfg = cfg or SolverConfig()
    enc = Encoding()
    params = params_of(constraints)
    for p in params:
        bound = cfg.bound(p)
        width = bound.bit_length()
        if width > width_cap:
            raise BoundTooLarge(f"{p} needs {width} bits, more than the cap of {width_cap}")
        enc.bits[p] = [enc.new_var() for _ in range(width)]
    for p in params:
        bound = cfg.bound(p)
        if bound != (1 << bound.bit_length()) - 1:
            enc.add([enc.neg(enc.greater(enc.bits[p], enc.const(bound)))])
    for c in constraints:
        enc.add([enc.neg(enc.greater(enc.poly(c.rhs), enc.poly(c.lhs)))])
    return enc


def encode_dimacs(constraints: Sequence[ParamConstraint], cfg: SolverConfig | None = None, width_cap: int = MAX_PARAM_BITS) -> tuple[str, str]:
    """Return ``(cnf_text, map_text)``; map lines are ``param bitIndex cnfVar``."""
    enc = encode(constraints, cfg, width_cap)
    lines = [f"p cnf {enc.num_vars} {len(enc.clauses)}"]
    lines.extend(" ".join(map(str, cl + [0])) for cl in enc.clauses)
    mapping = [f"{p.name} {i} {v}" for p, vs in enc.bits.items() for i, v in enumerate(vs)]
    return "\n".join(lines) + "\n", "\n".join(mapping) + ("\n" if mapping else "")


def parse_model(output: str) -> set[int] | None:
    """Read a SAT solver answer; None for UNSAT.

    Accepts the competition format (``s SATISFIABLE`` / ``v`` lines) and the
    MiniSat result-file format (``SAT`` followed by literals).
    """
    lits: set[int] = set()
    verdict = None
    for raw in output.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        upper = line.upper()
        if upper in ("UNSAT", "S UNSATISFIABLE", "UNSATISFIABLE"):
            return None
        if upper in ("SAT", "S SATISFIABLE", "SATISFIABLE"):
            verdict = True
            continue
        if line.startswith("s "):
            raise SolverOutputError(f"solver answered {line[2:]!r}")
        if line.startswith("v"):
            line = line[1:]
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise SolverOutputError(f"unexpected solver output {raw!r}") from None
            if lit:
                lits.add(lit)
        verdict = True if verdict is None else verdict
    if verdict is None:
        raise SolverOutputError("empty solver output")
    return lits


def decode(model: set[int], map_text: str) -> dict[str, int]:
    values: dict[str, int] = {}
    for line in map_text.splitlines():
        if not line.strip():
            continue
        name, index, var = line.split()
        values.setdefault(name, 0)
        if int(var) in model:
            values[name] |= 1 << int(index)
    return values


def valuation_from_model(model: set[int], map_text: str, constraints: Sequence[ParamConstraint]) -> Valuation:
    by_name = decode(model, map_text)
    return Valuation({p: by_name.get(p.name, 0) for p in params_of(constraints)})


def solve_external(constraints: Sequence[ParamConstraint], cfg: SolverConfig) -> Valuation | Unsat:
    """Write the CNF, run ``cfg.sat_solver`` on it and decode the model.

    The command may contain ``{cnf}`` and ``{out}`` placeholders; otherwise the
    CNF path is appended and the answer is read from standard output.
    """
    cnf, mapping = encode_dimacs(constraints, cfg)
    workdir = tempfile.mkdtemp(prefix="hopoterm-")
    cnf_path = cfg.dimacs_out or os.path.join(workdir, "problem.cnf")
    out_path = os.path.join(workdir, "model.txt")
    with open(cnf_path, "w") as f:
        f.write(cnf)
    with open(cnf_path + ".map", "w") as f:
        f.write(mapping)
    if not cfg.sat_solver:
        return Unsat(f"CNF written to {cnf_path}; no SAT solver configured")
    cmd = cfg.sat_solver
    if "{cnf}" in cmd or "{out}" in cmd:
        argv = shlex.split(cmd.replace("{cnf}", shlex.quote(cnf_path)).replace("{out}", shlex.quote(out_path)))
    else:
        argv = shlex.split(cmd) + [cnf_path]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=cfg.timeout)
    except subprocess.TimeoutExpired:
        from .solve import SolverTimeout

        raise SolverTimeout("external SAT solver ran out of time") from None
    text = open(out_path).read() if "{out}" in cmd and os.path.exists(out_path) else proc.stdout
    model = parse_model(text)
    if model is None:
        return Unsat("the SAT solver reported UNSAT")
    v = valuation_from_model(model, mapping, constraints)
    if not verify(v, constraints):
        raise SolverOutputError("decoded model does not satisfy the constraints")
    return v
