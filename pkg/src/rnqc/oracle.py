"""Reversible oracle circuits for width-limited CNF formulas.

The oracle maps a work-register basis state |x> to the same |x> with
the oracle qubit flipped iff the formula holds at x. Construction per
clause: conjugate the positive literals' qubits with X so an all-ones
control pattern means "every literal false", flip the clause qubit
under that pattern, undo the conjugation, then flip the clause qubit
once more so it reads 1 = satisfied. A final NCNOT over all clause
qubits lands the conjunction on the oracle qubit.

Variables introduced by the width reduction are computed, not free:
a compute stage per defined variable writes y = l_a OR l_b onto its
qubit before any clause stage runs. Clause and defined-variable qubits
are intentionally left holding their x-dependent values afterwards;
callers that need them clean must uncompute.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit, Gate, RegisterLayout
from .circuit import propagate_basis
from .cnf import CnfFormula, ThreeCnf, eval_clause, eval_formula, extend_assignment, to_3cnf
from .errors import InputError, RegisterCapError
from .sim import max_qubits

EXHAUSTIVE_VAR_LIMIT = 24


@dataclass(frozen=True)
class OracleArtifact:
    circuit: Circuit
    layout: RegisterLayout
    clause_count: int
    polarity_fix: bool = True


@dataclass(frozen=True)
class OracleCheckReport:
    ok: bool
    inputs_checked: int
    mismatches: tuple[int, ...]
    scratch_violations: tuple[int, ...]
    satisfying_inputs: int

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "inputs_checked": self.inputs_checked,
            "mismatches": list(self.mismatches),
            "scratch_violations": list(self.scratch_violations),
            "satisfying_inputs": self.satisfying_inputs,
        }


def reduced_clauses(f3: ThreeCnf) -> tuple[tuple[int, ...], ...]:
    """The input formula's clauses after width reduction, in input order.

    to_3cnf emits three defining clauses per mapping entry ahead of the
    reduced originals, so the originals are the tail of the clause list.
    """
    return f3.base.clauses[3 * len(f3.mapping):]


def _literal_qubit(f3: ThreeCnf, layout: RegisterLayout, lit: int) -> int:
    v = abs(lit)
    if v <= f3.original_vars:
        return layout.work[v - 1]
    return layout.aux[v - 1 - f3.original_vars]


def _controlled_flip(controls: tuple[int, ...], target: int) -> Gate:
    if len(controls) == 2:
        return Gate("CCNOT", (*controls, target))
    return Gate("NCNOT", (*controls, target))


def build_oracle_gates(
    f3: ThreeCnf, layout: RegisterLayout, polarity_fix: bool = True
) -> tuple[Gate, ...]:
    """Oracle gate sequence against an externally supplied layout.

    The layout must carry exactly original_vars work qubits, aux_vars
    defined-variable qubits, one clause qubit per reduced clause, and an
    oracle qubit. polarity_fix=False omits the per-clause X that flips
    the unsatisfied flag into a satisfied flag; the result computes the
    wrong function on purpose (negative-control testing).
    """
    clauses = reduced_clauses(f3)
    if len(layout.work) != f3.original_vars:
        raise InputError(
            f"layout has {len(layout.work)} work qubits, formula needs {f3.original_vars}"
        )
    if len(layout.aux) != f3.aux_vars:
        raise InputError(
            f"layout has {len(layout.aux)} defined-variable qubits, need {f3.aux_vars}"
        )
    if len(layout.clause) != len(clauses):
        raise InputError(
            f"layout has {len(layout.clause)} clause qubits, need {len(clauses)}"
        )
    if layout.oracle is None:
        raise InputError("layout has no oracle qubit")

    gates: list[Gate] = []

    # Compute stages: y = l_a OR l_b via De Morgan. Controls fire on
    # "literal false", so positive literals get X conjugation.
    for y, la, lb in f3.mapping:
        yq = _literal_qubit(f3, layout, y)
        qa = _literal_qubit(f3, layout, la)
        qb = _literal_qubit(f3, layout, lb)
        conj = [q for lit, q in ((la, qa), (lb, qb)) if lit > 0]
        for q in conj:
            gates.append(Gate("X", (q,)))
        gates.append(Gate("CCNOT", (qa, qb, yq)))
        for q in conj:
            gates.append(Gate("X", (q,)))
        gates.append(Gate("X", (yq,)))

    for m, clause in enumerate(clauses):
        cq = layout.clause[m]
        controls = tuple(_literal_qubit(f3, layout, lit) for lit in clause)
        conj = [
            _literal_qubit(f3, layout, lit) for lit in clause if lit > 0
        ]
        for q in conj:
            gates.append(Gate("X", (q,)))
        gates.append(_controlled_flip(controls, cq))
        for q in conj:
            gates.append(Gate("X", (q,)))
        if polarity_fix:
            gates.append(Gate("X", (cq,)))

    if clauses:
        gates.append(Gate("NCNOT", (*layout.clause, layout.oracle)))
    else:
        # Empty conjunction is true on every input.
        gates.append(Gate("X", (layout.oracle,)))
    return tuple(gates)


def build_oracle(f3: ThreeCnf, polarity_fix: bool = True) -> OracleArtifact:
    clauses = reduced_clauses(f3)
    n = f3.original_vars
    a = f3.aux_vars
    p = len(clauses)
    layout = RegisterLayout(
        work=tuple(range(n)),
        aux=tuple(range(n, n + a)),
        clause=tuple(range(n + a, n + a + p)),
        oracle=n + a + p,
    )
    gates = build_oracle_gates(f3, layout, polarity_fix=polarity_fix)
    circuit = Circuit(qubit_count=n + a + p + 1, gates=gates, layout=layout)
    return OracleArtifact(
        circuit=circuit, layout=layout, clause_count=p, polarity_fix=polarity_fix
    )


def verify_oracle(artifact: OracleArtifact, formula: CnfFormula) -> OracleCheckReport:
    """Exhaustively check an oracle circuit against direct clause evaluation.

    Propagates every work-basis input through the gate list (the circuit
    is a basis-state permutation, so integer bit propagation is exact)
    and compares the oracle bit with eval_formula. Scratch registers are
    checked too: work bits preserved, defined variables and clause flags
    holding their predicted values, chain ancillas back at 0, constant
    qubits still 1. Works on lowered artifacts as well since lowering
    X/CCNOT/NCNOT stays within permutation gates.
    """
    f3 = to_3cnf(formula)
    n = f3.original_vars
    if n > EXHAUSTIVE_VAR_LIMIT:
        raise RegisterCapError(
            f"exhaustive oracle check is capped at {EXHAUSTIVE_VAR_LIMIT} variables, got {n}"
        )
    if artifact.circuit.qubit_count > max_qubits():
        raise RegisterCapError(
            f"oracle circuit needs {artifact.circuit.qubit_count} qubits, cap is {max_qubits()}"
        )
    layout = artifact.layout
    clauses = reduced_clauses(f3)
    if (
        len(layout.work) != n
        or len(layout.aux) != f3.aux_vars
        or len(layout.clause) != len(clauses)
        or layout.oracle is None
    ):
        raise InputError("artifact layout does not match the formula's register needs")

    ones = layout.initial_one_bits()
    mismatches: list[int] = []
    scratch: list[int] = []
    satisfying = 0
    for x in range(1 << n):
        start = ones
        for v in range(n):
            if (x >> v) & 1:
                start |= 1 << layout.work[v]
        final = propagate_basis(artifact.circuit.gates, start)

        fx = eval_formula(formula, x)
        satisfying += (final >> layout.oracle) & 1

        expected = ones
        full = extend_assignment(f3, x)
        for v in range(n):
            if (x >> v) & 1:
                expected |= 1 << layout.work[v]
        for j in range(f3.aux_vars):
            if (full >> (n + j)) & 1:
                expected |= 1 << layout.aux[j]
        for m, clause in enumerate(clauses):
            truth = eval_clause(clause, full)
            if truth == artifact.polarity_fix:
                expected |= 1 << layout.clause[m]
        oracle_mask = 1 << layout.oracle

        if bool((final >> layout.oracle) & 1) != fx:
            mismatches.append(x)
        if (final & ~oracle_mask) != (expected & ~oracle_mask):
            scratch.append(x)

    ok = not mismatches and not scratch
    return OracleCheckReport(
        ok=ok,
        inputs_checked=1 << n,
        mismatches=tuple(mismatches),
        scratch_violations=tuple(scratch),
        satisfying_inputs=satisfying,
    )
