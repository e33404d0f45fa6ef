"""Gate-level intermediate representation and lowering passes.

Supported gate kinds: H, X, Z, T, CNOT, CCNOT, NCNOT, G, CG. Operands
are ordered controls-first, target-last. G carries a parameter g > 0,
g != 1, and scales its target's |0> component by 1/g and its |1>
component by g. CG applies the same scaling on the control-|1> subspace
only. NCNOT is a NOT with any number of controls >= 1 and is kept as a
first-class kind so circuits can run either semantically (direct
multi-control kernel, no ancillas) or fully lowered.

Lowering compiles everything to the primitive set {H, CCNOT, G}:

  * CG(c, t, g) -> X(c), CNOT(c,t), G(t, sqrt(g)), CNOT(c,t), X(c),
    G(t, sqrt(g)). Every input branch passes through G twice, which is
    why the parameter is sqrt(g); instantiating the same sequence with g
    would realize a controlled G(g^2).
  * Z -> H, X, H.
  * NCNOT with k >= 3 controls -> a CCNOT chain that folds conjunctions
    into k-2 scratch ancillas, one CCNOT onto the true target, then the
    mirrored chain so the ancillas return to |0>. Without the mirror the
    ancillas would retain input-dependent values and spoil any later
    interference across the work register. 2 controls -> CCNOT directly;
    1 control -> CCNOT with a constant-|1> ancilla as the second control.
  * X(t) -> CCNOT(one_a, one_b, t) over two constant-|1> ancillas.

T has no real-mode decomposition and is rejected by lower_to_primitive.

Ancilla rest values: chain ancillas live in |0>, const_one (and the
helper_one qubit used by the decision pipeline) in |1>. Circuits do not
prepare these; whoever simulates a lowered circuit must initialize them,
which is what `initial_one_bits` reports.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .errors import CircuitError, RealModeError

KINDS = ("H", "X", "Z", "T", "CNOT", "CCNOT", "NCNOT", "G", "CG")
PRIMITIVE_KINDS = frozenset({"H", "CCNOT", "G"})

_FIXED_ARITY = {"H": 1, "X": 1, "Z": 1, "T": 1, "G": 1, "CNOT": 2, "CG": 2, "CCNOT": 3}
_PARAM_KINDS = frozenset({"G", "CG"})

# Scale parameters are capped so that one gate application can never push a
# guarded mantissa array past the double-precision range (see sim.py).
_PARAM_LO = 2.0**-500
_PARAM_HI = 2.0**500


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    param: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        qs = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qs)
        want = _FIXED_ARITY.get(self.kind)
        if want is not None and len(qs) != want:
            raise CircuitError(f"{self.kind} takes {want} operand(s), got {len(qs)}")
        if self.kind == "NCNOT" and len(qs) < 2:
            raise CircuitError("NCNOT needs at least one control and a target")
        if any(q < 0 for q in qs):
            raise CircuitError(f"negative qubit index in {self.kind}")
        if len(set(qs)) != len(qs):
            raise CircuitError(f"duplicate operands in {self.kind}: {qs}")
        if self.kind in _PARAM_KINDS:
            p = self.param
            if p is None:
                raise CircuitError(f"{self.kind} requires a parameter")
            p = float(p)
            if not math.isfinite(p) or p <= 0.0 or p == 1.0:
                raise CircuitError(f"{self.kind} parameter must be finite, > 0 and != 1, got {p}")
            if not _PARAM_LO <= p <= _PARAM_HI:
                raise CircuitError(f"{self.kind} parameter magnitude out of supported range: {p}")
            object.__setattr__(self, "param", p)
        elif self.param is not None:
            raise CircuitError(f"{self.kind} takes no parameter")

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[:-1]

    @property
    def target(self) -> int:
        return self.qubits[-1]


_LAYOUT_LIST_ROLES = ("work", "aux", "clause", "chain_ancilla", "const_one")
_LAYOUT_SINGLE_ROLES = ("helper_one", "oracle", "non_hermitian", "bhr")


@dataclass(frozen=True)
class RegisterLayout:
    """Named qubit roles.

    work     : decision variables (superposed by the pipeline)
    aux      : defined variables introduced by the 3-CNF conversion;
               computed, never superposed
    clause   : one qubit per clause, 1 = clause satisfied
    chain_ancilla : scratch pool for multi-control chains, rest |0>
    const_one     : two qubits held at |1> for X lowering
    helper_one    : |1> qubit used to realize the readout CNOT as CCNOT
    oracle / non_hermitian / bhr : the three special single qubits
    """

    work: tuple[int, ...] = ()
    aux: tuple[int, ...] = ()
    clause: tuple[int, ...] = ()
    chain_ancilla: tuple[int, ...] = ()
    const_one: tuple[int, ...] = ()
    helper_one: int | None = None
    oracle: int | None = None
    non_hermitian: int | None = None
    bhr: int | None = None

    def __post_init__(self) -> None:
        for role in _LAYOUT_LIST_ROLES:
            object.__setattr__(self, role, tuple(int(q) for q in getattr(self, role)))
        groups = self.role_map()
        seen: dict[int, str] = {}
        for role, idxs in groups.items():
            for q in idxs:
                if q < 0:
                    raise CircuitError(f"negative qubit index in layout role {role}")
                if q in seen:
                    raise CircuitError(f"qubit {q} assigned to both {seen[q]} and {role}")
                seen[q] = role

    def role_map(self) -> dict[str, tuple[int, ...]]:
        out: dict[str, tuple[int, ...]] = {}
        for role in _LAYOUT_LIST_ROLES:
            idxs = getattr(self, role)
            if idxs:
                out[role] = idxs
        for role in _LAYOUT_SINGLE_ROLES:
            idx = getattr(self, role)
            if idx is not None:
                out[role] = (int(idx),)
        return out

    def all_indices(self) -> tuple[int, ...]:
        out: list[int] = []
        for idxs in self.role_map().values():
            out.extend(idxs)
        return tuple(sorted(out))

    def validate_covering(self, qubit_count: int) -> None:
        """Roles must partition exactly the register [0, qubit_count)."""
        idxs = self.all_indices()
        if idxs != tuple(range(qubit_count)):
            raise CircuitError(
                f"layout covers {len(idxs)} of {qubit_count} qubits "
                f"(indices {idxs})"
            )

    def initial_one_bits(self) -> int:
        """Basis-index mask of the qubits whose rest value is |1>."""
        bits = 0
        for q in self.const_one:
            bits |= 1 << q
        if self.helper_one is not None:
            bits |= 1 << self.helper_one
        return bits


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    gates: tuple[Gate, ...]
    layout: RegisterLayout | None = None

    def __post_init__(self) -> None:
        n = int(self.qubit_count)
        object.__setattr__(self, "qubit_count", n)
        object.__setattr__(self, "gates", tuple(self.gates))
        if n < 1:
            raise CircuitError(f"circuit needs at least one qubit, got {n}")
        for g in self.gates:
            if max(g.qubits) >= n:
                raise CircuitError(f"gate {g.kind}{g.qubits} exceeds register of {n} qubits")
        if self.layout is not None:
            self.layout.validate_covering(n)


@dataclass(frozen=True)
class GateCensus:
    counts: dict[str, int] = field(default_factory=dict)
    is_primitive: bool = True


def gate_census(circuit: Circuit) -> GateCensus:
    counts: dict[str, int] = {}
    for g in circuit.gates:
        counts[g.kind] = counts.get(g.kind, 0) + 1
    primitive = all(k in PRIMITIVE_KINDS for k in counts)
    return GateCensus(counts=counts, is_primitive=primitive)


def validate_primitive(circuit: Circuit) -> bool:
    return gate_census(circuit).is_primitive


# ---------------------------------------------------------------------------
# JSON interchange.
# Circuit object: {"qubits": int, "layout": {role: [indices]}?, "gates": [...]}
# Gate object:    {"g": kind, "q": [indices], "param": number?}
# Round trips are bit-exact: params serialize through repr(float).
# ---------------------------------------------------------------------------


def circuit_to_json(circuit: Circuit) -> dict:
    obj: dict = {"qubits": circuit.qubit_count}
    if circuit.layout is not None:
        obj["layout"] = {role: list(idxs) for role, idxs in circuit.layout.role_map().items()}
    gates = []
    for g in circuit.gates:
        entry: dict = {"g": g.kind, "q": list(g.qubits)}
        if g.param is not None:
            entry["param"] = g.param
        gates.append(entry)
    obj["gates"] = gates
    return obj


def _layout_from_json(obj: Mapping) -> RegisterLayout:
    if not isinstance(obj, Mapping):
        raise CircuitError("circuit layout must be an object mapping roles to index arrays")
    kwargs: dict = {}
    for role, idxs in obj.items():
        if role not in _LAYOUT_LIST_ROLES and role not in _LAYOUT_SINGLE_ROLES:
            raise CircuitError(f"unknown layout role {role!r}")
        if not isinstance(idxs, list) or not all(isinstance(i, int) for i in idxs):
            raise CircuitError(f"layout role {role!r} must be an array of integers")
        if role in _LAYOUT_SINGLE_ROLES:
            if len(idxs) != 1:
                raise CircuitError(f"layout role {role!r} takes exactly one index")
            kwargs[role] = idxs[0]
        else:
            kwargs[role] = tuple(idxs)
    return RegisterLayout(**kwargs)


def circuit_from_json(obj) -> Circuit:
    if not isinstance(obj, Mapping):
        raise CircuitError("circuit JSON must be an object")
    if "qubits" not in obj or not isinstance(obj["qubits"], int):
        raise CircuitError("circuit JSON needs an integer 'qubits' field")
    raw_gates = obj.get("gates")
    if not isinstance(raw_gates, list):
        raise CircuitError("circuit JSON needs a 'gates' array")
    gates = []
    for entry in raw_gates:
        if not isinstance(entry, Mapping) or "g" not in entry or "q" not in entry:
            raise CircuitError(f"bad gate entry: {entry!r}")
        kind = entry["g"]
        qubits = entry["q"]
        if not isinstance(qubits, list) or not all(isinstance(q, int) for q in qubits):
            raise CircuitError(f"gate operands must be an integer array: {entry!r}")
        param = entry.get("param")
        if param is not None and not isinstance(param, (int, float)):
            raise CircuitError(f"gate param must be a number: {entry!r}")
        gates.append(Gate(kind=kind, qubits=tuple(qubits), param=param))
    layout = None
    if obj.get("layout") is not None:
        layout = _layout_from_json(obj["layout"])
    return Circuit(qubit_count=obj["qubits"], gates=tuple(gates), layout=layout)


def load_circuit(path: str) -> Circuit:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise CircuitError(f"cannot read circuit file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CircuitError(f"circuit file {path} is not valid JSON: {exc}") from exc
    return circuit_from_json(obj)


# ---------------------------------------------------------------------------
# Lowering passes. Each pass is a pure Circuit -> Circuit function; ancillas
# must already exist in the layout. lower_to_primitive grows the register as
# needed and runs the passes in dependency order.
# ---------------------------------------------------------------------------


def _need_const_one(layout: RegisterLayout | None, how_many: int, pass_name: str) -> tuple[int, ...]:
    if layout is None or len(layout.const_one) < how_many:
        raise CircuitError(
            f"{pass_name} requires {how_many} const_one ancilla(s) in the layout"
        )
    return layout.const_one[:how_many]


def lower_x(circuit: Circuit) -> Circuit:
    """Replace each X(t) by CCNOT(one_a, one_b, t)."""
    if not any(g.kind == "X" for g in circuit.gates):
        return circuit
    one_a, one_b = _need_const_one(circuit.layout, 2, "lower_x")
    out = []
    for g in circuit.gates:
        if g.kind == "X":
            out.append(Gate("CCNOT", (one_a, one_b, g.qubits[0])))
        else:
            out.append(g)
    return replace(circuit, gates=tuple(out))


def lower_z(circuit: Circuit) -> Circuit:
    """Replace each Z(q) by H(q), X(q), H(q)."""
    out = []
    for g in circuit.gates:
        if g.kind == "Z":
            q = g.qubits[0]
            out.extend([Gate("H", (q,)), Gate("X", (q,)), Gate("H", (q,))])
        else:
            out.append(g)
    return replace(circuit, gates=tuple(out))


def lower_cg(circuit: Circuit) -> Circuit:
    """Expand each CG into X, CNOT and two G(sqrt(g)) applications."""
    out = []
    for g in circuit.gates:
        if g.kind == "CG":
            c, t = g.qubits
            root = math.sqrt(g.param)
            out.extend(
                [
                    Gate("X", (c,)),
                    Gate("CNOT", (c, t)),
                    Gate("G", (t,), root),
                    Gate("CNOT", (c, t)),
                    Gate("X", (c,)),
                    Gate("G", (t,), root),
                ]
            )
        else:
            out.append(g)
    return replace(circuit, gates=tuple(out))


def _chain_gates(controls: tuple[int, ...], target: int, pool: tuple[int, ...]) -> list[Gate]:
    """Multi-control NOT via a mirrored CCNOT chain; 2k-3 gates, k-2 ancillas."""
    k = len(controls)
    need = k - 2
    if len(pool) < need:
        raise CircuitError(
            f"NCNOT with {k} controls needs {need} chain ancillas, pool has {len(pool)}"
        )
    forward = [Gate("CCNOT", (controls[0], controls[1], pool[0]))]
    for j in range(2, k - 1):
        forward.append(Gate("CCNOT", (controls[j], pool[j - 2], pool[j - 1])))
    hit = Gate("CCNOT", (controls[k - 1], pool[k - 3], target))
    return forward + [hit] + list(reversed(forward))


def lower_ncnot(circuit: Circuit) -> Circuit:
    """Compile NCNOT and CNOT gates down to CCNOT form."""
    out = []
    for g in circuit.gates:
        if g.kind == "NCNOT":
            controls, target = g.controls, g.target
            k = len(controls)
            if k == 1:
                (one_a,) = _need_const_one(circuit.layout, 1, "lower_ncnot")
                out.append(Gate("CCNOT", (controls[0], one_a, target)))
            elif k == 2:
                out.append(Gate("CCNOT", (controls[0], controls[1], target)))
            else:
                pool = circuit.layout.chain_ancilla if circuit.layout else ()
                out.extend(_chain_gates(controls, target, pool))
        elif g.kind == "CNOT":
            (one_a,) = _need_const_one(circuit.layout, 1, "lower_ncnot")
            out.append(Gate("CCNOT", (g.qubits[0], one_a, g.qubits[1])))
        else:
            out.append(g)
    return replace(circuit, gates=tuple(out))


def _ancilla_requirements(gates: Iterable[Gate]) -> tuple[int, bool]:
    """(chain pool size, whether const_one qubits are needed) after expansion."""
    chain = 0
    const = False
    for g in gates:
        if g.kind == "NCNOT":
            k = len(g.controls)
            if k >= 3:
                chain = max(chain, k - 2)
            elif k == 1:
                const = True
        if g.kind in ("X", "Z", "CG", "CNOT"):
            # Z expands through X; CG expands through X and CNOT.
            const = True
    return chain, const


def lower_to_primitive(circuit: Circuit) -> Circuit:
    """Compile to the primitive set {H, CCNOT, G}, growing the register if needed.

    Already-primitive circuits come back unchanged. New ancillas are
    appended after the existing qubits: chain pool first, then the two
    const_one qubits. The caller must start const_one qubits in |1>
    (see RegisterLayout.initial_one_bits).
    """
    for g in circuit.gates:
        if g.kind == "T":
            raise RealModeError("T gate has no decomposition over the real primitive set {H, CCNOT, G}")
    if validate_primitive(circuit):
        return circuit

    chain_need, const_need = _ancilla_requirements(circuit.gates)
    layout = circuit.layout
    if layout is None:
        layout = RegisterLayout(work=tuple(range(circuit.qubit_count)))
    next_q = circuit.qubit_count
    if chain_need > len(layout.chain_ancilla):
        extra = tuple(range(next_q, next_q + chain_need - len(layout.chain_ancilla)))
        layout = replace(layout, chain_ancilla=layout.chain_ancilla + extra)
        next_q += len(extra)
    if const_need and len(layout.const_one) < 2:
        extra = tuple(range(next_q, next_q + 2 - len(layout.const_one)))
        layout = replace(layout, const_one=layout.const_one + extra)
        next_q += len(extra)

    lowered = Circuit(qubit_count=next_q, gates=circuit.gates, layout=layout)
    lowered = lower_cg(lowered)
    lowered = lower_z(lowered)
    lowered = lower_ncnot(lowered)
    lowered = lower_x(lowered)
    census = gate_census(lowered)
    if not census.is_primitive:
        raise CircuitError(f"lowering left non-primitive kinds: {sorted(census.counts)}")
    return lowered


# ---------------------------------------------------------------------------
# Exact propagation of basis states through permutation circuits. This is the
# workhorse of oracle verification: X/CNOT/CCNOT/NCNOT circuits permute basis
# states, so integer bit arithmetic simulates them exactly with no state
# vector at all.
# ---------------------------------------------------------------------------


def propagate_basis(gates: Iterable[Gate], bits: int) -> int:
    for g in gates:
        kind = g.kind
        if kind == "X":
            bits ^= 1 << g.qubits[0]
        elif kind in ("CNOT", "CCNOT", "NCNOT"):
            if all((bits >> c) & 1 for c in g.controls):
                bits ^= 1 << g.target
        else:
            raise CircuitError(f"{kind} is not a basis-permutation gate")
    return bits
