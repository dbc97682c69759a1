"""Gate and circuit model with table-driven Pauli conjugation.

Gates are Clifford primitives (H, square roots of Paulis, Pauli gates,
CX, CZ, SWAP) plus single-qubit Pauli rotations ``rot``.  Commuting a Pauli
correction from just after a Clifford gate to just before it maps
``P -> G† P G`` (phase discarded); for this gate set the phase-free action
coincides with ``G P G†`` and is implemented by per-gate lookup tables.
Pauli rotations leave the correction unchanged but may flip the sign of the
rotation angle, which is tracked in a per-angle flip mask.

Two-qubit table convention: the first letter of a table key is the gate's
first listed qubit, and ``cx`` lists ``(control, target)``.
``table_self_check`` validates every table entry against dense matrix
conjugation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .paulis import PauliError, PauliString

ONE_QUBIT_KINDS = ("h", "sx", "sy", "sz", "x", "y", "z")
TWO_QUBIT_KINDS = ("cx", "cz", "swap")
GATE_KINDS = ONE_QUBIT_KINDS + TWO_QUBIT_KINDS + ("rot",)
ROT_AXES = ("x", "y", "z")


class CircuitError(ValueError):
    """Invalid gate, layer, or circuit construction."""


# --------------------------------------------------------------------------
# Commutation tables.
#
# Letter codes 0..3 = I, X, Y, Z.  One-qubit tables are permutations of 4
# codes; two-qubit tables are permutations of 16 pair codes
# (4 * first_letter + second_letter).  All entries are checked against dense
# conjugation by ``table_self_check`` (and by the test suite).
# --------------------------------------------------------------------------

_I, _X, _Y, _Z = 0, 1, 2, 3

TABLES_1Q: dict[str, tuple[int, ...]] = {
    "h": (_I, _Z, _Y, _X),
    "sx": (_I, _X, _Z, _Y),
    # The sy table swaps X and Z, identical to h at the phase-free level;
    # the signed actions differ (see table_self_check notes).
    "sy": (_I, _Z, _Y, _X),
    "sz": (_I, _Y, _X, _Z),
    # Conjugation by a Pauli gate only introduces signs.
    "x": (_I, _X, _Y, _Z),
    "y": (_I, _X, _Y, _Z),
    "z": (_I, _X, _Y, _Z),
}


def _pair(a: int, b: int) -> int:
    return 4 * a + b


def _two_qubit_table(rows: Iterable[tuple[str, str]]) -> tuple[int, ...]:
    code = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}
    table = [0] * 16
    for src, dst in rows:
        table[_pair(code[src[0]], code[src[1]])] = _pair(code[dst[0]], code[dst[1]])
    return tuple(table)


# cx keys are (control letter, target letter).
TABLES_2Q: dict[str, tuple[int, ...]] = {
    "cx": _two_qubit_table(
        [
            ("II", "II"), ("IX", "IX"), ("IY", "ZY"), ("IZ", "ZZ"),
            ("XI", "XX"), ("XX", "XI"), ("XY", "YZ"), ("XZ", "YY"),
            ("YI", "YX"), ("YX", "YI"), ("YY", "XZ"), ("YZ", "XY"),
            ("ZI", "ZI"), ("ZX", "ZX"), ("ZY", "IY"), ("ZZ", "IZ"),
        ]
    ),
    "cz": _two_qubit_table(
        [
            ("II", "II"), ("IX", "ZX"), ("IY", "ZY"), ("IZ", "IZ"),
            ("XI", "XZ"), ("XX", "YY"), ("XY", "YX"), ("XZ", "XI"),
            ("YI", "YZ"), ("YX", "XY"), ("YY", "XX"), ("YZ", "YI"),
            ("ZI", "ZI"), ("ZX", "IX"), ("ZY", "IY"), ("ZZ", "ZZ"),
        ]
    ),
    "swap": _two_qubit_table(
        [(a + b, b + a) for a in "IXYZ" for b in "IXYZ"]
    ),
}


# --------------------------------------------------------------------------
# Gate / layer / circuit model
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    axis: str | None = None
    angle_id: int | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        nq = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.qubits) != nq:
            raise CircuitError(f"{self.kind} expects {nq} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"duplicate qubit in {self.kind} gate: {self.qubits}")
        if self.kind == "rot":
            if self.axis not in ROT_AXES:
                raise CircuitError(f"rot gate needs axis in {ROT_AXES}, got {self.axis!r}")
            if self.angle_id is None or self.angle_id < 0:
                raise CircuitError("rot gate needs a non-negative angle_id")
        elif self.axis is not None or self.angle_id is not None:
            raise CircuitError(f"{self.kind} gate takes no axis/angle_id")

    # convenience constructors -------------------------------------------

    @classmethod
    def h(cls, q: int) -> "Gate":
        return cls("h", (q,))

    @classmethod
    def sx(cls, q: int) -> "Gate":
        return cls("sx", (q,))

    @classmethod
    def sy(cls, q: int) -> "Gate":
        return cls("sy", (q,))

    @classmethod
    def sz(cls, q: int) -> "Gate":
        return cls("sz", (q,))

    @classmethod
    def x(cls, q: int) -> "Gate":
        return cls("x", (q,))

    @classmethod
    def y(cls, q: int) -> "Gate":
        return cls("y", (q,))

    @classmethod
    def z(cls, q: int) -> "Gate":
        return cls("z", (q,))

    @classmethod
    def cx(cls, control: int, target: int) -> "Gate":
        return cls("cx", (control, target))

    @classmethod
    def cz(cls, a: int, b: int) -> "Gate":
        return cls("cz", (a, b))

    @classmethod
    def swap(cls, a: int, b: int) -> "Gate":
        return cls("swap", (a, b))

    @classmethod
    def rot(cls, q: int, axis: str, angle_id: int) -> "Gate":
        return cls("rot", (q,), axis=axis, angle_id=angle_id)

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT_KINDS


@dataclass(frozen=True)
class Layer:
    """One execution slice.  ``noisy`` defaults to 'contains a two-qubit gate'."""

    gates: tuple[Gate, ...]
    noisy: bool | None = None

    def __post_init__(self):
        seen: set[int] = set()
        for g in self.gates:
            for q in g.qubits:
                if q in seen:
                    raise CircuitError(f"qubit {q} used twice within a layer")
                seen.add(q)
        if self.noisy is None:
            object.__setattr__(
                self, "noisy", any(g.is_two_qubit for g in self.gates)
            )


def layer(*gates: Gate, noisy: bool | None = None) -> Layer:
    return Layer(tuple(gates), noisy)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    layers: tuple[Layer, ...]
    angles: tuple[float, ...] = ()

    def __post_init__(self):
        if self.n_qubits <= 0:
            raise CircuitError("n_qubits must be positive")
        for lay in self.layers:
            for g in lay.gates:
                for q in g.qubits:
                    if not 0 <= q < self.n_qubits:
                        raise CircuitError(
                            f"qubit {q} out of range for n={self.n_qubits}"
                        )
                if g.kind == "rot" and g.angle_id >= len(self.angles):
                    raise CircuitError(
                        f"angle_id {g.angle_id} out of range "
                        f"(circuit has {len(self.angles)} angles)"
                    )

    @property
    def n_angles(self) -> int:
        return len(self.angles)

    @property
    def is_clifford(self) -> bool:
        return all(g.kind != "rot" for lay in self.layers for g in lay.gates)

    def noisy_layer_indices(self) -> tuple[int, ...]:
        return tuple(i for i, lay in enumerate(self.layers) if lay.noisy)

    def two_qubit_gate_count(self) -> int:
        return sum(1 for lay in self.layers for g in lay.gates if g.is_two_qubit)


@dataclass(frozen=True)
class SignFlipMask:
    """Per-rotation angle sign flips, one bit per angle_id."""

    bits: int
    n_angles: int

    def __post_init__(self):
        if self.bits & ~((1 << self.n_angles) - 1 if self.n_angles else 0):
            raise CircuitError("flip mask has bits beyond the angle count")

    @classmethod
    def empty(cls, n_angles: int) -> "SignFlipMask":
        return cls(0, n_angles)

    @property
    def is_empty(self) -> bool:
        return self.bits == 0

    def flips(self, angle_id: int) -> bool:
        return bool((self.bits >> angle_id) & 1)

    def __xor__(self, other: "SignFlipMask") -> "SignFlipMask":
        if self.n_angles != other.n_angles:
            raise CircuitError("flip mask length mismatch")
        return SignFlipMask(self.bits ^ other.bits, self.n_angles)


# --------------------------------------------------------------------------
# Conjugation
# --------------------------------------------------------------------------

_CODE_AT = "IXYZ"


def _get_code(p: PauliString, q: int) -> int:
    x = (p.x >> q) & 1
    z = (p.z >> q) & 1
    return (_I, _Z, _X, _Y)[2 * x + z]


def _set_code(x: int, z: int, q: int, code: int) -> tuple[int, int]:
    bit = 1 << q
    x &= ~bit
    z &= ~bit
    if code in (_X, _Y):
        x |= bit
    if code in (_Y, _Z):
        z |= bit
    return x, z


def conjugate_pauli(gate: Gate, p: PauliString) -> PauliString:
    """Move ``p`` from after ``gate`` to before it (phase discarded)."""
    if gate.kind == "rot":
        raise CircuitError(
            "rot gates do not conjugate Paulis; use conjugate_through_rotation"
        )
    for q in gate.qubits:
        if q >= p.n_qubits:
            raise PauliError(f"gate qubit {q} out of range for n={p.n_qubits}")
    x, z = p.x, p.z
    if gate.kind in TABLES_1Q:
        code = TABLES_1Q[gate.kind][_get_code(p, gate.qubits[0])]
        x, z = _set_code(x, z, gate.qubits[0], code)
    else:
        a, b = gate.qubits
        out = TABLES_2Q[gate.kind][_pair(_get_code(p, a), _get_code(p, b))]
        x, z = _set_code(x, z, a, out >> 2)
        x, z = _set_code(x, z, b, out & 3)
    return PauliString(p.n_qubits, x, z)


_AXIS_CODE = {"x": _X, "y": _Y, "z": _Z}


def conjugate_through_rotation(gate: Gate, p: PauliString) -> tuple[PauliString, bool]:
    """Commute ``p`` through a Pauli rotation.

    The Pauli passes unchanged; the returned flag is True when the rotation
    angle must be negated (the Pauli anticommutes with the rotation axis on
    that qubit).
    """
    if gate.kind != "rot":
        raise CircuitError("conjugate_through_rotation requires a rot gate")
    q = gate.qubits[0]
    if q >= p.n_qubits:
        raise PauliError(f"gate qubit {q} out of range for n={p.n_qubits}")
    code = _get_code(p, q)
    axis = _AXIS_CODE[gate.axis]
    flip = code != _I and code != axis
    return p, flip


def propagate(
    p: PauliString,
    circuit: Circuit,
    from_layer: int,
    to_layer: int = 0,
) -> tuple[PauliString, SignFlipMask]:
    """Commute ``p`` from just before layer ``from_layer`` to just before
    layer ``to_layer`` (toward the circuit start), folding the lookup tables
    over the intervening gates in reverse execution order.

    Returns the transformed Pauli and the accumulated angle flip mask.
    """
    if not 0 <= to_layer <= from_layer <= len(circuit.layers):
        raise CircuitError(
            f"invalid propagation range {from_layer} -> {to_layer} "
            f"for {len(circuit.layers)} layers"
        )
    mask = 0
    for idx in range(from_layer - 1, to_layer - 1, -1):
        for gate in circuit.layers[idx].gates:
            if gate.kind == "rot":
                p, flip = conjugate_through_rotation(gate, p)
                if flip:
                    mask ^= 1 << gate.angle_id
            else:
                p = conjugate_pauli(gate, p)
    return p, SignFlipMask(mask, circuit.n_angles)


def conjugate_pauli_forward(gate: Gate, p: PauliString) -> PauliString:
    """Move ``p`` from before ``gate`` to after it (inverse table direction)."""
    if gate.kind == "rot":
        raise CircuitError("rot gates do not conjugate Paulis")
    if gate.kind in TABLES_1Q:
        table = TABLES_1Q[gate.kind]
        inv = [0] * 4
        for src, dst in enumerate(table):
            inv[dst] = src
        code = inv[_get_code(p, gate.qubits[0])]
        x, z = _set_code(p.x, p.z, gate.qubits[0], code)
    else:
        table = TABLES_2Q[gate.kind]
        inv = [0] * 16
        for src, dst in enumerate(table):
            inv[dst] = src
        a, b = gate.qubits
        out = inv[_pair(_get_code(p, a), _get_code(p, b))]
        x, z = _set_code(p.x, p.z, a, out >> 2)
        x, z = _set_code(x, z, b, out & 3)
    return PauliString(p.n_qubits, x, z)


# --------------------------------------------------------------------------
# Dense self-check of the lookup tables
# --------------------------------------------------------------------------

_M_I = np.eye(2, dtype=complex)
_M_X = np.array([[0, 1], [1, 0]], dtype=complex)
_M_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_M_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATRICES = (_M_I, _M_X, _M_Y, _M_Z)

_S = 0.5 * (1 + 1j)
GATE_MATRICES_1Q: dict[str, np.ndarray] = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "sx": np.array([[_S, _S.conjugate()], [_S.conjugate(), _S]]),
    "sy": np.array([[_S, -_S], [_S, _S]]),
    "sz": np.array([[1, 0], [0, 1j]], dtype=complex),
    "x": _M_X,
    "y": _M_Y,
    "z": _M_Z,
}

GATE_MATRICES_2Q: dict[str, np.ndarray] = {
    # Basis order |q_first q_second> with the first listed qubit as the
    # most significant bit; cx lists (control, target).
    "cx": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "swap": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


@dataclass
class TableCheckEntry:
    gate: str
    source: str
    table_result: str
    matches: bool
    phase: complex


@dataclass
class TableCheckReport:
    entries: list[TableCheckEntry] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.matches for e in self.entries)

    @property
    def mismatches(self) -> list[TableCheckEntry]:
        return [e for e in self.entries if not e.matches]

    def summary(self) -> str:
        lines = [
            f"table self-check: {len(self.entries)} entries, "
            f"{len(self.mismatches)} mismatch(es)"
        ]
        for e in self.mismatches:
            lines.append(f"  MISMATCH {e.gate}: {e.source} -> {e.table_result}")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)


def _pauli_matrix_from_codes(codes: Sequence[int]) -> np.ndarray:
    m = np.array([[1.0 + 0j]])
    for c in codes:
        m = np.kron(m, PAULI_MATRICES[c])
    return m


def table_self_check(
    tables_1q: dict[str, tuple[int, ...]] | None = None,
    tables_2q: dict[str, tuple[int, ...]] | None = None,
) -> TableCheckReport:
    """Compare every lookup-table entry against dense conjugation G P G†.

    A table entry matches when the dense result is proportional to the
    table's Pauli; the proportionality phase is recorded.  Entries whose
    phase is not +1 are collected in the report notes (the sy table acts as
    X <-> Z only up to sign; phase-stripped channel conjugation is exact).
    """
    t1 = TABLES_1Q if tables_1q is None else tables_1q
    t2 = TABLES_2Q if tables_2q is None else tables_2q
    report = TableCheckReport()
    phase_notes: dict[str, list[str]] = {}

    def check(gate_name, gate_m, codes_in, codes_out, label_in, label_out):
        p_in = _pauli_matrix_from_codes(codes_in)
        p_out = _pauli_matrix_from_codes(codes_out)
        dense = gate_m.conj().T @ p_in @ gate_m
        dim = dense.shape[0]
        overlap = np.trace(p_out.conj().T @ dense) / dim
        matches = abs(abs(overlap) - 1.0) < 1e-12 and np.allclose(
            dense, overlap * p_out, atol=1e-12
        )
        report.entries.append(
            TableCheckEntry(gate_name, label_in, label_out, matches, complex(overlap))
        )
        if matches and abs(overlap - 1.0) > 1e-12:
            phase_notes.setdefault(gate_name, []).append(
                f"{label_in}->{label_out} carries phase {complex(overlap):.3g}"
            )

    for name, table in t1.items():
        gm = GATE_MATRICES_1Q[name]
        for src in range(4):
            check(name, gm, (src,), (table[src],), _CODE_AT[src], _CODE_AT[table[src]])
    for name, table in t2.items():
        gm = GATE_MATRICES_2Q[name]
        for src in range(16):
            dst = table[src]
            check(
                name,
                gm,
                (src >> 2, src & 3),
                (dst >> 2, dst & 3),
                _CODE_AT[src >> 2] + _CODE_AT[src & 3],
                _CODE_AT[dst >> 2] + _CODE_AT[dst & 3],
            )
    for gate_name, items in sorted(phase_notes.items()):
        report.notes.append(
            f"{gate_name}: matches dense conjugation only after phase stripping "
            f"({'; '.join(items)})"
        )
    return report


# --------------------------------------------------------------------------
# Circuit JSON format
# --------------------------------------------------------------------------

_GATE_KEYS = {"kind", "qubits", "axis", "angle_id"}
_LAYER_KEYS = {"noisy", "gates"}
_CIRCUIT_KEYS = {"n_qubits", "angles", "layers"}


def circuit_to_dict(circuit: Circuit) -> dict:
    layers = []
    for lay in circuit.layers:
        gates = []
        for g in lay.gates:
            gd: dict = {"kind": g.kind, "qubits": list(g.qubits)}
            if g.kind == "rot":
                gd["axis"] = g.axis
                gd["angle_id"] = g.angle_id
            gates.append(gd)
        layers.append({"noisy": lay.noisy, "gates": gates})
    return {
        "n_qubits": circuit.n_qubits,
        "angles": list(circuit.angles),
        "layers": layers,
    }


def circuit_from_dict(data: dict) -> Circuit:
    unknown = set(data) - _CIRCUIT_KEYS
    if unknown:
        raise CircuitError(f"unknown circuit keys: {sorted(unknown)}")
    if "n_qubits" not in data or "layers" not in data:
        raise CircuitError("circuit requires 'n_qubits' and 'layers'")
    layers = []
    for ld in data["layers"]:
        unknown = set(ld) - _LAYER_KEYS
        if unknown:
            raise CircuitError(f"unknown layer keys: {sorted(unknown)}")
        gates = []
        for gd in ld.get("gates", []):
            unknown = set(gd) - _GATE_KEYS
            if unknown:
                raise CircuitError(f"unknown gate keys: {sorted(unknown)}")
            gates.append(
                Gate(
                    gd["kind"],
                    tuple(gd["qubits"]),
                    axis=gd.get("axis"),
                    angle_id=gd.get("angle_id"),
                )
            )
        layers.append(Layer(tuple(gates), ld.get("noisy")))
    return Circuit(
        data["n_qubits"],
        tuple(layers),
        tuple(float(a) for a in data.get("angles", [])),
    )


def save_circuit(circuit: Circuit, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(circuit_to_dict(circuit), fh, indent=1)


def load_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return circuit_from_dict(json.load(fh))
