"""Desk-scale circuit execution.

Production runs use trajectory sampling: a statevector is evolved layer by
layer and one Pauli error per noise channel is drawn from the forward
distribution.  Averaging trajectories reproduces the noisy density-operator
expectation.  An exact density-operator evolution is provided as a test
oracle for small registers.

State indexing is little-endian: bit ``q`` of a basis-state index is qubit
``q``, so ``|q1 q0> = |10>`` has index 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import DensePauliChannel
from .gates import GATE_MATRICES_1Q, GATE_MATRICES_2Q, Circuit, Gate
from .noise import Channel, CircuitNoise, no_noise
from .paulis import PauliString

SIMULATOR_QUBIT_CAP = 20
DENSITY_QUBIT_CAP = 6
NORM_TOL = 1e-10


class CapacityError(RuntimeError):
    """Register size exceeds the simulator cap."""


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (2 ** self.n_qubits,):
            raise ValueError("amplitude vector has wrong length")

    @classmethod
    def zero_state(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class ObservableSpec:
    """Weighted sum of Pauli strings."""

    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("observable needs at least one term")
        n = self.terms[0][1].n_qubits
        for _, p in self.terms:
            if p.n_qubits != n:
                raise ValueError("observable terms have mixed qubit counts")

    @property
    def n_qubits(self) -> int:
        return self.terms[0][1].n_qubits

    @classmethod
    def single(cls, coef: float, pauli: PauliString) -> "ObservableSpec":
        return cls(((coef, pauli),))

    def is_z_diagonal(self) -> bool:
        return all(p.x == 0 for _, p in self.terms)


def magnetization_observable(n_qubits: int, axis: str) -> ObservableSpec:
    """Average single-qubit polarization along one axis: (1/n) sum_i P_i."""
    return ObservableSpec(
        tuple(
            (1.0 / n_qubits, PauliString.single(n_qubits, q, axis.upper()))
            for q in range(n_qubits)
        )
    )


def observable_from_json(data: list[dict]) -> ObservableSpec:
    """Parse the config form ``[{"coef": float, "pauli": "IXZ..."}, ...]``."""
    return ObservableSpec(
        tuple(
            (float(term["coef"]), PauliString.from_label(term["pauli"]))
            for term in data
        )
    )


def observable_to_json(obs: ObservableSpec) -> list[dict]:
    return [{"coef": c, "pauli": p.to_label()} for c, p in obs.terms]


# --------------------------------------------------------------------------
# Statevector gate application
# --------------------------------------------------------------------------


def _rotation_matrix(axis: str, angle: float) -> np.ndarray:
    half = 0.5 * angle
    c, s = math.cos(half), math.sin(half)
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if axis == "y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.array([[c - 1j * s, 0], [0, c + 1j * s]], dtype=complex)


def _apply_1q(amps: np.ndarray, m: np.ndarray, q: int, n: int) -> np.ndarray:
    shaped = amps.reshape(2 ** (n - 1 - q), 2, 2 ** q)
    out = np.einsum("ab,ibk->iak", m, shaped)
    return out.reshape(-1)


def _apply_2q(amps: np.ndarray, m: np.ndarray, qa: int, qb: int, n: int) -> np.ndarray:
    """Apply a two-qubit gate; ``m`` is indexed with qubit ``qa`` as the
    most significant bit of the 2-bit block."""
    hi, lo = (qa, qb) if qa > qb else (qb, qa)
    g = m.reshape(2, 2, 2, 2)  # (out_a, out_b, in_a, in_b)
    if qa < qb:  # want (out_hi, out_lo, in_hi, in_lo)
        g = g.transpose(1, 0, 3, 2)
    shaped = amps.reshape(
        2 ** (n - 1 - hi), 2, 2 ** (hi - lo - 1), 2, 2 ** lo
    )
    out = np.einsum("ABab,iajbk->iAjBk", g, shaped)
    return out.reshape(-1)


def gate_matrix(gate: Gate, angles: tuple[float, ...] = (), angle_mask: int = 0) -> np.ndarray:
    if gate.kind == "rot":
        angle = angles[gate.angle_id]
        if (angle_mask >> gate.angle_id) & 1:
            angle = -angle
        return _rotation_matrix(gate.axis, angle)
    if gate.kind in GATE_MATRICES_1Q:
        return GATE_MATRICES_1Q[gate.kind]
    return GATE_MATRICES_2Q[gate.kind]


def apply_gate(
    state: StateVector,
    gate: Gate,
    angles: tuple[float, ...] = (),
    angle_mask: int = 0,
) -> StateVector:
    m = gate_matrix(gate, angles, angle_mask)
    if gate.is_two_qubit:
        amps = _apply_2q(state.amplitudes, m, gate.qubits[0], gate.qubits[1], state.n_qubits)
    else:
        amps = _apply_1q(state.amplitudes, m, gate.qubits[0], state.n_qubits)
    return StateVector(state.n_qubits, amps)


def apply_pauli(state: StateVector, p: PauliString) -> StateVector:
    """Apply a Pauli string exactly (phases included; global phase irrelevant
    for the channels built on top)."""
    n = state.n_qubits
    idx = np.arange(2 ** n)
    parity = np.zeros(2 ** n, dtype=np.int64)
    z = p.z
    while z:
        b = z & -z
        parity ^= (idx >> (b.bit_length() - 1)) & 1
        z ^= b
    phase = (1j) ** ((p.x & p.z).bit_count()) * np.where(parity, -1.0, 1.0)
    out = np.empty_like(state.amplitudes)
    out[idx ^ p.x] = state.amplitudes * phase
    return StateVector(n, out)


# --------------------------------------------------------------------------
# Noise sampling
# --------------------------------------------------------------------------


def sample_error(channel: Channel, rng: np.random.Generator) -> PauliString | None:
    """Draw one Pauli error from a forward channel; None means identity."""
    if isinstance(channel, DensePauliChannel):
        paulis = list(channel.terms)
        probs = np.array([channel.terms[p] for p in paulis])
        if np.any(probs < -1e-12):
            raise ValueError("sample_error requires a forward (nonnegative) channel")
        probs = np.clip(probs, 0.0, None)
        probs /= probs.sum()
        pick = paulis[rng.choice(len(paulis), p=probs)]
        return None if pick.is_identity else pick
    # sparse product form: each factor fires independently
    err: PauliString | None = None
    for t in channel.product_terms:
        if t.inverted:
            raise ValueError("sample_error requires a forward channel")
        if rng.random() < 1.0 - t.w:
            err = t.pauli if err is None else err * t.pauli
    for f in channel.expanded_factors:
        sub = sample_error(f, rng)
        if sub is not None:
            err = sub if err is None else err * sub
    return err


# --------------------------------------------------------------------------
# Trajectory and exact evolution
# --------------------------------------------------------------------------


def run_trajectory(
    circuit: Circuit,
    noise: CircuitNoise | None = None,
    rng: np.random.Generator | None = None,
    insertions: dict[int, list[PauliString]] | None = None,
    angle_mask: int = 0,
    qubit_cap: int = SIMULATOR_QUBIT_CAP,
) -> StateVector:
    """Run one noisy trajectory.

    Per layer: apply any inserted correction Paulis, then one sampled error
    per attached channel, then the layer's gates.  ``insertions`` maps a layer
    index to Paulis applied just before that layer; index ``len(layers)``
    addresses the point right before measurement.
    """
    if circuit.n_qubits > qubit_cap:
        raise CapacityError(
            f"{circuit.n_qubits} qubits exceeds the simulator cap {qubit_cap}"
        )
    if noise is None:
        noise = no_noise(circuit)
    if rng is None:
        rng = np.random.default_rng()
    state = StateVector.zero_state(circuit.n_qubits)
    insertions = insertions or {}
    for idx, lay in enumerate(circuit.layers):
        for p in insertions.get(idx, ()):
            state = apply_pauli(state, p)
        for channel in noise.channels_at(idx):
            err = sample_error(channel, rng)
            if err is not None:
                state = apply_pauli(state, err)
        for gate in lay.gates:
            state = apply_gate(state, gate, circuit.angles, angle_mask)
    for p in insertions.get(len(circuit.layers), ()):
        state = apply_pauli(state, p)
    if abs(state.norm - 1.0) > NORM_TOL:
        raise RuntimeError(f"state norm drifted to {state.norm}")
    return state


def expectation(state: StateVector, obs: ObservableSpec) -> float:
    """Exact expectation of a Pauli-sum observable."""
    if obs.n_qubits != state.n_qubits:
        raise ValueError("observable dimension mismatch")
    total = 0.0
    for coef, p in obs.terms:
        shifted = apply_pauli(state, p)
        val = np.vdot(state.amplitudes, shifted.amplitudes)
        if abs(val.imag) > 1e-10:
            raise RuntimeError(f"expectation has imaginary part {val.imag}")
        total += coef * val.real
    return float(total)


def sampled_expectation(
    state: StateVector,
    obs: ObservableSpec,
    shots: int,
    rng: np.random.Generator,
) -> float:
    """Expectation with binomial shot noise, term by term."""
    total = 0.0
    for coef, p in obs.terms:
        exact = expectation(state, ObservableSpec.single(1.0, p))
        prob_plus = min(max(0.5 * (1.0 + exact), 0.0), 1.0)
        hits = rng.binomial(shots, prob_plus)
        total += coef * (2.0 * hits / shots - 1.0)
    return float(total)


# -- exact density-operator oracle ------------------------------------------


def pauli_matrix(p: PauliString) -> np.ndarray:
    from .gates import PAULI_MATRICES

    m = np.array([[1.0 + 0j]])
    # highest qubit first so that bit q of the index is qubit q
    for q in range(p.n_qubits - 1, -1, -1):
        x = (p.x >> q) & 1
        z = (p.z >> q) & 1
        code = (0, 3, 1, 2)[2 * x + z]
        m = np.kron(m, PAULI_MATRICES[code])
    return m


def _full_gate_matrix(gate: Gate, n: int, angles, angle_mask: int) -> np.ndarray:
    dim = 2 ** n
    cols = []
    for i in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[i] = 1.0
        cols.append(
            apply_gate(StateVector(n, e), gate, angles, angle_mask).amplitudes
        )
    return np.column_stack(cols)


def _apply_channel_to_density(rho: np.ndarray, channel: Channel, n: int) -> np.ndarray:
    if isinstance(channel, DensePauliChannel):
        out = np.zeros_like(rho)
        for p, c in channel.terms.items():
            pm = pauli_matrix(p)
            out += c * (pm @ rho @ pm.conj().T)
        return out
    for t in channel.product_terms:
        pm = pauli_matrix(t.pauli)
        if t.inverted:
            norm = 2.0 * t.w - 1.0
            rho = (t.w * rho - (1.0 - t.w) * (pm @ rho @ pm.conj().T)) / norm
        else:
            rho = t.w * rho + (1.0 - t.w) * (pm @ rho @ pm.conj().T)
    for f in channel.expanded_factors:
        rho = _apply_channel_to_density(rho, f, n)
    return rho


class DensityEvolution:
    """Exact noisy evolution; yields exact expectations for test oracles."""

    def __init__(self, circuit: Circuit, noise: CircuitNoise | None = None,
                 angle_mask: int = 0):
        if circuit.n_qubits > DENSITY_QUBIT_CAP:
            raise CapacityError(
                f"{circuit.n_qubits} qubits exceeds the density cap "
                f"{DENSITY_QUBIT_CAP}"
            )
        if noise is None:
            noise = no_noise(circuit)
        n = circuit.n_qubits
        dim = 2 ** n
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
        for idx, lay in enumerate(circuit.layers):
            for channel in noise.channels_at(idx):
                rho = _apply_channel_to_density(rho, channel, n)
            for gate in lay.gates:
                u = _full_gate_matrix(gate, n, circuit.angles, angle_mask)
                rho = u @ rho @ u.conj().T
        self.n_qubits = n
        self.rho = rho

    def expectation(self, obs: ObservableSpec) -> float:
        total = 0.0
        for coef, p in obs.terms:
            val = np.trace(pauli_matrix(p) @ self.rho)
            total += coef * val.real
        return float(total)


def exact_density_evolve(
    circuit: Circuit, noise: CircuitNoise | None = None, angle_mask: int = 0
) -> DensityEvolution:
    return DensityEvolution(circuit, noise, angle_mask)


# --------------------------------------------------------------------------
# Measurement with readout noise
# --------------------------------------------------------------------------


def sample_bitstrings(
    state: StateVector, shots: int, rng: np.random.Generator
) -> np.ndarray:
    """Sample computational-basis outcomes; returns int64 indices."""
    probs = state.probabilities()
    probs = probs / probs.sum()
    return rng.choice(len(probs), size=shots, p=probs)


def apply_readout_errors(
    bits: np.ndarray,
    epsilons: np.ndarray,
    etas: np.ndarray,
    rng: np.random.Generator,
    twirl: bool = True,
) -> np.ndarray:
    """Push sampled outcomes through per-qubit asymmetric flips.

    With ``twirl`` a random X is applied per qubit before "measurement" and
    undone in classical post-processing, symmetrizing the effective flip
    probability to (epsilon + eta) / 2.
    """
    n = len(epsilons)
    shots = bits.shape[0]
    out = bits.copy()
    for q in range(n):
        b = (out >> q) & 1
        if twirl:
            t = rng.integers(0, 2, size=shots)
            b = b ^ t
        flip = np.where(
            b == 0,
            rng.random(shots) < epsilons[q],
            rng.random(shots) < etas[q],
        )
        b = b ^ flip.astype(np.int64)
        if twirl:
            b = b ^ t
        out = (out & ~(1 << q)) | (b << q)
    return out


def z_observable_from_bits(bits: np.ndarray, obs: ObservableSpec) -> float:
    """Estimate a Z-diagonal observable from recorded bitstrings."""
    if not obs.is_z_diagonal():
        raise ValueError("bitstring estimation needs a Z-diagonal observable")
    total = 0.0
    for coef, p in obs.terms:
        parity = np.zeros(bits.shape[0], dtype=np.int64)
        z = p.z
        while z:
            bbit = z & -z
            parity ^= (bits >> (bbit.bit_length() - 1)) & 1
            z ^= bbit
        total += coef * float(np.mean(1.0 - 2.0 * parity))
    return total
