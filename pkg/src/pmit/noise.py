"""Binding of noise channels to circuit layers.

A :class:`CircuitNoise` holds, for every layer of a circuit, the list of
channels applied immediately before that layer's gates.  Layers flagged
``noisy`` receive channels; a noisy layer with no two-qubit gates of its own
(a "noise slot", e.g. inserted right after a gate layer to model noise that
acts after the gate) takes its channels from the closest preceding layer
with two-qubit gates.

Gate-level constructors attach one small channel per two-qubit gate; the
sparse-product constructor attaches either one device-wide factor per noisy
layer or one gate-local factor per two-qubit gate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    ChannelError,
    DensePauliChannel,
    NoiseModelSpec,
    SplChannel,
    build_spl_model,
    depolarizing_channel,
    embed_channel,
    random_pauli_channel,
    spl_pair_channel,
)
from .gates import Circuit, Gate

Channel = DensePauliChannel | SplChannel


@dataclass(frozen=True)
class CircuitNoise:
    """Per-layer noise channels, aligned with ``circuit.layers``."""

    per_layer: tuple[tuple[Channel, ...], ...]

    def channels_at(self, layer_index: int) -> tuple[Channel, ...]:
        return self.per_layer[layer_index]

    @property
    def n_channels(self) -> int:
        return sum(len(ch) for ch in self.per_layer)

    def is_trivial(self) -> bool:
        return self.n_channels == 0


def no_noise(circuit: Circuit) -> CircuitNoise:
    return CircuitNoise(tuple(() for _ in circuit.layers))


def _noise_source_gates(circuit: Circuit, layer_index: int) -> tuple[Gate, ...]:
    """Two-qubit gates whose noise a noisy layer carries."""
    own = tuple(
        g for g in circuit.layers[layer_index].gates if g.is_two_qubit
    )
    if own:
        return own
    for idx in range(layer_index - 1, -1, -1):
        prev = tuple(g for g in circuit.layers[idx].gates if g.is_two_qubit)
        if prev:
            return prev
    return ()


def gate_depolarizing_noise(circuit: Circuit, p: float) -> CircuitNoise:
    """One two-qubit depolarizing channel per two-qubit gate in each noisy layer."""
    base = depolarizing_channel(p, 2)
    per_layer = []
    for idx, lay in enumerate(circuit.layers):
        if not lay.noisy:
            per_layer.append(())
            continue
        chans = tuple(
            embed_channel(base, circuit.n_qubits, g.qubits)
            for g in _noise_source_gates(circuit, idx)
        )
        per_layer.append(chans)
    return CircuitNoise(tuple(per_layer))


def gate_random_pauli_noise(
    circuit: Circuit, p: float, rng: np.random.Generator
) -> CircuitNoise:
    """A fresh random two-qubit Pauli channel per two-qubit gate occurrence."""
    per_layer = []
    for idx, lay in enumerate(circuit.layers):
        if not lay.noisy:
            per_layer.append(())
            continue
        chans = []
        for g in _noise_source_gates(circuit, idx):
            local = random_pauli_channel(2, p, rng)
            chans.append(embed_channel(local, circuit.n_qubits, g.qubits))
        per_layer.append(tuple(chans))
    return CircuitNoise(tuple(per_layer))


def spl_noise(
    circuit: Circuit,
    pauli_fidelity: float,
    attach: str = "gate",
) -> CircuitNoise:
    """Sparse-product noise on a linear topology.

    ``attach="gate"``: each two-qubit gate in a noisy layer carries the model
    restricted to its qubit pair (15 Paulis).  ``attach="device"``: each noisy
    layer carries the full device model (3n + 9(n-1) Paulis) once.
    """
    if attach not in ("gate", "device"):
        raise ChannelError(f"unknown SPL attachment {attach!r}")
    n = circuit.n_qubits
    device = build_spl_model(
        n, NoiseModelSpec("spl_linear_topology", pauli_fidelity=pauli_fidelity)
    )
    per_layer = []
    for idx, lay in enumerate(circuit.layers):
        if not lay.noisy:
            per_layer.append(())
            continue
        if attach == "device":
            per_layer.append((device,))
        else:
            per_layer.append(
                tuple(
                    spl_pair_channel(n, g.qubits, pauli_fidelity)
                    for g in _noise_source_gates(circuit, idx)
                )
            )
    return CircuitNoise(tuple(per_layer))


def build_noise(
    circuit: Circuit, spec: NoiseModelSpec, attach: str = "gate"
) -> CircuitNoise:
    """Instantiate a noise model specification on a circuit."""
    if spec.kind == "depolarizing_gate_level":
        return gate_depolarizing_noise(circuit, spec.p)
    if spec.kind == "random_pauli_gate_level":
        rng = np.random.default_rng(spec.seed)
        return gate_random_pauli_noise(circuit, spec.p, rng)
    if spec.kind == "spl_linear_topology":
        return spl_noise(circuit, spec.pauli_fidelity, attach=attach)
    raise ChannelError(f"unknown noise kind {spec.kind!r}")
