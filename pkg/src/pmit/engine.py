"""Quasi-probability mitigation engine.

Standard mitigation samples one signed Pauli correction per noisy layer from
that layer's inverse channel; the propagated variant commutes every layer
inverse to a common circuit boundary, multiplies them into one fused inverse,
and samples global corrections from it.  Fusing lets corrections that map to
the same boundary operator with opposite signs cancel ahead of time, which
can only shrink the sampling overhead.

Three fusion backends cover the use cases:

* a Walsh-transform backend for Clifford circuits with dense channels on a
  modest register (channel products are pointwise products of Pauli
  eigenvalues),
* a dictionary backend keyed by (Pauli, angle-flip mask) for circuits with
  Pauli rotations, where corrections with different flip masks never
  interfere,
* a sparse product-form backend for product-form noise models at any width,
  reduced by merging, boundary reduction, and guided expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    ChannelError,
    DensePauliChannel,
    NonInvertibleChannelError,
    ProductTerm,
    SplChannel,
    _wht_inplace,
    expand_guided,
    gamma_dense,
    gamma_spl,
    invert_dense,
    merge_equal_terms,
    passive_reduction,
    xi_reduce_spl,
)
from .gates import (
    Circuit,
    CircuitError,
    SignFlipMask,
    TABLES_1Q,
    TABLES_2Q,
    conjugate_pauli,
    conjugate_pauli_forward,
    conjugate_through_rotation,
    propagate,
)
from .noise import Channel, CircuitNoise
from .paulis import PauliString
from . import sim as simulate
from .sim import ObservableSpec, StateVector

WHT_QUBIT_CAP = 11


# --------------------------------------------------------------------------
# Data types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrectionSample:
    pauli: PauliString
    sign: int
    flip_mask: SignFlipMask

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("correction sign must be +1 or -1")


@dataclass(frozen=True)
class ReadoutModel:
    """Per-qubit asymmetric assignment errors (epsilon: P(0->1), eta: P(1->0))."""

    per_qubit: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for eps, eta in self.per_qubit:
            if not (0.0 <= eps < 0.5 and 0.0 <= eta < 0.5):
                raise ValueError("readout rates must lie in [0, 1/2)")

    @property
    def n_qubits(self) -> int:
        return len(self.per_qubit)

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([e for e, _ in self.per_qubit])

    @property
    def etas(self) -> np.ndarray:
        return np.array([h for _, h in self.per_qubit])


@dataclass(frozen=True)
class TwirlProtocol:
    """Randomized X insertion before measurement with classical unflip."""

    p_x: tuple[float, ...]
    description: str = (
        "apply X with probability 1/2 on each qubit immediately before "
        "measurement and flip the recorded bit whenever an X was applied"
    )


@dataclass(frozen=True)
class MitigationEstimate:
    mean: float
    stderr: float
    gamma_total: float
    n_instances: int
    shots_per_instance: int


@dataclass
class McmcEstimate:
    n_samples: int
    tallies: dict[PauliString, int]
    interfering: int
    gamma_ratio: float
    gamma_local_product: float

    @property
    def gamma_estimate(self) -> float:
        return self.gamma_ratio * self.gamma_local_product


@dataclass(frozen=True)
class InverseOptions:
    xi_reduce: bool = True
    epsilon: float = 0.0
    expansion_budget: int = 4096
    expansion_strategy: str = "lexicographic_support"
    boundary: str = "start"
    wht_qubit_cap: int = WHT_QUBIT_CAP

    def __post_init__(self):
        if self.boundary not in ("start", "end"):
            raise ValueError("boundary must be 'start' or 'end'")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")


@dataclass
class GlobalInverse:
    """Fused inverse channel at a circuit boundary.

    Either materialized corrections (parallel arrays of Pauli bit masks,
    angle-flip masks, and signed coefficients) or a reduced sparse product
    form when materializing would be wasteful.
    """

    n_qubits: int
    n_angles: int
    gamma: float
    boundary: str
    dropped_mass: float = 0.0
    trace_sum: float = 1.0
    xs: list[int] | None = None
    zs: list[int] | None = None
    masks: list[int] | None = None
    coefs: np.ndarray | None = None
    spl_form: SplChannel | None = None
    _cum: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_product_form(self) -> bool:
        return self.spl_form is not None

    def corrections(self) -> dict[tuple[PauliString, SignFlipMask], float]:
        """Materialized correction map (small instances and tests)."""
        if self.is_product_form:
            dense = self.spl_form.to_dense()
            empty = SignFlipMask.empty(self.n_angles)
            return {(p, empty): c for p, c in dense.terms.items()}
        out = {}
        for x, z, m, c in zip(self.xs, self.zs, self.masks, self.coefs):
            key = (PauliString(self.n_qubits, x, z), SignFlipMask(m, self.n_angles))
            out[key] = out.get(key, 0.0) + float(c)
        return out

    def sample(self, rng: np.random.Generator) -> CorrectionSample:
        if self.is_product_form:
            x = z = 0
            sign = 1
            for t in self.spl_form.product_terms:
                if rng.random() < 1.0 - t.w:
                    x ^= t.pauli.x
                    z ^= t.pauli.z
                    if t.inverted:
                        sign = -sign
            for f in self.spl_form.expanded_factors:
                paulis = list(f.terms)
                coefs = np.array([f.terms[p] for p in paulis])
                absc = np.abs(coefs)
                pick = rng.choice(len(paulis), p=absc / absc.sum())
                x ^= paulis[pick].x
                z ^= paulis[pick].z
                if coefs[pick] < 0:
                    sign = -sign
            return CorrectionSample(
                PauliString(self.n_qubits, x, z),
                sign,
                SignFlipMask.empty(self.n_angles),
            )
        if self._cum is None:
            absc = np.abs(self.coefs)
            self._cum = np.cumsum(absc / absc.sum())
        u = rng.random()
        idx = int(np.searchsorted(self._cum, u, side="right"))
        idx = min(idx, len(self.coefs) - 1)
        return CorrectionSample(
            PauliString(self.n_qubits, self.xs[idx], self.zs[idx]),
            1 if self.coefs[idx] >= 0 else -1,
            SignFlipMask(self.masks[idx], self.n_angles),
        )


# --------------------------------------------------------------------------
# Local inverse samplers
# --------------------------------------------------------------------------


class _DenseSampler:
    def __init__(self, inverse: DensePauliChannel):
        self.paulis = list(inverse.terms)
        coefs = np.array([inverse.terms[p] for p in self.paulis])
        self.signs = np.where(coefs >= 0, 1, -1)
        absc = np.abs(coefs)
        self.gamma = float(absc.sum())
        self.cum = np.cumsum(absc / absc.sum())

    def draw(self, rng: np.random.Generator) -> tuple[PauliString | None, int]:
        idx = int(np.searchsorted(self.cum, rng.random(), side="right"))
        idx = min(idx, len(self.paulis) - 1)
        p = self.paulis[idx]
        return (None if p.is_identity else p), int(self.signs[idx])


class _SplSampler:
    def __init__(self, inverse: SplChannel):
        self.terms = inverse.product_terms
        self.factors = [_DenseSampler(f) for f in inverse.expanded_factors]
        self.gamma = gamma_spl(inverse)
        self.n_qubits = inverse.n_qubits

    def draw(self, rng: np.random.Generator) -> tuple[PauliString | None, int]:
        x = z = 0
        sign = 1
        for t in self.terms:
            if rng.random() < 1.0 - t.w:
                x ^= t.pauli.x
                z ^= t.pauli.z
                if t.inverted:
                    sign = -sign
        for f in self.factors:
            p, s = f.draw(rng)
            if p is not None:
                x ^= p.x
                z ^= p.z
            sign *= s
        if x == 0 and z == 0:
            return None, sign
        return PauliString(self.n_qubits, x, z), sign


def local_inverse_sampler(channel: Channel):
    if isinstance(channel, DensePauliChannel):
        return _DenseSampler(invert_dense(channel))
    return _SplSampler(channel.invert())


def sample_local_correction(
    inverse: DensePauliChannel, rng: np.random.Generator, n_angles: int = 0
) -> CorrectionSample:
    """Draw one signed correction from an inverse channel: Pauli ``P_i`` with
    probability ``|c_i| / gamma`` and sign ``sgn(c_i)``."""
    if not inverse.terms:
        raise ChannelError("cannot sample from an empty channel")
    sampler = _DenseSampler(inverse)
    p, s = sampler.draw(rng)
    if p is None:
        p = PauliString.identity(inverse.n_qubits)
    return CorrectionSample(p, s, SignFlipMask.empty(n_angles))


def local_gamma(channel: Channel) -> float:
    """Sampling overhead of one layer channel's inverse."""
    if isinstance(channel, DensePauliChannel):
        return gamma_dense(invert_dense(channel))
    g = 1.0
    for t in channel.product_terms:
        g *= 1.0 / (2.0 * t.w - 1.0)
    for f in channel.expanded_factors:
        g *= gamma_dense(invert_dense(f))
    return g


def pec_total_gamma(
    circuit: Circuit, noise: CircuitNoise, readout: ReadoutModel | None = None
) -> float:
    g = 1.0
    for idx in range(len(circuit.layers)):
        for ch in noise.channels_at(idx):
            g *= local_gamma(ch)
    if readout is not None:
        for p_x in twirl_readout(readout)[1].p_x:
            g *= 1.0 / (1.0 - 2.0 * p_x)
    return g


# --------------------------------------------------------------------------
# Readout twirling
# --------------------------------------------------------------------------


def twirl_readout(
    model: ReadoutModel,
) -> tuple[list[DensePauliChannel], TwirlProtocol]:
    """Symmetrize per-qubit readout into X channels with
    ``p_x = (epsilon + eta) / 2`` and return the insertion protocol."""
    channels = []
    p_xs = []
    for eps, eta in model.per_qubit:
        p_x = 0.5 * (eps + eta)
        p_xs.append(p_x)
        ident = PauliString.identity(1)
        flip = PauliString.from_label("X")
        channels.append(
            DensePauliChannel(1, {ident: 1.0 - p_x, flip: p_x})
        )
    return channels, TwirlProtocol(tuple(p_xs))


def measurement_x_channels(
    model: ReadoutModel, n_qubits: int
) -> list[DensePauliChannel]:
    """Twirled measurement channels embedded on the full register."""
    from .channels import embed_channel

    locals_, _ = twirl_readout(model)
    return [
        embed_channel(ch, n_qubits, (q,)) for q, ch in enumerate(locals_)
    ]


# --------------------------------------------------------------------------
# Fused inverse construction
# --------------------------------------------------------------------------


def _propagated_inverse_terms(
    circuit: Circuit,
    layer_idx: int,
    channel: DensePauliChannel,
    boundary: str,
) -> dict[tuple[int, int, int], float]:
    """Invert a dense layer channel and commute every term to the boundary.

    Returns ``{(x, z, mask_bits): coef}``.
    """
    inverse = invert_dense(channel)
    out: dict[tuple[int, int, int], float] = {}
    for p, c in inverse.terms.items():
        if boundary == "start":
            moved, mask = propagate(p, circuit, layer_idx, 0)
        else:
            moved, mask = propagate_forward(p, circuit, layer_idx)
        key = (moved.x, moved.z, mask.bits)
        out[key] = out.get(key, 0.0) + c
    return out


def propagate_forward(
    p: PauliString, circuit: Circuit, from_layer: int, to_layer: int | None = None
) -> tuple[PauliString, SignFlipMask]:
    """Commute ``p`` from before layer ``from_layer`` to before ``to_layer``
    (toward the measurement; ``None`` means the circuit end)."""
    if to_layer is None:
        to_layer = len(circuit.layers)
    if not 0 <= from_layer <= to_layer <= len(circuit.layers):
        raise CircuitError("invalid forward propagation range")
    mask = 0
    for idx in range(from_layer, to_layer):
        for gate in circuit.layers[idx].gates:
            if gate.kind == "rot":
                p, flip = conjugate_through_rotation(gate, p)
                if flip:
                    mask ^= 1 << gate.angle_id
            else:
                p = conjugate_pauli_forward(gate, p)
    return p, SignFlipMask(mask, circuit.n_angles)


def _collect_channels(
    circuit: Circuit,
    noise: CircuitNoise,
    readout: ReadoutModel | None,
) -> list[tuple[int, Channel]]:
    """(layer index, channel) pairs; readout channels sit at the end boundary."""
    items: list[tuple[int, Channel]] = []
    for idx in range(len(circuit.layers)):
        for ch in noise.channels_at(idx):
            items.append((idx, ch))
    if readout is not None:
        for ch in measurement_x_channels(readout, circuit.n_qubits):
            items.append((len(circuit.layers), ch))
    return items


def build_global_inverse(
    circuit: Circuit,
    noise: CircuitNoise,
    options: InverseOptions | None = None,
    readout: ReadoutModel | None = None,
) -> GlobalInverse:
    """Propagate every layer inverse to the chosen boundary and fuse.

    Dispatches between the Walsh-transform, dictionary, and product-form
    backends depending on the channel types, circuit content, and register
    size.  The fused overhead never exceeds the product of the local ones.
    """
    opts = options or InverseOptions()
    items = _collect_channels(circuit, noise, readout)
    if not items:
        return GlobalInverse(
            n_qubits=circuit.n_qubits,
            n_angles=circuit.n_angles,
            gamma=1.0,
            boundary=opts.boundary,
            xs=[0],
            zs=[0],
            masks=[0],
            coefs=np.array([1.0]),
        )
    all_spl = all(isinstance(ch, SplChannel) for _, ch in items)
    if all_spl:
        if not circuit.is_clifford:
            raise ChannelError(
                "product-form fusion supports Clifford circuits only"
            )
        return _build_spl_inverse(circuit, items, opts)
    if not all(isinstance(ch, DensePauliChannel) for _, ch in items):
        raise ChannelError(
            "cannot mix product-form and dense channels in one fusion"
        )
    if circuit.is_clifford and circuit.n_qubits <= opts.wht_qubit_cap:
        return _build_wht_inverse(circuit, items, opts)
    return _build_dict_inverse(circuit, items, opts)


def _build_wht_inverse(circuit, items, opts: InverseOptions) -> GlobalInverse:
    n = circuit.n_qubits
    size = 4 ** n
    eigen = np.ones(size)
    for layer_idx, channel in items:
        vec = np.zeros(size)
        for p, c in channel.terms.items():
            if opts.boundary == "start":
                moved, _ = propagate(p, circuit, min(layer_idx, len(circuit.layers)), 0)
            else:
                moved, _ = propagate_forward(p, circuit, layer_idx)
            vec[moved.x | (moved.z << n)] += c
        _wht_inplace(vec)
        bad = np.abs(vec) < 1e-14
        if np.any(bad):
            s = int(np.argmax(bad))
            # eigenvalue index s corresponds to the Pauli with swapped halves
            mask = (1 << n) - 1
            q = PauliString(n, s >> n, s & mask)
            raise NonInvertibleChannelError(q)
        eigen /= vec
    _wht_inplace(eigen)
    coefs = eigen / size
    trace = float(coefs.sum())
    if opts.xi_reduce:
        coefs = coefs.reshape(2 ** n, 2 ** n).sum(axis=0)
        xs_all = np.arange(2 ** n)
        zs_all = np.zeros(2 ** n, dtype=np.int64)
    else:
        idx = np.arange(size)
        xs_all = idx & ((1 << n) - 1)
        zs_all = idx >> n
    absc = np.abs(coefs)
    if opts.epsilon > 0:
        keep = absc >= opts.epsilon
    else:
        keep = absc > 0
    dropped = float(absc[~keep].sum())
    coefs_kept = coefs[keep]
    gamma = float(np.abs(coefs_kept).sum())
    return GlobalInverse(
        n_qubits=n,
        n_angles=circuit.n_angles,
        gamma=gamma,
        boundary=opts.boundary,
        dropped_mass=dropped,
        trace_sum=trace,
        xs=[int(v) for v in xs_all[keep]],
        zs=[int(v) for v in zs_all[keep]],
        masks=[0] * int(keep.sum()),
        coefs=np.asarray(coefs_kept, dtype=float),
    )


def _build_dict_inverse(circuit, items, opts: InverseOptions) -> GlobalInverse:
    n = circuit.n_qubits
    fused: dict[tuple[int, int, int], float] = {(0, 0, 0): 1.0}
    dropped = 0.0
    for layer_idx, channel in items:
        terms = _propagated_inverse_terms(circuit, layer_idx, channel, opts.boundary)
        new: dict[tuple[int, int, int], float] = {}
        for (x1, z1, m1), c1 in fused.items():
            for (x2, z2, m2), c2 in terms.items():
                key = (x1 ^ x2, z1 ^ z2, m1 ^ m2)
                new[key] = new.get(key, 0.0) + c1 * c2
        if opts.epsilon > 0:
            kept = {}
            for key, c in new.items():
                if abs(c) < opts.epsilon:
                    dropped += abs(c)
                else:
                    kept[key] = c
            new = kept
        fused = new
    if opts.xi_reduce:
        reduced: dict[tuple[int, int, int], float] = {}
        for (x, z, m), c in fused.items():
            key = (x, 0, m)
            reduced[key] = reduced.get(key, 0.0) + c
        fused = reduced
    xs, zs, masks, coefs = [], [], [], []
    for (x, z, m), c in fused.items():
        if c == 0.0:
            continue
        xs.append(x)
        zs.append(z)
        masks.append(m)
        coefs.append(c)
    coefs_arr = np.array(coefs)
    return GlobalInverse(
        n_qubits=n,
        n_angles=circuit.n_angles,
        gamma=float(np.abs(coefs_arr).sum()),
        boundary=opts.boundary,
        dropped_mass=dropped,
        trace_sum=float(coefs_arr.sum()),
        xs=xs,
        zs=zs,
        masks=masks,
        coefs=coefs_arr,
    )


def _build_spl_inverse(circuit, items, opts: InverseOptions) -> GlobalInverse:
    n = circuit.n_qubits
    terms: list[ProductTerm] = []
    for layer_idx, channel in items:
        if channel.expanded_factors:
            raise ChannelError("pre-expanded product channels are not fusable")
        for t in channel.product_terms:
            if opts.boundary == "start":
                moved, _ = propagate(t.pauli, circuit, layer_idx, 0)
            else:
                moved, _ = propagate_forward(t.pauli, circuit, layer_idx)
            terms.append(ProductTerm(w=t.w, pauli=moved, inverted=True))
    fused = SplChannel(n, tuple(terms))
    if opts.xi_reduce:
        fused = passive_reduction(xi_reduce_spl(fused))
    fused = merge_equal_terms(fused)
    fused = expand_guided(
        fused, opts.expansion_budget, opts.expansion_strategy
    )
    return GlobalInverse(
        n_qubits=n,
        n_angles=circuit.n_angles,
        gamma=gamma_spl(fused),
        boundary=opts.boundary,
        spl_form=fused,
    )


def propagate_measurement_errors(
    circuit: Circuit,
    readout: ReadoutModel,
    options: InverseOptions | None = None,
) -> GlobalInverse:
    """Fused inverse of the twirled measurement channels alone, propagated
    from the measurement boundary through the whole circuit."""
    from .noise import no_noise

    return build_global_inverse(
        circuit, no_noise(circuit), options=options, readout=readout
    )


# --------------------------------------------------------------------------
# Mitigated estimators
# --------------------------------------------------------------------------


def _estimate_value(
    state: StateVector,
    observable: ObservableSpec,
    shots: int,
    rng: np.random.Generator,
    readout: ReadoutModel | None,
) -> float:
    if readout is not None:
        bits = simulate.sample_bitstrings(state, shots, rng)
        bits = simulate.apply_readout_errors(
            bits, readout.epsilons, readout.etas, rng, twirl=True
        )
        return simulate.z_observable_from_bits(bits, observable)
    if shots and shots > 0:
        return simulate.sampled_expectation(state, observable, shots, rng)
    return simulate.expectation(state, observable)


def run_pec(
    circuit: Circuit,
    noise: CircuitNoise,
    observable: ObservableSpec,
    M: int,
    shots: int,
    rng: np.random.Generator,
    readout: ReadoutModel | None = None,
) -> MitigationEstimate:
    """Standard mitigation: per-layer local corrections."""
    samplers = []
    for idx in range(len(circuit.layers)):
        for ch in noise.channels_at(idx):
            samplers.append((idx, local_inverse_sampler(ch)))
    gamma = 1.0
    for _, s in samplers:
        gamma *= s.gamma
    readout_p = None
    if readout is not None:
        _, protocol = twirl_readout(readout)
        readout_p = protocol.p_x
        for p_x in readout_p:
            gamma *= 1.0 / (1.0 - 2.0 * p_x)
    end = len(circuit.layers)
    values = np.empty(M)
    for m in range(M):
        insertions: dict[int, list[PauliString]] = {}
        sign = 1
        for idx, sampler in samplers:
            p, s = sampler.draw(rng)
            sign *= s
            if p is not None:
                insertions.setdefault(idx, []).append(p)
        if readout_p is not None:
            for q, p_x in enumerate(readout_p):
                if p_x <= 0:
                    continue
                # inverse of the twirled X channel: X with odds p_x, sign -1
                if rng.random() < p_x:
                    sign = -sign
                    insertions.setdefault(end, []).append(
                        PauliString.single(circuit.n_qubits, q, "X")
                    )
        state = simulate.run_trajectory(
            circuit, noise, rng, insertions=insertions
        )
        values[m] = sign * _estimate_value(state, observable, shots, rng, readout)
    mean = gamma * float(values.mean())
    stderr = gamma * float(values.std(ddof=1) / math.sqrt(M)) if M > 1 else 0.0
    return MitigationEstimate(mean, stderr, gamma, M, shots)


def run_ppec(
    circuit: Circuit,
    noise: CircuitNoise,
    observable: ObservableSpec,
    M: int,
    shots: int,
    rng: np.random.Generator,
    options: InverseOptions | None = None,
    readout: ReadoutModel | None = None,
    global_inverse: GlobalInverse | None = None,
) -> MitigationEstimate:
    """Propagated mitigation: sample fused corrections at the boundary."""
    opts = options or InverseOptions()
    if global_inverse is None:
        global_inverse = build_global_inverse(
            circuit, noise, options=opts, readout=readout
        )
    gamma = global_inverse.gamma
    boundary_idx = 0 if global_inverse.boundary == "start" else len(circuit.layers)
    values = np.empty(M)
    for m in range(M):
        corr = global_inverse.sample(rng)
        insertions = {}
        if not corr.pauli.is_identity:
            insertions[boundary_idx] = [corr.pauli]
        state = simulate.run_trajectory(
            circuit,
            noise,
            rng,
            insertions=insertions,
            angle_mask=corr.flip_mask.bits,
        )
        values[m] = corr.sign * _estimate_value(
            state, observable, shots, rng, readout
        )
    mean = gamma * float(values.mean())
    stderr = gamma * float(values.std(ddof=1) / math.sqrt(M)) if M > 1 else 0.0
    return MitigationEstimate(mean, stderr, gamma, M, shots)


def mitigation_report(
    circuit: Circuit,
    noise: CircuitNoise,
    observable: ObservableSpec,
    M: int,
    shots: int,
    seed: int,
    options: InverseOptions | None = None,
    readout: ReadoutModel | None = None,
) -> dict:
    """One full mitigated run as a JSON-ready report.

    Keys: gamma_pec, gamma_ppec, gamma_ppec_xi, dropped_mass, estimate
    (mean/stderr of the boundary-reduced propagated run), M, shots, seed.
    """
    opts = options or InverseOptions()
    gi_plain = build_global_inverse(
        circuit, noise,
        options=InverseOptions(
            xi_reduce=False, epsilon=opts.epsilon,
            expansion_budget=opts.expansion_budget, boundary=opts.boundary,
        ),
        readout=readout,
    )
    gi_xi = build_global_inverse(
        circuit, noise,
        options=InverseOptions(
            xi_reduce=True, epsilon=opts.epsilon,
            expansion_budget=opts.expansion_budget, boundary=opts.boundary,
        ),
        readout=readout,
    )
    est = run_ppec(
        circuit, noise, observable, M, shots,
        np.random.default_rng(seed), readout=readout, global_inverse=gi_xi,
    )
    return {
        "gamma_pec": pec_total_gamma(circuit, noise, readout=readout),
        "gamma_ppec": gi_plain.gamma,
        "gamma_ppec_xi": gi_xi.gamma,
        "dropped_mass": gi_xi.dropped_mass,
        "estimate": {"mean": est.mean, "stderr": est.stderr},
        "M": M,
        "shots": shots,
        "seed": seed,
    }


# --------------------------------------------------------------------------
# Monte-Carlo estimate of the fused inverse
# --------------------------------------------------------------------------

_BIT2CODE = np.array([0, 3, 1, 2], dtype=np.int64)  # index 2x+z -> IXYZ code
_CODE2X = np.array([0, 1, 1, 0], dtype=np.int64)
_CODE2Z = np.array([0, 0, 1, 1], dtype=np.int64)


def _batch_conjugate(gate, xs: np.ndarray, zs: np.ndarray) -> None:
    """Vectorized lookup-table conjugation, in place."""
    if gate.kind in TABLES_1Q:
        q = gate.qubits[0]
        bit = np.int64(1) << q
        codes = _BIT2CODE[2 * ((xs >> q) & 1) + ((zs >> q) & 1)]
        table = np.asarray(TABLES_1Q[gate.kind], dtype=np.int64)
        out = table[codes]
        xs &= ~bit
        zs &= ~bit
        xs |= _CODE2X[out] << q
        zs |= _CODE2Z[out] << q
    else:
        qa, qb = gate.qubits
        bita, bitb = np.int64(1) << qa, np.int64(1) << qb
        ca = _BIT2CODE[2 * ((xs >> qa) & 1) + ((zs >> qa) & 1)]
        cb = _BIT2CODE[2 * ((xs >> qb) & 1) + ((zs >> qb) & 1)]
        table = np.asarray(TABLES_2Q[gate.kind], dtype=np.int64)
        out = table[4 * ca + cb]
        oa, ob = out >> 2, out & 3
        xs &= ~(bita | bitb)
        zs &= ~(bita | bitb)
        xs |= (_CODE2X[oa] << qa) | (_CODE2X[ob] << qb)
        zs |= (_CODE2Z[oa] << qa) | (_CODE2Z[ob] << qb)


class _BatchChannelSampler:
    """Vectorized draws from a local inverse for the Monte-Carlo chain."""

    def __init__(self, channel: Channel):
        if isinstance(channel, DensePauliChannel):
            inv = invert_dense(channel)
            paulis = list(inv.terms)
            coefs = np.array([inv.terms[p] for p in paulis])
            absc = np.abs(coefs)
            self.gamma = float(absc.sum())
            self.cum = np.cumsum(absc / absc.sum())
            self.xs = np.array([p.x for p in paulis], dtype=np.int64)
            self.zs = np.array([p.z for p in paulis], dtype=np.int64)
            self.signs = np.where(coefs >= 0, 1, -1).astype(np.int64)
            self.terms = None
        else:
            self.terms = [
                (t.w, np.int64(t.pauli.x), np.int64(t.pauli.z))
                for t in channel.product_terms
            ]
            self.gamma = 1.0
            for t in channel.product_terms:
                self.gamma *= 1.0 / (2.0 * t.w - 1.0)
            if channel.expanded_factors:
                raise ChannelError("expanded factors not supported in the chain")

    def draw(self, rng, xs, zs, signs) -> None:
        n = xs.shape[0]
        if self.terms is None:
            pick = np.searchsorted(self.cum, rng.random(n), side="right")
            pick = np.minimum(pick, len(self.cum) - 1)
            xs ^= self.xs[pick]
            zs ^= self.zs[pick]
            signs *= self.signs[pick]
        else:
            for w, px, pz in self.terms:
                fired = rng.random(n) < (1.0 - w)
                xs ^= np.where(fired, px, np.int64(0))
                zs ^= np.where(fired, pz, np.int64(0))
                signs *= np.where(fired, -1, 1)


def mcmc_global_estimate(
    circuit: Circuit,
    noise: CircuitNoise,
    n_samples: int,
    rng: np.random.Generator,
    batch_size: int = 100_000,
) -> McmcEstimate:
    """Estimate the fused inverse by sampling one correction per noisy layer,
    propagating the running product toward the start, reducing Y->X / Z->I at
    the boundary, and tallying signed occurrences.

    The signed-tally mass gives the interference ratio
    ``(paths - interfering) / paths``; multiplied by the product of local
    overheads it converges to the fused overhead.
    """
    if not circuit.is_clifford:
        raise CircuitError("the Monte-Carlo chain requires a Clifford circuit")
    if circuit.n_qubits > 62:
        raise CircuitError("the vectorized chain supports up to 62 qubits")
    per_layer_samplers = [
        [_BatchChannelSampler(ch) for ch in noise.channels_at(idx)]
        for idx in range(len(circuit.layers))
    ]
    gamma_local = 1.0
    for samplers in per_layer_samplers:
        for s in samplers:
            gamma_local *= s.gamma

    n = circuit.n_qubits
    signed = np.zeros(1 << n, dtype=np.float64)
    remaining = n_samples
    while remaining > 0:
        b = min(batch_size, remaining)
        remaining -= b
        xs = np.zeros(b, dtype=np.int64)
        zs = np.zeros(b, dtype=np.int64)
        signs = np.ones(b, dtype=np.int64)
        for idx in range(len(circuit.layers) - 1, -1, -1):
            for gate in reversed(circuit.layers[idx].gates):
                _batch_conjugate(gate, xs, zs)
            for sampler in per_layer_samplers[idx]:
                sampler.draw(rng, xs, zs, signs)
        # boundary reduction: z bits vanish, y turns into x
        signed += np.bincount(xs, weights=signs, minlength=1 << n)
    tallies = {
        PauliString(n, int(x), 0): int(round(signed[x]))
        for x in np.nonzero(signed)[0]
    }
    total_abs = float(np.abs(signed).sum())
    interfering = int(round((n_samples - total_abs) / 2))
    return McmcEstimate(
        n_samples=n_samples,
        tallies=tallies,
        interfering=interfering,
        gamma_ratio=total_abs / n_samples,
        gamma_local_product=gamma_local,
    )
