"""pmit: probabilistic error cancellation with Pauli error propagation.

Quasi-probability mitigation of Pauli noise in Clifford and low-magic
circuits: exact per-layer inverses, Heisenberg propagation of corrections to
a circuit boundary, fusion into one global inverse with interference-aware
overhead accounting, and a desk-scale trajectory simulator to verify
bias-free estimates.
"""

from .paulis import (
    PauliError,
    PauliString,
    all_paulis,
    commutes,
    lex_compare,
    multiply,
    weight,
    xi_reduce,
)
from .gates import (
    Circuit,
    CircuitError,
    Gate,
    Layer,
    SignFlipMask,
    circuit_from_dict,
    circuit_to_dict,
    conjugate_pauli,
    conjugate_through_rotation,
    load_circuit,
    propagate,
    save_circuit,
    table_self_check,
)
from .channels import (
    ChannelError,
    DensePauliChannel,
    NoiseModelSpec,
    NonInvertibleChannelError,
    ProductTerm,
    SplChannel,
    build_spl_model,
    depolarizing_channel,
    dump_channel,
    expand_guided,
    gamma_dense,
    gamma_spl,
    invert_dense,
    merge_equal_terms,
    multiply_dense,
    passive_reduction,
    pauli_fidelity,
    random_pauli_channel,
    truncate,
)
from .noise import (
    CircuitNoise,
    build_noise,
    gate_depolarizing_noise,
    gate_random_pauli_noise,
    no_noise,
    spl_noise,
)
from .sim import (
    CapacityError,
    DensityEvolution,
    ObservableSpec,
    StateVector,
    exact_density_evolve,
    expectation,
    magnetization_observable,
    observable_from_json,
    observable_to_json,
    run_trajectory,
    sampled_expectation,
)
from .circuits import (
    RoutedCircuit,
    build_graph_state_circuit,
    build_grouping_circuit,
    build_ising_trotter,
    graph_state_stabilizers,
    random_clifford_circuit,
    transpile_linear,
)
from .engine import (
    CorrectionSample,
    GlobalInverse,
    InverseOptions,
    McmcEstimate,
    MitigationEstimate,
    ReadoutModel,
    TwirlProtocol,
    build_global_inverse,
    mcmc_global_estimate,
    mitigation_report,
    pec_total_gamma,
    propagate_measurement_errors,
    run_pec,
    run_ppec,
    sample_local_correction,
    twirl_readout,
)

__version__ = "0.1.0"
