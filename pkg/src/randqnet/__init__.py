"""Random directed networks: strong-connectivity probabilities and CNOT channel dynamics."""

from .connectivity import (
    ConnectivitySession,
    PcCurve,
    Prob,
    count_labeled_decompositions,
    enumerate_partitions,
    lower_bound_pc,
    pc_curve,
    prob_acyclic_interconnect,
    prob_connected_undirected,
    prob_disconnected,
    prob_disconnected_undirected,
    prob_strongly_connected,
)
from .digraph import (
    CostGuardError,
    DirectedGraph,
    McEstimate,
    SccDecomposition,
    estimate_pc_monte_carlo,
    exact_pc_bruteforce,
    is_strongly_connected,
    sample_digraph,
    strongly_connected_components,
    strongly_connected_counts,
    wilson_interval,
)
from .channels import (
    ChannelSpec,
    SignedPauli,
    asymptotic_channel,
    asymptotic_channel_exact,
    attractor_projector,
    averaged_channel_ptm,
    channel_ptm,
    cnot_conjugate,
    convergence_trace,
    evolve_state,
    hs_distance,
    index_to_word,
    pauli_coeffs,
    density_matrix,
    pauli_word_matrix,
    state_mixed,
    state_plus,
    state_zero,
    static_average_iterate,
    static_convergence_traces,
    word_to_index,
)

__version__ = "0.1.0"
