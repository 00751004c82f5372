"""Semi-tensor-product toolkit for Boolean networks and Boolean control networks.

Logical matrices are stored in index form (1-based), states are encoded with
True as the first basis vector and the leftmost variable most significant.
"""

from .candidates import ControlCandidateSets, SynthesisResult
from .combinatorics import brute_force_structure_count, count_structures, total_functional_maps, total_networks
from .decoupling import (
    DDVerdict,
    dd_output_equation_check,
    dd_output_feedback_synthesize,
    dd_synthesize,
    rank_condition_dd,
    stabilization_synthesize,
    verify_dd,
)
from .dot import export_dot
from .dynamics import (
    FeedbackLaw,
    apply_output_feedback,
    apply_state_feedback,
    attractors,
    closed_loop_network,
    closed_loop_power,
    simulate,
)
from .equivalence import EquivalenceQuery, check_equivalence, search_equivalence_feedback
from .errors import *  # noqa: F401,F403
from .faults import (
    dd_ifd_synthesize,
    ifd_synthesize,
    impossible_output_sets,
    observer_run,
    reflective_check,
    verify_fault_detection,
)
from .netfile import load_network, parse_network_file, save_network, write_network_file
from .network import BooleanControlNetwork, BooleanNetwork, compile_algebraic_form, parse_rules
from .reachability import (
    build_reachability_graph,
    decomposition_controllers,
    invariant_set_decomposition,
    reach_query,
)
from .stp import LogicalMatrix, delta, parse_delta, power_reducing_matrix, stp, stp_logical

__version__ = "0.1.0"
