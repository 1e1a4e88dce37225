"""Countably Markov maps on graphs: transition matrices, entropy and slope models."""
from .families import ExampleOne, golden_mean, interval_map, tent
from .graph import (
    CylinderWord,
    ExplicitMarkovMap,
    GraphModel,
    MarkovMap,
    PointCoord,
    mixing_check,
    refinement,
    transition_matrix,
    validate,
)
from .horseshoe import horseshoe_sequence, horseshoe_witness, periodic_growth_report
from .slope import (
    ConstantSlopeModel,
    SubEigenvector,
    build_constant_slope_model,
    check_subeigenvector,
    evaluate_model,
    lipschitz_report,
    perron_vector,
    vj_subeigenvector,
)
from .symbolic import (
    arc_measure_n,
    delta,
    delta_identities_check,
    itinerary,
    psi_cylinder,
    rho_distance,
)
from .transition import (
    ExplicitMatrix,
    FiniteMatrix,
    RuleMatrix,
    full_shift,
    generating_fn,
    gurevich_entropy,
    power_entry,
    spectral_radius,
    truncation,
    vere_jones_classify,
)

__version__ = "0.1.0"
