"""Dirac operators of commuting operator tuples at desk scale."""
from .exterior import (
    CliffordFrame,
    MultiIndex,
    build_frame,
    car_residuals,
    clifford_R,
    complexify,
    creation_sign,
    gauge_unitary,
    hodge_intertwiner,
)
from .dirac import (
    CommutingTuple,
    DiracPair,
    assemble_dirac,
    axiom_check,
    coboundary,
    duality_transport,
    extract_coboundary,
    homology_boundary,
    reconstruct_tuple,
    translated_dirac,
)
from .spectral import (
    betti_numbers,
    clifford_scan,
    euler_number,
    fredholm_report,
    is_taylor_invertible,
    joint_eigenvalue_candidates,
    numerical_kernel,
    solve_linear,
    taylor_spectrum,
)
from .graded import (
    GradedTupleSpec,
    BettiTable,
    defect_rank,
    dshift_quotient_spec,
    euler_additivity_check,
    euler_characteristic_example,
    fock_gram,
    free_module_spec,
    graded_koszul_betti,
    stabilized_index,
)

__version__ = "0.1.0"
