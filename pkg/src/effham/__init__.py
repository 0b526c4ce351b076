"""Effective Hamiltonians of open quantum systems from the minimal-dissipation split."""
from .bath import (
    BathSpec,
    CoherentMean,
    CorrelationTable,
    DiscreteModes,
    Drude,
    OhmicExp,
    bath_from_dict,
    build_correlation_table,
    noise_and_response,
    ordered_cumulant,
    thermal_correlation,
    wick_moment,
)
from .perturbation import (
    Expansion,
    KSeries,
    SpinModel,
    k2_closed_form,
    k_order,
    k_order_symmetry_resolved,
    k_series,
    report_observables,
)
from .quadrature import QuadratureScheme
from .splitting import (
    GeneratorSplit,
    NotHTPError,
    effective_hamiltonian,
    effective_hamiltonian_pseudokraus,
    effective_hamiltonian_su,
    fidelity_weights,
    haar_mc_effective_hamiltonian,
    k_from_fidelity_weights,
    split,
)
from .superop import (
    OperatorBasis,
    check_htp,
    commutator_superop,
    dissipator_superop,
    lindblad_generator,
    make_basis,
    random_htp_generator,
)

__version__ = "0.1.0"
