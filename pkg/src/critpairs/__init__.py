"""Isoperimetric invariants and critical-pair verification in finite abelian groups."""

__version__ = "0.1.0"

from .groups import (
    Group,
    Subgroup,
    QuotientMap,
    all_subgroups,
    coset_decomposition,
    element_order,
    make_group,
    parse_group,
    quotient,
    subgroup_generated,
)
from .subsets import (
    GroupSubset,
    LayerSequence,
    big_s_check,
    check_layer_descent,
    diffset,
    is_periodic,
    is_quasi_periodic,
    layer_sequence,
    negate,
    parse_subset,
    stabilizer,
    sumset,
    translate,
)
from .isoperimetry import (
    AtomSet,
    BudgetExceededError,
    KappaResult,
    NotSeparableError,
    atoms,
    check_atom_lemmas,
    fainting_bound_check,
    is_k_separable,
    kappa,
    kappa_bounded,
    kappa_oracle,
)
from .structure import (
    ProgressionCertificate,
    connected_components,
    find_progressions,
    find_quasi_progressions,
    is_sidon,
    weak_chowla,
)
from .verifiers import (
    STATEMENTS,
    VerifierReport,
    replay_report,
    reproduce_example_m5,
    verify_statement,
)
from .scans import (
    ScanCampaign,
    ScanSummary,
    abelian_groups_of_order,
    abelian_groups_up_to,
    canonical_subsets,
    parse_campaign,
    run_scan,
)
