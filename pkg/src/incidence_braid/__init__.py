"""Exact verification of braided coalgebra automorphisms of incidence coalgebras."""

from .scalar import QQ, GF, Field, FieldError, Scalar, field_make
from .poset import (
    Interval,
    Poset,
    PosetError,
    antichain,
    chain,
    count_inclusion_pairs,
    inclusion_pairs,
    poset_build,
    reduced_inclusions,
)
from .coalgebra import CoalgebraBasis, coassociativity_check, counit, delta
from .braid import (
    CheckReport,
    LambdaTable,
    SetSolution,
    TableError,
    braid_defect_matrix,
    lbe,
    nondegeneracy_check,
    rbe,
    structural_check,
    verify_braid_full,
    verify_braid_reduced,
)
from .sts import lsq, r_squared_check, rsq, sts_up_to_height1_check
from .families import (
    BipartiteSpec,
    FamilyError,
    FamilyParams,
    bipartite_build,
    classify_search,
    family_membership,
    lambda_build,
    section4_equation_suite,
    shift_spec,
    sts_condition_check,
)

__version__ = "0.1.0"
