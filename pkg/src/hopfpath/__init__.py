"""Exact branched and geometric rough paths over labelled forests.

Labelled rooted trees and forests carry the cut coproduct; words over tree
letters carry shuffle and deconcatenation.  The morphism `psi` encodes every
branched rough path as a geometric one over an extended alphabet, `encode`
realizes that on sampled data with an exact certificate, and the `rde`
solvers reproduce one another across the encoding, including the left-point
vs interpolated correction terms.  The `hopfpath` console script exposes all
of it; see the module docstrings for the individual layers.
"""

from .conversion import (
    ConversionError,
    ConversionResult,
    SimplifiedDriver,
    base_path_of,
    certify,
    encode,
    extend_alphabet,
    simplify_n2,
)
from .expr import ParseError, parse_h, parse_tensor, print_h, print_tensor
from .hopf import (
    HElem,
    PairElem,
    antipode,
    convolve,
    coproduct,
    counit,
    exp_star,
    graft_product,
    is_group_like,
    is_primitive,
    lie_bracket,
    log_star,
    pair,
    product,
    reduced_coproduct,
    star_inverse,
)
from .morphisms import (
    MorphismTable,
    iota,
    iota_elem,
    phi_g,
    phi_g_adjoint,
    psi,
    psi_adjoint,
    verify_hopf_morphism,
)
from .rde import (
    ButcherTable,
    ControlledPath,
    LglResult,
    Poly,
    PolyVectorField,
    Trajectory,
    apply_derivative,
    butcher,
    butcher_h,
    check_lgl,
    compose_controlled,
    consistency_report,
    constant_controlled,
    convert_rde,
    integrate_controlled,
    parse_poly,
    path_controlled,
    print_poly,
    solution_controlled,
    solve_branched,
    solve_geometric,
    solve_simplified,
    sym_correction_fields,
)
from .roughpath import (
    FLOAT,
    RATIONAL,
    BranchedRoughPath,
    GeometricRoughPath,
    Grid,
    SampledPath,
    canonical_lift,
    coarsen,
    embed_geometric,
    gamma_to_level,
    geometricity_report,
    ibp_defect,
    ito_lift,
    roughpath_from_json,
    roughpath_to_json,
    validate,
)
from .tensor import (
    TensorElem,
    Word,
    WordPairElem,
    concat,
    deconcat,
    enumerate_words,
    pair_tensor,
    shuffle,
    tensor_exp,
    tensor_log,
    word_of_labels,
)
from .trees import (
    Forest,
    Tree,
    chain,
    enumerate_forests,
    enumerate_trees,
    forests_of_grade,
    graft,
    leaf,
    symmetry_factor,
    tree_factorial,
    trees_of_grade,
)

__version__ = "0.1.0"
