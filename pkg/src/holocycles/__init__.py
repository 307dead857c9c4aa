"""Countable families of homologically independent complex limit cycles.

Subpackages follow the pipeline: :mod:`core` (fields, local models,
configuration), :mod:`transport` (leaf lifts and holonomy germs),
:mod:`chart` (linear chart geometry), :mod:`forge` (cycle families),
:mod:`certify` (independence criteria), :mod:`projective` (behaviour at
infinity) and :mod:`cli`.
"""
__version__ = "0.1.0"

from .core import (DEFAULT_CONFIG, CrossSection, LeafwisePath, LocalLinearModel, NumericConfig,
                   PolynomialVectorField, is_complex_hyperbolic, linear_field, singular_points)
from .errors import *  # noqa: F401,F403
from .transport import (AffineGerm, GermMap, LiftedGerm, LinearGerm, MoebiusGerm, compose,
                        holonomy_germ, lift_path)
from .chart import (certify_section_bound, certify_univalence, choose_kappa, normalize_entry_path,
                    shrink_section, spiral_point, spirals_intersect)
from .forge import (assemble_representative, build_Mn, certify_disjoint_family, find_fixed_point,
                    forge_family, min_contracting_index, multiplier, select_subsequence)
from .certify import (brute_force_dependency, certify_integrals, certify_multipliers,
                      cycle_integral)
from .projective import broken_connection_check, count_tangencies, infinity_singularities
