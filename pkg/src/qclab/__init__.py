"""qclab: a desk-scale numerical laboratory for quasiconformal maps,
holomorphic motions, laminations, and laminar currents in the bidisk."""

from .beltrami import (BeltramiField, MollifierSpec, QCMap, dilatation_at,
                       mollify, p_max, principal_solution)
from .currents import (LaminarCurrent, TestForm, WeightedCurrent,
                       closedness_residual, directedness_residual, mass, pair,
                       radon_nikodym, refine_subdivide)
from .errors import (ContradictionWitnessError, DegeneratePointError,
                     DegenerateTransversalError, DomainError, DominationError,
                     ExprEvalError, ExprSyntaxError, NumericalError,
                     QclabError, ValidationError)
from .expr import check_leaf_holomorphy, evaluate, parse, unparse
from .field_ops import (ComplexField, DiskRegion, GridSpec, beurling_transform,
                        cauchy_transform, disk_indicator, lp_norm)
from .lamination import (Lamination, LeafFunction, c1_extend, directed_form,
                         extend_constant_along_leaves, straighten, w1p_norm)
from .motion import (FormulaMotion, HolomorphicMotion, SampledMotion,
                     beltrami_of_holonomy, check_disjointness,
                     check_harnack_hoelder, check_schwarz, fiber_inverse,
                     holonomy)
from .approximation import (MollifiedLamination, StraightenedFunction,
                            approximate, localize, mollified_lamination,
                            projection_trace, transversal_dilatation, w1p_error)

__version__ = "0.1.0"
