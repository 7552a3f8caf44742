"""Two-projection analysis of Hilbert modules over sampled commutative bases.

Pairs of projection fields over an interval grid or a finite point set are
examined fibre by fibre: intersections, Friedrichs angles, alternating
projections and the closed-range conditions that tie them together.
"""
__version__ = "0.1.0"

from .errors import (ConcordError, DiagnosticsError, InputError, NotAProjectionError,
                     UnsupportedError)
from .linalg import DEFAULT_TOL, ToleranceConfig
from .fields import BaseSpace, ClosedForm, MatrixField, VectorSection, refine
from .pair import (ModulePair, ProjectionField, fiber_intersection, fiber_sum_projection,
                   intersection_rank_profile, validate)
from .corpus import (CORPUS, constant_angle_pair, corpus_pair, equal_pair, random_pair,
                     universal_pair)
from .alternating import (AlternatingWord, check_power_identity, check_sandwich,
                          convergence_report, iterate_section, word_field)
from .angles import (angle_profile, concordance_verdict, global_angle, harmonious, local_angle,
                     local_angles, semicontinuity_scan, symmetry_check)
from .equivalence import assert_equivalence, evaluate_conditions
from .analysis import AnalysisBundle, analyze

__all__ = [
    "__version__", "ConcordError", "DiagnosticsError", "InputError", "NotAProjectionError",
    "UnsupportedError", "DEFAULT_TOL", "ToleranceConfig", "BaseSpace", "ClosedForm",
    "MatrixField", "VectorSection", "refine", "ModulePair", "ProjectionField",
    "fiber_intersection", "fiber_sum_projection", "intersection_rank_profile", "validate",
    "CORPUS", "constant_angle_pair", "corpus_pair", "equal_pair", "random_pair",
    "universal_pair", "AlternatingWord", "check_power_identity", "check_sandwich",
    "convergence_report", "iterate_section", "word_field", "angle_profile",
    "concordance_verdict", "global_angle", "harmonious", "local_angle", "local_angles",
    "semicontinuity_scan", "symmetry_check", "assert_equivalence", "evaluate_conditions",
    "AnalysisBundle", "analyze",
]
