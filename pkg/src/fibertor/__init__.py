"""Exact torsion growth for mapping tori of surface and free-group automorphisms."""
from .errors import (ConvergenceError, DimensionError, DisconnectedCoverError, DomainError,
                     FibertorError, InvalidQuotientError, NotInvariantError,
                     NotUniversalTowerError, UnsupportedScaleError)
from .linalg import (IntMatrix, SNFResult, char_poly, cokernel, determinant, invariant_factors,
                     matrix_power, restricted_det, smith_normal_form)
from .intpoly import (IntPoly, MahlerResult, RootEnclosure, cyclotomic_poly,
                      is_cyclotomic_product, mahler_measure, resultant, root_enclosures,
                      spectral_radius)
from .group import Automorphism, FreeWord, SurfacePresentation, abelianization_matrix, apply, compose
from .covers import (CoverData, CoverSpec, LiftedAction, TorusQuotient, build_cover,
                     coinvariant_cover_spec, enumerate_lifts, fiber_component_count,
                     intersection_form, lift_automorphism)
from .alexander import (AlexanderMatrix, Character, LaurentPoly, alexander_polynomial,
                        evaluate_character, fox_alexander_matrix, torus_presentation)
from .tower import (Cyclotomic, GrowthBound, MappingTorus, NonCyclotomic, SearchResult,
                    TowerLevel, TowerReport, classify_monodromy, cyclic_tower,
                    growth_lower_bound, homology_cover_tower, mapping_torus_homology,
                    search_noncyclotomic_lift)

__version__ = "0.1.0"
