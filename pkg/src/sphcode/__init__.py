"""Spherical codes: search, high-precision refinement, exact certification.

The package finds good spherical codes (point sets on the unit sphere
maximizing the minimal pairwise distance) by annealed inverse-power-law
energy minimization, refines candidates to hundreds of decimal digits by
Newton equalization of the contact graph, recovers the exact algebraic
numbers behind the coordinates via lattice-based integer-relation
detection, and certifies existence through exact characteristic-polynomial
sign tests on the reconstructed Gram matrix.
"""

from .algebraic import (ExactGramFailure, FieldPolynomial, IntPolynomial,
                        RelationResult, exact_gram, express_in_field,
                        find_integer_relation, minimal_polynomial)
from .analyze import (EdgeSpectrum, Layers, OrientationMatrix,
                      VertexFingerprint, antipodal_pairs, build_report,
                      edge_spectrum, layer_decomposition,
                      relative_orientation, vertex_classes)
from .catalogue import (CatalogueRow, ComparisonReport, compare,
                        load_reference, reference_row, render_table)
from .certify import (Certificate, certify_pipeline, char_poly,
                      check_conditions, coefficient_sign, field_arithmetic)
from .core import (Code, GramMatrix, InvalidCodeError, cos_dist_convert,
                   gram, max_cosine, min_distance, pairwise_sqdist,
                   read_code_file, write_code_file)
from .energy_search import (AnnealSchedule, DegenerateConfigurationError,
                            EnergyParams, NcgOptions, SearchConfig, anneal,
                            energy, energy_gradient, log_energy,
                            multi_start_search, ncg_minimize, polish,
                            random_code)
from .fields import ExactGram, FieldElement, NumberField
from .lll import lll_reduce
from .refine import (ContactGraph, InconsistentRattlerError, NotRigidError,
                     PrecisionCode, RigidityPartition, classify,
                     contact_graph, newton_polish, place_rattlers,
                     precision_max_cosine, precision_min_distance,
                     read_precision_file, refine, write_precision_file)

__all__ = [
    "AnnealSchedule", "CatalogueRow", "Certificate", "Code",
    "ComparisonReport", "ContactGraph", "DegenerateConfigurationError",
    "EdgeSpectrum", "EnergyParams", "ExactGram", "ExactGramFailure",
    "FieldElement", "FieldPolynomial", "GramMatrix",
    "InconsistentRattlerError", "IntPolynomial", "InvalidCodeError",
    "Layers", "NcgOptions", "NotRigidError", "NumberField",
    "OrientationMatrix", "PrecisionCode", "RelationResult",
    "RigidityPartition", "SearchConfig", "VertexFingerprint", "anneal",
    "antipodal_pairs", "build_report", "certify_pipeline", "char_poly",
    "check_conditions", "classify", "coefficient_sign", "compare",
    "contact_graph", "cos_dist_convert", "edge_spectrum", "energy",
    "energy_gradient", "exact_gram", "express_in_field", "field_arithmetic",
    "find_integer_relation", "gram", "layer_decomposition", "lll_reduce",
    "load_reference", "log_energy", "max_cosine", "min_distance",
    "minimal_polynomial", "multi_start_search", "ncg_minimize",
    "newton_polish", "pairwise_sqdist", "place_rattlers", "polish",
    "precision_max_cosine", "precision_min_distance", "random_code",
    "read_code_file", "read_precision_file", "reference_row", "refine",
    "relative_orientation", "render_table", "vertex_classes",
    "write_code_file", "write_precision_file",
]

__version__ = "0.1.0"
