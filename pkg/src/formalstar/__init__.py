"""Exact workbench for graph-formality star products on R^d."""

from .exact import HSeries, Poly, render_function_series
from .polyvector import (PolyVec, gauge_act, hamiltonian, poisson_bracket, poisson_defect, schouten,
                         wedge)
from .polydiff import (PolyDiffOp, StarProduct, assoc_defect, gerstenhaber, hkr_inclusion, hochschild,
                       moyal)
from .coalgebra import CoalgElem, GradedBasis, coproduct, exp_grouplike, is_super_grouplike, log_grouplike
from .graphs import Graph, MissingWeightError, WeightTable, default_table, enumerate_graphs, graph_operator
from .formality import (FormalitySetup, check_deformed_bracket, check_gauge_intertwining,
                        check_hamiltonian_coderivation, check_tangent_identities, curvature, gauge_star, phi,
                        phi_inverse, psi, sharp_product, star_product, taylor_U)
from .parsing import ParseError, parse_expression, parse_poly

__version__ = "0.1.0"

__all__ = [
    "HSeries", "Poly", "render_function_series",
    "PolyVec", "gauge_act", "hamiltonian", "poisson_bracket", "poisson_defect", "schouten", "wedge",
    "PolyDiffOp", "StarProduct", "assoc_defect", "gerstenhaber", "hkr_inclusion", "hochschild", "moyal",
    "CoalgElem", "GradedBasis", "coproduct", "exp_grouplike", "is_super_grouplike", "log_grouplike",
    "Graph", "MissingWeightError", "WeightTable", "default_table", "enumerate_graphs", "graph_operator",
    "FormalitySetup", "check_deformed_bracket", "check_gauge_intertwining", "check_hamiltonian_coderivation",
    "check_tangent_identities", "curvature", "gauge_star", "phi", "phi_inverse", "psi", "sharp_product",
    "star_product", "taylor_U",
    "ParseError", "parse_expression", "parse_poly",
]
