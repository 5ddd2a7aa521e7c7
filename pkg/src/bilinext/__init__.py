"""Bounded bilinear maps on finite-dimensional l^p spaces.

Norms of linear and bilinear maps, injective and projective tensor norms,
and extension of bilinear maps from subspaces through projections.
"""
from ._ascent import NonConvergenceError, OptimizerConfig, maximize_multilinear
from .bilinear_maps import (BilinearMap, OperatorValuedMap, bilinear_argmax, bilinear_norm,
                            curry, rank_one_bilinear, uncurry)
from .extension import (ExtensionResult, assess_extension, extend_bilinear,
                        extend_bilinear_hilbert, extend_linear_on_tensor,
                        norm_one_converse_counterexample, restrict_bilinear,
                        restrict_linear_on_tensor)
from .normed_spaces import (LinearMap, NormedSpace, Projection, Subspace, graph_projection,
                            make_subspace, min_norm_projection, operator_norm,
                            orthogonal_projection, projection_onto)
from .tensor_norms import (CrossnormReport, ProjectiveTensorSpace, TensorElement, delinearize,
                           embedded_projective_norms, injective_norm, is_subspace_embedding,
                           linearize, projective_norm, projective_norm_dual_lower,
                           projective_norm_upper, single_tensor)

__version__ = "0.1.0"

__all__ = [
    "BilinearMap", "CrossnormReport", "ExtensionResult", "LinearMap", "NonConvergenceError",
    "NormedSpace", "OperatorValuedMap", "OptimizerConfig", "Projection", "ProjectiveTensorSpace",
    "Subspace", "TensorElement", "assess_extension", "bilinear_argmax", "bilinear_norm", "curry",
    "delinearize", "embedded_projective_norms", "extend_bilinear", "extend_bilinear_hilbert",
    "extend_linear_on_tensor", "graph_projection", "injective_norm", "is_subspace_embedding",
    "linearize", "make_subspace", "maximize_multilinear", "min_norm_projection",
    "norm_one_converse_counterexample", "operator_norm", "orthogonal_projection",
    "projection_onto", "projective_norm", "projective_norm_dual_lower", "projective_norm_upper",
    "rank_one_bilinear", "restrict_bilinear", "restrict_linear_on_tensor", "single_tensor",
    "uncurry",
]
