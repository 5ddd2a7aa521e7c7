"""Injective and projective norms of one matrix under different l^p norms.

The projective norm is bracketed by an explicit decomposition (upper
bound) and a bilinear form of norm one (lower bound); the report is
certified when the two meet.
"""
import numpy as np

from bilinext import NormedSpace, OptimizerConfig, TensorElement, projective_norm

C = np.array([[1.0, 2.0, 0.0], [-1.0, 0.5, 3.0], [0.0, 1.0, -1.0]])
cfg = OptimizerConfig(seed=0)
print(f"{'X':>5} {'Y':>5} {'injective':>10} {'upper':>10} {'lower':>10} certified")
for p, q in [(2, 2), (1, 1), (np.inf, np.inf), (1, np.inf), (2, 1), (3, 3)]:
    F = TensorElement.from_matrix(NormedSpace(3, p), NormedSpace(3, q), C)
    rep = projective_norm(F, cfg)
    print(f"{p:>5} {q:>5} {rep.injective:10.6f} {rep.projective_upper:10.6f} "
          f"{rep.projective_dual_lower:10.6f} {rep.certified}")
print(f"nuclear norm (l2 oracle): {np.linalg.svd(C, compute_uv=False).sum():.6f}")
