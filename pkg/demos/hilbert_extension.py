"""Extend a random bilinear map from subspaces of Euclidean spaces.

Orthogonal projections have norm one, so the extension keeps the norm.
An oblique projection onto the same subspace gives another extension
that agrees on M x N but is larger elsewhere.
"""
import numpy as np

from bilinext import (BilinearMap, LinearMap, NormedSpace, OptimizerConfig, Projection,
                      extend_bilinear, extend_bilinear_hilbert, graph_projection, make_subspace)

rng = np.random.default_rng(3)
cfg = OptimizerConfig(seed=3)
X, Y, Z = NormedSpace(5, 2), NormedSpace(4, 2), NormedSpace(2, 2)
M = make_subspace(X, rng.standard_normal((2, 5)))
N = make_subspace(Y, rng.standard_normal((3, 4)))
phi = BilinearMap(M, N, Z, rng.standard_normal((2, M.k, N.k)))

res = extend_bilinear_hilbert(phi, M, N, cfg)
print(f"orthogonal: ||phi|| = {res.phi_norm:.10f}  ||phi_hat|| = {res.phi_hat_norm:.10f}")

E = Projection(LinearMap(X, X, graph_projection(M, rng.standard_normal((2, 3)))), M)
P = Projection(LinearMap(Y, Y, graph_projection(N, rng.standard_normal((3, 1)))), N)
res = extend_bilinear(phi, M, N, E, P, cfg)
print(f"oblique:    ||E|| = {res.E_norm:.4f}  ||P|| = {res.P_norm:.4f}")
print(f"            {res.phi_norm:.4f} <= {res.phi_hat_norm:.4f} <= {res.chain_upper:.4f}"
      f"  (residual on M x N: {res.restriction_residual:.1e})")
