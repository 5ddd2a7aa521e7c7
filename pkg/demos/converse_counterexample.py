"""Equal norms do not force a norm-one projection.

E(x1, x2) = (0, x1 + x2) projects the Euclidean plane onto the line
M = span{(0, 1)} and has norm sqrt(2).  The form f(x) f(y) with f(x) = x2
extends its own restriction to M x M with the same norm, so an extension
of equal norm can exist even though the projection at hand has norm > 1.
"""
from bilinext import OptimizerConfig, norm_one_converse_counterexample

res = norm_one_converse_counterexample(OptimizerConfig(seed=0))
print(f"||E||       = {res.E_norm:.12f}")
print(f"||phi||     = {res.phi_norm:.12f}")
print(f"||phi_hat|| = {res.phi_hat_norm:.12f}")
print(f"restriction residual = {res.restriction_residual:.1e}")
print(res.note)
