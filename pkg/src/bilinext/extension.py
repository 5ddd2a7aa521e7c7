"""Extending bilinear maps from subspaces by composing with projections.

Given a bilinear map ``phi`` on ``M x N`` (in subspace coordinates) and
projections ``E`` onto ``M`` and ``P`` onto ``N``, the map

    phi_hat(x, y) = phi(coords_M(E x), coords_N(P y))

is a bilinear map on the ambient product that agrees with ``phi`` on
``M x N``.  Its norm lies between ``||phi||`` and ``||phi|| ||E|| ||P||``,
so norm-one projections give norm-preserving extensions.  In coefficients,
with orthonormal bases ``B_M`` and ``B_N``,

    phi_hat_k = E^T B_M phi_k B_N^T P.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._ascent import OptimizerConfig
from .bilinear_maps import BilinearMap, bilinear_norm
from .normed_spaces import (LinearMap, NormedSpace, Projection, Subspace, make_subspace,
                            orthogonal_projection, same_space)
from .tensor_norms import linearize

__all__ = [
    "ExtensionResult",
    "extend_bilinear",
    "extend_bilinear_hilbert",
    "assess_extension",
    "restrict_bilinear",
    "extension_coefficients",
    "norm_one_converse_counterexample",
    "extend_linear_on_tensor",
    "restrict_linear_on_tensor",
    "RESIDUAL_TOL",
    "CHAIN_TOL",
]

RESIDUAL_TOL = 1e-10
CHAIN_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ExtensionResult:
    """An extension together with the norms that bound it.

    ``seeds`` records the optimizer seed used for each of the four norms;
    they are drawn independently so that an underestimate of ``phi_norm``
    is not repeated in ``phi_hat_norm``.
    """

    phi_hat: BilinearMap
    phi_norm: float
    phi_hat_norm: float
    E_norm: float
    P_norm: float
    restriction_residual: float
    E: Projection = field(repr=False)
    P: Projection = field(repr=False)
    seeds: dict = field(default_factory=dict)
    note: str = ""

    @property
    def chain_upper(self) -> float:
        return self.phi_norm * self.E_norm * self.P_norm

    def chain_violation(self) -> float:
        """Largest amount by which ``phi <= phi_hat <= phi E P`` fails (0 if it holds)."""
        return max(0.0, self.phi_norm - self.phi_hat_norm,
                   self.phi_hat_norm - self.chain_upper)

    def chain_holds(self, tol: float = CHAIN_TOL) -> bool:
        return self.chain_violation() <= tol

    def restricts_correctly(self, tol: float = RESIDUAL_TOL) -> bool:
        return self.restriction_residual <= tol

    def to_dict(self) -> dict:
        out = {
            "phi_norm": self.phi_norm,
            "phi_hat_norm": self.phi_hat_norm,
            "E_norm": self.E_norm,
            "P_norm": self.P_norm,
            "chain_upper": self.chain_upper,
            "restriction_residual": self.restriction_residual,
            "chain_holds": self.chain_holds(),
            "seeds": dict(self.seeds),
            "phi_hat": self.phi_hat.to_dict(),
            "E": self.E.to_dict(),
            "P": self.P.to_dict(),
        }
        if self.note:
            out["note"] = self.note
        return out


def _check_domain(space, sub: Subspace, name: str):
    if space.dim != sub.k:
        raise ValueError(f"{name}: map is defined on dimension {space.dim}, "
                         f"subspace has dimension {sub.k}")
    if isinstance(space, Subspace) and not same_space(space, sub):
        raise ValueError(f"{name}: map is defined on a different subspace")


def _check_projection(proj: Projection, sub: Subspace, name: str):
    if not same_space(proj.range_subspace, sub):
        raise ValueError(f"{name} does not project onto the given subspace")


def restrict_bilinear(phi_hat: BilinearMap, M: Subspace, N: Subspace) -> BilinearMap:
    """The restriction of ``phi_hat`` to ``M x N`` in subspace coordinates."""
    if not (same_space(phi_hat.X, M.ambient) and same_space(phi_hat.Y, N.ambient)):
        raise ValueError("subspaces do not live in the domains of the map")
    coeffs = np.einsum("ia,kij,jb->kab", M.basis, phi_hat.coeffs, N.basis)
    return BilinearMap(M, N, phi_hat.Z, coeffs)


def extension_coefficients(phi: BilinearMap, M: Subspace, N: Subspace,
                           E: Projection, P: Projection) -> np.ndarray:
    """Coefficients of ``(x, y) -> phi(coords(E x), coords(P y))``."""
    left = M.basis.T @ E.matrix   # x -> coords_M(E x)
    right = N.basis.T @ P.matrix
    return np.einsum("ai,kab,bj->kij", left, phi.coeffs, right)


def assess_extension(phi: BilinearMap, phi_hat: BilinearMap, M: Subspace, N: Subspace,
                     E: Projection, P: Projection, cfg: OptimizerConfig | None = None,
                     note: str = "") -> ExtensionResult:
    """Norms and restriction residual of a candidate extension ``phi_hat`` of ``phi``.

    The residual is the largest coefficient of ``restrict(phi_hat) - phi``;
    by bilinearity this is agreement on the grid of basis pairs, which is
    agreement everywhere on ``M x N``.
    """
    cfg = cfg or OptimizerConfig()
    _check_domain(phi.X, M, "first slot")
    _check_domain(phi.Y, N, "second slot")
    _check_projection(E, M, "E")
    _check_projection(P, N, "P")
    restricted = restrict_bilinear(phi_hat, M, N)
    residual = float(np.max(np.abs(restricted.coeffs - phi.coeffs), initial=0.0))
    phi_on_sub = BilinearMap(M, N, phi.Z, phi.coeffs)
    names = ("phi", "phi_hat", "E", "P")
    seeds = {name: cfg.spawn(i + 1).seed for i, name in enumerate(names)}
    phi_norm = bilinear_norm(phi_on_sub, cfg.with_seed(seeds["phi"]))
    phi_hat_norm = bilinear_norm(phi_hat, cfg.with_seed(seeds["phi_hat"]))
    E_norm = E.norm(cfg.with_seed(seeds["E"]))
    P_norm = P.norm(cfg.with_seed(seeds["P"]))
    return ExtensionResult(phi_hat, float(phi_norm), float(phi_hat_norm), float(E_norm),
                           float(P_norm), residual, E, P, seeds, note)


def extend_bilinear(phi: BilinearMap, M: Subspace, N: Subspace, E: Projection,
                    P: Projection, cfg: OptimizerConfig | None = None) -> ExtensionResult:
    """Extend ``phi`` from ``M x N`` to the ambient product through ``E`` and ``P``.

    Parameters
    ----------
    phi : BilinearMap
        Map on ``M x N``; its slots take subspace coordinates.
    M, N : Subspace
        Subspaces of the ambient domains.
    E, P : Projection
        Projections with ranges ``M`` and ``N``.
    cfg : OptimizerConfig, optional
        Seeds and stopping rule for the four norm computations.

    Returns
    -------
    ExtensionResult
    """
    _check_domain(phi.X, M, "first slot")
    _check_domain(phi.Y, N, "second slot")
    _check_projection(E, M, "E")
    _check_projection(P, N, "P")
    coeffs = extension_coefficients(phi, M, N, E, P)
    phi_hat = BilinearMap(M.ambient, N.ambient, phi.Z, coeffs)
    return assess_extension(phi, phi_hat, M, N, E, P, cfg)


def extend_bilinear_hilbert(phi: BilinearMap, M: Subspace, N: Subspace,
                            cfg: OptimizerConfig | None = None,
                            tol: float = CHAIN_TOL) -> ExtensionResult:
    """Norm-preserving extension from subspaces of Euclidean spaces.

    Orthogonal projections have norm one, so the extension has the norm of
    ``phi``; a discrepancy above ``tol`` raises ``RuntimeError``.
    """
    if M.ambient.p != 2.0 or N.ambient.p != 2.0:
        raise ValueError("orthogonal projections are only available for p = 2")
    res = extend_bilinear(phi, M, N, orthogonal_projection(M), orthogonal_projection(N), cfg)
    if abs(res.phi_hat_norm - res.phi_norm) > tol:
        raise RuntimeError(f"extension norm {res.phi_hat_norm} differs from {res.phi_norm}")
    return res


def norm_one_converse_counterexample(cfg: OptimizerConfig | None = None) -> ExtensionResult:
    """A norm-preserving extension through a projection of norm sqrt(2).

    On the Euclidean plane, ``E(x1, x2) = (0, x1 + x2)`` projects onto the
    line ``M`` spanned by ``(0, 1)`` and has norm ``sqrt(2)``.  With
    ``f(x) = x2`` the form ``f(x) f(y)`` has norm one, and so does its
    restriction ``((0, a), (0, b)) -> a b`` to ``M x M``.  Equal norms
    therefore do not force norm-one projections.  The extension built from
    ``E`` itself, ``(x1 + x2)(y1 + y2)``, has norm 2 and is reported in
    ``note``.
    """
    cfg = cfg or OptimizerConfig()
    plane = NormedSpace(2, 2.0)
    M = make_subspace(plane, [[0.0, 1.0]])
    E = Projection(LinearMap(plane, plane, [[0.0, 0.0], [1.0, 1.0]]), M)
    f = np.array([0.0, 1.0])
    phi_hat = BilinearMap.form(plane, plane, np.outer(f, f))
    phi = restrict_bilinear(phi_hat, M, M)
    via_E = bilinear_norm(BilinearMap(plane, plane, phi.Z,
                                      extension_coefficients(phi, M, M, E, E)), cfg)
    note = (f"f(x)f(y) extends phi with equal norm although ||E|| = sqrt(2); "
            f"the extension phi(coords(Ex), coords(Ey)) has norm {via_E:.12g}")
    return assess_extension(phi, phi_hat, M, M, E, E, cfg, note=note)


def _tensor_basis(M: Subspace, N: Subspace) -> np.ndarray:
    """Matrix sending ``M (x) N`` coordinates to ``X (x) Y`` coordinates (row-major)."""
    return np.kron(M.basis, N.basis)


def extend_linear_on_tensor(T: LinearMap, M: Subspace, N: Subspace, E: Projection,
                            P: Projection, cfg: OptimizerConfig | None = None) -> LinearMap:
    """Extend a linear map on ``M (x)_pi N`` to ``X (x)_pi Y``.

    ``T`` acts on row-major coordinates of ``M (x) N``.  It is turned into
    the bilinear map ``(u, v) -> T(u (x) v)``, extended through ``E`` and
    ``P`` and linearised again.
    """
    if T.domain.dim != M.k * N.k:
        raise ValueError(f"map acts on dimension {T.domain.dim}, expected {M.k * N.k}")
    phi = BilinearMap(M, N, T.codomain, T.matrix.reshape(T.codomain.dim, M.k, N.k))
    _check_projection(E, M, "E")
    _check_projection(P, N, "P")
    coeffs = extension_coefficients(phi, M, N, E, P)
    return linearize(BilinearMap(M.ambient, N.ambient, T.codomain, coeffs), cfg)


def restrict_linear_on_tensor(T_ext: LinearMap, M: Subspace, N: Subspace) -> np.ndarray:
    """Matrix of ``T_ext`` restricted to ``M (x) N`` in subspace coordinates."""
    return T_ext.matrix @ _tensor_basis(M, N)

