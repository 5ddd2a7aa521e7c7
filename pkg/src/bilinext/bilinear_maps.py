"""Bounded bilinear maps ``X x Y -> Z`` stored as dense coefficient arrays."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._ascent import NonConvergenceError, OptimizerConfig, maximize_multilinear
from .normed_spaces import LinearMap, NormedSpace, same_space

__all__ = [
    "BilinearMap",
    "OperatorValuedMap",
    "OptimizerConfig",
    "bilinear_norm",
    "rank_one_bilinear",
    "curry",
    "uncurry",
]


@dataclass(frozen=True, eq=False)
class BilinearMap:
    """``phi(x, y)_k = sum_ij coeffs[k, i, j] x_i y_j``.

    ``X`` and ``Y`` may be :class:`~bilinext.normed_spaces.Subspace` objects,
    in which case ``x`` and ``y`` are subspace coordinates.
    """

    X: object
    Y: object
    Z: NormedSpace
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float, copy=True)
        if c.ndim == 2 and self.Z.dim == 1:
            c = c[None]
        if c.shape != (self.Z.dim, self.X.dim, self.Y.dim):
            raise ValueError(f"coefficients have shape {c.shape}, expected "
                             f"{(self.Z.dim, self.X.dim, self.Y.dim)}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def form(cls, X, Y, matrix, Z: NormedSpace | None = None) -> BilinearMap:
        """Scalar-valued map ``x^T matrix y``."""
        return cls(X, Y, Z or NormedSpace(1, 2.0), np.asarray(matrix, dtype=float)[None])

    @classmethod
    def zero(cls, X, Y, Z) -> BilinearMap:
        return cls(X, Y, Z, np.zeros((Z.dim, X.dim, Y.dim)))

    def __call__(self, x, y):
        return self.eval(x, y)

    def eval(self, x, y) -> np.ndarray:
        x = self.X.check(x)
        y = self.Y.check(y)
        return np.einsum("kij,...i,...j->...k", self.coeffs, x, y)

    def section_y(self, y) -> LinearMap:
        """The linear map ``x -> phi(x, y)``."""
        y = self.Y.check(y)
        return LinearMap(self.X, self.Z, self.coeffs @ y)

    def section_x(self, x) -> LinearMap:
        """The linear map ``y -> phi(x, y)``."""
        x = self.X.check(x)
        return LinearMap(self.Y, self.Z, np.einsum("kij,i->kj", self.coeffs, x))

    def norm(self, cfg: OptimizerConfig | None = None, method: str = "auto") -> float:
        return bilinear_norm(self, cfg, method)

    def __add__(self, other: BilinearMap) -> BilinearMap:
        if not (same_space(self.X, other.X) and same_space(self.Y, other.Y)
                and same_space(self.Z, other.Z)):
            raise ValueError("cannot add maps on different spaces")
        return BilinearMap(self.X, self.Y, self.Z, self.coeffs + other.coeffs)

    def __mul__(self, scalar: float) -> BilinearMap:
        return BilinearMap(self.X, self.Y, self.Z, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"X": self.X.to_dict(), "Y": self.Y.to_dict(), "Z": self.Z.to_dict(),
                "coeffs": self.coeffs.tolist()}


def _tensor_and_spaces(phi: BilinearMap):
    if phi.Z.dim == 1:
        # The dual ball of a line is [-1, 1]; sign is absorbed by x.
        return phi.coeffs[0], [phi.X, phi.Y]
    return phi.coeffs, [phi.Z.dual(), phi.X, phi.Y]


def bilinear_norm(phi: BilinearMap, cfg: OptimizerConfig | None = None,
                  method: str = "auto") -> float:
    """``sup ||phi(x, y)|| / (||x|| ||y||)``.

    Written as the trilinear form ``<h, phi(x, y)>`` over the dual ball of
    ``Z`` and the balls of ``X`` and ``Y``.  With ``method="ascent"`` the
    three blocks are updated in turn (each update is an exact linear
    maximisation) from ``cfg.restarts`` random starts; ``"auto"`` first
    tries the exact routes (vertex enumeration, singular values).
    """
    cfg = cfg or OptimizerConfig()
    tensor, spaces = _tensor_and_spaces(phi)
    return maximize_multilinear(tensor, spaces, cfg, method=method).value


def bilinear_argmax(phi: BilinearMap, cfg: OptimizerConfig | None = None,
                    method: str = "auto"):
    """Value and maximising ``(x, y)`` of the bilinear norm."""
    cfg = cfg or OptimizerConfig()
    tensor, spaces = _tensor_and_spaces(phi)
    res = maximize_multilinear(tensor, spaces, cfg, method=method)
    x, y = res.points[-2:]
    return res.value, x, y


def rank_one_bilinear(g: LinearMap, T: LinearMap) -> BilinearMap:
    """The map ``(u, v) -> g(v) T(u)`` on ``T.domain x g.domain``."""
    if g.codomain.dim != 1:
        raise ValueError("g must be a functional")
    if not np.any(g.matrix) or not np.any(T.matrix):
        raise ValueError("g and T must be nonzero")
    coeffs = np.einsum("ki,j->kij", T.matrix, g.matrix[0])
    return BilinearMap(T.domain, g.domain, T.codomain, coeffs)


@dataclass(frozen=True, eq=False)
class OperatorValuedMap:
    """A linear map from ``domain`` into the maps ``inner_domain -> codomain``.

    ``tensor[i]`` is the matrix of the image of the ``i``-th coordinate
    vector, so ``self(u) = sum_i u_i tensor[i]``.
    """

    domain: object
    inner_domain: object
    codomain: NormedSpace
    tensor: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.array(self.tensor, dtype=float, copy=True)
        if t.shape != (self.domain.dim, self.codomain.dim, self.inner_domain.dim):
            raise ValueError("tensor shape does not match the spaces")
        t.setflags(write=False)
        object.__setattr__(self, "tensor", t)

    @classmethod
    def from_images(cls, domain, images) -> OperatorValuedMap:
        """Build from the images (LinearMaps) of the domain's coordinate vectors."""
        images = list(images)
        if len(images) != domain.dim:
            raise ValueError("need one image per coordinate vector of the domain")
        inner, cod = images[0].domain, images[0].codomain
        for im in images[1:]:
            if not (same_space(im.domain, inner) and same_space(im.codomain, cod)):
                raise ValueError("all images must share domain and codomain")
        return cls(domain, inner, cod, np.array([im.matrix for im in images]))

    def __call__(self, u) -> LinearMap:
        u = self.domain.check(u)
        return LinearMap(self.inner_domain, self.codomain, np.tensordot(u, self.tensor, 1))

    def operator_norm(self, cfg: OptimizerConfig | None = None) -> float:
        """``sup_u ||self(u)|| / ||u||`` with the operator norm on the images.

        Outer problem over the unit ball of ``domain``: exact over its vertices
        when it is a polytope, otherwise subgradient ascent, each step solving
        the inner operator-norm problem to optimality and moving ``u`` to the
        support point of the resulting subgradient.
        """
        cfg = cfg or OptimizerConfig()
        X = self.domain
        inner_spaces = [self.codomain.dual(), self.inner_domain]
        if not np.any(self.tensor):
            return 0.0

        def inner(u, seed):
            mat = np.tensordot(u, self.tensor, 1)
            return maximize_multilinear(mat, inner_spaces, cfg.with_seed(seed))

        pts = X.extreme_points()
        if pts is not None:
            return max(inner(u, cfg.seed + i).value for i, u in enumerate(pts))
        rng = np.random.default_rng(cfg.seed)
        best, any_done = 0.0, False
        for r in range(cfg.restarts):
            seed = cfg.seed + 7919 * (r + 1)
            res = inner(X.support(rng.standard_normal(X.dim)), seed)
            val = res.value
            for it in range(cfg.max_iters):
                h, y = res.points
                grad = np.einsum("k,ikj,j->i", h, self.tensor, y)
                res = inner(X.support(grad), seed + it + 1)
                stalled = abs(res.value - val) <= cfg.tol * max(1.0, abs(res.value))
                val = max(val, res.value)
                if stalled:
                    any_done = True
                    break
            best = max(best, val)
        if not any_done:
            raise NonConvergenceError("nested ascent did not stagnate", best=best)
        return float(best)

    def to_dict(self) -> dict:
        return {"domain": self.domain.to_dict(), "inner_domain": self.inner_domain.to_dict(),
                "codomain": self.codomain.to_dict(), "tensor": self.tensor.tolist()}


def curry(phi: BilinearMap) -> OperatorValuedMap:
    """``u -> phi(u, .)``: the natural map from bilinear maps into ``B[X, B[Y, Z]]``."""
    return OperatorValuedMap(phi.X, phi.Y, phi.Z, np.transpose(phi.coeffs, (1, 0, 2)))


def uncurry(T: OperatorValuedMap) -> BilinearMap:
    """``(u, v) -> T(u)(v)``; inverse of :func:`curry`."""
    if not isinstance(T, OperatorValuedMap):
        raise TypeError("uncurry expects an OperatorValuedMap")
    return BilinearMap(T.domain, T.inner_domain, T.codomain, np.transpose(T.tensor, (1, 0, 2)))
