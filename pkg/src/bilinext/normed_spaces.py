"""Finite-dimensional normed spaces, subspaces, linear maps and projections.

Every space object in this package answers the same small set of questions,
all vectorised along the last axis:

``norm(v)``
    the norm of ``v``;
``dual_norm(g)``
    ``sup <g, v>`` over the closed unit ball;
``support(g)``
    a unit-ball point attaining ``dual_norm(g)``;
``extreme_points()``
    a finite set of unit-ball points containing every extreme point up to
    sign, or ``None`` when the ball is not a (small) polytope;
``hilbert``
    whether coordinates are Euclidean, so that spectral methods apply.

Two concrete spaces exist: :class:`NormedSpace` (an l^p norm on coordinates)
and :class:`Subspace` (coordinates with respect to a Euclidean-orthonormal
basis, normed by the ambient l^p norm of the embedded vector).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.optimize

from ._ascent import NonConvergenceError, OptimizerConfig, maximize_multilinear

__all__ = [
    "NormedSpace",
    "Subspace",
    "LinearMap",
    "Projection",
    "OptimizerConfig",
    "NonConvergenceError",
    "vector_norm",
    "dual_norm",
    "operator_norm",
    "make_subspace",
    "orthogonal_projection",
    "projection_onto",
    "min_norm_projection",
    "same_space",
    "RANK_TOL",
    "IDEMPOTENCY_TOL",
]

RANK_TOL = 1e-10
IDEMPOTENCY_TOL = 1e-10
# Largest candidate set enumerated exactly for polytope unit balls.
VERTEX_LIMIT = 2048


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return np.inf
    if p == np.inf:
        return 1.0
    return p / (p - 1.0)


def lp_support(g: np.ndarray, p: float) -> np.ndarray:
    """Maximiser of ``<g, v>`` over the l^p unit ball, along the last axis.

    Ties are broken towards the lowest index; a zero functional maps to the
    first coordinate vector.
    """
    g = np.asarray(g, dtype=float)
    if p == 1:
        out = np.zeros_like(g)
        idx = np.argmax(np.abs(g), axis=-1)
        picked = np.take_along_axis(g, idx[..., None], axis=-1)
        np.put_along_axis(out, idx[..., None], np.where(picked < 0, -1.0, 1.0), axis=-1)
        return out
    if p == np.inf:
        return np.where(g < 0, -1.0, 1.0)
    q = conjugate_exponent(p)
    gq = np.linalg.norm(g, ord=q, axis=-1, keepdims=True)
    zero = gq[..., 0] == 0
    safe = np.where(gq == 0, 1.0, gq)
    if p == 2:
        out = g / safe
    else:
        out = np.sign(g) * (np.abs(g) / safe) ** (q - 1.0)
    if np.any(zero):
        out[zero] = 0.0
        out[zero, 0] = 1.0
    return out


def _parse_p(p) -> float:
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity", "oo"):
            return np.inf
        p = float(p)
    p = float(p)
    if not (p >= 1.0):
        raise ValueError(f"norm exponent must lie in [1, inf], got {p}")
    return p


@dataclass(frozen=True)
class NormedSpace:
    """Real coordinate space of dimension ``dim`` with the l^p norm."""

    dim: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", _parse_p(self.p))

    @property
    def q(self) -> float:
        return conjugate_exponent(self.p)

    @property
    def hilbert(self) -> bool:
        return self.p == 2

    def check(self, v, name="vector") -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1:] != (self.dim,):
            raise ValueError(f"{name} has length {v.shape[-1:]}, expected {self.dim}")
        return v

    def norm(self, v) -> np.ndarray:
        return np.linalg.norm(self.check(v), ord=self.p, axis=-1)

    def dual_norm(self, g) -> np.ndarray:
        return np.linalg.norm(self.check(g, "functional"), ord=self.q, axis=-1)

    def support(self, g) -> np.ndarray:
        return lp_support(self.check(g, "functional"), self.p)

    def dual(self) -> NormedSpace:
        return NormedSpace(self.dim, self.q)

    def extreme_points(self) -> np.ndarray | None:
        return self._extreme_points

    @cached_property
    def _extreme_points(self):
        if self.p == 1:
            return np.eye(self.dim)
        if self.p == np.inf and 2 ** (self.dim - 1) <= VERTEX_LIMIT:
            # Sign vectors with a leading +1; the ball is symmetric.
            tails = itertools.product((1.0, -1.0), repeat=self.dim - 1)
            return np.array([(1.0,) + t for t in tails])
        return None

    def basis_vector(self, i: int) -> np.ndarray:
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e

    def to_dict(self) -> dict:
        return {"dim": self.dim, "p": "inf" if self.p == np.inf else self.p}

    def __repr__(self):
        p = "inf" if self.p == np.inf else f"{self.p:g}"
        return f"NormedSpace(dim={self.dim}, p={p})"


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear manifold of ``ambient`` carrying the inherited norm.

    ``basis`` is ``ambient.dim x k`` with Euclidean-orthonormal columns.  When
    a subspace is used as a space in its own right, vectors are coordinate
    vectors ``c`` of length ``k`` and ``norm(c) = ambient.norm(basis @ c)``.
    """

    ambient: NormedSpace
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        basis = np.array(self.basis, dtype=float, copy=True)
        if basis.ndim != 2 or basis.shape[0] != self.ambient.dim or basis.shape[1] < 1:
            raise ValueError("basis must be an ambient.dim x k matrix with k >= 1")
        gram = basis.T @ basis
        if np.max(np.abs(gram - np.eye(basis.shape[1]))) > 1e-12:
            raise ValueError("subspace basis must be orthonormal")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    @property
    def dim(self) -> int:
        return self.k

    @property
    def p(self) -> float:
        return self.ambient.p

    @property
    def hilbert(self) -> bool:
        return self.ambient.hilbert

    @property
    def is_whole_space(self) -> bool:
        return self.k == self.ambient.dim

    def check(self, c, name="coordinate vector") -> np.ndarray:
        c = np.asarray(c, dtype=float)
        if c.shape[-1:] != (self.k,):
            raise ValueError(f"{name} has length {c.shape[-1:]}, expected {self.k}")
        return c

    def embed(self, c) -> np.ndarray:
        return self.check(c) @ self.basis.T

    def coords(self, v, tol: float = RANK_TOL) -> np.ndarray:
        """Coordinates of ambient vectors ``v`` that lie in the subspace."""
        v = self.ambient.check(v)
        c = v @ self.basis
        resid = np.max(np.abs(c @ self.basis.T - v), initial=0.0)
        if resid > tol * max(1.0, np.max(np.abs(v), initial=0.0)):
            raise ValueError(f"vector does not lie in the subspace (residual {resid:.3g})")
        return c

    def contains(self, v, tol: float = RANK_TOL) -> bool:
        try:
            self.coords(v, tol)
        except ValueError:
            return False
        return True

    @cached_property
    def orthogonal_complement(self) -> np.ndarray:
        """Orthonormal basis (columns) of the Euclidean complement."""
        q, _ = np.linalg.qr(self.basis, mode="complete")
        return q[:, self.k:]

    def norm(self, c) -> np.ndarray:
        return self.ambient.norm(self.embed(c))

    def dual_norm(self, g) -> np.ndarray:
        g = self.check(g, "functional")
        if self.hilbert:
            return np.linalg.norm(g, axis=-1)
        pts = self.extreme_points()
        if pts is not None:
            return np.max(np.abs(g @ pts.T), axis=-1)
        s = self.support(g)
        return np.sum(g * s, axis=-1)

    def support(self, g) -> np.ndarray:
        g = self.check(g, "functional")
        if self.hilbert:
            return lp_support(g, 2.0)
        pts = self.extreme_points()
        if pts is not None:
            vals = g @ pts.T
            idx = np.argmax(np.abs(vals), axis=-1)
            sign = np.where(np.take_along_axis(vals, idx[..., None], axis=-1) < 0, -1.0, 1.0)
            return pts[idx] * sign
        flat = g.reshape(-1, self.k)
        out = np.array([self._smooth_support(row) for row in flat])
        return out.reshape(g.shape)

    def _smooth_support(self, g: np.ndarray) -> np.ndarray:
        # sup over the section equals the distance in l^q from the lifted
        # functional to the annihilator; the minimiser's duality map lies in
        # the subspace and is the norming point.
        if not np.any(g):
            e = np.zeros(self.k)
            e[0] = 1.0
            return e / self.norm(e)
        a = self.basis @ g
        comp = self.orthogonal_complement
        q = self.ambient.q
        if comp.shape[1] == 0:
            w = a
        else:
            def fun(z):
                r = a + comp @ z
                val = np.linalg.norm(r, ord=q)
                grad = np.sign(r) * (np.abs(r) / val) ** (q - 1.0)
                return val, comp.T @ grad

            res = scipy.optimize.minimize(fun, np.zeros(comp.shape[1]), jac=True,
                                          method="BFGS", options={"gtol": 1e-13})
            w = a + comp @ res.x
        u = lp_support(w, self.p)  # point of the l^p ball norming w
        c = u @ self.basis
        n = self.norm(c)
        return c / n

    def dual(self) -> RestrictedDual:
        return RestrictedDual(self)

    def extreme_points(self) -> np.ndarray | None:
        return self._extreme_points

    @cached_property
    def _extreme_points(self):
        p, m, k, B = self.p, self.ambient.dim, self.k, self.basis
        if self.hilbert or p not in (1.0, np.inf):
            return None
        if self.is_whole_space:
            pts = self.ambient.extreme_points()
            return None if pts is None else pts @ B
        cands = []
        if p == np.inf:
            # Vertices of {c : |Bc| <= 1} have k independent active rows.
            if len(list(itertools.combinations(range(m), k))) * 2 ** (k - 1) > VERTEX_LIMIT * 8:
                return None
            for rows in itertools.combinations(range(m), k):
                sub = B[list(rows)]
                if np.linalg.matrix_rank(sub, tol=RANK_TOL) < k:
                    continue
                inv = np.linalg.inv(sub)
                for tail in itertools.product((1.0, -1.0), repeat=k - 1):
                    c = inv @ np.array((1.0,) + tail)
                    if np.max(np.abs(B @ c)) <= 1.0 + 1e-9:
                        cands.append(c)
        else:
            # Vertices of {c : ||Bc||_1 <= 1} vanish on k-1 independent rows.
            for rows in itertools.combinations(range(m), k - 1):
                sub = B[list(rows)]
                if k > 1 and np.linalg.matrix_rank(sub, tol=RANK_TOL) < k - 1:
                    continue
                if k == 1:
                    c = np.ones(1)
                else:
                    c = scipy.linalg.null_space(sub, rcond=RANK_TOL)
                    if c.shape[1] != 1:
                        continue
                    c = c[:, 0]
                cands.append(c / np.linalg.norm(B @ c, ord=1))
        if not cands:
            return None
        pts = np.array(cands)
        # Drop duplicates up to sign.
        lead = np.argmax(np.abs(pts) > 1e-12, axis=1)
        pts = pts * np.where(pts[np.arange(len(pts)), lead] < 0, -1.0, 1.0)[:, None]
        _, keep = np.unique(np.round(pts, 10), axis=0, return_index=True)
        return pts[np.sort(keep)]

    def to_dict(self) -> dict:
        return {"space": self.ambient.to_dict(), "spanning": self.basis.T.tolist()}

    def __repr__(self):
        return f"Subspace(ambient={self.ambient!r}, k={self.k})"


@dataclass(frozen=True, eq=False)
class RestrictedDual:
    """Dual of a subspace in its coordinates: restrictions of ambient functionals."""

    subspace: Subspace

    @property
    def dim(self) -> int:
        return self.subspace.k

    @property
    def hilbert(self) -> bool:
        return self.subspace.hilbert

    def check(self, f, name="functional"):
        return self.subspace.check(f, name)

    def norm(self, f):
        return self.subspace.dual_norm(f)

    def dual_norm(self, c):
        return self.subspace.norm(c)

    def support(self, c):
        sub = self.subspace
        u = sub.embed(c)
        return lp_support(u, sub.ambient.q) @ sub.basis

    def dual(self) -> Subspace:
        return self.subspace

    def extreme_points(self):
        pts = self.subspace.ambient.dual().extreme_points()
        return None if pts is None else pts @ self.subspace.basis


def same_space(a, b) -> bool:
    if a is b:
        return True
    if isinstance(a, NormedSpace) and isinstance(b, NormedSpace):
        return a == b
    if isinstance(a, Subspace) and isinstance(b, Subspace):
        return (a.ambient == b.ambient and a.k == b.k
                and np.allclose(a.basis, b.basis, atol=1e-12))
    if isinstance(a, RestrictedDual) and isinstance(b, RestrictedDual):
        return same_space(a.subspace, b.subspace)
    return getattr(a, "same_as", lambda other: False)(b)


def vector_norm(space, v) -> float:
    """Norm of ``v`` in ``space``."""
    return float(space.norm(v))


def dual_norm(space, f: LinearMap) -> float:
    """Norm of the functional ``f`` (a map into a one-dimensional space)."""
    if f.codomain.dim != 1:
        raise ValueError("a functional must have a one-dimensional codomain")
    if not same_space(f.domain, space):
        raise ValueError("functional is not defined on this space")
    return float(space.dual_norm(f.matrix[0]))


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A linear map between two spaces, stored as a ``codomain x domain`` matrix."""

    domain: object
    codomain: object
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float, copy=True)
        if mat.ndim == 1 and self.codomain.dim == 1:
            mat = mat[None, :]
        if mat.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(f"matrix shape {mat.shape} does not match "
                             f"({self.codomain.dim}, {self.domain.dim})")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def __call__(self, v):
        return self.domain.check(v) @ self.matrix.T

    def __matmul__(self, other: LinearMap) -> LinearMap:
        if not same_space(other.codomain, self.domain):
            raise ValueError("cannot compose maps with mismatched spaces")
        return LinearMap(other.domain, self.codomain, self.matrix @ other.matrix)

    def __mul__(self, scalar: float) -> LinearMap:
        return LinearMap(self.domain, self.codomain, self.matrix * float(scalar))

    __rmul__ = __mul__

    @classmethod
    def identity(cls, space) -> LinearMap:
        return cls(space, space, np.eye(space.dim))

    @classmethod
    def functional(cls, space, coefficients) -> LinearMap:
        return cls(space, NormedSpace(1, 2.0), np.atleast_2d(coefficients))

    def to_dict(self) -> dict:
        return {"domain": self.domain.to_dict(), "codomain": self.codomain.to_dict(),
                "matrix": self.matrix.tolist()}


def operator_norm(linear_map: LinearMap, cfg: OptimizerConfig | None = None,
                  method: str = "auto") -> float:
    """Operator norm ``sup ||A v|| / ||v||`` of a linear map.

    The supremum of ``<h, A v>`` over the codomain's dual ball and the
    domain's ball is found exactly where a closed form exists (Euclidean
    pairs via the largest singular value, polytope balls via vertex
    enumeration) and otherwise by alternating ascent with random restarts.
    ``method="ascent"`` forces the iterative route.

    Raises
    ------
    NonConvergenceError
        If no restart stagnates within ``cfg.max_iters`` sweeps.
    """
    cfg = cfg or OptimizerConfig()
    domain = linear_map.domain
    if hasattr(domain, "factors"):
        # Unit ball of a projective tensor product is the hull of unit single tensors.
        X, Y = domain.factors
        tensor = linear_map.matrix.reshape(linear_map.codomain.dim, X.dim, Y.dim)
        spaces = [linear_map.codomain.dual(), X, Y]
    else:
        tensor = linear_map.matrix
        spaces = [linear_map.codomain.dual(), domain]
    return maximize_multilinear(tensor, spaces, cfg, method=method).value


def make_subspace(ambient: NormedSpace, spanning) -> Subspace:
    """Orthonormalised span of ``spanning`` (a list of ambient vectors)."""
    vecs = np.atleast_2d(np.asarray(spanning, dtype=float))
    if vecs.size == 0:
        raise ValueError("spanning set is empty")
    vecs = ambient.check(vecs, "spanning vector")
    u, s, _ = np.linalg.svd(vecs.T, full_matrices=False)
    if s.size == 0 or s[0] <= RANK_TOL:
        raise ValueError("spanning set is zero; subspaces must be nonzero")
    rank = int(np.sum(s > RANK_TOL * max(1.0, s[0])))
    basis = u[:, :rank]
    # Fix signs so the largest entry of each column is positive.
    idx = np.argmax(np.abs(basis), axis=0)
    basis = basis * np.where(basis[idx, np.arange(rank)] < 0, -1.0, 1.0)
    # Re-orthonormalise to full precision.
    q, r = np.linalg.qr(basis)
    q = q * np.sign(np.diag(r))
    return Subspace(ambient, q)


@dataclass(frozen=True, eq=False)
class Projection:
    """An idempotent linear map with a designated range."""

    underlying: LinearMap
    range_subspace: Subspace

    def __post_init__(self):
        E = self.underlying.matrix
        if not (same_space(self.underlying.domain, self.underlying.codomain)
                and same_space(self.underlying.domain, self.range_subspace.ambient)):
            raise ValueError("projection must act on the ambient space of its range")
        if np.linalg.norm(E @ E - E) > IDEMPOTENCY_TOL:
            raise ValueError("matrix is not idempotent")
        B = self.range_subspace.basis
        if np.max(np.abs(E @ B - B)) > 1e-9:
            raise ValueError("projection does not fix its range")
        rank = np.linalg.matrix_rank(E, tol=1e-8)
        if rank != self.range_subspace.k:
            raise ValueError("projection range is larger than the given subspace")

    @property
    def matrix(self) -> np.ndarray:
        return self.underlying.matrix

    @property
    def space(self) -> NormedSpace:
        return self.range_subspace.ambient

    def __call__(self, v):
        return self.underlying(v)

    def kernel_basis(self) -> np.ndarray:
        return scipy.linalg.null_space(self.matrix, rcond=1e-10)

    def norm(self, cfg: OptimizerConfig | None = None) -> float:
        return operator_norm(self.underlying, cfg)

    def to_dict(self) -> dict:
        return {"range": self.range_subspace.to_dict(), "matrix": self.matrix.tolist()}


def _projection(sub: Subspace, matrix: np.ndarray) -> Projection:
    space = sub.ambient
    return Projection(LinearMap(space, space, matrix), sub)


def orthogonal_projection(sub: Subspace) -> Projection:
    """Orthogonal projection onto ``sub``; Euclidean ambient spaces only."""
    if not sub.hilbert:
        raise ValueError("orthogonal projections need p = 2; use min_norm_projection")
    return _projection(sub, sub.basis @ sub.basis.T)


def projection_onto(sub: Subspace, complement: Subspace) -> Projection:
    """The projection with range ``sub`` and kernel ``complement``."""
    if sub.ambient != complement.ambient:
        raise ValueError("subspaces live in different spaces")
    m = sub.ambient.dim
    if sub.k + complement.k != m:
        raise ValueError("dimensions of subspace and complement must add up")
    S = np.hstack([sub.basis, complement.basis])
    smin = np.linalg.svd(S, compute_uv=False)[-1]
    if smin <= RANK_TOL:
        raise ValueError("subspace and complement intersect nontrivially")
    D = np.zeros(m)
    D[: sub.k] = 1.0
    E = (S * D) @ np.linalg.inv(S)
    # Snap the fixed-range identity to full precision.
    E = E - (E @ sub.basis - sub.basis) @ sub.basis.T
    return _projection(sub, E)


def graph_projection(sub: Subspace, W) -> np.ndarray:
    """Projection onto ``sub`` whose kernel is the graph ``{n + B W n}``.

    With ``B`` the subspace basis and ``N`` its Euclidean complement, every
    complement of ``sub`` is ``span(N + B W)`` for a unique ``k x (m-k)``
    matrix ``W``; the matching projection is ``B (B^T - W N^T)``.
    """
    B = sub.basis
    N = sub.orthogonal_complement
    W = np.asarray(W, dtype=float).reshape(sub.k, N.shape[1])
    return B @ (B.T - W @ N.T)


def min_norm_projection(sub: Subspace, cfg: OptimizerConfig | None = None):
    """Search for a projection onto ``sub`` of least operator norm.

    The norm of ``B (B^T - W N^T)`` is convex in ``W``.  For p = 2 the
    orthogonal projection is optimal; for p in {1, inf} the induced norm is a
    maximum of column (row) absolute sums and the problem is a linear program;
    other exponents use a derivative-free local search started at ``W = 0``.

    Returns
    -------
    (Projection, float)
        The best projection found and its operator norm.
    """
    cfg = cfg or OptimizerConfig()
    m, k = sub.ambient.dim, sub.k
    if not 1 <= k < m:
        raise ValueError("need a proper nonzero subspace")
    if sub.hilbert:
        proj = orthogonal_projection(sub)
        return proj, operator_norm(proj.underlying, cfg)
    B, N = sub.basis, sub.orthogonal_complement
    nW = k * (m - k)
    if sub.p in (1.0, np.inf):
        W = _lp_min_norm_graph(B, N, sub.p)
    else:
        def objective(w):
            E = graph_projection(sub, w)
            return operator_norm(LinearMap(sub.ambient, sub.ambient, E), cfg)

        res = scipy.optimize.minimize(objective, np.zeros(nW), method="Powell",
                                      options={"xtol": 1e-8, "ftol": 1e-10,
                                               "maxiter": 200 * nW})
        W = res.x if res.fun <= objective(np.zeros(nW)) else np.zeros(nW)
    proj = _projection(sub, graph_projection(sub, W))
    return proj, operator_norm(proj.underlying, cfg)


def _lp_min_norm_graph(B, N, p):
    """Minimise the max column (p=1) or row (p=inf) abs-sum of B(B^T - W N^T)."""
    m, k = B.shape
    r = m - k
    nW = k * r
    E0 = B @ B.T
    # dE/dW[a, b] = -B[:, a] N[:, b]^T ; flattened linear map W -> E.
    lin = -np.einsum("ia,jb->ijab", B, N).reshape(m * m, nW)
    e0 = E0.ravel()
    # variables: W (nW), T (m*m) >= |E|, t
    nvar = nW + m * m + 1
    c = np.zeros(nvar)
    c[-1] = 1.0
    rows, rhs = [], []
    eye = np.eye(m * m)
    #  E - T <= 0  and  -E - T <= 0
    for sgn in (1.0, -1.0):
        A = np.hstack([sgn * lin, -eye, np.zeros((m * m, 1))])
        rows.append(A)
        rhs.append(-sgn * e0)
    # group sums of T <= t
    groups = np.zeros((m, m * m))
    for i in range(m):
        for j in range(m):
            g = j if p == 1 else i
            groups[g, i * m + j] = 1.0
    rows.append(np.hstack([np.zeros((m, nW)), groups, -np.ones((m, 1))]))
    rhs.append(np.zeros(m))
    bounds = [(None, None)] * nW + [(0, None)] * (m * m) + [(0, None)]
    res = scipy.optimize.linprog(c, A_ub=np.vstack(rows), b_ub=np.concatenate(rhs),
                                 bounds=bounds, method="highs")
    if res.status != 0:
        raise NonConvergenceError("linear program for the minimal projection failed",
                                  best=None)
    return res.x[:nW]
