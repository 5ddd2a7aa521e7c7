"""Tensor products of finite-dimensional normed spaces and their crossnorms.

An element of ``X (x) Y`` is identified with its ``X.dim x Y.dim``
coefficient matrix; the coordinate vector of the tensor product is that
matrix flattened row-major, so ``(i, j) -> i * Y.dim + j``.

The projective norm is the gauge of the convex hull of unit single tensors
``x (x) y``.  Two bounds are computed and compared.

* Upper bound: an explicit decomposition ``sum x_i (x) y_i`` of the element,
  scored by ``sum ||x_i|| ||y_i||``.  When one factor ball is a polytope the
  optimal decomposition over its vertices is a convex program; otherwise
  balanced alternating least-norm refits are used.
* Lower bound: a bilinear form ``A`` scored by ``<A, F> / ||A||`` with the
  form norm computed exactly.  Candidates are the dual of the polytope
  program, the form read off a stationary decomposition, and the product of
  the injective norming functionals.
"""
from __future__ import annotations

import warnings

from dataclasses import dataclass, field

import numpy as np

from ._ascent import OptimizerConfig, maximize_multilinear
from .bilinear_maps import BilinearMap
from .normed_spaces import LinearMap, NormedSpace, Subspace, same_space

__all__ = [
    "TensorElement",
    "CrossnormReport",
    "ProjectiveTensorSpace",
    "EmbeddingVerdict",
    "single_tensor",
    "injective_norm",
    "projective_norm_upper",
    "projective_norm_dual_lower",
    "projective_norm",
    "linearize",
    "delinearize",
    "embedded_projective_norms",
    "is_subspace_embedding",
    "CERTIFY_RTOL",
]

CERTIFY_RTOL = 1e-4


@dataclass(frozen=True, eq=False)
class TensorElement:
    """A finite sum ``sum_i x_i (x) y_i`` together with its coefficient matrix."""

    X: object
    Y: object
    terms: tuple = field(repr=False)
    coeff_matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        terms = []
        for x, y in self.terms:
            terms.append((self.X.check(x).copy(), self.Y.check(y).copy()))
        mat = np.zeros((self.X.dim, self.Y.dim))
        for x, y in terms:
            mat += np.outer(x, y)
        mat.setflags(write=False)
        object.__setattr__(self, "terms", tuple(terms))
        object.__setattr__(self, "coeff_matrix", mat)

    @classmethod
    def from_matrix(cls, X, Y, matrix) -> TensorElement:
        """Element with coefficient matrix ``matrix``, decomposed along rows."""
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (X.dim, Y.dim):
            raise ValueError("matrix shape does not match the factors")
        terms = []
        for i in range(X.dim):
            if np.any(matrix[i]):
                e = np.zeros(X.dim)
                e[i] = 1.0
                terms.append((e, matrix[i]))
        return cls(X, Y, tuple(terms))

    @property
    def shape(self):
        return self.coeff_matrix.shape

    @property
    def vector(self) -> np.ndarray:
        """Coordinates in the tensor product (row-major flattening)."""
        return self.coeff_matrix.ravel()

    def is_zero(self) -> bool:
        return not np.any(self.coeff_matrix)

    def __eq__(self, other):
        if not isinstance(other, TensorElement):
            return NotImplemented
        return (same_space(self.X, other.X) and same_space(self.Y, other.Y)
                and np.allclose(self.coeff_matrix, other.coeff_matrix, rtol=0, atol=1e-12))

    __hash__ = None

    def __add__(self, other: TensorElement) -> TensorElement:
        if not (same_space(self.X, other.X) and same_space(self.Y, other.Y)):
            raise ValueError("cannot add elements of different tensor products")
        return TensorElement(self.X, self.Y, self.terms + other.terms)

    def __mul__(self, scalar: float) -> TensorElement:
        return TensorElement(self.X, self.Y, tuple((float(scalar) * x, y) for x, y in self.terms))

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"X": self.X.to_dict(), "Y": self.Y.to_dict(),
                "terms": [{"x": x.tolist(), "y": y.tolist()} for x, y in self.terms]}


def single_tensor(X, Y, x, y) -> TensorElement:
    """The single tensor ``x (x) y``."""
    return TensorElement(X, Y, ((x, y),))


@dataclass
class CrossnormReport:
    injective: float
    projective_upper: float
    projective_dual_lower: float
    gap: float
    certified: bool
    restarts: int = 0
    seed: int = 0
    terms: int = 0
    # The decomposition attaining the upper bound, as (x, y) pairs.
    decomposition: list = field(default=None, repr=False)

    @property
    def value(self) -> float:
        """Best available value of the projective norm (the upper bound)."""
        return self.projective_upper

    @property
    def relative_gap(self) -> float:
        return self.gap / max(self.projective_upper, 1e-300) if self.projective_upper else 0.0

    def to_dict(self) -> dict:
        return {"injective": self.injective, "projective_upper": self.projective_upper,
                "projective_dual_lower": self.projective_dual_lower, "gap": self.gap,
                "relative_gap": self.relative_gap, "certified": self.certified,
                "optimizer": {"restarts": self.restarts, "seed": self.seed},
                "decomposition_terms": self.terms}


def injective_norm(F: TensorElement, cfg: OptimizerConfig | None = None,
                   method: str = "auto") -> float:
    """``sup |sum_i f(x_i) g(y_i)|`` over functionals of norm at most one.

    Equals ``sup f^T C g`` over the dual balls, found exactly for Euclidean
    or polytope factors and by alternating ascent otherwise.
    """
    cfg = cfg or OptimizerConfig()
    return maximize_multilinear(F.coeff_matrix, [F.X.dual(), F.Y.dual()], cfg, method).value


def _column_norm_bounds(E, p):
    """Variable ``t`` and constraints giving ``t_j >= ||E[:, j]||_p`` for every column."""
    import cvxpy as cp

    t = cp.Variable(E.shape[1])
    if p == 1.0:
        return t, [cp.sum(cp.abs(E), axis=0) <= t]
    if p == 2.0:
        return t, [cp.norm(E, 2, axis=0) <= t]
    if p == np.inf:
        return t, [cp.max(cp.abs(E), axis=0) <= t]
    # |e_i| <= r_i^(1/p) t^(1-1/p) with sum_i r_i = t is the p-norm epigraph.
    r = cp.Variable(E.shape)
    tt = cp.vstack([t] * E.shape[0])
    return t, [cp.PowCone3D(r, tt, E, 1.0 / p), cp.sum(r, axis=0) == t]


def _column_norms_expr(W, space):
    """Epigraph of ``space.norm`` applied to each column of the coordinate matrix ``W``."""
    if isinstance(space, Subspace):
        return _column_norm_bounds(space.basis @ W, space.p)
    return _column_norm_bounds(W, space.p)


def _column_dual_norms_at_most_one(E, space):
    """Constraints making every column of ``E`` a functional of dual norm at most one."""
    import cvxpy as cp

    if isinstance(space, Subspace):
        # Functionals on a subspace are restrictions of ambient ones of the same norm.
        amb = cp.Variable((space.ambient.dim, E.shape[1]))
        t, cons = _column_norm_bounds(amb, space.ambient.q)
        return cons + [space.basis.T @ amb == E, t <= 1]
    t, cons = _column_norm_bounds(E, space.q)
    return cons + [t <= 1]


def _polytope_side(X, Y):
    """Factor whose unit ball has the fewest enumerated vertices, or ``None``."""
    px, py = X.extreme_points(), Y.extreme_points()
    if px is None and py is None:
        return None
    if py is not None and (px is None or len(py) <= len(px)):
        return "Y"
    return "X"


def _solve(problem):
    import cvxpy as cp

    with warnings.catch_warnings():
        # Inaccurate solves are harmless: every result is re-verified.
        warnings.simplefilter("ignore", UserWarning)
        try:
            problem.solve(solver=cp.CLARABEL)
        except cp.SolverError:
            problem.solve(solver=cp.SCS, eps=1e-9)
    return problem.status in ("optimal", "optimal_inaccurate")


def _vertex_decomposition(C, X, Y):
    """Exact projective norm when one factor ball is a polytope.

    With ``v`` running over the vertices of the polytope factor, the unit
    ball of ``X (x)_pi Y`` is the hull of ``x (x) v``; the norm is the convex
    program ``min sum_v ||x_v||`` subject to ``sum_v x_v v^T = C``.
    """
    import cvxpy as cp

    side = _polytope_side(X, Y)
    if side == "X":
        terms = _vertex_decomposition(C.T, Y, X)
        return None if terms is None else [(x, y) for y, x in terms]
    V = Y.extreme_points()
    W = cp.Variable((X.dim, len(V)))
    t, cons = _column_norms_expr(W, X)
    problem = cp.Problem(cp.Minimize(cp.sum(t)), cons + [W @ V == C])
    if not _solve(problem):
        return None
    Wv = W.value
    # Remove solver slack so the decomposition reproduces C exactly.
    Wv = Wv + (C - Wv @ V) @ np.linalg.pinv(V)
    return [(Wv[:, j], V[j]) for j in range(len(V)) if np.any(np.abs(Wv[:, j]) > 1e-13)]


def _vertex_dual_form(C, X, Y):
    """Maximiser of ``<A, C>`` over forms with ``|x^T A v| <= 1`` on every vertex ``v``."""
    import cvxpy as cp

    side = _polytope_side(X, Y)
    if side == "X":
        A = _vertex_dual_form(C.T, Y, X)
        return None if A is None else A.T
    V = Y.extreme_points()
    A = cp.Variable(C.shape)
    cons = _column_dual_norms_at_most_one(A @ V.T, X)
    problem = cp.Problem(cp.Maximize(cp.sum(cp.multiply(A, C))), cons)
    if not _solve(problem):
        return None
    return A.value


def _atom_program(C, X, ys):
    """Best decomposition ``sum_j x_j (x) ys[j]`` with free ``x_j``, and its dual form.

    The ``ys`` are unit vectors of ``Y``.  Returns ``(value, xs, A)`` where
    ``A`` maximises ``<A, C>`` subject to ``||A y_j||_{X*} <= 1``.
    """
    import cvxpy as cp

    W = cp.Variable((X.dim, len(ys)))
    t, cons = _column_norms_expr(W, X)
    eq = W @ ys == C
    problem = cp.Problem(cp.Minimize(cp.sum(t)), cons + [eq])
    if not _solve(problem) or eq.dual_value is None:
        return None
    A = np.asarray(eq.dual_value)
    return problem.value, W.value, (A if np.sum(A * C) >= 0 else -A)


def _generated_atoms(C, X, Y, cfg, rng, rounds=40, rtol=1e-6):
    """Alternating column generation for the decomposition problem.

    Atoms are unit vectors of one factor, the partner vectors are free and
    found by :func:`_atom_program`.  After each solve the roles swap: the
    normalised free vectors of the solution, plus the directions where the
    dual form is largest, become the atoms of the other factor.  Returns
    the best exact decomposition and the best normalised form seen.
    """
    spaces = (X, Y)
    atoms = np.vstack([np.linalg.svd(C)[2], np.eye(Y.dim), rng.standard_normal((2, Y.dim))])
    atoms = atoms / Y.norm(atoms)[:, None]
    side = 1
    best_terms, upper = None, np.inf
    best_form, lower = None, 0.0
    for _ in range(rounds):
        free = spaces[1 - side]
        res = _atom_program(C if side == 1 else C.T, free, atoms)
        if res is None:
            break
        _, W, A = res
        M = C if side == 1 else C.T
        weight = np.abs(W).max(axis=0)
        used = weight > 1e-9 * weight.max()
        cap = 4 * C.size
        if used.sum() > cap:
            used[:] = False
            used[np.argsort(-weight)[:cap]] = True
        Wu, Au = W[:, used], atoms[used]
        # Remove solver slack so the decomposition reproduces C exactly.
        Wu = Wu + (M - Wu @ Au) @ np.linalg.pinv(Au)
        pairs = list(zip(Wu.T, Au))
        # Whatever the kept atoms cannot express is tiny; add it exactly.
        u, sv, vt = np.linalg.svd(M - Wu @ Au)
        pairs += [(sv[i] * u[:, i], vt[i]) for i in range(len(sv)) if sv[i] > 0]
        terms = pairs if side == 1 else [(a, w) for w, a in pairs]
        cost = _decomposition_cost(X, Y, terms)
        if cost < upper and _is_exact(C, terms):
            best_terms, upper = terms, cost
        form = A if side == 1 else A.T
        mx = maximize_multilinear(form, [X, Y], cfg)
        if mx.value > 0 and np.sum(form * C) / mx.value > lower:
            best_form, lower = form / mx.value, float(np.sum(form * C) / mx.value)
        if np.isfinite(upper) and upper - lower <= rtol * upper:
            break
        fresh = np.vstack([Wu.T, mx.candidate_points[1 - side][:4]])
        atoms = fresh / free.norm(fresh)[:, None]
        side = 1 - side
    return best_terms, best_form


def _decomposition_cost(X, Y, terms):
    return float(sum(X.norm(x) * Y.norm(y) for x, y in terms))


def _is_exact(C, terms):
    if not terms:
        return not np.any(C)
    recon = sum(np.outer(x, y) for x, y in terms)
    return np.allclose(recon, C, rtol=0, atol=1e-10 * max(1.0, np.abs(C).max()))


def _has_polytope(X, Y):
    return X.extreme_points() is not None or Y.extreme_points() is not None


def _needs_generation(X, Y):
    return not _has_polytope(X, Y) and not (X.hilbert and Y.hilbert)


def _balance(X, Y, xs, ys):
    """Rescale each term so that ``||x_i|| = ||y_i||``; the product is unchanged."""
    nx = X.norm(xs.T)
    ny = Y.norm(ys.T)
    s = np.ones_like(nx)
    ok = (nx > 0) & (ny > 0)
    s[ok] = np.sqrt(nx[ok] / ny[ok])
    return xs / s, ys * s


def _alternating_refit(C, X, Y, k, cfg, rng):
    """Alternating least-norm refits of a length-``k`` decomposition.

    Columns of ``xs`` (``m x k``) and ``ys`` (``n x k``) are the terms.  Given
    ``ys`` the x-block is the least-norm solution of ``xs ys^T = C`` (an
    exact projection onto the feasible set), then terms are rebalanced and
    the roles swap.  For Euclidean factors this decreases
    ``(||xs||_F^2 + ||ys||_F^2) / 2`` monotonically towards the projective norm.
    """
    ys = rng.standard_normal((Y.dim, k))
    xs = C @ np.linalg.pinv(ys.T)
    xs, ys = _balance(X, Y, xs, ys)
    cost = np.inf
    for _ in range(cfg.max_iters):
        xs = C @ np.linalg.pinv(ys.T)
        xs, ys = _balance(X, Y, xs, ys)
        ys = C.T @ np.linalg.pinv(xs.T)
        xs, ys = _balance(X, Y, xs, ys)
        new = float(np.sum(X.norm(xs.T) * Y.norm(ys.T)))
        if cost - new <= 1e-14 * new:
            cost = min(cost, new)
            break
        cost = new
    return [(xs[:, i], ys[:, i]) for i in range(k) if np.any(xs[:, i]) and np.any(ys[:, i])]


def _shorten(X, Y, terms, k):
    """Caratheodory reduction of a decomposition to at most ``k`` terms.

    Writing the terms as ``w_i a_i`` with unit single tensors ``a_i`` and
    ``w_i > 0``, any null combination of the ``a_i`` can be added to the
    weights without changing the sum; moving along it in the direction that
    does not increase ``sum w_i`` until a weight vanishes drops one term.
    Stops with fewer than ``k`` terms or once the atoms are independent.
    """
    units, weights = [], []
    for x, y in terms:
        nx, ny = float(X.norm(x)), float(Y.norm(y))
        if nx > 0 and ny > 0:
            units.append((x / nx, y / ny))
            weights.append(nx * ny)
    weights = np.array(weights)
    while len(units) > k:
        atoms = np.array([np.outer(x, y).ravel() for x, y in units]).T
        _, sv, vt = np.linalg.svd(atoms)
        if len(units) <= len(sv) and sv[-1] > 1e-12 * sv[0]:
            break
        d = vt[-1]
        if d.sum() > 0:
            d = -d
        neg = d < 0
        if not neg.any():
            d, neg = -d, d > 0
        step = np.min(weights[neg] / -d[neg])
        weights = weights + step * d
        keep = weights > 1e-14 * weights.max()
        units = [u for u, kp in zip(units, keep) if kp]
        weights = weights[keep]
    return [(w * x, y) for w, (x, y) in zip(weights, units)]


def _decompositions(C, X, Y, k, cfg, rng):
    found = []
    if _has_polytope(X, Y):
        terms = _vertex_decomposition(C, X, Y)
        if terms is not None:
            found.append(terms)
    if _needs_generation(X, Y):
        terms, _ = _generated_atoms(C, X, Y, cfg, rng)
        if terms is not None:
            found.append(terms)
    for _ in range(min(cfg.restarts, 2)):
        found.append(_alternating_refit(C, X, Y, k, cfg, rng))
    return [t for t in found if _is_exact(C, t)]


def projective_norm_upper(F: TensorElement, k: int | None = None,
                          cfg: OptimizerConfig | None = None, return_terms: bool = False,
                          hints=()):
    """Upper bound ``sum ||x_i|| ||y_i||`` from an explicit length-``<= k`` decomposition.

    Candidates come from alternating least-norm refits of a length-``k``
    decomposition and, when a factor ball is a polytope, from the optimal
    decomposition over its vertices; ``hints`` may add known decompositions
    (lists of ``(x, y)`` pairs).  Only decompositions that reproduce the
    coefficient matrix are accepted.  Longer decompositions are shortened
    by a Caratheodory reduction, which never increases the cost; with ``k``
    below ``X.dim * Y.dim`` that may fail, leaving the singular value
    decomposition as the fallback.
    """
    cfg = cfg or OptimizerConfig()
    C = F.coeff_matrix
    X, Y = F.X, F.Y
    rank = int(np.linalg.matrix_rank(C, tol=1e-10 * max(1.0, np.abs(C).max(initial=0.0))))
    if k is None:
        k = X.dim * Y.dim
    if k < rank:
        raise ValueError(f"no decomposition of length {k} exists (rank {rank})")
    if rank == 0:
        return (0.0, []) if return_terms else 0.0
    rng = np.random.default_rng(cfg.seed)
    candidates = []
    for terms in [list(h) for h in hints] + _decompositions(C, X, Y, k, cfg, rng):
        if len(terms) > k:
            terms = _shorten(X, Y, terms, k)
        candidates.append(_merge_parallel(terms))
    u, s, vt = np.linalg.svd(C)
    # Length-rank fallback so a valid bound always exists.
    candidates.append([(s[i] * u[:, i], vt[i]) for i in range(rank)])
    candidates = [t for t in candidates if len(t) <= k and _is_exact(C, t)]
    costs = [_decomposition_cost(X, Y, t) for t in candidates]
    # Among (numerically) optimal decompositions prefer the shortest.
    cutoff = min(costs) * (1 + 1e-9)
    value, _, best = min((c, len(t), i) for i, (c, t) in enumerate(zip(costs, candidates))
                         if c <= cutoff)
    best = candidates[best]
    return (value, best) if return_terms else value


def _direction(v):
    """Unit vector along ``v`` with its largest entry positive, and the scale."""
    scale = float(np.linalg.norm(v))
    d = v / scale
    if d[np.argmax(np.abs(d))] < 0:
        d, scale = -d, -scale
    return d, scale


def _merge_parallel(terms, tol=1e-9):
    """Drop zero terms and merge terms that are parallel in both slots.

    ``a x (x) y + b x (x) y`` costs ``|a| + |b|`` times ``||x|| ||y||`` but
    equals a single term of cost ``|a + b| ||x|| ||y||``, so merging never
    raises the cost.
    """
    merged = []
    for x, y in terms:
        if not (np.any(x) and np.any(y)):
            continue
        dx, ax = _direction(x)
        dy, ay = _direction(y)
        for item in merged:
            if (np.max(np.abs(item[0] - dx)) <= tol and np.max(np.abs(item[1] - dy)) <= tol):
                item[2] += ax * ay
                break
        else:
            merged.append([dx, dy, ax * ay])
    return [(c * dx, dy) for dx, dy, c in merged if c != 0.0]


def _stationary_form(X, Y, terms):
    """Form ``A`` satisfying the optimality conditions of a decomposition.

    At a minimiser of ``sum ||x_i|| ||y_i||`` the multiplier ``A`` of the
    constraint obeys ``A y_i = ||y_i|| f_i`` and ``A^T x_i = ||x_i|| g_i`` with
    ``f_i, g_i`` norming functionals of ``x_i, y_i``; solved in least squares.
    """
    m, n = X.dim, Y.dim
    rows, rhs = [], []
    for x, y in terms:
        nx, ny = float(X.norm(x)), float(Y.norm(y))
        if nx == 0 or ny == 0:
            continue
        f = X.dual().support(x)
        g = Y.dual().support(y)
        for r in range(m):
            row = np.zeros(m * n)
            row[r * n:(r + 1) * n] = y
            rows.append(row)
            rhs.append(ny * f[r])
        for c in range(n):
            row = np.zeros(m * n)
            row[c::n] = x
            rows.append(row)
            rhs.append(nx * g[c])
    if not rows:
        return None
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return sol.reshape(m, n)


def projective_norm_dual_lower(F: TensorElement, cfg: OptimizerConfig | None = None,
                               return_form: bool = False):
    """Lower bound ``|sum_i phi(x_i, y_i)|`` from a bilinear form with ``||phi|| <= 1``.

    Candidate forms ``A`` come from the dual of the vertex program (when a
    factor ball is a polytope), from the optimality conditions of a
    decomposition built from this routine's own seed, and from the product
    of the functionals attaining the injective norm.  Each candidate is
    divided by its bilinear form norm, which makes it feasible, so every
    reported value is a certified lower bound up to the accuracy of that
    norm.
    """
    cfg = cfg or OptimizerConfig()
    C = F.coeff_matrix
    X, Y = F.X, F.Y
    if not np.any(C):
        zero = np.zeros_like(C)
        return (0.0, zero) if return_form else 0.0
    rng = np.random.default_rng(cfg.seed)
    candidates = []
    if _has_polytope(X, Y):
        candidates.append(_vertex_dual_form(C, X, Y))
    if _needs_generation(X, Y):
        candidates.append(_generated_atoms(C, X, Y, cfg, rng)[1])
    terms = _alternating_refit(C, X, Y, X.dim * Y.dim, cfg, rng)
    candidates.append(_stationary_form(X, Y, terms))
    # Product of the norming functionals of the injective norm: value eps(F).
    inj = maximize_multilinear(C, [X.dual(), Y.dual()], cfg)
    candidates.append(np.outer(*inj.points))
    forms = [(A, maximize_multilinear(A, [X, Y], cfg).value)
             for A in candidates if A is not None and np.any(A)]
    best, best_form = 0.0, np.zeros_like(C)
    for A, nrm in forms:
        if nrm > 0 and np.sum(A * C) / nrm > best:
            best, best_form = float(np.sum(A * C) / nrm), A / nrm
    return (best, best_form) if return_form else best


def projective_norm(F: TensorElement, cfg: OptimizerConfig | None = None,
                    hints=()) -> CrossnormReport:
    """Both projective bounds plus the injective norm of ``F``.

    The report is certified when the bounds agree to ``CERTIFY_RTOL``.
    ``hints`` are passed on to :func:`projective_norm_upper`.
    """
    cfg = cfg or OptimizerConfig()
    inj = injective_norm(F, cfg)
    upper, terms = projective_norm_upper(F, cfg=cfg, return_terms=True, hints=hints)
    lower = projective_norm_dual_lower(F, cfg.spawn(1))
    gap = max(upper - lower, 0.0)
    certified = gap <= CERTIFY_RTOL * max(upper, 1e-300) or upper == 0.0
    return CrossnormReport(inj, upper, lower, gap, bool(certified),
                           cfg.restarts, cfg.seed, len(terms), terms)


@dataclass(frozen=True, eq=False)
class ProjectiveTensorSpace:
    """Coordinates of ``X (x) Y`` (row-major) normed by the projective norm."""

    X: object
    Y: object
    cfg: OptimizerConfig = field(default_factory=OptimizerConfig, repr=False)

    @property
    def factors(self):
        return self.X, self.Y

    @property
    def dim(self) -> int:
        return self.X.dim * self.Y.dim

    @property
    def hilbert(self) -> bool:
        return False

    def check(self, v, name="tensor coordinates"):
        v = np.asarray(v, dtype=float)
        if v.shape[-1:] != (self.dim,):
            raise ValueError(f"{name} has length {v.shape[-1:]}, expected {self.dim}")
        return v

    def element(self, v) -> TensorElement:
        v = self.check(v)
        return TensorElement.from_matrix(self.X, self.Y, v.reshape(self.X.dim, self.Y.dim))

    def norm(self, v):
        v = self.check(v)
        flat = v.reshape(-1, self.dim)
        out = np.array([projective_norm_upper(self.element(row), cfg=self.cfg) for row in flat])
        return out.reshape(v.shape[:-1])

    def dual_norm(self, g):
        """Norm of a functional: its sup over unit single tensors."""
        g = self.check(g, "functional")
        flat = g.reshape(-1, self.dim)
        out = np.array([maximize_multilinear(row.reshape(self.X.dim, self.Y.dim),
                                             [self.X, self.Y], self.cfg).value for row in flat])
        return out.reshape(g.shape[:-1])

    def support(self, g):
        g = self.check(g, "functional")
        flat = g.reshape(-1, self.dim)
        out = []
        for row in flat:
            res = maximize_multilinear(row.reshape(self.X.dim, self.Y.dim),
                                       [self.X, self.Y], self.cfg)
            out.append(np.outer(*res.points).ravel())
        return np.array(out).reshape(g.shape)

    def extreme_points(self):
        return None

    def same_as(self, other) -> bool:
        return (isinstance(other, ProjectiveTensorSpace) and same_space(self.X, other.X)
                and same_space(self.Y, other.Y))

    def to_dict(self) -> dict:
        return {"tensor": {"X": self.X.to_dict(), "Y": self.Y.to_dict(), "norm": "projective"}}


def linearize(phi: BilinearMap, cfg: OptimizerConfig | None = None) -> LinearMap:
    """The linear map ``Phi`` on ``X (x)_pi Y`` with ``Phi(x (x) y) = phi(x, y)``.

    ``cfg`` is kept by the domain and used when it computes norms.
    """
    space = ProjectiveTensorSpace(phi.X, phi.Y, cfg or OptimizerConfig())
    return LinearMap(space, phi.Z, phi.coeffs.reshape(phi.Z.dim, space.dim))


def delinearize(T: LinearMap) -> BilinearMap:
    """``(x, y) -> T(x (x) y)`` for a map defined on a projective tensor product."""
    if not isinstance(T.domain, ProjectiveTensorSpace):
        raise ValueError("map is not defined on a tensor product")
    X, Y = T.domain.factors
    return BilinearMap(X, Y, T.codomain, T.matrix.reshape(T.codomain.dim, X.dim, Y.dim))


def subspace_coordinates(F: TensorElement, M: Subspace, N: Subspace) -> TensorElement:
    """Re-express an element of ``X (x) Y`` supported in ``M (x) N`` in subspace coordinates."""
    if not (same_space(F.X, M.ambient) and same_space(F.Y, N.ambient)):
        raise ValueError("subspaces do not live in the factors of the element")
    try:
        terms = tuple((M.coords(x), N.coords(y)) for x, y in F.terms)
    except ValueError as exc:
        raise ValueError(f"element is not supported in M (x) N: {exc}") from None
    return TensorElement(M, N, terms)


def embedded_projective_norms(F: TensorElement, M: Subspace, N: Subspace,
                              cfg: OptimizerConfig | None = None,
                              share_decomposition: bool = True):
    """Projective norm of ``F`` computed in ``M (x) N`` and in ``X (x) Y``.

    ``F`` is given in ambient coordinates with every term in ``M x N``.
    Returns the pair of reports ``(subspace, ambient)``.  A decomposition in
    ``M (x) N`` is also one in ``X (x) Y`` with the same cost, so the optimal
    subspace decomposition is offered to the ambient computation and the
    ambient upper bound never exceeds the subspace one.  With
    ``share_decomposition=False`` the two computations are independent.
    """
    cfg = cfg or OptimizerConfig()
    inner = subspace_coordinates(F, M, N)
    sub = projective_norm(inner, cfg)
    hints = []
    if share_decomposition:
        hints.append([(M.embed(x), N.embed(y)) for x, y in sub.decomposition])
    return sub, projective_norm(F, cfg.spawn(2), hints=hints)


@dataclass
class EmbeddingVerdict:
    equal: bool
    worst_gap: float
    monotone: bool
    samples: int
    gaps: list = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {"equal": self.equal, "worst_gap": self.worst_gap, "monotone": self.monotone,
                "samples": self.samples, "gaps": list(self.gaps)}


def random_element_in(M: Subspace, N: Subspace, rng, terms: int | None = None) -> TensorElement:
    """Random element of ``M (x) N`` written in ambient coordinates."""
    terms = terms or min(M.k, N.k)
    cs = rng.standard_normal((terms, M.k))
    ds = rng.standard_normal((terms, N.k))
    return TensorElement(M.ambient, N.ambient,
                         tuple((M.embed(c), N.embed(d)) for c, d in zip(cs, ds)))


def is_subspace_embedding(M: Subspace, N: Subspace, samples: int = 10,
                          cfg: OptimizerConfig | None = None, tol: float = CERTIFY_RTOL,
                          seed: int = 0) -> EmbeddingVerdict:
    """Sampled test of whether ``M (x)_pi N`` sits isometrically in ``X (x)_pi Y``.

    Equality on every sample is necessary, not sufficient.  ``worst_gap`` is
    the largest relative excess of the subspace norm over the ambient norm.
    """
    cfg = cfg or OptimizerConfig()
    rng = np.random.default_rng(seed)
    gaps, monotone = [], True
    for s in range(samples):
        F = random_element_in(M, N, rng)
        sub, amb = embedded_projective_norms(F, M, N, cfg.spawn(s))
        scale = max(sub.value, 1e-300)
        gaps.append((sub.value - amb.value) / scale)
        if amb.value > sub.value + 1e-6 * max(1.0, sub.value):
            monotone = False
    worst = max(np.abs(gaps)) if gaps else 0.0
    return EmbeddingVerdict(bool(worst <= tol), float(worst), monotone, samples, gaps)
