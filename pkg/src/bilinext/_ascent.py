"""Maximisation of multilinear forms over products of unit balls.

All norm computations in the package reduce to

    sup  T(v_1, ..., v_K)   over   ||v_k|| <= 1 in space k,

with ``T`` a dense K-way array.  An operator norm ``||A||`` is the case
``K = 2`` with the codomain's dual ball in the first slot, a bilinear norm
is ``K = 3``.  The supremum of a convex function over a polytope is attained
at a vertex, so whenever one slot has an enumerable vertex set the problem
drops one order exactly; two Euclidean slots are solved by the singular value
decomposition.  Everything else goes to block-coordinate ascent, which is
monotone because each block update is an exact linear maximisation over a
ball.
"""
from __future__ import annotations

import string
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = ["OptimizerConfig", "NonConvergenceError", "Maximum", "maximize_multilinear"]

# Largest number of stacked sub-problems handled in one vectorised call.
_CHUNK = 200_000


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for the restarted ascent; ``seed`` fixes every random start."""

    restarts: int = 32
    tol: float = 1e-9
    max_iters: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def with_seed(self, seed: int) -> OptimizerConfig:
        return replace(self, seed=int(seed))

    def spawn(self, index: int) -> OptimizerConfig:
        """Child config whose seed is derived from ``(seed, index)``."""
        ss = np.random.SeedSequence([self.seed & 0xFFFFFFFF, int(index)])
        return replace(self, seed=int(ss.generate_state(1)[0]))


class NonConvergenceError(RuntimeError):
    """Raised when no restart of an ascent stagnates; carries the best value."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass
class Maximum:
    value: float
    points: list
    method: str
    # per-candidate values, sorted descending, with matching points
    candidate_values: np.ndarray = field(repr=False, default=None)
    candidate_points: list = field(repr=False, default=None)
    converged_restarts: int = 0


def _contract(tensor, vecs, skip=None):
    """Contract a batch of K-way tensors with batched vectors, leaving ``skip`` open.

    ``tensor`` has shape ``(d_1, ..., d_K)`` or ``(R, d_1, ..., d_K)`` and
    ``vecs[k]`` has shape ``(R, d_k)``.
    """
    K = len(vecs)
    letters = string.ascii_lowercase[1:K + 1]
    t_sub = ("a" if tensor.ndim == K + 1 else "") + letters
    ops = [tensor]
    subs = [t_sub]
    for k in range(K):
        if k == skip:
            continue
        ops.append(vecs[k])
        subs.append("a" + letters[k])
    out = "a" + (letters[skip] if skip is not None else "")
    return np.einsum(",".join(subs) + "->" + out, *ops, optimize=True)


def _exact(tensors, spaces):
    """Exact maximum for a stack of tensors, or ``None`` when no closed route exists.

    Returns ``(values, points)`` with ``values`` of shape ``(R,)`` and
    ``points[k]`` of shape ``(R, d_k)``.
    """
    K = len(spaces)
    R = tensors.shape[0]
    if K == 1:
        sp = spaces[0]
        return np.asarray(sp.dual_norm(tensors), dtype=float), [sp.support(tensors)]
    if K == 2 and spaces[0].hilbert and spaces[1].hilbert:
        u, s, vt = np.linalg.svd(tensors)
        return s[:, 0], [u[:, :, 0], vt[:, 0, :]]
    best = None
    for k, sp in enumerate(spaces):
        pts = sp.extreme_points()
        if pts is not None and (best is None or len(pts) < best[1]):
            best = (k, len(pts), pts)
    if best is None:
        return None
    k, n_pts, pts = best
    # Contract slot k with every vertex: (R, P, remaining dims).
    moved = np.moveaxis(tensors, k + 1, -1)
    reduced = moved @ pts.T
    reduced = np.moveaxis(reduced, -1, 1)
    rest = spaces[:k] + spaces[k + 1:]
    flat = reduced.reshape((R * n_pts,) + reduced.shape[2:])
    pieces = []
    for start in range(0, flat.shape[0], _CHUNK):
        sub = _exact(flat[start:start + _CHUNK], rest)
        if sub is None:
            return None
        pieces.append(sub)
    vals = np.concatenate([p[0] for p in pieces]).reshape(R, n_pts)
    rest_pts = [np.concatenate([p[1][j] for p in pieces]).reshape(R, n_pts, -1)
                for j in range(len(rest))]
    idx = np.argmax(vals, axis=1)
    rows = np.arange(R)
    points = [rp[rows, idx] for rp in rest_pts]
    points.insert(k, pts[idx])
    return vals[rows, idx], points


def _exact_candidates(tensor, spaces):
    """Like ``_exact`` for one tensor but keeping a value per candidate."""
    K = len(spaces)
    if K == 2 and spaces[0].hilbert and spaces[1].hilbert:
        u, s, vt = np.linalg.svd(tensor)
        return s, [u.T[: len(s)], vt[: len(s)]]
    best = None
    for k, sp in enumerate(spaces):
        pts = sp.extreme_points()
        if pts is not None and (best is None or len(pts) < best[1]):
            best = (k, len(pts), pts)
    if best is None:
        return None
    k, n_pts, pts = best
    reduced = np.moveaxis(np.moveaxis(tensor, k, -1) @ pts.T, -1, 0)
    rest = spaces[:k] + spaces[k + 1:]
    sub = _exact(reduced, rest)
    if sub is None:
        return None
    vals, rest_pts = sub
    order = np.argsort(-vals, kind="stable")
    points = [rp[order] for rp in rest_pts]
    points.insert(k, pts[order])
    return vals[order], points


def _ascent(tensor, spaces, cfg, rng):
    K = len(spaces)
    R = cfg.restarts
    vecs = [sp.support(rng.standard_normal((R, sp.dim))) for sp in spaces]
    vals = _contract(tensor, vecs)
    done = np.zeros(R, dtype=bool)
    for _ in range(cfg.max_iters):
        for k, sp in enumerate(spaces):
            grad = _contract(tensor, vecs, skip=k)
            vecs[k] = sp.support(grad)
        new = _contract(tensor, vecs)
        done = np.abs(new - vals) <= cfg.tol * np.maximum(1.0, np.abs(new))
        vals = new
        if done.all():
            break
    return vals, vecs, done


def maximize_multilinear(tensor, spaces, cfg: OptimizerConfig, method: str = "auto") -> Maximum:
    """Maximise the multilinear form ``tensor`` over the unit balls of ``spaces``.

    ``method`` is ``"auto"`` (exact route when available, else ascent),
    ``"exact"`` (fail if no exact route) or ``"ascent"``.
    """
    tensor = np.asarray(tensor, dtype=float)
    if tensor.ndim != len(spaces):
        raise ValueError("tensor order does not match the number of spaces")
    for ax, sp in enumerate(spaces):
        if tensor.shape[ax] != sp.dim:
            raise ValueError(f"slot {ax} has size {tensor.shape[ax]}, space has dim {sp.dim}")
    if not np.any(tensor):
        points = [sp.support(np.zeros(sp.dim)) for sp in spaces]
        return Maximum(0.0, points, "zero", np.zeros(1), [p[None] for p in points], 1)
    if method in ("auto", "exact"):
        if len(spaces) == 1:
            res = _exact(tensor[None], spaces)
        else:
            res = _exact_candidates(tensor, spaces)
        if res is not None:
            vals, pts = res
            return Maximum(float(vals[0]), [p[0] for p in pts], "exact", vals, pts, 1)
        if method == "exact":
            raise ValueError("no exact method for this combination of spaces")
    elif method != "ascent":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(cfg.seed)
    vals, vecs, done = _ascent(tensor, spaces, cfg, rng)
    order = np.argsort(-vals, kind="stable")
    best = order[0]
    if not done.any():
        raise NonConvergenceError(
            f"ascent did not stagnate within {cfg.max_iters} sweeps", best=float(vals[best]))
    return Maximum(float(vals[best]), [v[best] for v in vecs], "ascent",
                   vals[order], [v[order] for v in vecs], int(done.sum()))
