"""Seeded randomized verification suites.

Each suite draws ``trials`` random instances, computes the quantities a
structural identity or inequality relates, and records every violation
together with the instance (as a JSON descriptor that ``bilinext compute``
accepts) and the seed that produced it.

Trial ``t`` of a suite with seed ``s`` uses ``SeedSequence([s, t])``, so a
trial's outcome depends only on ``(s, t)`` and not on execution order.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._ascent import NonConvergenceError, OptimizerConfig
from .bilinear_maps import BilinearMap, bilinear_norm, curry
from .extension import (extend_bilinear, extend_linear_on_tensor, norm_one_converse_counterexample,
                        restrict_bilinear, restrict_linear_on_tensor)
from .normed_spaces import (LinearMap, NormedSpace, Projection, graph_projection, make_subspace,
                            min_norm_projection, operator_norm, orthogonal_projection)
from .tensor_norms import (ProjectiveTensorSpace, TensorElement, embedded_projective_norms,
                           injective_norm, linearize, projective_norm, projective_norm_upper,
                           random_element_in, single_tensor)

__all__ = ["SUITES", "SUITE_SUMMARIES", "SCHEMA_VERSION", "SuiteSpec", "SuiteReport", "UsageError", "run_suite"]

SCHEMA_VERSION = "bilinext-suite/1"
MAX_DIM = 8


class UsageError(ValueError):
    """A malformed suite specification."""


@dataclass(frozen=True)
class _Suite:
    run: object
    tolerances: dict
    p_values: tuple
    trials: int
    dims: int
    min_dim: int = 1
    fixed: bool = False  # the instance is fixed, so a single trial is run


@dataclass(frozen=True)
class SuiteSpec:
    """What to run: suite id, trial count, dimension bound, exponents, seed, tolerances.

    ``dims`` bounds every random ambient dimension; ``tolerances`` overrides
    entries of the suite's default tolerance table.
    """

    suite_id: str
    trials: int | None = None
    dims: int | None = None
    p_values: tuple | None = None
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    restarts: int = 32

    def resolved(self) -> SuiteSpec:
        """Fill defaults from the suite table and validate."""
        if self.suite_id not in SUITES:
            raise UsageError(f"unknown suite {self.suite_id!r}; "
                             f"choose from {', '.join(sorted(SUITES))}")
        suite = SUITES[self.suite_id]
        trials = suite.trials if self.trials is None else int(self.trials)
        if trials < 1:
            raise UsageError("trials must be a positive integer")
        dims = suite.dims if self.dims is None else int(self.dims)
        if not 1 <= dims <= MAX_DIM:
            raise UsageError(f"dims must lie in [1, {MAX_DIM}]")
        if dims < suite.min_dim:
            raise UsageError(f"suite {self.suite_id} needs dims >= {suite.min_dim}")
        p_values = suite.p_values if self.p_values is None else tuple(self.p_values)
        if not p_values:
            raise UsageError("need at least one exponent")
        try:
            p_values = tuple(NormedSpace(1, p).p for p in p_values)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        unknown = set(self.tolerances) - set(suite.tolerances)
        if unknown:
            raise UsageError(f"unknown tolerance key(s) {sorted(unknown)}; "
                             f"suite {self.suite_id} uses {sorted(suite.tolerances)}")
        tolerances = {**suite.tolerances, **{k: float(v) for k, v in self.tolerances.items()}}
        if self.restarts < 1:
            raise UsageError("restarts must be >= 1")
        return SuiteSpec(self.suite_id, trials, dims, p_values, int(self.seed), tolerances,
                         int(self.restarts))

    def to_dict(self) -> dict:
        return {"suite_id": self.suite_id, "trials": self.trials, "dims": self.dims,
                "p_values": ["inf" if p == np.inf else p for p in (self.p_values or ())],
                "seed": self.seed, "tolerances": dict(sorted(self.tolerances.items())),
                "restarts": self.restarts}


@dataclass
class SuiteReport:
    """Outcome of a suite; ``passed`` is true exactly when ``failures`` is empty."""

    spec: SuiteSpec
    trials_run: int
    failures: list
    worst_gaps: dict
    trials: list
    elapsed: float = 0.0
    trial_times: list = field(default_factory=list)

    @property
    def suite_id(self) -> str:
        return self.spec.suite_id

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "suite_id": self.suite_id,
            "spec": self.spec.to_dict(),
            "trials_run": self.trials_run,
            "passed": self.passed,
            "failures": self.failures,
            "summary": {"worst_gaps": self.worst_gaps,
                        "failure_count": len(self.failures)},
            "trials": self.trials,
        }
        if timing:
            times = self.trial_times or [0.0]
            out["timing"] = {"elapsed_s": self.elapsed, "max_trial_s": max(times),
                             "mean_trial_s": float(np.mean(times))}
        return out


# --------------------------------------------------------------------------
# random instances

def _pick_p(rng, p_values):
    return p_values[int(rng.integers(len(p_values)))]


def _space(rng, dim, p_values):
    return NormedSpace(int(dim), _pick_p(rng, p_values))


def _proper_subspace(rng, ambient):
    k = int(rng.integers(1, ambient.dim))
    return make_subspace(ambient, rng.standard_normal((k, ambient.dim)))


def _random_projection(rng, sub, scale=1.0):
    W = scale * rng.standard_normal((sub.k, sub.ambient.dim - sub.k))
    space = sub.ambient
    return Projection(LinearMap(space, space, graph_projection(sub, W)), sub)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-12)


class _Trial:
    """Collects the checks of one trial."""

    def __init__(self, tol):
        self.tol = tol
        self.checks = []
        self.values = {}
        self.instance = None
        self.command = None

    def check(self, name, gap, tol_key=None):
        tol = self.tol[tol_key or name]
        self.checks.append((name, float(gap), tol, bool(gap <= tol)))

    def record(self, **values):
        self.values.update({k: v if isinstance(v, bool) else float(v)
                            for k, v in values.items()})


# --------------------------------------------------------------------------
# suites

def _curry_suite(rng, cfg, spec, t):
    d = spec.dims
    X, Y, Z = (_space(rng, rng.integers(1, min(4, d) + 1), spec.p_values),
               _space(rng, rng.integers(1, min(4, d) + 1), spec.p_values),
               _space(rng, rng.integers(1, min(3, d) + 1), spec.p_values))
    phi = BilinearMap(X, Y, Z, rng.standard_normal((Z.dim, X.dim, Y.dim)))
    t.instance, t.command = phi.to_dict(), "bilinear-norm"
    direct = bilinear_norm(phi, cfg.spawn(1))
    nested = curry(phi).operator_norm(cfg.spawn(2))
    t.record(bilinear_norm=direct, curried_norm=nested)
    t.check("curry_isometry", _rel(nested, direct))


def _adjoint_spectral_sup(C, rng, starts=24):
    """``sup_{|h|_2 = 1} sigma_max(sum_k h_k C_k)`` by local search from many starts."""
    import scipy.optimize

    d = C.shape[0]
    if d == 1:
        return float(np.linalg.norm(C[0], 2))

    def neg(h):
        return -np.linalg.norm(np.tensordot(h / np.linalg.norm(h), C, 1), 2)

    best = 0.0
    for _ in range(starts):
        res = scipy.optimize.minimize(neg, rng.standard_normal(d), method="Nelder-Mead",
                                      options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        best = max(best, -res.fun)
    return float(best)


def _linearization_suite(rng, cfg, spec, t):
    d = spec.dims
    p = _pick_p(rng, spec.p_values)
    X, Y = NormedSpace(int(rng.integers(1, d + 1)), p), NormedSpace(int(rng.integers(1, d + 1)), p)
    Z = NormedSpace(int(rng.integers(1, min(3, d) + 1)), 2.0)
    phi = BilinearMap(X, Y, Z, rng.standard_normal((Z.dim, X.dim, Y.dim)))
    t.instance, t.command = phi.to_dict(), "bilinear-norm"
    Phi = linearize(phi, cfg.spawn(3))
    phi_norm = bilinear_norm(phi, cfg.spawn(1))
    lin_norm = operator_norm(Phi, cfg.spawn(2), method="ascent")
    t.record(bilinear_norm=phi_norm, linearized_norm=lin_norm)
    t.check("linearization_isometry", abs(lin_norm - phi_norm))
    if p == 2.0:
        # Projective norm on Euclidean factors is the nuclear norm, whose dual
        # is the spectral norm; so ||Phi|| = sup_h sigma_max(sum_k h_k C_k).
        oracle = _adjoint_spectral_sup(phi.coeffs, rng)
        t.record(adjoint_oracle=oracle)
        t.check("linearization_oracle", abs(oracle - phi_norm), "linearization_isometry")
    # ||Phi F|| <= ||phi|| pi(F) on random tensors, with pi from below.
    worst = 0.0
    for _ in range(2):
        F = TensorElement.from_matrix(X, Y, rng.standard_normal((X.dim, Y.dim)))
        rep = projective_norm(F, cfg.spawn(4))
        image = Z.norm(Phi(F.vector))
        worst = max(worst, image - phi_norm * rep.projective_dual_lower)
    t.record(sampled_excess=worst)
    t.check("linearization_bound", max(worst, 0.0))


def _duality_suite(rng, cfg, spec, t):
    d = min(spec.dims, 5)
    p = _pick_p(rng, spec.p_values)
    X, Y = NormedSpace(int(rng.integers(1, d + 1)), p), NormedSpace(int(rng.integers(1, d + 1)), p)
    F = TensorElement.from_matrix(X, Y, rng.standard_normal((X.dim, Y.dim)))
    t.instance, t.command = F.to_dict(), "tensor-norm"
    rep = projective_norm(F, cfg)
    t.record(upper=rep.projective_upper, lower=rep.projective_dual_lower,
             injective=rep.injective)
    t.check("sandwich", max(rep.projective_dual_lower - rep.projective_upper, 0.0))
    if p == 2.0:
        nuclear = float(np.linalg.svd(F.coeff_matrix, compute_uv=False).sum())
        t.record(nuclear=nuclear)
        t.check("upper_vs_nuclear", _rel(rep.projective_upper, nuclear), "agreement")
        t.check("lower_vs_nuclear", _rel(rep.projective_dual_lower, nuclear), "agreement")
        t.check("upper_vs_lower", _rel(rep.projective_dual_lower, rep.projective_upper),
                "agreement")


def _extension_problem(rng, spec):
    d = spec.dims
    X = _space(rng, rng.integers(2, d + 1), spec.p_values)
    Y = _space(rng, rng.integers(2, d + 1), spec.p_values)
    Z = _space(rng, rng.integers(1, min(3, d) + 1), spec.p_values)
    M, N = _proper_subspace(rng, X), _proper_subspace(rng, Y)
    phi = BilinearMap(M, N, Z, rng.standard_normal((Z.dim, M.k, N.k)))
    return phi, M, N


def _extension_instance(phi, E, P):
    return {"phi": phi.to_dict(), "E": E.to_dict(), "P": P.to_dict()}


def _chain_suite(rng, cfg, spec, t):
    phi, M, N = _extension_problem(rng, spec)
    E, P = _random_projection(rng, M), _random_projection(rng, N)
    t.instance, t.command = _extension_instance(phi, E, P), "extend"
    res = extend_bilinear(phi, M, N, E, P, cfg)
    t.record(phi_norm=res.phi_norm, phi_hat_norm=res.phi_hat_norm, E_norm=res.E_norm,
             P_norm=res.P_norm, restriction_residual=res.restriction_residual)
    t.check("chain_lower", max(res.phi_norm - res.phi_hat_norm, 0.0), "chain")
    t.check("chain_upper", max(res.phi_hat_norm - res.phi_norm * res.E_norm * res.P_norm, 0.0),
            "chain")
    t.check("restriction", res.restriction_residual)


def _hilbert_suite(rng, cfg, spec, t):
    phi, M, N = _extension_problem(rng, spec)
    if not (M.hilbert and N.hilbert):
        raise UsageError("suite cor53 needs p = 2")
    E, P = orthogonal_projection(M), orthogonal_projection(N)
    t.instance, t.command = _extension_instance(phi, E, P), "extend"
    res = extend_bilinear(phi, M, N, E, P, cfg)
    t.record(phi_norm=res.phi_norm, phi_hat_norm=res.phi_hat_norm,
             restriction_residual=res.restriction_residual)
    t.check("norm_equality", abs(res.phi_hat_norm - res.phi_norm))
    t.check("restriction", res.restriction_residual)


def _counterexample_suite(rng, cfg, spec, t):
    res = norm_one_converse_counterexample(cfg)
    M = res.E.range_subspace
    phi = restrict_bilinear(res.phi_hat, M, M)
    # Replaying this instance through ``compute extend`` builds the extension
    # from E, which has norm 2; the suite reports the f(x)f(y) extension.
    t.instance, t.command = _extension_instance(phi, res.E, res.P), "extend"
    t.record(E_norm=res.E_norm, phi_norm=res.phi_norm, phi_hat_norm=res.phi_hat_norm,
             restriction_residual=res.restriction_residual)
    t.check("E_norm", abs(res.E_norm - math.sqrt(2.0)), "value")
    t.check("phi_norm", abs(res.phi_norm - 1.0), "value")
    t.check("phi_hat_norm", abs(res.phi_hat_norm - 1.0), "value")


def _tensor_extension_suite(rng, cfg, spec, t):
    d = spec.dims
    X = _space(rng, rng.integers(2, d + 1), spec.p_values)
    Y = NormedSpace(int(rng.integers(2, d + 1)), X.p)
    Z = NormedSpace(int(rng.integers(1, min(3, d) + 1)), 2.0)
    M, N = _proper_subspace(rng, X), _proper_subspace(rng, Y)
    if X.p == 2.0:
        E, P = orthogonal_projection(M), orthogonal_projection(N)
    else:
        E, _ = min_norm_projection(M, cfg)
        P, _ = min_norm_projection(N, cfg)
    T = LinearMap(ProjectiveTensorSpace(M, N, cfg), Z, rng.standard_normal((Z.dim, M.k * N.k)))
    phi = BilinearMap(M, N, Z, T.matrix.reshape(Z.dim, M.k, N.k))
    t.instance, t.command = _extension_instance(phi, E, P), "extend"
    T_ext = extend_linear_on_tensor(T, M, N, E, P, cfg)
    residual = float(np.max(np.abs(restrict_linear_on_tensor(T_ext, M, N) - T.matrix)))
    T_norm = operator_norm(T, cfg.spawn(1))
    T_ext_norm = operator_norm(T_ext, cfg.spawn(2))
    E_norm, P_norm = E.norm(cfg.spawn(3)), P.norm(cfg.spawn(4))
    t.record(T_norm=T_norm, T_ext_norm=T_ext_norm, E_norm=E_norm, P_norm=P_norm,
             restriction_residual=residual)
    t.check("restriction", residual)
    if abs(E_norm - 1.0) <= 1e-9 and abs(P_norm - 1.0) <= 1e-9:
        t.check("norm_equality", abs(T_ext_norm - T_norm))
    else:
        t.check("chain", max(T_norm - T_ext_norm, T_ext_norm - T_norm * E_norm * P_norm, 0.0))


def _embedding_suite(rng, cfg, spec, t):
    d = spec.dims
    X = _space(rng, rng.integers(2, d + 1), spec.p_values)
    Y = NormedSpace(int(rng.integers(2, d + 1)), X.p)
    M, N = _proper_subspace(rng, X), _proper_subspace(rng, Y)
    F = random_element_in(M, N, rng)
    t.instance, t.command = F.to_dict(), "tensor-norm"
    sub, amb = embedded_projective_norms(F, M, N, cfg, share_decomposition=False)
    t.record(subspace_norm=sub.value, ambient_norm=amb.value,
             subspace_certified=bool(sub.certified),
             ambient_certified=bool(amb.certified))
    t.check("monotone", max(amb.value - sub.value, 0.0))
    if X.p == 2.0:
        t.check("hilbert_equality", _rel(amb.value, sub.value))


def _crossnorm_suite(rng, cfg, spec, t):
    d = spec.dims
    X = _space(rng, rng.integers(1, d + 1), spec.p_values)
    Y = _space(rng, rng.integers(1, d + 1), spec.p_values)
    n_terms = int(rng.integers(1, 4))
    F = TensorElement(X, Y, tuple((rng.standard_normal(X.dim), rng.standard_normal(Y.dim))
                                  for _ in range(n_terms)))
    t.instance, t.command = F.to_dict(), "tensor-norm"
    eps = injective_norm(F, cfg.spawn(1))
    pi = projective_norm_upper(F, cfg=cfg.spawn(2))
    t.record(injective=eps, projective_upper=pi)
    t.check("injective_le_projective", max(eps - pi, 0.0))
    x, y = rng.standard_normal(X.dim), rng.standard_normal(Y.dim)
    S = single_tensor(X, Y, x, y)
    target = float(X.norm(x) * Y.norm(y))
    rep = projective_norm(S, cfg.spawn(3))
    gap = max(abs(rep.injective - target), abs(rep.projective_upper - target),
              abs(rep.projective_dual_lower - target))
    t.record(single_target=target, single_gap=gap)
    t.check("single_tensor", gap)


SUITES = {
    "prop42": _Suite(_curry_suite, {"curry_isometry": 1e-6}, (1.0, 2.0, np.inf), 100, 4),
    "prop44": _Suite(_linearization_suite, {"linearization_isometry": 1e-4,
                                            "linearization_bound": 1e-6}, (2.0,), 50, 4),
    "prop45": _Suite(_duality_suite, {"agreement": 1e-4, "sandwich": 1e-6}, (2.0,), 50, 5),
    "thm52": _Suite(_chain_suite, {"chain": 1e-6, "restriction": 1e-10},
                    (1.0, 2.0, np.inf), 200, 4, min_dim=2),
    "cor53": _Suite(_hilbert_suite, {"norm_equality": 1e-6, "restriction": 1e-10},
                    (2.0,), 100, 5, min_dim=2),
    "counterexample": _Suite(_counterexample_suite, {"value": 1e-8}, (2.0,), 1, 2, fixed=True),
    "cor61": _Suite(_tensor_extension_suite, {"restriction": 1e-8, "norm_equality": 1e-4,
                                              "chain": 1e-6}, (2.0,), 20, 4, min_dim=2),
    "cor62": _Suite(_embedding_suite, {"monotone": 1e-6, "hilbert_equality": 1e-4},
                    (1.0, 2.0, np.inf), 50, 4, min_dim=2),
    "crossnorms": _Suite(_crossnorm_suite, {"injective_le_projective": 1e-6,
                                            "single_tensor": 1e-6},
                         (1.0, 2.0, np.inf), 500, 4),
}


SUITE_SUMMARIES = {
    "prop42": "curried operator norm equals the bilinear norm",
    "prop44": "linearization on the projective tensor product keeps the norm",
    "prop45": "projective upper bound, dual lower bound and nuclear norm agree (l2)",
    "thm52": "extension through arbitrary projections obeys the norm chain",
    "cor53": "extension through orthogonal projections keeps the norm (l2)",
    "counterexample": "equal norms through a projection of norm sqrt(2)",
    "cor61": "linear maps on tensor products of subspaces extend",
    "cor62": "ambient projective norm never exceeds the subspace norm; equal for l2",
    "crossnorms": "injective <= projective, both exact on single tensors",
}


# --------------------------------------------------------------------------
# driver

def _trial_seed(seed, index):
    return int(np.random.SeedSequence([seed & 0xFFFFFFFF, index]).generate_state(1)[0])


def _run_trial(spec: SuiteSpec, index: int):
    suite = SUITES[spec.suite_id]
    seed = _trial_seed(spec.seed, index)
    rng = np.random.default_rng(seed)
    cfg = OptimizerConfig(restarts=spec.restarts, seed=seed)
    t = _Trial(spec.tolerances)
    start = time.perf_counter()
    error = None
    try:
        suite.run(rng, cfg, spec, t)
    except NonConvergenceError as exc:
        error = {"invariant": "optimizer_convergence", "message": str(exc), "best": exc.best}
    elapsed = time.perf_counter() - start
    failures = []
    for name, gap, tol, ok in t.checks:
        if not ok:
            failures.append({"trial": index, "seed": seed, "invariant": name, "gap": gap,
                             "tolerance": tol, "command": t.command, "instance": t.instance})
    if error is not None:
        failures.append({"trial": index, "seed": seed, "gap": None, "tolerance": None,
                         "command": t.command, "instance": t.instance, **error})
    record = {"trial": index, "seed": seed, "values": dict(sorted(t.values.items()))}
    return record, t.checks, failures, elapsed


def run_suite(spec: SuiteSpec, jobs: int = 1) -> SuiteReport:
    """Run a suite; ``jobs > 1`` spreads trials over worker processes."""
    spec = spec.resolved()
    n = 1 if SUITES[spec.suite_id].fixed else spec.trials
    start = time.perf_counter()
    if jobs > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_trial, [spec] * n, range(n)))
    else:
        outcomes = [_run_trial(spec, i) for i in range(n)]
    worst = {}
    failures, records, times = [], [], []
    for record, checks, fails, elapsed in outcomes:
        records.append(record)
        failures.extend(fails)
        times.append(elapsed)
        for name, gap, _, _ in checks:
            worst[name] = max(worst.get(name, 0.0), gap)
    return SuiteReport(spec, n, failures, dict(sorted(worst.items())), records,
                       time.perf_counter() - start, times)
