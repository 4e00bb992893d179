"""Projected gradient ascent for polytope-constrained LD-mutual-information
maximization.

The iteration is ``S <- P(S + mu_k * grad)`` where ``P`` projects every
column onto the polytope, ``grad`` is the gradient of the regularized
LD-mutual information between the fixed mixtures and the current source
estimate, and ``mu_k`` follows a diminishing schedule. Because the last
iterate of a projected gradient method with diminishing steps keeps
oscillating, the solver also maintains a polynomial-decay running average of
the iterates (feasible by convexity) and reports it as the source estimate;
the raw iterate and its objective remain available on the state.
"""

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import evaluation
from .polytopes import NONNEG, contains, project_columns

__all__ = [
    "DivergenceError",
    "SolverConfig",
    "SolverState",
    "TrajectoryPoint",
    "canonical_orientation",
    "gradient",
    "initialize",
    "run",
    "run_best_of",
    "step",
    "step_size",
    "write_trajectory_csv",
]

SCHEDULES = ("inverse_sqrt", "constant", "inverse_sqrt_stabilized")
INIT_STRATEGIES = ("projected_random_map", "random", "interior_map")
AVERAGING_MODES = ("poly", "none")


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters of the projected gradient solver.

    ``schedule`` selects the step rule: ``"inverse_sqrt"`` uses
    ``mu0 / sqrt(k + 1)``; ``"constant"`` uses ``mu0``;
    ``"inverse_sqrt_stabilized"`` additionally clamps each step to the local
    curvature stability bound, which keeps desk-scale runs (small N) from
    overshooting while the schedule is still large.

    ``averaging="poly"`` maintains the polynomial-decay iterate average that
    is returned as the solver's estimate; ``averaging_power`` weights iterate
    ``j`` proportionally to ``j**averaging_power``.
    """

    epsilon: float = 1e-5
    mu0: float = 200.0
    iterations: int = 10000
    schedule: str = "inverse_sqrt"
    seed: int = 0
    record_every: int = 100
    init: str = "projected_random_map"
    averaging: str = "poly"
    averaging_power: int = 6

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.mu0 <= 0:
            raise ValueError("mu0 must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.init not in INIT_STRATEGIES:
            raise ValueError(f"unknown init strategy {self.init!r}")
        if self.averaging not in AVERAGING_MODES:
            raise ValueError(f"unknown averaging mode {self.averaging!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True)
class TrajectoryPoint:
    iteration: int
    objective: float
    sinr_db: float | None = None


@dataclass
class SolverState:
    """Iterate, averaged estimate, and recorded trajectory of one run."""

    s: np.ndarray
    k: int
    objective: float
    estimate: np.ndarray
    trajectory: list = field(default_factory=list)
    init_strategy: str = "projected_random_map"


class DivergenceError(RuntimeError):
    """Objective became non-finite; carries the diagnostic state."""

    def __init__(self, message, state):
        super().__init__(message)
        self.state = state


def step_size(cfg, k):
    """Scheduled step size at iteration ``k`` (0-based)."""
    if cfg.schedule == "constant":
        return cfg.mu0
    return cfg.mu0 / math.sqrt(k + 1)


# ---------------------------------------------------------------------------
# per-run cached quantities and the gradient


class _RunContext:
    """Mixture-side quantities that stay constant across iterations."""

    def __init__(self, y, epsilon):
        y = np.asarray(y, dtype=float)
        if y.ndim != 2 or y.shape[1] < 2:
            raise ValueError("mixtures must be an (M, N) matrix with N >= 2")
        self.n = y.shape[1]
        self.epsilon = float(epsilon)
        self.yc = y - y.mean(axis=1, keepdims=True)
        m = y.shape[0]
        r_y = self.yc @ self.yc.T / self.n
        self.cho_y = cho_factor(_sym(r_y) + epsilon * np.eye(m), lower=True)
        # (R_y + eps I)^{-1} Yc, reused by every gradient evaluation
        self.g_yc = cho_solve(self.cho_y, self.yc)


class _Stats:
    """Source-side factorizations shared by the objective and the gradient."""

    def __init__(self, s, ctx):
        r, n = s.shape
        eps = ctx.epsilon
        self.sc = s - s.mean(axis=1, keepdims=True)
        self.r_s = _sym(self.sc @ self.sc.T / n)
        self.r_sy = self.sc @ ctx.yc.T / n
        r_e = self.r_s - self.r_sy @ cho_solve(ctx.cho_y, self.r_sy.T)
        self.r_e = _sym(r_e)
        try:
            self.cho_s = cho_factor(self.r_s + eps * np.eye(r), lower=True)
            self.cho_e = cho_factor(self.r_e + eps * np.eye(r), lower=True)
        except LinAlgError as exc:
            raise np.linalg.LinAlgError(f"regularized covariance not PD: {exc}") from exc
        self.objective = float(
            np.sum(np.log(np.diag(self.cho_s[0]))) - np.sum(np.log(np.diag(self.cho_e[0])))
        )

    def gradient(self, ctx):
        resid = self.sc - self.r_sy @ ctx.g_yc
        return (cho_solve(self.cho_s, self.sc) - cho_solve(self.cho_e, resid)) / ctx.n


def _sym(a):
    return 0.5 * (a + a.T)


def gradient(s, y, epsilon):
    """Gradient of the LD-mutual information with respect to the sources.

    ``(1/N)(R_s+eps I)^{-1} S C - (1/N)(R_e+eps I)^{-1}(S - R_sy (R_y+eps I)^{-1} Y) C``
    with ``C`` the centering matrix, applied by subtracting row means rather
    than being materialized.
    """
    s = np.asarray(s, dtype=float)
    ctx = _RunContext(y, epsilon)
    if s.shape[1] != ctx.n:
        raise ValueError("sources and mixtures must share the sample count")
    return _Stats(s, ctx).gradient(ctx)


def _stabilized_step(mu, st, eps, n):
    """Clamp the scheduled step to the local curvature stability bound.

    The objective's dominant curvature scales as
    ``(1/lambda_min(R_e+eps I) + 1/lambda_min(R_s+eps I)) / N``; gradient
    ascent on a quadratic stays stable up to twice the inverse curvature,
    and steps beyond that overshoot and bounce instead of ascending.
    """
    lam_e = float(np.linalg.eigvalsh(st.r_e)[0]) + eps
    lam_s = float(np.linalg.eigvalsh(st.r_s)[0]) + eps
    bound = 2.0 * n / (1.0 / lam_e + 1.0 / lam_s)
    return min(mu, bound)


# ---------------------------------------------------------------------------
# initialization


def initialize(y, p, cfg):
    """Build a feasible starting point from the mixtures.

    Returns ``(s0, strategy_used)``. The default "projected_random_map"
    whitens the mixtures to ``p.dim`` principal components, applies a random
    orthonormal map, rescales by the largest column norm, shifts nonnegative
    coordinates by +0.5, and projects every column into the polytope. When
    the mixtures have rank below ``p.dim`` it falls back to "random" and
    emits a warning. "interior_map" squashes the rotated whitened components
    into the interior of the box through a logistic map and shrinks any
    violating group columns, which conditions the early iterations better on
    small polytopes.
    """
    y = np.asarray(y, dtype=float)
    rng = np.random.default_rng(cfg.seed)
    strategy = cfg.init
    z = None
    if strategy in ("projected_random_map", "interior_map"):
        z = _whitened_components(y, p.dim)
        if z is None:
            warnings.warn(
                "mixture rank below the source count; falling back to random init",
                RuntimeWarning,
                stacklevel=2,
            )
            strategy = "random"

    if strategy == "random":
        lo = p.lower[:, None]
        s0 = lo + (p.upper[:, None] - lo) * rng.random((p.dim, y.shape[1]))
        return project_columns(p, s0), "random"

    q = _random_orthonormal(p.dim, rng)
    x = q @ z
    if strategy == "projected_random_map":
        x = x / max(np.linalg.norm(x, axis=0).max(), np.finfo(float).tiny)
        shift = np.array([0.5 if t == NONNEG else 0.0 for t in p.domains])
        x = x + shift[:, None]
        return project_columns(p, x), strategy

    # interior_map: logistic squash into the open box, then shrink into groups
    u = 1.0 / (1.0 + np.exp(-x))
    s0 = np.where(
        np.array([t == NONNEG for t in p.domains])[:, None], u, 2.0 * u - 1.0
    )
    for g in p.l1_groups:
        g = list(g)
        norms = np.abs(s0[g]).sum(axis=0)
        scale = np.minimum(1.0, 0.9 / np.maximum(norms, np.finfo(float).tiny))
        s0[g] *= scale
    return project_columns(p, s0), strategy


def _whitened_components(y, r):
    """Top-r whitened principal components of the mixtures, or None if rank-deficient."""
    yc = y - y.mean(axis=1, keepdims=True)
    r_y = _sym(yc @ yc.T / y.shape[1])
    w, v = np.linalg.eigh(r_y)
    order = np.argsort(w)[::-1][:r]
    w = w[order]
    if w[-1] <= max(w[0], 0.0) * 1e-12 or w[-1] <= 0.0:
        return None
    return (v[:, order] / np.sqrt(w)).T @ yc


def _random_orthonormal(r, rng):
    q, rr = np.linalg.qr(rng.standard_normal((r, r)))
    return q * np.sign(np.diag(rr))


# ---------------------------------------------------------------------------
# iteration


def _advance(state, p, cfg, ctx, stats):
    """One update from ``stats`` of the current iterate; returns new (state, stats)."""
    mu = step_size(cfg, state.k)
    if cfg.schedule == "inverse_sqrt_stabilized":
        mu = _stabilized_step(mu, stats, ctx.epsilon, ctx.n)
    s_new = project_columns(p, state.s + mu * stats.gradient(ctx))
    new_stats = _Stats(s_new, ctx)
    k_new = state.k + 1
    if cfg.averaging == "poly":
        beta = (cfg.averaging_power + 1.0) / (k_new + cfg.averaging_power)
        estimate = (1.0 - beta) * state.estimate + beta * s_new
    else:
        estimate = s_new
    new_state = SolverState(
        s=s_new,
        k=k_new,
        objective=new_stats.objective,
        estimate=estimate,
        trajectory=state.trajectory,
        init_strategy=state.init_strategy,
    )
    if not math.isfinite(new_state.objective):
        raise DivergenceError(
            f"objective became non-finite at iteration {k_new}", new_state
        )
    return new_state, new_stats


def step(state, y, p, cfg):
    """Apply one projected gradient step to ``state`` and return the new state.

    Recomputes the mixture-side cache; inside :func:`run` the cache is built
    once and reused.
    """
    ctx = _RunContext(y, cfg.epsilon)
    new_state, _ = _advance(state, p, cfg, ctx, _Stats(state.s, ctx))
    return new_state


def canonical_orientation(s, y, p):
    """Resolve the box-reflection ambiguity of nonnegative coordinates.

    For a nonnegative box domain the map ``s_i -> 1 - s_i`` sends the
    polytope to itself and leaves every covariance unchanged, so the
    objective cannot tell a row from its reflection (the +-1 sign ambiguity
    of signed coordinates is handled by evaluation alignment instead). The
    mixture mean is the tie-breaker the covariances discard: reflecting row
    ``i`` flips its implied mixing column while moving the predicted mixture
    mean by that full column. This picks the flip combination whose implied
    mixing best reproduces the observed mixture mean, and returns the input
    unchanged when no flip is feasible or no nonnegative coordinates exist.
    """
    nn = [i for i, tag in enumerate(p.domains) if tag == NONNEG]
    if not nn:
        return s
    y = np.asarray(y, dtype=float)
    n = s.shape[1]
    sc = s - s.mean(axis=1, keepdims=True)
    yc = y - y.mean(axis=1, keepdims=True)
    gram = sc @ sc.T / n
    try:
        # least-squares mixing from Yc ~ H Sc
        h_hat = np.linalg.solve(gram + 1e-12 * np.eye(p.dim), sc @ yc.T / n).T
    except np.linalg.LinAlgError:
        return s
    mu_y = y.mean(axis=1)
    mu_s = s.mean(axis=1)
    best_bits, best_resid = 0, math.inf
    for bits in range(1 << len(nn)):
        signs = np.ones(p.dim)
        mu = mu_s.copy()
        for b, i in enumerate(nn):
            if bits >> b & 1:
                signs[i] = -1.0
                mu[i] = 1.0 - mu_s[i]
        resid = float(np.linalg.norm(mu_y - (h_hat * signs) @ mu))
        if resid < best_resid - 1e-15:
            best_bits, best_resid = bits, resid
    if best_bits == 0:
        return s
    out = s.copy()
    for b, i in enumerate(nn):
        if best_bits >> b & 1:
            out[i] = 1.0 - out[i]
    if not contains(p, out, tol=1e-8):
        return s
    return out


def _record(state, ground_truth, y=None, p=None):
    sinr = None
    if ground_truth is not None:
        estimate = state.estimate
        if y is not None and p is not None:
            estimate = canonical_orientation(estimate, y, p)
        sinr = evaluation.sinr_db(estimate, ground_truth)
    state.trajectory.append(TrajectoryPoint(state.k, state.objective, sinr))


def run(y, p, cfg, ground_truth=None):
    """Run the solver for ``cfg.iterations`` steps and return the final state.

    The trajectory records the raw-iterate objective (and, when
    ``ground_truth`` is given, the SINR of the averaged estimate) at
    iteration 0, every ``cfg.record_every`` iterations, and at the end. The
    returned estimate is reflection-canonicalized against the mixture mean
    (see :func:`canonical_orientation`); the raw iterate ``state.s`` is left
    untouched. Deterministic given the config seed.
    """
    ctx = _RunContext(y, cfg.epsilon)
    s0, strategy = initialize(y, p, cfg)
    stats = _Stats(s0, ctx)
    state = SolverState(
        s=s0,
        k=0,
        objective=stats.objective,
        estimate=s0.copy(),
        init_strategy=strategy,
    )
    _record(state, ground_truth, y, p)
    for _ in range(cfg.iterations):
        state, stats = _advance(state, p, cfg, ctx, stats)
        if state.k % cfg.record_every == 0 or state.k == cfg.iterations:
            _record(state, ground_truth, y, p)
    state.estimate = canonical_orientation(state.estimate, y, p)
    return state


def run_best_of(y, p, cfg, starts, ground_truth=None):
    """Run several seeded starts and keep the highest final objective.

    Start ``i`` uses seed ``cfg.seed + 1000003 * i``. Selection uses the
    objective of the averaged estimate, which needs no ground truth.
    """
    if starts < 1:
        raise ValueError("need at least one start")
    best_state, best_obj = None, -math.inf
    ctx = _RunContext(y, cfg.epsilon)
    for i in range(starts):
        state = run(y, p, replace(cfg, seed=cfg.seed + 1000003 * i), ground_truth)
        obj = _Stats(state.estimate, ctx).objective
        if obj > best_obj:
            best_state, best_obj = state, obj
    return best_state


def write_trajectory_csv(state, path):
    """Write the recorded trajectory as CSV.

    Columns are ``iteration,objective`` plus ``sinr_db`` when ground truth
    was supplied to the run. Floats use 12 significant digits.
    """
    has_sinr = any(pt.sinr_db is not None for pt in state.trajectory)
    header = "iteration,objective,sinr_db" if has_sinr else "iteration,objective"
    lines = [header]
    for pt in state.trajectory:
        row = f"{pt.iteration},{_fmt(pt.objective)}"
        if has_sinr:
            row += f",{_fmt(pt.sinr_db)}"
        lines.append(row)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _fmt(x):
    if x is None:
        return ""
    return f"{float(x):.12g}"
