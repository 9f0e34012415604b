"""Sparse rank-one recovery by alternating least squares.

Spectral initialization from the adjoint image of the data, then
alternating half-steps in the style of hard thresholding pursuit: with
one factor frozen, the other is solved by least squares (conjugate
gradients on the normal equations of the implicit partial map when
unrestricted), hard thresholded, and refit exactly on the selected
support. Because the half-step problems are underdetermined whenever
m < n, a plain solve-then-threshold alternation stalls at interpolating
fixed points; the support-restricted refits remove that failure mode.

Two further devices widen the basin of attraction. Sparsity
continuation starts each attempt at a relaxed level (capped by m/3) and
halves it down to the requested one; and the attempt is restarted from
a reseeded support screening whenever the final residual stays large,
which is how failed basins announce themselves. Restarts draw from a
stream derived from SolveOptions.seed, so a solve is a deterministic
function of (ensemble, data, options).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .measurement import (
    DENSE_GUARD,
    Ensemble,
    LiftedPoint,
    adjoint_actions,
    adjoint_apply,
    forward,
    lifted_dist,
    partial_forward,
)
from .models import ModelSpec, hard_threshold, project_flat, sample_model
from .util import complex_gaussian, derive_seed, rng_for, unit

__all__ = [
    "SolveOptions",
    "SolveResult",
    "SolverBreakdownError",
    "spectral_init",
    "recover",
    "success_metric",
    "plant_instance",
]


class SolverBreakdownError(RuntimeError):
    """Inner solver broke down; carries the current iterate pair."""

    def __init__(self, message: str, iterate: LiftedPoint):
        super().__init__(message)
        self.iterate = iterate


@dataclass
class SolveOptions:
    s1: int
    s2: int
    max_outer_iters: int = 40
    outer_tol: float = 1e-8
    inner_tol: float = 1e-10
    inner_max_iters: int = 200
    restarts: int = 14
    resid_stop: float = 1e-7
    seed: int = 0
    enforce_flatness: bool = False
    mu1: float | None = None
    mu2: float | None = None

    def __post_init__(self):
        if self.s1 < 1 or self.s2 < 1:
            raise ValueError("sparsity levels must be positive")
        if self.max_outer_iters < 1 or self.inner_max_iters < 1:
            raise ValueError("iteration caps must be positive")
        if self.outer_tol <= 0 or self.inner_tol <= 0 or self.resid_stop <= 0:
            raise ValueError("tolerances must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be nonnegative")
        if self.enforce_flatness and self.mu1 is None and self.mu2 is None:
            raise ValueError("enforce_flatness requires mu1 or mu2")


@dataclass
class SolveResult:
    u_hat: np.ndarray
    v_hat: np.ndarray
    iterations: int
    converged: bool
    residual_norm: float
    relative_error: float | None = None
    attempts: int = 1
    residual_half_steps: list = field(default_factory=list)

    @property
    def point(self) -> LiftedPoint:
        return LiftedPoint(self.u_hat, self.v_hat)

    def csv_dict(self, ens: Ensemble, opts: SolveOptions, seed) -> dict:
        return {
            "n": ens.n,
            "m": ens.m,
            "s1": opts.s1,
            "s2": opts.s2,
            "mu1": "" if opts.mu1 is None else opts.mu1,
            "mu2": "" if opts.mu2 is None else opts.mu2,
            "seed": seed,
            "rel_error": "" if self.relative_error is None else self.relative_error,
            "iterations": self.iterations,
            "converged": int(self.converged),
            "residual_norm": self.residual_norm,
        }


def _cgnr(apply_fn, adjoint_fn, b, x0, tol, max_iters, context: LiftedPoint):
    """Conjugate gradients on the normal equations, warm started at x0.

    Minimizes ||apply(x) - b|| over the Krylov space through x0; the
    data-space residual never increases along the way. Stops when the
    normal residual drops below tol relative to its starting value.
    """
    x = x0.astype(complex, copy=True)
    r = b - apply_fn(x)
    g = adjoint_fn(r)
    p = g.copy()
    gg = float(np.real(np.vdot(g, g)))
    ref = max(float(np.linalg.norm(adjoint_fn(b))), 1e-300)
    for _ in range(max_iters):
        if np.sqrt(gg) <= tol * ref:
            break
        q = apply_fn(p)
        qq = float(np.real(np.vdot(q, q)))
        if qq == 0.0:
            if gg > (tol * ref) ** 2:
                raise SolverBreakdownError("conjugate-gradient breakdown", context)
            break
        alpha = gg / qq
        x += alpha * p
        r -= alpha * q
        g = adjoint_fn(r)
        gg_new = float(np.real(np.vdot(g, g)))
        p = g + (gg_new / gg) * p
        gg = gg_new
    return x


# -- initialization -----------------------------------------------------------


def _leading_pair_dense(T: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    U, S, Vh = np.linalg.svd(T)
    scale = np.sqrt(S[0])
    return scale * U[:, 0], scale * Vh[0, :]


def _leading_pair_power(matvec, rmatvec, n: int, seed: int, iters: int = 80):
    v = unit(complex_gaussian(rng_for(seed, "power-init"), n))
    for _ in range(iters):
        w = rmatvec(matvec(v))
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        v = w / nw
    tv = matvec(v)
    sigma = np.linalg.norm(tv)
    if sigma == 0:
        raise ValueError("adjoint image has no leading direction")
    # T = sigma * outer(u, conj(v_right)): the transpose-side factor is conj(v)
    return np.sqrt(sigma) * (tv / sigma), np.sqrt(sigma) * np.conj(v)


def spectral_init(ens: Ensemble, b: np.ndarray, s1: int, s2: int) -> LiftedPoint:
    """Thresholded leading singular pair of the adjoint image of b.

    Dense SVD up to n = DENSE_GUARD, power iteration on the implicit
    adjoint actions beyond. Factors are hard thresholded to their
    sparsity levels and renormalized; the overall scale is left to the
    first least-squares half-step.
    """
    b = np.asarray(b, dtype=complex)
    if np.linalg.norm(b) == 0:
        raise ValueError("cannot initialize from zero measurements")
    if ens.n <= DENSE_GUARD:
        u0, v0 = _leading_pair_dense(adjoint_apply(ens, b))
    else:
        matvec, rmatvec = adjoint_actions(ens, b)
        u0, v0 = _leading_pair_power(matvec, rmatvec, ens.n, ens.seed)
    u0 = unit(hard_threshold(u0, s1))
    v0 = unit(hard_threshold(v0, s2))
    return LiftedPoint(u0, v0)


def _screened_pair(ens: Ensemble, b: np.ndarray, k1: int, k2: int,
                   rng=None, weighted: bool = True):
    """Leading pair of the adjoint image screened to k1 rows, k2 columns.

    Rows and columns are picked by energy (rng None), drawn with
    energy-proportional probabilities (weighted restarts), or drawn
    uniformly (exploration restarts); the rest of the matrix is zeroed
    before the rank-one extraction. Falls back to the unscreened
    spectral pair when the adjoint image cannot be materialized.
    """
    if ens.n > DENSE_GUARD:
        if rng is None:
            return spectral_init(ens, b, k1, k2)
        matvec, rmatvec = adjoint_actions(ens, b)
        u0, v0 = _leading_pair_power(matvec, rmatvec, ens.n,
                                     int(rng.integers(2**63)))
        return LiftedPoint(unit(hard_threshold(u0, k1)),
                           unit(hard_threshold(v0, k2)))
    T = adjoint_apply(ens, b)
    row_e = np.linalg.norm(T, axis=1) ** 2
    col_e = np.linalg.norm(T, axis=0) ** 2
    if rng is None:
        rows = np.argsort(-row_e)[:k1]
        cols = np.argsort(-col_e)[:k2]
    elif weighted:
        rows = rng.choice(ens.n, size=k1, replace=False, p=row_e / row_e.sum())
        cols = rng.choice(ens.n, size=k2, replace=False, p=col_e / col_e.sum())
    else:
        rows = rng.choice(ens.n, size=k1, replace=False)
        cols = rng.choice(ens.n, size=k2, replace=False)
    S = np.zeros_like(T)
    S[np.ix_(rows, cols)] = T[np.ix_(rows, cols)]
    if not np.any(S):
        return spectral_init(ens, b, k1, k2)
    U, _, Vh = np.linalg.svd(S)
    return LiftedPoint(unit(U[:, 0]), unit(Vh[0, :]))


def _attempt_init(ens: Ensemble, b: np.ndarray, k1: int, k2: int,
                  attempt: int, seed: int) -> LiftedPoint:
    """Initialization pool for restarts.

    Attempt 0 is the deterministic energy screening; later attempts
    cycle energy-weighted screening, uniform screening, and dense
    random pairs, so repeated restarts explore genuinely different
    basins even when the adjoint image misranks the true support.
    """
    if attempt == 0:
        return _screened_pair(ens, b, k1, k2)
    rng = rng_for(seed, "restart", attempt)
    flavor = (attempt - 1) % 3
    if flavor == 0:
        return _screened_pair(ens, b, k1, k2, rng, weighted=True)
    if flavor == 1:
        return _screened_pair(ens, b, k1, k2, rng, weighted=False)
    return LiftedPoint(unit(complex_gaussian(rng, ens.n)),
                       unit(complex_gaussian(rng, ens.n)))


# -- half steps ---------------------------------------------------------------


def _partial_columns(pm, J: np.ndarray) -> np.ndarray:
    """Columns of the partial map restricted to coefficient support J."""
    ens = pm.ens
    D = ens.phi if pm.side == "left" else ens.psi
    block = np.eye(ens.n, dtype=complex)[:, J] if D is None else D[:, J]
    conv = np.fft.ifft(np.fft.fft(block, axis=0) * pm.fixed_hat[:, None], axis=0)
    return np.sqrt(ens.n / ens.m) * conv[ens.omega, :]


def _restricted_lstsq(pm, b: np.ndarray, J: np.ndarray, n: int) -> np.ndarray:
    cols = _partial_columns(pm, J)
    sol, *_ = np.linalg.lstsq(cols, b, rcond=None)
    w = np.zeros(n, dtype=complex)
    w[J] = sol
    return w


def _half_step(pm, b, w, s, opts, context, log: list):
    """One factor update with the other frozen.

    Unrestricted (s = n): exact least squares by warm-started conjugate
    gradients, so the data residual is nonincreasing. Restricted:
    hard-thresholding-pursuit iterations, each selecting the support of
    the gradient-stepped iterate and refitting exactly on it.
    """
    n = pm.ens.n
    if s >= n:
        w = _cgnr(pm.apply, pm.adjoint, b, w, opts.inner_tol,
                  opts.inner_max_iters, context)
        log.append(float(np.linalg.norm(pm.apply(w) - b)))
        return w
    J_prev = None
    for _ in range(8):
        g = pm.adjoint(b - pm.apply(w))
        J = np.sort(np.argsort(-np.abs(w + g))[:s])
        if J_prev is not None and np.array_equal(J, J_prev):
            break
        w = _restricted_lstsq(pm, b, J, n)
        J_prev = J
    log.append(float(np.linalg.norm(pm.apply(w) - b)))
    return w


def _sparsity_schedule(s: int, m: int, n: int) -> list:
    """Relaxed-to-target sparsity levels: start near min(4s, m/3), halve."""
    s0 = min(max(4 * s, s + 4), max(s, m // 3), n)
    out = []
    while s0 > s:
        out.append(s0)
        s0 = max(s, -(-s0 // 2))
    out.append(s)
    return out


def _run_attempt(ens, b, opts, init: LiftedPoint, sched1, sched2):
    u, v = init.u.copy(), init.v.copy()
    half_log: list = []
    iters = 0
    converged = False
    for s1_now, s2_now in zip(sched1, sched2):
        prev = LiftedPoint(u.copy(), v.copy())
        converged = False
        for _ in range(opts.max_outer_iters):
            iters += 1
            pm = partial_forward(ens, "left", v)
            u = _half_step(pm, b, u, s1_now, opts, LiftedPoint(u, v), half_log)
            if np.linalg.norm(u) == 0:
                raise SolverBreakdownError("left factor collapsed",
                                           LiftedPoint(u, v))
            pm = partial_forward(ens, "right", u)
            v = _half_step(pm, b, v, s2_now, opts, LiftedPoint(u, v), half_log)
            if np.linalg.norm(v) == 0:
                raise SolverBreakdownError("right factor collapsed",
                                           LiftedPoint(u, v))
            # rebalance factor norms; the lifted point is unchanged
            ratio = np.sqrt(np.linalg.norm(v) / np.linalg.norm(u))
            u, v = u * ratio, v / ratio
            cur = LiftedPoint(u.copy(), v.copy())
            norm_now = cur.norm_f
            if norm_now > 0 and lifted_dist(cur, prev) < opts.outer_tol * norm_now:
                prev = cur
                converged = True
                break
            prev = cur
    resid = float(np.linalg.norm(forward(ens, LiftedPoint(u, v)) - b))
    return u, v, resid, iters, converged, half_log


def _flatness_step(ens: Ensemble, w: np.ndarray, mu: float, s: int, side: str) -> np.ndarray:
    """Flatten the dictionary image of a factor, then pull back and rethreshold."""
    img = ens.apply_phi(w) if side == "left" else ens.apply_psi(w)
    flat = project_flat(img, mu)
    mat = ens.phi if side == "left" else ens.psi
    back = flat if mat is None else np.linalg.solve(mat, flat)
    return hard_threshold(back, s)


def recover(ens: Ensemble, b: np.ndarray, opts: SolveOptions) -> SolveResult:
    """Alternating restricted least squares with restarts and continuation.

    Runs up to opts.restarts + 1 attempts, each a full continuation
    sweep from a screened spectral initialization (deterministic for
    the first attempt, energy-weighted random screenings after). Keeps
    the attempt with the smallest residual and stops early once the
    residual falls below resid_stop * ||b||. All stochastic choices
    derive from opts.seed, never from global state.
    """
    b = np.asarray(b, dtype=complex)
    if b.shape != (ens.m,):
        raise ValueError("b must have length m")
    if np.linalg.norm(b) == 0:
        raise ValueError("cannot initialize from zero measurements")
    sched1 = _sparsity_schedule(opts.s1, ens.m, ens.n)
    sched2 = _sparsity_schedule(opts.s2, ens.m, ens.n)
    depth = max(len(sched1), len(sched2))
    sched1 = [sched1[0]] * (depth - len(sched1)) + sched1
    sched2 = [sched2[0]] * (depth - len(sched2)) + sched2

    b_norm = float(np.linalg.norm(b))
    best = None
    attempts = 0
    for a in range(opts.restarts + 1):
        attempts += 1
        init = _attempt_init(ens, b, sched1[0], sched2[0], a, opts.seed)
        outcome = _run_attempt(ens, b, opts, init, sched1, sched2)
        if best is None or outcome[2] < best[2]:
            best = outcome
        if best[2] <= opts.resid_stop * b_norm:
            break
    u, v, resid, iters, converged, half_log = best

    if opts.enforce_flatness:
        if opts.mu1 is not None:
            u = _flatness_step(ens, u, opts.mu1, opts.s1, "left")
            J = np.nonzero(v)[0] if np.any(v) else np.arange(ens.n)
            v = _restricted_lstsq(partial_forward(ens, "right", u), b, J, ens.n)
        if opts.mu2 is not None:
            v = _flatness_step(ens, v, opts.mu2, opts.s2, "right")
            J = np.nonzero(u)[0] if np.any(u) else np.arange(ens.n)
            u = _restricted_lstsq(partial_forward(ens, "left", v), b, J, ens.n)
        resid = float(np.linalg.norm(forward(ens, LiftedPoint(u, v)) - b))

    return SolveResult(
        u_hat=u,
        v_hat=v,
        iterations=iters,
        converged=converged,
        residual_norm=resid,
        attempts=attempts,
        residual_half_steps=half_log,
    )


def success_metric(
    p_hat: LiftedPoint,
    p_true: LiftedPoint,
    b: np.ndarray,
    z_norm: float,
    ens: Ensemble,
) -> tuple[float, float]:
    """Relative lifted error and noise-to-signal ratio.

    rel_error = ||u_hat v_hat^T - u v^T||_F / ||u v^T||_F, computed
    factor-wise, so it is invariant under the reciprocal scaling
    ambiguity (c u, v/c). noise_ratio = z_norm / ||A(u v^T)||_2.
    """
    truth_norm = p_true.norm_f
    if truth_norm == 0:
        raise ValueError("ground truth must be nonzero")
    rel = lifted_dist(p_hat, p_true) / truth_norm
    sig = float(np.linalg.norm(forward(ens, p_true)))
    if sig == 0:
        raise ValueError("planted point has zero measurement")
    return rel, float(z_norm) / sig


def plant_instance(
    n: int,
    m: int,
    s1: int,
    s2: int,
    seed: int = 0,
    phi_kind: str = "gaussian",
    psi_kind: str = "gaussian",
    mu1: float | None = None,
    mu2: float | None = None,
    noise_level: float = 0.0,
    flavor: str = "exact",
    omega_mode: str = "without_replacement",
):
    """Draw an ensemble, a planted model pair, and its noisy measurement.

    noise_level is relative: the additive complex Gaussian noise is
    scaled to noise_level * ||A(X)||. Returns (ens, truth, b, z_norm).
    """
    ens = Ensemble.generate(n, m, phi_kind, psi_kind,
                            seed=derive_seed(seed, "ensemble"),
                            omega_mode=omega_mode)
    u = sample_model(ModelSpec(n, s1, mu=mu1, flavor=flavor, side="left"),
                     rng_for(seed, "plant-u"))
    v = sample_model(ModelSpec(n, s2, mu=mu2, flavor=flavor, side="right"),
                     rng_for(seed, "plant-v"))
    truth = LiftedPoint(u, v)
    b0 = forward(ens, truth)
    if noise_level > 0:
        z = complex_gaussian(rng_for(seed, "noise"), m)
        z *= noise_level * np.linalg.norm(b0) / np.linalg.norm(z)
    else:
        z = np.zeros(m, dtype=complex)
    return ens, truth, b0 + z, float(np.linalg.norm(z))
