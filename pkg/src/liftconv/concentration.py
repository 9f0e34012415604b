"""Monte Carlo estimators for restricted isometry and angle constants.

Each estimator samples restricted rank-one pairs, evaluates the
measurement deviation of interest, and reports the sample maximum with
quantiles and the maximizing witness. Trial t consumes its own derived
generator, so reports are identical however trials are distributed
across workers, and a longer run with the same seed extends a shorter
one (the maximum can only grow).

Trial draw protocol (part of the contract, tests replay it):
  rip:      u ~ spec_u, v ~ spec_v
  rap/rop:  u ~ spec_u, v ~ spec_v, u_hat ~ spec_u, v_hat ~ spec_v
all from rng_for(seed, "trial", t), in that order.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .measurement import (
    Ensemble,
    LiftedPoint,
    adjoint_apply,
    forward,
    lifted_inner,
    sample_omega,
    _gaussian_dictionary,
)
from .models import InfeasibleModelError, ModelSpec, OrthogonalizationError, sample_model
from .util import derive_seed, rng_for

__all__ = [
    "EstimateReport",
    "estimate_rip",
    "estimate_rap",
    "estimate_rop",
    "estimate_rip_matrix",
    "isotropy_check",
    "polarization_check",
    "exact_rip_small",
    "rop_form_samples",
]

EXACT_RIP_N_GUARD = 16
EXACT_RIP_S_GUARD = 4
ISOTROPY_GUARD = 64

CSV_FIELDS = (
    "kind", "n", "m", "s1", "s2", "mu1", "mu2", "trials",
    "delta_hat", "q50", "q90", "q99", "seed", "wall_time",
)


@dataclass
class EstimateReport:
    """Outcome of one Monte Carlo estimation run.

    delta_hat is the maximum per-trial deviation; quantiles are linear
    interpolation quantiles of the same sample, so q99 <= delta_hat.
    witness holds the maximizing trial's draws for replay.
    """

    kind: str
    delta_hat: float
    trials: int
    quantiles: dict
    seed: int
    wall_time: float
    n: int
    m: int
    s1: int | None = None
    s2: int | None = None
    mu1: float | None = None
    mu2: float | None = None
    resamples: int = 0
    witness: dict = field(default_factory=dict, repr=False)
    deviations: np.ndarray | None = field(default=None, repr=False)

    def csv_dict(self, include_wall_time: bool = True) -> dict:
        row = {
            "kind": self.kind,
            "n": self.n,
            "m": self.m,
            "s1": "" if self.s1 is None else self.s1,
            "s2": "" if self.s2 is None else self.s2,
            "mu1": "" if self.mu1 is None else self.mu1,
            "mu2": "" if self.mu2 is None else self.mu2,
            "trials": self.trials,
            "delta_hat": self.delta_hat,
            "q50": self.quantiles[0.5],
            "q90": self.quantiles[0.9],
            "q99": self.quantiles[0.99],
            "seed": self.seed,
        }
        if include_wall_time:
            row["wall_time"] = self.wall_time
        return row


def _finish_report(kind, devs, witness, seed, t0, ens, spec_u, spec_v, resamples=0):
    qs = np.quantile(devs, [0.5, 0.9, 0.99])
    return EstimateReport(
        kind=kind,
        delta_hat=float(devs.max()),
        trials=len(devs),
        quantiles={0.5: float(qs[0]), 0.9: float(qs[1]), 0.99: float(qs[2])},
        seed=seed,
        wall_time=time.perf_counter() - t0,
        n=ens.n,
        m=ens.m,
        s1=None if spec_u is None else spec_u.s,
        s2=None if spec_v is None else spec_v.s,
        mu1=None if spec_u is None else spec_u.mu,
        mu2=None if spec_v is None else spec_v.mu,
        resamples=resamples,
        witness=witness,
        deviations=devs,
    )


def estimate_rip(
    ens: Ensemble,
    spec_u: ModelSpec,
    spec_v: ModelSpec,
    trials: int,
    seed: int = 0,
) -> EstimateReport:
    """Sample max of | ||A(u v^T)||^2 - ||u v^T||_F^2 | / ||u v^T||_F^2."""
    if trials < 1:
        raise ValueError("trials must be positive")
    t0 = time.perf_counter()
    devs = np.empty(trials)
    witness = {}
    for t in range(trials):
        rng = rng_for(seed, "trial", t)
        u = sample_model(spec_u, rng)
        v = sample_model(spec_v, rng)
        p = LiftedPoint(u, v)
        wsq = p.norm_f**2
        dev = abs(np.linalg.norm(forward(ens, p)) ** 2 - wsq) / wsq
        devs[t] = dev
        if not witness or dev > witness["deviation"]:
            witness = {"trial": t, "deviation": dev, "u": u, "v": v,
                       "seed": derive_seed(seed, "trial", t)}
    return _finish_report("rip", devs, witness, seed, t0, ens, spec_u, spec_v)


def estimate_rap(
    ens: Ensemble,
    spec_u: ModelSpec,
    spec_v: ModelSpec,
    trials: int,
    seed: int = 0,
    diagonal: bool = False,
) -> EstimateReport:
    """Sample max of the normalized angle deviation

        | <A(u_hat v_hat^T), A(u v^T)> - <u_hat v_hat^T, u v^T> |
          / (||u_hat v_hat^T||_F ||u v^T||_F).

    With diagonal=True the hatted pair aliases the plain pair and the
    statistic reduces to the isometry deviation on the same draws.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    t0 = time.perf_counter()
    devs = np.empty(trials)
    witness = {}
    for t in range(trials):
        rng = rng_for(seed, "trial", t)
        u = sample_model(spec_u, rng)
        v = sample_model(spec_v, rng)
        if diagonal:
            u_hat, v_hat = u, v
        else:
            u_hat = sample_model(spec_u, rng)
            v_hat = sample_model(spec_v, rng)
        p = LiftedPoint(u, v)
        p_hat = LiftedPoint(u_hat, v_hat)
        denom = p.norm_f * p_hat.norm_f
        val = np.vdot(forward(ens, p_hat), forward(ens, p)) - lifted_inner(p_hat, p)
        dev = abs(val) / denom
        devs[t] = dev
        if not witness or dev > witness["deviation"]:
            witness = {"trial": t, "deviation": dev, "u": u, "v": v,
                       "u_hat": u_hat, "v_hat": v_hat,
                       "seed": derive_seed(seed, "trial", t)}
    return _finish_report("rap", devs, witness, seed, t0, ens, spec_u, spec_v)


def estimate_rop(
    ens: Ensemble,
    spec_u: ModelSpec,
    spec_v: ModelSpec,
    trials: int,
    seed: int = 0,
    orthogonality: str = "both",
    decoupled: bool = False,
    max_attempts: int = 8,
) -> EstimateReport:
    """Sample max of |<A(u_hat v_hat^T), A(u v^T)>| over orthogonal pairs.

    orthogonality "both" enforces <u, u_hat> = 0 and <v, v_hat> = 0;
    "either" enforces exactly one of the two, alternating sides by
    trial parity. The matrix inner product <u_hat v_hat^T, u v^T>
    vanishes under either constraint, so no identity term is
    subtracted.

    decoupled=True replaces the shared dictionaries with independent
    copies on the hatted side (fresh Gaussian draws per trial; identity
    dictionaries are their own copy), the comparison form used to
    justify reducing to independent factors. Failed orthogonalizations
    resample the whole 4-tuple from the trial stream and are counted in
    the report's resamples field.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if orthogonality not in ("both", "either"):
        raise ValueError("orthogonality must be 'both' or 'either'")
    from .models import orthogonalize_pair

    t0 = time.perf_counter()
    devs = np.empty(trials)
    witness = {}
    resamples = 0
    for t in range(trials):
        rng = rng_for(seed, "trial", t)
        for attempt in range(max_attempts):
            u = sample_model(spec_u, rng)
            v = sample_model(spec_v, rng)
            u_hat0 = sample_model(spec_u, rng)
            v_hat0 = sample_model(spec_v, rng)
            try:
                if orthogonality == "both":
                    u_hat = orthogonalize_pair(u, u_hat0, spec_u)
                    v_hat = orthogonalize_pair(v, v_hat0, spec_v)
                elif t % 2 == 0:
                    u_hat = orthogonalize_pair(u, u_hat0, spec_u)
                    v_hat = v_hat0
                else:
                    u_hat = u_hat0
                    v_hat = orthogonalize_pair(v, v_hat0, spec_v)
                break
            except (OrthogonalizationError, InfeasibleModelError):
                resamples += 1
        else:
            raise InfeasibleModelError(
                f"orthogonalization failed {max_attempts} times in trial {t}"
            )
        p = LiftedPoint(u, v)
        p_hat = LiftedPoint(u_hat, v_hat)
        if decoupled:
            ens_hat = ens.with_dictionaries(
                phi=None if ens.phi is None else _gaussian_dictionary(ens.n, rng)
            )
            ens_plain = ens.with_dictionaries(
                psi=None if ens.psi is None else _gaussian_dictionary(ens.n, rng)
            )
            val = np.vdot(forward(ens_hat, p_hat), forward(ens_plain, p))
        else:
            val = np.vdot(forward(ens, p_hat), forward(ens, p))
        dev = abs(val) / (p.norm_f * p_hat.norm_f)
        devs[t] = dev
        if not witness or dev > witness["deviation"]:
            witness = {"trial": t, "deviation": dev, "u": u, "v": v,
                       "u_hat": u_hat, "v_hat": v_hat,
                       "seed": derive_seed(seed, "trial", t)}
    return _finish_report("rop", devs, witness, seed, t0, ens, spec_u, spec_v,
                          resamples=resamples)


def estimate_rip_matrix(
    A: np.ndarray,
    spec: ModelSpec,
    trials: int,
    seed: int = 0,
) -> EstimateReport:
    """Vector-level isometry deviation of an explicit matrix.

    Sample max of | ||A x||^2 - ||x||^2 | / ||x||^2 over draws from the
    model. Every draw lies in the model set, so the estimate can never
    exceed the exact restricted constant of A at the same level.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[1] != spec.n:
        raise ValueError("A must be m x n with n matching the model")
    t0 = time.perf_counter()
    devs = np.empty(trials)
    witness = {}
    for t in range(trials):
        rng = rng_for(seed, "trial", t)
        x = sample_model(spec, rng)
        nsq = float(np.linalg.norm(x) ** 2)
        dev = abs(float(np.linalg.norm(A @ x) ** 2) - nsq) / nsq
        devs[t] = dev
        if not witness or dev > witness["deviation"]:
            witness = {"trial": t, "deviation": dev, "x": x,
                       "seed": derive_seed(seed, "trial", t)}

    class _Shim:
        n = A.shape[1]
        m = A.shape[0]

    return _finish_report("matrix-rip", devs, witness, seed, t0, _Shim, spec, None)


def exact_rip_small(A: np.ndarray, s: int) -> float:
    """Exact restricted isometry constant by support enumeration.

    max over |J| = s of || A_J^* A_J - I ||_2. Guarded to n <= 16 and
    s <= 4.
    """
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    n = A.shape[1]
    if n > EXACT_RIP_N_GUARD or s > EXACT_RIP_S_GUARD:
        raise ValueError(
            f"exact enumeration is limited to n <= {EXACT_RIP_N_GUARD}, s <= {EXACT_RIP_S_GUARD}"
        )
    if not 1 <= s <= n:
        raise ValueError("need 1 <= s <= n")
    eye = np.eye(s)
    worst = 0.0
    for J in itertools.combinations(range(n), s):
        G = A[:, J]
        gram = G.conj().T @ G - eye
        ev = np.linalg.eigvalsh(gram)
        worst = max(worst, float(max(abs(ev[0]), abs(ev[-1]))))
    return worst


def isotropy_check(
    n: int,
    m: int,
    x: LiftedPoint,
    draws: int,
    seed: int = 0,
    fixed_kind: str = "gaussian",
    average_over: str = "phi",
    omega_mode: str = "without_replacement",
) -> float:
    """Relative error of the Monte Carlo mean of A^* A (X) vs its expectation.

    Holding omega and one dictionary fixed and averaging over fresh
    draws of the other, the expectation is X (Psi^* Psi)^T when the
    left dictionary is averaged out and (Phi^* Phi) X when the right
    one is. Returns ||mean - target||_F / ||target||_F.
    """
    if average_over not in ("phi", "psi"):
        raise ValueError("average_over must be 'phi' or 'psi'")
    if n > ISOTROPY_GUARD:
        raise ValueError(f"isotropy check materializes matrices; n <= {ISOTROPY_GUARD}")
    if draws < 1:
        raise ValueError("draws must be positive")

    setup = rng_for(seed, "setup")
    omega = sample_omega(n, m, omega_mode, setup)
    fixed = None if fixed_kind == "identity" else _gaussian_dictionary(n, setup)
    X = x.dense()

    if average_over == "phi":
        psi_gram = np.eye(n, dtype=complex) if fixed is None else fixed.conj().T @ fixed
        target = X @ psi_gram.T
    else:
        phi_gram = np.eye(n, dtype=complex) if fixed is None else fixed.conj().T @ fixed
        target = phi_gram @ X

    acc = np.zeros((n, n), dtype=complex)
    for k in range(draws):
        fresh = _gaussian_dictionary(n, rng_for(seed, "draw", k))
        if average_over == "phi":
            ens = Ensemble(n=n, m=m, omega=omega, phi_kind="gaussian",
                           psi_kind=fixed_kind, seed=seed, phi=fresh, psi=fixed)
        else:
            ens = Ensemble(n=n, m=m, omega=omega, phi_kind=fixed_kind,
                           psi_kind="gaussian", seed=seed, phi=fixed, psi=fresh)
        acc += adjoint_apply(ens, forward(ens, x))
    mean = acc / draws
    return float(np.linalg.norm(mean - target) / np.linalg.norm(target))


def polarization_check(m_prime: np.ndarray, m_mat: np.ndarray, xi: np.ndarray) -> float:
    """Residual of the complex polarization identity on one vector.

    With <a, b> conjugate linear in a,

        <M' xi, M xi> = (1/4) sum_{alpha in {1,-1,i,-i}} alpha
                         * ||(M + alpha M') xi||^2.

    The weight alpha multiplies M' inside the norm unchanged;
    conjugating it there instead recovers <M xi, M' xi>. Returns the
    absolute residual, zero to rounding for any inputs.
    """
    m_prime = np.asarray(m_prime, dtype=complex)
    m_mat = np.asarray(m_mat, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    a = m_prime @ xi
    b = m_mat @ xi
    lhs = np.vdot(a, b)
    rhs = 0.25 * sum(
        alpha * np.linalg.norm(b + alpha * a) ** 2 for alpha in (1, -1, 1j, -1j)
    )
    return float(abs(lhs - rhs))


def rop_form_samples(
    n: int,
    m: int,
    point4: tuple,
    draws: int,
    seed: int = 0,
    decoupled: bool = False,
    omega_mode: str = "without_replacement",
) -> np.ndarray:
    """Sample the orthogonal-pair cross form over fresh ensembles.

    For a fixed 4-tuple (u, v, u_hat, v_hat), draws the value
    <A(u_hat v_hat^T), A(u v^T)> over independent ensembles, either
    coupled (shared dictionaries) or decoupled (independent copies on
    the hatted side). Under factor-wise orthogonality the two value
    distributions match; tests compare them with a two-sample location
    test.
    """
    u, v, u_hat, v_hat = (np.asarray(w, dtype=complex) for w in point4)
    p, p_hat = LiftedPoint(u, v), LiftedPoint(u_hat, v_hat)
    vals = np.empty(draws, dtype=complex)
    for k in range(draws):
        rng = rng_for(seed, "ens", k)
        omega = sample_omega(n, m, omega_mode, rng)
        phi = _gaussian_dictionary(n, rng)
        psi = _gaussian_dictionary(n, rng)
        base = Ensemble(n=n, m=m, omega=omega, seed=seed, phi=phi, psi=psi)
        if decoupled:
            ens_hat = base.with_dictionaries(phi=_gaussian_dictionary(n, rng))
            ens_plain = base.with_dictionaries(psi=_gaussian_dictionary(n, rng))
            vals[k] = np.vdot(forward(ens_hat, p_hat), forward(ens_plain, p))
        else:
            vals[k] = np.vdot(forward(base, p_hat), forward(base, p))
    return vals
