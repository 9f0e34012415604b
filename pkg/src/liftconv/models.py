"""Restricted signal models.

Three families of admissible coefficient vectors:

* exactly sparse vectors, at most ``s`` nonzero entries;
* approximately sparse vectors, ``||x||_1 <= sqrt(s) * ||x||_2``
  (a superset of the exact family, by Cauchy-Schwarz);
* spectrally flat vectors, whose unitary-DFT energy peak is at most
  ``mu`` times the average bin energy.

The module provides the membership predicates, the projections used to
push a vector into a model set, a rejection/alternation sampler, and a
Gram-Schmidt routine that builds model-feasible orthogonal partners.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier import fftu, ifftu
from .util import complex_gaussian, unit

__all__ = [
    "ZERO_TOL",
    "FLATNESS_SLACK",
    "ModelSpec",
    "InfeasibleModelError",
    "FlatProjectionError",
    "OrthogonalizationError",
    "as_signal",
    "spectral_flatness",
    "in_gamma",
    "in_tilde_gamma",
    "hard_threshold",
    "project_flat",
    "sample_model",
    "orthogonalize_pair",
]

# An entry counts as zero when its modulus is below ZERO_TOL times the
# largest modulus in the vector.
ZERO_TOL = 1e-12

# Numerical headroom on spectral-flatness membership tests.
FLATNESS_SLACK = 1e-9


class InfeasibleModelError(RuntimeError):
    """The sampler exhausted its restart budget for the requested model."""


class FlatProjectionError(RuntimeError):
    """Flat projection failed to meet its contract; carries the last iterate."""

    def __init__(self, message: str, last_iterate: np.ndarray):
        super().__init__(message)
        self.last_iterate = last_iterate


class OrthogonalizationError(RuntimeError):
    """No model-feasible orthogonal partner was found."""


def as_signal(x, n: int | None = None) -> np.ndarray:
    """Coerce to a finite complex 1-D array, optionally of length n."""
    arr = np.asarray(x, dtype=complex)
    if arr.ndim != 1:
        raise ValueError("signals are one-dimensional arrays")
    if n is not None and arr.size != n:
        raise ValueError(f"expected length {n}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal entries must be finite")
    return arr


@dataclass(frozen=True)
class ModelSpec:
    """Description of one restricted signal family.

    Parameters
    ----------
    n : int
        Ambient dimension.
    s : int
        Sparsity level, 1 <= s <= n.
    mu : float or None
        Spectral-flatness cap in [1, n]; None disables the constraint.
    flavor : str
        "exact" uses the hard support-count predicate, "approximate"
        the l1/l2 relaxation.
    side : str
        Which dictionary this coefficient vector rides through,
        "left" or "right". Metadata only; it does not change sampling.
    """

    n: int
    s: int
    mu: float | None = None
    flavor: str = "exact"
    side: str = "left"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 1 <= self.s <= self.n:
            raise ValueError("need 1 <= s <= n")
        if self.mu is not None and not 1.0 <= self.mu <= self.n:
            raise ValueError("need 1 <= mu <= n")
        if self.flavor not in ("exact", "approximate"):
            raise ValueError("flavor must be 'exact' or 'approximate'")
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")

    def admits(self, x: np.ndarray) -> bool:
        """Membership test for this model, with flatness headroom."""
        if self.flavor == "exact":
            sparse_ok = in_gamma(x, self.s)
        else:
            sparse_ok = in_tilde_gamma(x, self.s)
        if not sparse_ok:
            return False
        if self.mu is None:
            return True
        return spectral_flatness(x) <= self.mu + FLATNESS_SLACK


def spectral_flatness(x) -> float:
    """Peak-to-average energy ratio of the DFT of x.

    Returns n * ||Fx||_inf^2 / ||Fx||_2^2, which lies in [1, n] and is
    invariant under scaling and under the DFT normalization convention.

    Raises
    ------
    ValueError
        If x is the zero vector.
    """
    x = as_signal(x)
    spectrum = np.abs(np.fft.fft(x)) ** 2
    total = spectrum.sum()
    if total == 0:
        raise ValueError("spectral flatness of the zero vector is undefined")
    return float(x.size * spectrum.max() / total)


def in_gamma(x, s: int) -> bool:
    """True when x has at most s effectively nonzero entries.

    An entry is effectively nonzero when its modulus exceeds
    ZERO_TOL * max |x_i|. The zero vector belongs to every level.
    """
    x = as_signal(x)
    if not 1 <= s <= x.size:
        raise ValueError("need 1 <= s <= n")
    mags = np.abs(x)
    peak = mags.max()
    if peak == 0:
        return True
    return int(np.count_nonzero(mags > ZERO_TOL * peak)) <= s


def in_tilde_gamma(x, s: int) -> bool:
    """True when ||x||_1 <= sqrt(s) * ||x||_2.

    Contains every vector accepted by in_gamma at the same level, by
    Cauchy-Schwarz. Scale-invariant.

    Raises
    ------
    ValueError
        If x is the zero vector.
    """
    x = as_signal(x)
    if not 1 <= s <= x.size:
        raise ValueError("need 1 <= s <= n")
    l2 = np.linalg.norm(x)
    if l2 == 0:
        raise ValueError("membership undefined for the zero vector")
    # relative slack so boundary cases (equal-modulus supports) are stable
    return float(np.abs(x).sum()) <= np.sqrt(s) * l2 * (1 + 1e-12)


def hard_threshold(x, s: int) -> np.ndarray:
    """Keep the s entries of largest modulus, zero the rest.

    Ties are broken toward the lowest index. Among all vectors supported
    on s coordinates of x this is a Euclidean-nearest choice.
    """
    x = as_signal(x)
    if not 1 <= s <= x.size:
        raise ValueError("need 1 <= s <= n")
    if s >= x.size:
        return x.copy()
    order = np.argsort(-np.abs(x), kind="stable")
    out = np.zeros_like(x)
    keep = order[:s]
    out[keep] = x[keep]
    return out


def project_flat(x, mu: float, max_bisect: int = 120) -> np.ndarray:
    """Return the nearest-in-spirit vector with spectral flatness <= mu.

    Works on DFT magnitudes, preserving phases and the l2 norm: bins
    above the admissible ceiling sqrt(mu/n)*||x||_2 are clipped to it,
    and the removed energy is restored by raising the low bins to a
    common floor found by bisection (the one-shot limit of repeated
    clip-and-renormalize, which stalls when low bins are exactly zero).

    Returns x unchanged (a copy) when it already satisfies the cap.

    Raises
    ------
    ValueError
        If x is zero or mu is outside [1, n].
    FlatProjectionError
        If the bisection cannot meet the contract; carries the last
        iterate in ``last_iterate``.
    """
    x = as_signal(x)
    n = x.size
    if not 1.0 <= mu <= n:
        raise ValueError("need 1 <= mu <= n")
    nrm = np.linalg.norm(x)
    if nrm == 0:
        raise ValueError("cannot flatten the zero vector")
    if spectral_flatness(x) <= mu:
        return x.copy()

    spec = fftu(x)
    mags = np.abs(spec)
    cap = np.sqrt(mu / n) * nrm
    target = nrm * nrm

    lo, hi = 0.0, cap
    for _ in range(max_bisect):
        mid = 0.5 * (lo + hi)
        power = float(np.sum(np.clip(mags, mid, cap) ** 2))
        if power < target:
            lo = mid
        else:
            hi = mid
    floor = 0.5 * (lo + hi)

    shaped = np.clip(mags, floor, cap)
    phases = np.exp(1j * np.angle(spec))
    new_spec = shaped * phases
    new_spec *= nrm / np.linalg.norm(new_spec)
    out = ifftu(new_spec)

    if spectral_flatness(out) > mu + FLATNESS_SLACK:
        raise FlatProjectionError("flat projection missed its target", out)
    return out


def sample_model(
    spec: ModelSpec,
    rng: np.random.Generator,
    max_rounds: int = 50,
    max_restarts: int = 20,
) -> np.ndarray:
    """Draw a unit-norm vector from the model described by spec.

    Construction: a uniformly random support of size spec.s is filled
    with i.i.d. complex Gaussian entries. When a flatness cap is set,
    the draw alternates between flat projection and re-thresholding
    until both predicates pass; after ``max_rounds`` alternations the
    support is resampled.

    Note an exactly s-sparse vector always has flatness at most s, so
    specs with mu >= s accept the raw Gaussian draw.

    Raises
    ------
    InfeasibleModelError
        After ``max_restarts`` supports fail to produce a member.
    """
    n, s = spec.n, spec.s
    for _ in range(max_restarts):
        support = rng.choice(n, size=s, replace=False)
        x = np.zeros(n, dtype=complex)
        x[support] = complex_gaussian(rng, s)
        if np.linalg.norm(x) == 0:
            continue
        if spec.mu is None:
            x = unit(x)
            if spec.admits(x):
                return x
            continue
        for _ in range(max_rounds):
            if spec.admits(x):
                return unit(x)
            x = project_flat(x, spec.mu)
            if spec.admits(x):
                return unit(x)
            x = hard_threshold(x, s)
            if np.linalg.norm(x) == 0:
                break
    raise InfeasibleModelError(
        f"no admissible draw for {spec} after {max_restarts} restarts"
    )


def orthogonalize_pair(
    u,
    u_hat,
    spec: ModelSpec,
    max_rounds: int = 50,
    tol: float = 1e-10,
) -> np.ndarray:
    """Turn u_hat into a unit-norm model member exactly orthogonal to u.

    Gram-Schmidt removes the u-component, the candidate is re-projected
    into the model set, and a final Gram-Schmidt step restricted to the
    candidate's support restores exact orthogonality without breaking
    sparsity. When u vanishes on that support the candidate is already
    orthogonal and the final step is skipped.

    Raises
    ------
    ValueError
        If u is zero.
    OrthogonalizationError
        If u_hat is parallel to u, or no feasible vector emerges within
        ``max_rounds``.
    """
    u = as_signal(u, spec.n)
    u_hat = as_signal(u_hat, spec.n)
    nu = np.linalg.norm(u)
    if nu == 0:
        raise ValueError("u must be nonzero")

    w = u_hat - (np.vdot(u, u_hat) / nu**2) * u
    if np.linalg.norm(w) <= 1e-12 * np.linalg.norm(u_hat):
        raise OrthogonalizationError("u_hat is parallel to u")

    for _ in range(max_rounds):
        w = hard_threshold(w, spec.s)
        if spec.mu is not None and np.linalg.norm(w) > 0:
            if spectral_flatness(w) > spec.mu + FLATNESS_SLACK:
                w = hard_threshold(project_flat(w, spec.mu), spec.s)
        support = np.flatnonzero(w)
        if support.size == 0:
            raise OrthogonalizationError("candidate collapsed to zero")
        u_sub = np.zeros_like(u)
        u_sub[support] = u[support]
        nsub = np.linalg.norm(u_sub)
        if nsub > 0:
            w = w - (np.vdot(u_sub, w) / nsub**2) * u_sub
        if np.linalg.norm(w) == 0:
            raise OrthogonalizationError("candidate collapsed to zero")
        w = unit(w)
        if spec.admits(w) and abs(np.vdot(u, w)) <= tol * nu:
            return w
    raise OrthogonalizationError(
        f"no feasible orthogonal partner for {spec} after {max_rounds} rounds"
    )
