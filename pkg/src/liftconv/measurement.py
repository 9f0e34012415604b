"""Subsampled circular-convolution measurements of lifted rank-one matrices.

The measurement of X = u v^T is the vector

    A(X)[l] = sqrt(n/m) * (Phi u  circ-conv  Psi v)[omega_l],

equivalently the entrywise pairing <M_l, X> with the measurement matrix

    M_l = (n/sqrt(m)) * Phi^* F^* diag(F e_{omega_l}) conj(F) conj(Psi),

where F is the unitary DFT, Phi and Psi are n x n dictionaries, and
omega is a list of m sample positions. Inner products are conjugate
linear in the first argument throughout (numpy.vdot convention).

Fast paths use FFTs; dense constructions (measurement_matrix,
adjoint_apply, r_matrix) are guarded to small n and exist so the fast
paths can be checked against them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fourier import dft_matrix, fftu, ifftu
from .util import complex_gaussian, rng_for

__all__ = [
    "DENSE_GUARD",
    "R_MATRIX_GUARD",
    "LiftedPoint",
    "Ensemble",
    "sample_omega",
    "forward",
    "forward_dense",
    "measurement_matrix",
    "adjoint_apply",
    "adjoint_actions",
    "PartialMap",
    "partial_forward",
    "r_matrix",
    "xi_vector",
    "lifted_inner",
    "lifted_dist",
]

DENSE_GUARD = 256
R_MATRIX_GUARD = 64

DICTIONARY_KINDS = ("gaussian", "identity")
OMEGA_MODES = ("without_replacement", "iid_uniform")


@dataclass(frozen=True)
class LiftedPoint:
    """Rank-one point u v^T held in factored form."""

    u: np.ndarray
    v: np.ndarray

    @property
    def norm_f(self) -> float:
        """Frobenius norm of u v^T."""
        return float(np.linalg.norm(self.u) * np.linalg.norm(self.v))

    def dense(self) -> np.ndarray:
        return np.outer(self.u, self.v)


def lifted_inner(p_hat: LiftedPoint, p: LiftedPoint) -> complex:
    """<u_hat v_hat^T, u v^T> = <u_hat, u> <v_hat, v>, conjugating the hats."""
    return complex(np.vdot(p_hat.u, p.u) * np.vdot(p_hat.v, p.v))


def lifted_dist(p: LiftedPoint, q: LiftedPoint) -> float:
    """Frobenius distance between two factored rank-one matrices."""
    sq = (
        p.norm_f**2
        + q.norm_f**2
        - 2.0 * np.real(lifted_inner(p, q))
    )
    return float(np.sqrt(max(sq, 0.0)))


def sample_omega(n: int, m: int, mode: str, rng: np.random.Generator) -> np.ndarray:
    """Draw m sample positions from {0, ..., n-1}.

    "without_replacement" gives distinct positions (requires m <= n);
    "iid_uniform" draws independently and may repeat.
    """
    if mode not in OMEGA_MODES:
        raise ValueError(f"unknown omega mode {mode!r}")
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    if mode == "without_replacement":
        if m > n:
            raise ValueError("m > n is impossible without replacement")
        return np.asarray(rng.choice(n, size=m, replace=False), dtype=np.intp)
    return np.asarray(rng.integers(0, n, size=m), dtype=np.intp)


def _gaussian_dictionary(n: int, rng: np.random.Generator) -> np.ndarray:
    # i.i.d. CN(0, 1/n) entries, so columns have unit expected norm
    return complex_gaussian(rng, (n, n)) / np.sqrt(n)


@dataclass
class Ensemble:
    """One frozen draw of the measurement model.

    Dictionaries are materialized dense except for the identity, which
    is stored implicitly as None. Serialization keeps {n, m, omega,
    phi_kind, psi_kind, seed} and regenerates the dictionaries from the
    seed, never storing matrix entries.
    """

    n: int
    m: int
    omega: np.ndarray
    phi_kind: str = "gaussian"
    psi_kind: str = "gaussian"
    seed: int = 0
    phi: np.ndarray | None = field(default=None, repr=False)
    psi: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.m > self.n:
            raise ValueError("need 1 <= m <= n")
        self.omega = np.asarray(self.omega, dtype=np.intp)
        if self.omega.shape != (self.m,):
            raise ValueError("omega must hold exactly m indices")
        if np.any(self.omega < 0) or np.any(self.omega >= self.n):
            raise ValueError("omega indices must lie in [0, n)")
        for kind, mat in ((self.phi_kind, self.phi), (self.psi_kind, self.psi)):
            if kind not in DICTIONARY_KINDS:
                raise ValueError(f"unknown dictionary kind {kind!r}")
            if kind == "identity" and mat is not None:
                raise ValueError("identity dictionaries are stored implicitly")
            if mat is not None and mat.shape != (self.n, self.n):
                raise ValueError("dictionary must be n x n")

    @classmethod
    def generate(
        cls,
        n: int,
        m: int,
        phi_kind: str = "gaussian",
        psi_kind: str = "gaussian",
        seed: int = 0,
        omega_mode: str = "without_replacement",
    ) -> "Ensemble":
        """Draw omega and the dictionaries from streams derived from seed.

        The three draws use independent derived streams, so the
        dictionaries can be regenerated later from the seed alone even
        though omega is stored explicitly.
        """
        phi = None if phi_kind == "identity" else _gaussian_dictionary(n, rng_for(seed, "phi"))
        psi = None if psi_kind == "identity" else _gaussian_dictionary(n, rng_for(seed, "psi"))
        omega = sample_omega(n, m, omega_mode, rng_for(seed, "omega"))
        return cls(n=n, m=m, omega=omega, phi_kind=phi_kind, psi_kind=psi_kind,
                   seed=seed, phi=phi, psi=psi)

    # -- dictionary actions -------------------------------------------------

    def apply_phi(self, u: np.ndarray) -> np.ndarray:
        return u if self.phi is None else self.phi @ u

    def apply_psi(self, v: np.ndarray) -> np.ndarray:
        return v if self.psi is None else self.psi @ v

    def phi_matrix(self) -> np.ndarray:
        return np.eye(self.n, dtype=complex) if self.phi is None else self.phi

    def psi_matrix(self) -> np.ndarray:
        return np.eye(self.n, dtype=complex) if self.psi is None else self.psi

    def with_dictionaries(self, phi=None, psi=None, phi_kind=None, psi_kind=None) -> "Ensemble":
        """Copy sharing omega, with one or both dictionaries replaced."""
        return Ensemble(
            n=self.n, m=self.m, omega=self.omega.copy(),
            phi_kind=phi_kind if phi_kind is not None else self.phi_kind,
            psi_kind=psi_kind if psi_kind is not None else self.psi_kind,
            seed=self.seed,
            phi=self.phi if phi is None else phi,
            psi=self.psi if psi is None else psi,
        )

    # -- serialization ------------------------------------------------------

    def to_config(self) -> dict:
        return {
            "n": int(self.n),
            "m": int(self.m),
            "omega": [int(i) for i in self.omega],
            "phi_kind": self.phi_kind,
            "psi_kind": self.psi_kind,
            "seed": int(self.seed),
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "Ensemble":
        """Rebuild from a config record, regenerating the dictionaries."""
        n, seed = int(cfg["n"]), int(cfg["seed"])
        phi_kind, psi_kind = cfg["phi_kind"], cfg["psi_kind"]
        phi = None if phi_kind == "identity" else _gaussian_dictionary(n, rng_for(seed, "phi"))
        psi = None if psi_kind == "identity" else _gaussian_dictionary(n, rng_for(seed, "psi"))
        return cls(n=n, m=int(cfg["m"]), omega=np.asarray(cfg["omega"], dtype=np.intp),
                   phi_kind=phi_kind, psi_kind=psi_kind, seed=seed, phi=phi, psi=psi)


# -- forward and adjoint ----------------------------------------------------


def forward(ens: Ensemble, p: LiftedPoint) -> np.ndarray:
    """Measure the rank-one point: sqrt(n/m) * S_omega(Phi u conv Psi v).

    FFT evaluation; scaled to agree entrywise with <M_l, u v^T>.
    """
    x = ens.apply_phi(np.asarray(p.u, dtype=complex))
    y = ens.apply_psi(np.asarray(p.v, dtype=complex))
    conv = np.fft.ifft(np.fft.fft(x) * np.fft.fft(y))
    return np.sqrt(ens.n / ens.m) * conv[ens.omega]


def forward_dense(ens: Ensemble, X: np.ndarray) -> np.ndarray:
    """Measure an arbitrary matrix: A(X)[l] = <M_l, X>.

    Uses A(X) = (n/sqrt(m)) S_omega F^* diag(F (Phi X Psi^T) F); costs
    two dense products plus FFTs. Guarded to n <= DENSE_GUARD; for
    rank-one points use forward.
    """
    n, m = ens.n, ens.m
    if n > DENSE_GUARD:
        raise ValueError(
            f"dense evaluation is limited to n <= {DENSE_GUARD}; use forward"
        )
    X = np.asarray(X, dtype=complex)
    if X.shape != (n, n):
        raise ValueError("X must be n x n")
    Z = X if ens.phi is None else ens.phi @ X
    Z = Z if ens.psi is None else Z @ ens.psi.T
    d = np.diagonal(np.fft.fft(np.fft.fft(Z, axis=0), axis=1) / n).copy()
    return (n**1.5 / np.sqrt(m)) * np.fft.ifft(d)[ens.omega]


def measurement_matrix(ens: Ensemble, ell: int) -> np.ndarray:
    """Dense measurement matrix M_l for one sample position (0-based l).

    Guarded to n <= DENSE_GUARD.
    """
    n, m = ens.n, ens.m
    if n > DENSE_GUARD:
        raise ValueError(f"measurement matrices are materialized only for n <= {DENSE_GUARD}")
    if not 0 <= ell < m:
        raise ValueError("ell out of range")
    F = dft_matrix(n)
    fcol = F[:, ens.omega[ell]]
    core = (F.conj().T * fcol[None, :]) @ F.conj()
    left = core if ens.phi is None else ens.phi.conj().T @ core
    full = left if ens.psi is None else left @ ens.psi.conj()
    return (n / np.sqrt(m)) * full


def _scatter(ens: Ensemble, b: np.ndarray) -> np.ndarray:
    acc = np.zeros(ens.n, dtype=complex)
    np.add.at(acc, ens.omega, b)
    return acc


def adjoint_apply(ens: Ensemble, b: np.ndarray) -> np.ndarray:
    """Dense adjoint: sum_l b_l M_l, materialized. Guarded to n <= DENSE_GUARD."""
    n, m = ens.n, ens.m
    if n > DENSE_GUARD:
        raise ValueError(
            f"dense adjoint is limited to n <= {DENSE_GUARD}; use adjoint_actions"
        )
    b = np.asarray(b, dtype=complex)
    if b.shape != (m,):
        raise ValueError("b must have length m")
    F = dft_matrix(n)
    d = F @ _scatter(ens, b)
    core = F.conj().T @ (d[:, None] * F.conj())
    left = core if ens.phi is None else ens.phi.conj().T @ core
    return (n / np.sqrt(m)) * (left if ens.psi is None else left @ ens.psi.conj())


def adjoint_actions(ens: Ensemble, b: np.ndarray):
    """Implicit adjoint T = sum_l b_l M_l as a pair (T @ w, T^* @ w).

    O(n log n) plus one dictionary product per application; no guard.
    """
    n, m = ens.n, ens.m
    b = np.asarray(b, dtype=complex)
    if b.shape != (m,):
        raise ValueError("b must have length m")
    d = fftu(_scatter(ens, b))
    scale = n / np.sqrt(m)

    def matvec(w: np.ndarray) -> np.ndarray:
        t = w if ens.psi is None else ens.psi.conj() @ w
        s = np.conj(fftu(np.conj(t)))          # conj(F) @ t
        s = ifftu(d * s)                       # F^* diag(d)
        return scale * (s if ens.phi is None else ens.phi.conj().T @ s)

    def rmatvec(w: np.ndarray) -> np.ndarray:
        t = w if ens.phi is None else ens.phi @ w
        s = fftu(np.conj(d) * fftu(t))         # F diag(conj d) F
        return scale * (s if ens.psi is None else ens.psi.T @ s)

    return matvec, rmatvec


@dataclass
class PartialMap:
    """Linear map w -> A(w v0^T) or w -> A(u0 w^T) with its adjoint."""

    ens: Ensemble
    side: str
    fixed_hat: np.ndarray  # unnormalized FFT of the fixed factor's image

    def apply(self, w: np.ndarray) -> np.ndarray:
        ens = self.ens
        if self.side == "left":
            img = ens.apply_phi(w)
        else:
            img = ens.apply_psi(w)
        conv = np.fft.ifft(np.fft.fft(img) * self.fixed_hat)
        return np.sqrt(ens.n / ens.m) * conv[ens.omega]

    def adjoint(self, b: np.ndarray) -> np.ndarray:
        ens = self.ens
        s = ifftu(np.conj(self.fixed_hat) * fftu(_scatter(ens, b)))
        s *= np.sqrt(ens.n / ens.m)
        if self.side == "left":
            return s if ens.phi is None else ens.phi.conj().T @ s
        return s if ens.psi is None else ens.psi.conj().T @ s


def partial_forward(ens: Ensemble, side: str, fixed: np.ndarray) -> PartialMap:
    """Freeze one factor of the bilinear measurement.

    side "left" freezes v0 = fixed and maps u to A(u v0^T); side
    "right" freezes u0 and maps v to A(u0 v^T). The returned object
    carries the matching adjoint, verified by the balance tests.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    fixed = np.asarray(fixed, dtype=complex)
    if fixed.shape != (ens.n,):
        raise ValueError("fixed factor must have length n")
    if np.linalg.norm(fixed) == 0:
        raise ValueError("fixed factor must be nonzero")
    if side == "left":
        fixed_hat = np.fft.fft(ens.apply_psi(fixed))
    else:
        fixed_hat = np.fft.fft(ens.apply_phi(fixed))
    return PartialMap(ens=ens, side=side, fixed_hat=fixed_hat)


# -- flattened operator pieces ----------------------------------------------


def r_matrix(ens: Ensemble, p: LiftedPoint) -> np.ndarray:
    """m x n^2 matrix u^T kron (sqrt(n/m) S_omega F^* diag(F Psi v)).

    Applied to xi_vector(ens) it reproduces forward(ens, p). Guarded to
    n <= R_MATRIX_GUARD.
    """
    n, m = ens.n, ens.m
    if n > R_MATRIX_GUARD:
        raise ValueError(f"r_matrix is materialized only for n <= {R_MATRIX_GUARD}")
    F = dft_matrix(n)
    d = F @ ens.apply_psi(np.asarray(p.v, dtype=complex))
    B = np.sqrt(n / m) * ((F.conj().T)[ens.omega, :] * d[None, :])
    return np.kron(np.asarray(p.u, dtype=complex).reshape(1, n), B)


def xi_vector(ens: Ensemble) -> np.ndarray:
    """Column-stacked sqrt(n) * vec(F Phi), the flattened dictionary."""
    n = ens.n
    if n > R_MATRIX_GUARD:
        raise ValueError(f"xi_vector is materialized only for n <= {R_MATRIX_GUARD}")
    F = dft_matrix(n)
    return np.sqrt(n) * (F @ ens.phi_matrix()).flatten(order="F")
