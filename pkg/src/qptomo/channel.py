"""Choi representation of channels, tomography setups and the likelihood model.

A channel is represented by its d^2 x d^2 Choi operator on the space
input (x) output, built from the matrix units E_ij as::

    C = sum_ij |i><j| (x) channel(|i><j|)

With column-stacking vectorization this coincides with
``sum_k vec(K_k) vec(K_k)^dagger`` for Kraus operators K_k. A channel is
completely positive iff C >= 0 and trace preserving iff the partial trace
over the output factor equals the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionError, DomainError
from .linalg import (
    hermitize,
    kron,
    partial_trace_in,
    partial_trace_out,
    vec,
    vec_inv,
)

#: CPTP acceptance tolerances: smallest admissible eigenvalue and largest
#: admissible Frobenius distance of the output partial trace from identity.
EPS_CP = 1e-8
EPS_TP = 1e-6

#: Default probability floor for the heralded conditioning step.
EPS_COND = 1e-16


def choi_from_kraus(kraus) -> np.ndarray:
    """Build the Choi operator of ``rho -> sum_k K_k rho K_k^dagger``."""
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    if not kraus:
        raise DimensionError("need at least one Kraus operator")
    d = kraus[0].shape[0]
    for k in kraus:
        if k.shape != (d, d):
            raise DimensionError(f"Kraus operators must all be {d}x{d}, got {k.shape}")
    c = np.zeros((d * d, d * d), dtype=complex)
    for k in kraus:
        v = vec(k)
        c += np.outer(v, v.conj())
    return hermitize(c)


def identity_choi(d: int) -> np.ndarray:
    """Choi operator of the identity channel (rank 1, trace d)."""
    return choi_from_kraus([np.eye(d)])


def apply_channel(choi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Act on a state: Tr_in[(rho^T (x) I) C]."""
    rho = np.asarray(rho)
    d = rho.shape[0]
    if rho.shape != (d, d):
        raise DimensionError(f"state must be square, got {rho.shape}")
    choi = np.asarray(choi)
    if choi.shape != (d * d, d * d):
        raise DimensionError(f"Choi shape {choi.shape} does not match d={d}")
    return partial_trace_in(kron(rho.T, np.eye(d)) @ choi, d)


def cptp_residuals(choi: np.ndarray, d: int | None = None) -> tuple[float, float]:
    """(min eigenvalue, Frobenius distance of Tr_out to identity)."""
    choi = np.asarray(choi)
    if d is None:
        d = round(choi.shape[0] ** 0.5)
    min_eig = float(np.linalg.eigvalsh(hermitize(choi)).min())
    tp_dist = float(np.linalg.norm(partial_trace_out(choi, d) - np.eye(d)))
    return min_eig, tp_dist


def is_cptp(choi: np.ndarray, eps_cp: float = EPS_CP, eps_tp: float = EPS_TP) -> bool:
    """Check the CPTP invariants within the standard tolerances."""
    min_eig, tp_dist = cptp_residuals(choi)
    return min_eig >= -eps_cp and tp_dist <= eps_tp


class TomographySetup:
    """Ordered preparation states and POVM elements, with the design matrix.

    Validates that every preparation is positive semidefinite with unit
    trace and that the POVM elements resolve to the identity. The design
    matrix maps vec(Choi) to the flat vector of outcome probabilities,
    row order (i, j) with the preparation index i major.
    """

    def __init__(self, preparations, povm, validate: bool = True):
        self.preparations = [np.asarray(r, dtype=complex) for r in preparations]
        self.povm = [np.asarray(e, dtype=complex) for e in povm]
        if not self.preparations or not self.povm:
            raise DomainError("setup needs at least one preparation and one POVM element")
        d = self.preparations[0].shape[0]
        for op in self.preparations + self.povm:
            if op.shape != (d, d):
                raise DimensionError(f"operator shape {op.shape} does not match d={d}")
        self.d = d
        if validate:
            self._validate()

    def _validate(self) -> None:
        for i, rho in enumerate(self.preparations):
            if np.abs(rho - rho.conj().T).max() > 1e-10:
                raise DomainError(f"preparation {i} is not Hermitian")
            if np.linalg.eigvalsh(hermitize(rho)).min() < -1e-10:
                raise DomainError(f"preparation {i} is not positive semidefinite")
            if abs(np.trace(rho) - 1.0) > 1e-10:
                raise DomainError(f"preparation {i} does not have unit trace")
        total = sum(self.povm)
        if np.abs(total - np.eye(self.d)).max() > 1e-10:
            raise DomainError("POVM elements do not resolve to the identity")

    @property
    def n_prep(self) -> int:
        return len(self.preparations)

    @property
    def n_povm(self) -> int:
        return len(self.povm)

    @cached_property
    def design(self) -> np.ndarray:
        return build_design(self)


def build_design(setup: TomographySetup) -> np.ndarray:
    """Stack the rows vec(rho_i (x) E_j^T)^T into the design matrix A.

    The row order is i major, j minor. With column-stacking vec this gives
    ``A @ vec(C) == Tr([rho_i^T (x) E_j] C)`` entrywise, i.e. the Born-rule
    probabilities of the forward model.
    """
    rows = np.empty(
        (setup.n_prep * setup.n_povm, setup.d**4), dtype=complex
    )
    r = 0
    for rho in setup.preparations:
        for e in setup.povm:
            rows[r] = vec(kron(rho, e.T))
            r += 1
    return rows


def forward_probs(choi: np.ndarray, setup: TomographySetup) -> np.ndarray:
    """Outcome probabilities p_ij = Tr([rho_i^T (x) E_j] C), flat, i major."""
    choi = np.asarray(choi)
    if choi.shape != (setup.d**2, setup.d**2):
        raise DimensionError(
            f"Choi shape {choi.shape} does not match setup d={setup.d}"
        )
    return (setup.design @ vec(choi)).real


def condition_probs(p: np.ndarray, eps_cond: float = EPS_COND) -> tuple[np.ndarray, bool]:
    """Floor probabilities at eps_cond; herald whether anything was raised.

    The flag makes the stall fix a visible event rather than a silent data
    modification, so callers can warn the user.
    """
    if eps_cond <= 0:
        raise DomainError(f"eps_cond must be positive, got {eps_cond}")
    p = np.asarray(p, dtype=float)
    heralded = bool((p < eps_cond).any())
    return np.maximum(p, eps_cond), heralded


@dataclass
class CountsTable:
    """Per-preparation outcome frequencies, normalized so each row sums to 1.

    ``raw_totals`` keeps the original sample sizes N_i when the table came
    from counted data; it is None for infinite-data (exact probability)
    tables.
    """

    n: np.ndarray
    raw_totals: np.ndarray | None = None

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=float)
        if self.n.ndim != 2:
            raise DimensionError("counts table must be 2-D (preparation x outcome)")
        if self.n.min() < -1e-12:
            raise DomainError(f"negative frequency {self.n.min():.3e}")
        sums = self.n.sum(axis=1)
        if np.abs(sums - 1.0).max() > 1e-9:
            raise DomainError("rows must be normalized to 1 within 1e-9")
        self.n = np.clip(self.n, 0.0, None)
        self.n /= self.n.sum(axis=1, keepdims=True)
        if self.raw_totals is not None:
            self.raw_totals = np.asarray(self.raw_totals, dtype=np.int64)

    @classmethod
    def from_raw(cls, counts: np.ndarray) -> "CountsTable":
        counts = np.asarray(counts, dtype=float)
        totals = counts.sum(axis=1)
        if (totals <= 0).any():
            raise DomainError("every preparation needs at least one count")
        return cls(counts / totals[:, None], raw_totals=totals.astype(np.int64))

    @property
    def flat(self) -> np.ndarray:
        return self.n.reshape(-1)


def _check_counts(setup: TomographySetup, counts: CountsTable) -> None:
    if counts.n.shape != (setup.n_prep, setup.n_povm):
        raise DimensionError(
            f"counts shape {counts.n.shape} does not match setup "
            f"({setup.n_prep} x {setup.n_povm})"
        )


def neg_log_likelihood(
    choi: np.ndarray,
    setup: TomographySetup,
    counts: CountsTable,
    eps_cond: float = EPS_COND,
) -> float:
    """Multinomial cost f(C) = -sum_ij n_ij ln p_ij with conditioned p."""
    _check_counts(setup, counts)
    p, _ = condition_probs(forward_probs(choi, setup), eps_cond)
    return float(-(counts.flat @ np.log(p)))


def gradient(
    choi: np.ndarray,
    setup: TomographySetup,
    counts: CountsTable,
    eps_cond: float = EPS_COND,
) -> np.ndarray:
    """Frobenius gradient of the cost, the Hermitian matrix -A^dagger eta.

    eta_ij = n_ij / p_ij with the same conditioning floor as the cost, so
    the pair stays consistent for line searches and finite differences.
    """
    _check_counts(setup, counts)
    p, _ = condition_probs(forward_probs(choi, setup), eps_cond)
    eta = counts.flat / p
    d2 = setup.d**2
    return hermitize(vec_inv(-(setup.design.conj().T @ eta), d2, d2))
