"""Random channel ensembles, standard setups, data simulation and metrics.

Random CPTP maps come from normalizing a complex Wishart factor: with X a
d^2 x M standard complex Gaussian matrix and W = Tr_out(X X^dagger),

    B = (W^{-1/2} (x) I) X X^dagger (W^{-1/2} (x) I)

has Tr_out(B) = I by construction and Kraus rank at most M. The quasi-pure
ensemble mixes d^2 rank-1 draws with geometrically decaying weights whose
squares sum to a target (0.9 by default), which keeps the purity of the
mixture at or above that target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import TomographySetup, CountsTable, forward_probs, is_cptp
from .errors import DimensionError, DomainError
from .linalg import hermitize, kron, partial_trace_out, psd_sqrt_inv, trace_norm


@dataclass(frozen=True)
class EnsembleSpec:
    """Recipe for one random CPTP map."""

    d: int
    kraus_rank: int
    kind: str = "full_rank"  # "full_rank" | "quasi_pure"
    target_purity_sum: float = 0.9
    rng_seed: int = 0

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"dimension must be at least 2, got {self.d}")
        if self.kraus_rank < 1:
            raise DomainError(f"Kraus rank must be at least 1, got {self.kraus_rank}")
        if self.kind not in ("full_rank", "quasi_pure"):
            raise DomainError(f"unknown ensemble kind {self.kind!r}")
        if self.kind == "quasi_pure" and not (
            1.0 / self.d**2 < self.target_purity_sum <= 1.0
        ):
            raise DomainError(
                f"target purity sum {self.target_purity_sum} infeasible for d={self.d}"
            )


@dataclass(frozen=True)
class SimulationSpec:
    """Sample size per preparation; ``n_samples=None`` means infinite data."""

    n_samples: int | None
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_samples is not None and self.n_samples < 1:
            raise DomainError(f"sample size must be at least 1, got {self.n_samples}")


def _full_rank_choi(rng: np.random.Generator, d: int, kraus_rank: int) -> np.ndarray:
    x = rng.standard_normal((d * d, kraus_rank)) + 1j * rng.standard_normal(
        (d * d, kraus_rank)
    )
    g = x @ x.conj().T
    s = psd_sqrt_inv(partial_trace_out(g, d))
    sk = kron(s, np.eye(d))
    return hermitize(sk @ g @ sk)


def random_cptp(spec: EnsembleSpec) -> np.ndarray:
    """Draw a full-rank-style random CPTP Choi operator (Kraus rank <= M)."""
    if spec.kind != "full_rank":
        raise DomainError(f"random_cptp expects kind 'full_rank', got {spec.kind!r}")
    rng = np.random.default_rng(spec.rng_seed)
    return _full_rank_choi(rng, spec.d, spec.kraus_rank)


def quasi_pure_weights(m: int, target_purity_sum: float) -> np.ndarray:
    """Geometric weights P_i with sum 1 and sum of squares = target.

    The ratio is pinned by bisection: the squared sum decreases
    monotonically from 1 (all weight on one term) to 1/m (uniform) as the
    ratio grows from 0 to 1.
    """
    if not (1.0 / m < target_purity_sum <= 1.0):
        raise DomainError(f"target {target_purity_sum} infeasible for {m} weights")
    if target_purity_sum == 1.0:
        w = np.zeros(m)
        w[0] = 1.0
        return w

    def sq_sum(r: float) -> float:
        w = r ** np.arange(m)
        w = w / w.sum()
        return float((w**2).sum())

    lo, hi = 1e-16, 1.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if sq_sum(mid) > target_purity_sum:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    r = (lo + hi) / 2
    w = r ** np.arange(m)
    w = w / w.sum()
    if abs((w**2).sum() - target_purity_sum) > 1e-10:
        raise DomainError(f"weight solve failed for target {target_purity_sum}")
    return w


def random_quasi_pure(spec: EnsembleSpec) -> np.ndarray:
    """Convex mixture of d^2 rank-1 TP Chois with purity >= the target."""
    if spec.kind != "quasi_pure":
        raise DomainError(
            f"random_quasi_pure expects kind 'quasi_pure', got {spec.kind!r}"
        )
    rng = np.random.default_rng(spec.rng_seed)
    m = spec.d**2
    weights = quasi_pure_weights(m, spec.target_purity_sum)
    c = np.zeros((m, m), dtype=complex)
    for w in weights:
        c += w * _full_rank_choi(rng, spec.d, 1)
    return hermitize(c)


def _pure_state(ket: np.ndarray) -> np.ndarray:
    ket = ket / np.linalg.norm(ket)
    return np.outer(ket, ket.conj())


def minimal_setup(d: int) -> TomographySetup:
    """The minimal informationally complete setup.

    d^2 preparations: the basis kets, (|j> + |k>)/sqrt(2) and
    (|j> + i|k>)/sqrt(2) for j < k. 2 d^2 POVM elements: rho_i / d^2 and
    their complements (I - rho_i) / d^2, which resolve to the identity.
    """
    if d < 2:
        raise DomainError(f"dimension must be at least 2, got {d}")
    eye = np.eye(d, dtype=complex)
    preps = [_pure_state(eye[j]) for j in range(d)]
    for j in range(d):
        for k in range(j + 1, d):
            preps.append(_pure_state(eye[j] + eye[k]))
    for j in range(d):
        for k in range(j + 1, d):
            preps.append(_pure_state(eye[j] + 1j * eye[k]))
    povm = [rho / d**2 for rho in preps]
    povm += [(np.eye(d) - rho) / d**2 for rho in preps]
    return TomographySetup(preps, povm)


def _multinomial(rng: np.random.Generator, n: int, p: np.ndarray) -> np.ndarray:
    """One multinomial draw by sequential binomial decomposition."""
    counts = np.zeros(p.size, dtype=np.int64)
    remaining = n
    rest = 1.0
    for j in range(p.size - 1):
        if remaining == 0 or rest <= 0:
            break
        pj = min(max(p[j] / rest, 0.0), 1.0)
        counts[j] = rng.binomial(remaining, pj)
        remaining -= counts[j]
        rest -= p[j]
    counts[-1] = remaining
    return counts


def simulate_counts(
    choi_true: np.ndarray, setup: TomographySetup, sim: SimulationSpec
) -> CountsTable:
    """Simulate normalized measurement frequencies for a CPTP map.

    Finite ``n_samples`` draws one multinomial sample per preparation over
    the POVM outcomes; infinite mode sets the frequencies equal to the
    forward probabilities. Rounding-scale negatives in the probabilities
    are clipped before sampling.
    """
    if not is_cptp(choi_true):
        raise DomainError("input map is not CPTP within tolerance")
    p = forward_probs(choi_true, setup).reshape(setup.n_prep, setup.n_povm)
    p = np.where(p < 1e-12, 0.0, p)
    p /= p.sum(axis=1, keepdims=True)
    if sim.n_samples is None:
        return CountsTable(p)
    rng = np.random.default_rng(sim.rng_seed)
    counts = np.vstack([_multinomial(rng, sim.n_samples, row) for row in p])
    return CountsTable.from_raw(counts)


def j_distance(choi_a: np.ndarray, choi_b: np.ndarray) -> float:
    """Trace-norm distance between Choi operators, scaled into [0, 1]."""
    choi_a = np.asarray(choi_a)
    choi_b = np.asarray(choi_b)
    if choi_a.shape != choi_b.shape:
        raise DimensionError(f"shape mismatch {choi_a.shape} vs {choi_b.shape}")
    d = round(choi_a.shape[0] ** 0.5)
    if d * d != choi_a.shape[0]:
        raise DimensionError(f"side {choi_a.shape[0]} is not a perfect square")
    return trace_norm(choi_a - choi_b) / (2 * d)


def design_condition_number(setup: TomographySetup) -> float:
    """Ratio of the largest to smallest nonzero singular value of the design."""
    s = np.linalg.svd(setup.design, compute_uv=False)
    cutoff = max(setup.design.shape) * np.finfo(float).eps * s[0]
    return float(s[0] / s[s > cutoff][-1])
