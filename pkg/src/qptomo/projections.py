"""Orthogonal projections onto channel constraint sets.

Single-set projections (all orthogonal under the Frobenius norm):

* CP, the cone of positive semidefinite Choi operators;
* TP, the affine set with output partial trace equal to the identity;
* US_p, output partial trace equal to p times the identity;
* TNI, output partial trace with all eigenvalues at most 1.

The composite CPTP projection alternates TP and CP with Dykstra correction
terms, which converges to the closest point of the intersection (plain
alternating or averaged projections only reach feasibility). The TP step
uses the closed form

    TP(C) = C - (1/d) (Tr_out(C) - I) (x) I

in hot loops; the equivalent vectorized form through the sparse trace-out
operator M is kept for testing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .channel import EPS_CP, EPS_TP
from .errors import ConvergenceError, DomainError
from .linalg import eigh, hermitize, kron, partial_trace_out, vec, vec_inv

#: Algorithm default for the Dykstra stopping sum.
DYKSTRA_TOL = 1e-4
MAX_INNER_ITERATIONS = 20000


def project_cp(c: np.ndarray) -> np.ndarray:
    """Closest positive semidefinite matrix: clip negative eigenvalues."""
    w, v = eigh(c)
    return hermitize((v * np.clip(w, 0.0, None)) @ v.conj().T)


def project_tp(c: np.ndarray, d: int | None = None) -> np.ndarray:
    """Closest Choi operator with Tr_out(C) = I (affine projection)."""
    if d is None:
        d = round(c.shape[0] ** 0.5)
    excess = partial_trace_out(c, d) - np.eye(d)
    return c - kron(excess, np.eye(d)) / d


def project_us_p(c: np.ndarray, p_success: float) -> np.ndarray:
    """Closest Choi operator with Tr_out(C) = p I, for success probability p."""
    if not 0.0 < p_success <= 1.0:
        raise DomainError(f"p_success must lie in (0, 1], got {p_success}")
    d = round(c.shape[0] ** 0.5)
    excess = partial_trace_out(c, d) - p_success * np.eye(d)
    return c - kron(excess, np.eye(d)) / d


def project_tni(c: np.ndarray) -> np.ndarray:
    """Closest Choi operator whose output partial trace is at most identity.

    Only the trace-out component can violate the constraint, so the
    projection clips the eigenvalues of Tr_out(C) at 1 and pushes the
    difference back through the (1/d) (.) (x) I embedding. Trace
    preserving inputs are fixed points.
    """
    d = round(c.shape[0] ** 0.5)
    y = partial_trace_out(c, d)
    w, v = eigh(y)
    clipped = (v * np.minimum(w, 1.0)) @ v.conj().T
    return c + kron(clipped - y, np.eye(d)) / d


def m_operator(d: int) -> scipy.sparse.csr_matrix:
    """Sparse d^2 x d^4 operator with M vec(C) = vec(Tr_out(C)).

    Realizes sum_k I (x) <k| (x) I (x) <k| against column-stacking vec;
    each row holds d unit entries. Satisfies M M^dagger = d I.
    """
    d2, d4 = d * d, d**4
    rows = np.empty(d2 * d, dtype=np.int64)
    cols = np.empty(d2 * d, dtype=np.int64)
    idx = 0
    for i in range(d):
        for j in range(d):
            for k in range(d):
                rows[idx] = j * d + i
                cols[idx] = (j * d + k) * d2 + (i * d + k)
                idx += 1
    data = np.ones(idx)
    return scipy.sparse.csr_matrix((data, (rows, cols)), shape=(d2, d4))


def project_tp_m_form(c: np.ndarray, p_success: float = 1.0) -> np.ndarray:
    """Reference TP / US_p projection through the vectorized M operator.

    vec(C) - (1/d) M^dagger M vec(C) + (p/d) M^dagger vec(I). Kept for
    equivalence testing against the closed form used in hot loops.
    """
    d = round(c.shape[0] ** 0.5)
    m = m_operator(d)
    x = vec(c)
    x = x - m.conj().T @ (m @ x) / d + p_success * (m.conj().T @ vec(np.eye(d))) / d
    return vec_inv(x, d * d, d * d)


def _tp_residual(x: np.ndarray, d: int) -> float:
    return float(np.linalg.norm(partial_trace_out(vec_inv(x, d * d, d * d), d) - np.eye(d)))


@dataclass
class DykstraState:
    """Iterate and correction vectors of the alternating projection loop."""

    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    q: np.ndarray
    iteration: int = 0

    @classmethod
    def start(cls, c: np.ndarray) -> "DykstraState":
        x = vec(c)
        zero = np.zeros_like(x)
        return cls(x=x, y=zero.copy(), p=zero.copy(), q=zero.copy())


def _dykstra(
    c: np.ndarray,
    tol: float,
    max_iterations: int,
    eps_tp: float,
) -> tuple[np.ndarray, int, float]:
    """Core Dykstra loop; returns (matrix, iterations, stopping sum)."""
    d2 = c.shape[0]
    d = round(d2**0.5)
    state = DykstraState.start(hermitize(np.asarray(c, dtype=complex)))
    y_prev = None
    stop_sum = np.inf
    for k in range(max_iterations):
        y = vec(project_tp(vec_inv(state.x + state.p, d2, d2), d))
        p_new = state.x + state.p - y
        x_new = vec(project_cp(vec_inv(y + state.q, d2, d2)))
        q_new = y + state.q - x_new
        if k >= 1:
            # Robust stopping sum over successive corrections and iterates.
            stop_sum = (
                float(np.linalg.norm(p_new - state.p) ** 2)
                + float(np.linalg.norm(q_new - state.q) ** 2)
                + 2.0 * abs(np.vdot(state.p, x_new - state.x))
                + 2.0 * abs(np.vdot(state.q, y - y_prev))
            )
            if stop_sum <= tol and _tp_residual(x_new, d) <= eps_tp:
                return (
                    hermitize(vec_inv(x_new, d2, d2)),
                    k + 1,
                    stop_sum,
                )
        y_prev = y
        state = DykstraState(x=x_new, y=y, p=p_new, q=q_new, iteration=k + 1)
    raise ConvergenceError(
        f"Dykstra projection did not converge in {max_iterations} iterations "
        f"(stopping sum {stop_sum:.3e})",
        last_iterate=hermitize(vec_inv(state.x, d2, d2)),
        residual=stop_sum,
    )


def project_cptp_dykstra(
    c: np.ndarray,
    tol: float = DYKSTRA_TOL,
    max_iterations: int = MAX_INNER_ITERATIONS,
    eps_tp: float = EPS_TP,
) -> np.ndarray:
    """Project onto the closest CPTP Choi operator (Dykstra's algorithm).

    Alternates the TP and CP projections with correction terms; the
    returned iterate comes from the CP step, so it is positive
    semidefinite to machine precision while the TP condition holds within
    ``eps_tp``. The loop stops once the robust stopping sum falls below
    ``tol`` and the TP residual is within ``eps_tp``; it always runs at
    least two iterations because the sum compares successive corrections.
    """
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    mat, _, _ = _dykstra(np.asarray(c, dtype=complex), tol, max_iterations, eps_tp)
    return mat


def project_cptp_averaged(
    c: np.ndarray,
    tol: float = 1e-8,
    max_iterations: int = MAX_INNER_ITERATIONS,
    eps_cp: float = EPS_CP,
    eps_tp: float = EPS_TP,
) -> np.ndarray:
    """Iterate the average of the TP and CP projections to feasibility.

    Converges to a point of the CPTP set but, unlike Dykstra, not to the
    closest one. Stops when successive iterates move less than ``tol`` in
    Frobenius norm and the CPTP residuals are within tolerance.
    """
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    h = hermitize(np.asarray(c, dtype=complex))
    d = round(h.shape[0] ** 0.5)
    delta = np.inf
    for _ in range(max_iterations):
        h_new = (project_tp(h, d) + project_cp(h)) / 2
        delta = float(np.linalg.norm(h_new - h))
        h = h_new
        if delta <= tol:
            min_eig = float(np.linalg.eigvalsh(hermitize(h)).min())
            tp_dist = float(np.linalg.norm(partial_trace_out(h, d) - np.eye(d)))
            if min_eig >= -eps_cp and tp_dist <= eps_tp:
                return hermitize(h)
    raise ConvergenceError(
        f"averaged projections did not converge in {max_iterations} iterations "
        f"(last step {delta:.3e})",
        last_iterate=hermitize(h),
        residual=delta,
    )
