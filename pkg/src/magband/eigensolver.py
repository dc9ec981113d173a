"""Symmetric-tridiagonal eigenpairs: Sturm-sequence bisection and inverse iteration.

Only the lowest few eigenvalues are ever needed per fiber solve, so bisection
with per-eigenvalue error control beats a full QL sweep here.  The kernels
are compiled with numba; everything is deterministic, including the inverse
iteration start vector (a fixed xorshift stream), so identical inputs give
bit-identical outputs regardless of thread schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = [
    "NonConvergence",
    "TridiagonalMatrix",
    "sturm_count",
    "lowest_eigenvalues",
    "eigenvector",
]

_BISECT_MAX_IT = 300
_INVIT_MAX_IT = 12


class NonConvergence(Exception):
    """An iterative routine exceeded its iteration cap."""


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Real symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `offdiag`."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self) -> None:
        diag = np.ascontiguousarray(self.diag, dtype=np.float64)
        offdiag = np.ascontiguousarray(self.offdiag, dtype=np.float64)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", offdiag)
        n = diag.shape[0]
        if diag.ndim != 1 or offdiag.ndim != 1:
            raise ValueError("diag and offdiag must be one-dimensional")
        if n < 2:
            raise ValueError("matrix order must be at least 2")
        if offdiag.shape[0] != n - 1:
            raise ValueError("offdiag must have length len(diag) - 1")
        if not (np.isfinite(diag).all() and np.isfinite(offdiag).all()):
            raise ValueError("matrix entries must be finite")

    @property
    def order(self) -> int:
        return self.diag.shape[0]

    @property
    def is_unreduced(self) -> bool:
        """All off-diagonal entries nonzero, hence all eigenvalues simple."""
        return bool(np.all(self.offdiag != 0.0))

    def inf_norm(self) -> float:
        n = self.order
        row = np.abs(self.diag).copy()
        row[:-1] += np.abs(self.offdiag)
        row[1:] += np.abs(self.offdiag)
        return float(row.max())

    def gershgorin_interval(self) -> tuple:
        radii = np.zeros(self.order)
        radii[:-1] += np.abs(self.offdiag)
        radii[1:] += np.abs(self.offdiag)
        return (float((self.diag - radii).min()), float((self.diag + radii).max()))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.offdiag * x[1:]
        y[1:] += self.offdiag * x[:-1]
        return y


@njit(cache=True)
def _count_below(diag, off_sq, shift):
    # Signs of the LDL^T pivots of (T - shift*I); an exactly zero pivot is
    # replaced by a tiny value so the recurrence and the count stay defined.
    n = diag.shape[0]
    count = 0
    q = diag[0] - shift
    if q == 0.0:
        q = 2.2250738585072014e-308
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = (diag[i] - shift) - off_sq[i - 1] / q
        if q == 0.0:
            q = 2.2250738585072014e-308
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def _counts_multi(diag, off_sq, shifts, counts):
    # one pass over the matrix for several shifts at once: the k recurrences
    # are independent chains, so interleaving them hides the division latency
    n = diag.shape[0]
    ns = shifts.shape[0]
    q = np.empty(ns, dtype=np.float64)
    for s in range(ns):
        qq = diag[0] - shifts[s]
        if qq == 0.0:
            qq = 2.2250738585072014e-308
        q[s] = qq
        counts[s] = 1 if qq < 0.0 else 0
    for i in range(1, n):
        d = diag[i]
        o = off_sq[i - 1]
        for s in range(ns):
            qq = (d - shifts[s]) - o / q[s]
            if qq == 0.0:
                qq = 2.2250738585072014e-308
            q[s] = qq
            if qq < 0.0:
                counts[s] += 1


@njit(cache=True)
def _bisect_lowest(diag, off_sq, k, tol, lo, hi, guesses, slack, max_it):
    # lockstep bisection: every round evaluates the Sturm counts of all still
    # active brackets in a single fused pass.  slack > 0 activates the
    # warm-started brackets guesses[j] +- slack; a bracket that fails its
    # Sturm-count test falls back to the Gershgorin interval.
    a = np.full(k, lo)
    b = np.full(k, hi)
    if slack > 0.0:
        for j in range(k):
            wa = guesses[j] - slack
            wb = guesses[j] + slack
            if wa > a[j] and _count_below(diag, off_sq, wa) <= j:
                a[j] = wa
            if wb < b[j] and _count_below(diag, off_sq, wb) >= j + 1:
                b[j] = wb
    mids = np.empty(k, dtype=np.float64)
    counts = np.empty(k, dtype=np.int64)
    idx = np.empty(k, dtype=np.int64)
    for _ in range(max_it):
        n_active = 0
        for j in range(k):
            if b[j] - a[j] > tol:
                mid = 0.5 * (a[j] + b[j])
                if mid <= a[j] or mid >= b[j]:
                    a[j] = mid  # float resolution reached
                    b[j] = mid
                else:
                    mids[n_active] = mid
                    idx[n_active] = j
                    n_active += 1
        if n_active == 0:
            out = np.empty(k, dtype=np.float64)
            for j in range(k):
                out[j] = 0.5 * (a[j] + b[j])
            return out, True
        _counts_multi(diag, off_sq, mids[:n_active], counts[:n_active])
        for s in range(n_active):
            j = idx[s]
            if counts[s] >= j + 1:
                b[j] = mids[s]
            else:
                a[j] = mids[s]
    out = np.empty(k, dtype=np.float64)
    for j in range(k):
        out[j] = 0.5 * (a[j] + b[j])
    return out, False


@njit(cache=True)
def _inverse_iteration(diag, off, eps, max_it, res_target, seed):
    n = diag.shape[0]

    # banded LU of (T - eps*I) with partial pivoting; pivoting introduces a
    # second superdiagonal e.
    b = np.empty(n, dtype=np.float64)
    for i in range(n):
        b[i] = diag[i] - eps
    a = off.copy()
    c = off.copy()
    e = np.zeros(n, dtype=np.float64)
    mult = np.zeros(n, dtype=np.float64)
    piv = np.zeros(n, dtype=np.bool_)

    norm_t = 0.0
    for i in range(n):
        row = abs(diag[i])
        if i > 0:
            row += abs(off[i - 1])
        if i < n - 1:
            row += abs(off[i])
        if row > norm_t:
            norm_t = row
    pivmin = 2.220446049250313e-16 * norm_t
    if pivmin == 0.0:
        pivmin = 2.2250738585072014e-308

    for i in range(n - 1):
        if abs(a[i]) > abs(b[i]):
            piv[i] = True
            b[i], a[i] = a[i], b[i]
            c[i], b[i + 1] = b[i + 1], c[i]
            if i < n - 2:
                e[i], c[i + 1] = c[i + 1], e[i]
        if abs(b[i]) < pivmin:
            b[i] = pivmin if b[i] >= 0.0 else -pivmin
        m = a[i] / b[i]
        mult[i] = m
        b[i + 1] -= m * c[i]
        if i < n - 2:
            c[i + 1] -= m * e[i]
    if abs(b[n - 1]) < pivmin:
        b[n - 1] = pivmin if b[n - 1] >= 0.0 else -pivmin

    # fixed xorshift64 start vector: deterministic and not orthogonal to
    # any symmetry class of the eigenvectors
    x = np.empty(n, dtype=np.float64)
    state = np.uint64(seed)
    for i in range(n):
        state ^= state << np.uint64(13)
        state ^= state >> np.uint64(7)
        state ^= state << np.uint64(17)
        x[i] = (np.float64(state >> np.uint64(11)) * (2.0 ** -53)) - 0.5
    nrm = math.sqrt(np.dot(x, x))
    for i in range(n):
        x[i] /= nrm

    # iterate until the residual reaches the float floor or stops improving;
    # the caller-visible res_target is checked at the end (it is usually far
    # looser than what the iteration actually achieves)
    floor = 30.0 * 2.220446049250313e-16 * norm_t
    y = np.empty(n, dtype=np.float64)
    best = x.copy()
    best_residual = math.inf
    prev_residual = math.inf
    for it in range(max_it):
        for i in range(n):
            y[i] = x[i]
        for i in range(n - 1):
            if piv[i]:
                y[i], y[i + 1] = y[i + 1], y[i]
            y[i + 1] -= mult[i] * y[i]
        x[n - 1] = y[n - 1] / b[n - 1]
        if n >= 2:
            x[n - 2] = (y[n - 2] - c[n - 2] * x[n - 1]) / b[n - 2]
        for i in range(n - 3, -1, -1):
            x[i] = (y[i] - c[i] * x[i + 1] - e[i] * x[i + 2]) / b[i]
        nrm = math.sqrt(np.dot(x, x))
        if nrm == 0.0 or not math.isfinite(nrm):
            return best, best_residual, best_residual <= res_target
        for i in range(n):
            x[i] /= nrm

        # residual against the original matrix
        rsq = 0.0
        for i in range(n):
            r = (diag[i] - eps) * x[i]
            if i > 0:
                r += off[i - 1] * x[i - 1]
            if i < n - 1:
                r += off[i] * x[i + 1]
            rsq += r * r
        residual = math.sqrt(rsq)
        if residual < best_residual:
            best_residual = residual
            for i in range(n):
                best[i] = x[i]
        if residual <= floor:
            break
        if it >= 1 and residual > 0.5 * prev_residual:
            break  # stalled at the achievable accuracy
        prev_residual = residual
    return best, best_residual, best_residual <= res_target


def sturm_count(m: TridiagonalMatrix, mu: float) -> int:
    """Number of eigenvalues of `m` strictly below `mu`."""
    mu = float(mu)
    if not math.isfinite(mu):
        raise ValueError("shift must be finite")
    off_sq = m.offdiag * m.offdiag
    return int(_count_below(m.diag, off_sq, mu))


def lowest_eigenvalues(
    m: TridiagonalMatrix,
    k: int,
    tol: float,
    *,
    guesses: np.ndarray | None = None,
    slack: float | None = None,
) -> np.ndarray:
    """The k smallest eigenvalues, each within `tol` of a true eigenvalue.

    Bisection brackets are seeded from the Gershgorin interval; values come
    back in ascending order (strictly ascending whenever the matrix is
    unreduced and its gaps exceed tol).  Passing `guesses` (k previous
    eigenvalue estimates) together with `slack` narrows the starting brackets
    to guesses[j] +- slack; every bracket is verified with Sturm counts and
    falls back to the Gershgorin interval when stale, so warm starts never
    cost correctness.
    """
    if not 1 <= k <= m.order:
        raise ValueError(f"need 1 <= k <= {m.order}, got k={k}")
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    lo, hi = m.gershgorin_interval()
    if hi <= lo:
        hi = lo + 1.0
    if guesses is None or slack is None:
        warm = np.zeros(k)
        slack_val = 0.0
    else:
        warm = np.ascontiguousarray(guesses, dtype=np.float64)
        if warm.shape != (k,):
            raise ValueError("guesses must have shape (k,)")
        slack_val = float(slack)
        if not slack_val > 0.0:
            raise ValueError("slack must be positive")
    off_sq = m.offdiag * m.offdiag
    vals, ok = _bisect_lowest(
        m.diag, off_sq, k, float(tol), lo, hi, warm, slack_val, _BISECT_MAX_IT
    )
    if not ok:
        raise NonConvergence(
            f"bisection failed to bracket {k} eigenvalues within "
            f"{_BISECT_MAX_IT} iterations"
        )
    return vals


def eigenvector(m: TridiagonalMatrix, eps: float, tol: float = 1e-10) -> np.ndarray:
    """Normalized eigenvector for the (simple) eigenvalue near `eps`.

    Inverse iteration from a fixed seeded start; the returned vector has
    Euclidean norm 1, residual ||m x - eps x|| <= 100 * tol * ||m||_inf, and
    its largest-magnitude entry is positive, which makes downstream outputs
    reproducible.
    """
    eps = float(eps)
    if not math.isfinite(eps):
        raise ValueError("eigenvalue estimate must be finite")
    if not m.is_unreduced:
        raise ValueError("eigenvector extraction requires an unreduced matrix")
    res_target = 100.0 * tol * m.inf_norm()
    x, residual, ok = _inverse_iteration(
        m.diag, m.offdiag, eps, _INVIT_MAX_IT, res_target, 0x9E3779B97F4A7C15
    )
    if not ok:
        raise NonConvergence(
            f"inverse iteration residual {residual:.3e} above target "
            f"{res_target:.3e} after {_INVIT_MAX_IT} iterations"
        )
    if x[np.argmax(np.abs(x))] < 0.0:
        x = -x
    x = x / math.sqrt(float(np.dot(x, x)))
    return x
