"""Independent ground truths used by the test suite.

The closed forms here come from completing the square in the fiber operator
for the exactly solvable slope/parabola profiles; they are kept separate from
the finite-difference solver so the two can adjudicate each other.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .eigensolver import NonConvergence, TridiagonalMatrix

__all__ = [
    "DomainError",
    "SizeExceeded",
    "SolvableKind",
    "SolvableModel",
    "exact_eigenvalue",
    "brute_dense_eigs",
    "quadrature_integral",
]

_JACOBI_MAX_N = 400
_JACOBI_MAX_SWEEPS = 60


class DomainError(ValueError):
    """Model parameters outside the range where eigenvalues exist."""


class SizeExceeded(ValueError):
    """Dense oracle refused: it is meant for test-scale matrices only."""


class SolvableKind(enum.Enum):
    FREE_LANDAU = "free-landau"
    LINEAR = "linear"
    PARABOLA = "parabola"


@dataclass(frozen=True)
class SolvableModel:
    """Exactly solvable fiber family: free, linear slope alpha, or parabola beta."""

    kind: SolvableKind
    B: float
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        if not self.B > 0:
            raise ValueError("field strength B must be positive")


def exact_eigenvalue(model: SolvableModel, n: int, p: float) -> float:
    """Closed-form fiber eigenvalue for the solvable families.

    Completing the square in (p + B x)^2 + v(x) gives

        free:     B (2n + 1)
        linear:   B (2n + 1) - alpha p / B - alpha^2 / (4 B^2)
        parabola: w (2n + 1) - beta^2 p^2 / w^2,   w = sqrt(B^2 - beta^2)

    The x-shift absorbing the linear term cannot generate a p^2 contribution,
    which the finite-difference solver confirms numerically.

    Raises:
        DomainError: parabola with beta >= B (the quadratic barrier cancels
            the magnetic confinement and no eigenvalues remain).
    """
    if n < 0:
        raise ValueError("band index must be nonnegative")
    B = model.B
    if model.kind is SolvableKind.FREE_LANDAU:
        return B * (2 * n + 1)
    if model.kind is SolvableKind.LINEAR:
        alpha = model.alpha
        return B * (2 * n + 1) - alpha * p / B - alpha * alpha / (4.0 * B * B)
    if model.kind is SolvableKind.PARABOLA:
        beta = model.beta
        if abs(beta) >= B:
            raise DomainError(
                f"parabola beta={beta:g} >= B={B:g}: no bound fiber states"
            )
        omega = math.sqrt(B * B - beta * beta)
        return omega * (2 * n + 1) - beta * beta * p * p / (omega * omega)
    raise TypeError(f"unknown solvable kind {model.kind!r}")


@njit(cache=True)
def _jacobi_sweeps(A, threshold, max_sweeps):
    n = A.shape[0]
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += A[i, j] * A[i, j]
        off = math.sqrt(2.0 * off)
        if off < threshold:
            return True
        for pp in range(n - 1):
            for qq in range(pp + 1, n):
                apq = A[pp, qq]
                if apq == 0.0:
                    continue
                theta = 0.5 * (A[qq, qq] - A[pp, pp]) / apq
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for r in range(n):
                    arp = A[r, pp]
                    arq = A[r, qq]
                    A[r, pp] = c * arp - s * arq
                    A[r, qq] = s * arp + c * arq
                for r in range(n):
                    apr = A[pp, r]
                    aqr = A[qq, r]
                    A[pp, r] = c * apr - s * aqr
                    A[qq, r] = s * apr + c * aqr
    # final check after the last sweep
    off = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            off += A[i, j] * A[i, j]
    return math.sqrt(2.0 * off) < threshold


def brute_dense_eigs(m: TridiagonalMatrix, max_order: int = _JACOBI_MAX_N) -> np.ndarray:
    """Full ascending spectrum via cyclic Jacobi rotations (test-scale oracle).

    Rotations run until the off-diagonal Frobenius norm drops below 1e-12
    (relative to the matrix Frobenius norm when that exceeds one, so the
    criterion stays reachable in float64 for large-norm inputs).
    """
    n = m.order
    if n > max_order:
        raise SizeExceeded(f"dense oracle limited to order {max_order}, got {n}")
    A = np.zeros((n, n), dtype=np.float64)
    A[np.arange(n), np.arange(n)] = m.diag
    A[np.arange(n - 1), np.arange(1, n)] = m.offdiag
    A[np.arange(1, n), np.arange(n - 1)] = m.offdiag
    frob = float(np.sqrt((A * A).sum()))
    threshold = 1e-12 * max(1.0, frob)
    converged = _jacobi_sweeps(A, threshold, _JACOBI_MAX_SWEEPS)
    if not converged:
        raise NonConvergence(
            f"Jacobi off-diagonal norm not below {threshold:.3e} "
            f"after {_JACOBI_MAX_SWEEPS} sweeps"
        )
    return np.sort(np.diag(A))


def quadrature_integral(values: np.ndarray, h: float) -> float:
    """Trapezoid rule on uniformly spaced samples; exact for piecewise-linear data."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.shape[0] < 2:
        raise ValueError("need a 1D array with at least two samples")
    if not h > 0:
        raise ValueError("spacing h must be positive")
    return float(h * (values.sum() - 0.5 * (values[0] + values[-1])))
