"""Momentum and coupling sweeps: band structures, widths, gaps, derivatives.

Bands are tracked by eigenvalue order; the fibers have simple spectra, so
bands never touch and no crossing disambiguation is needed.  All integrals
are trapezoid sums on the converged fiber grid, where the eigenvectors are
already sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import potentials
from .eigensolver import NonConvergence
from .fiber import (
    FieldConfig,
    UnboundedBelow,
    default_grid,
    eigenvalues_on_grid,
    hermite_function,
    solve_fiber,
)
from .potentials import Potential, SignClass

__all__ = [
    "SweepConfig",
    "BandStructure",
    "Gap",
    "sweep",
    "band_width",
    "band_widths",
    "gaps",
    "fh_derivative_p",
    "fd_derivative_p",
    "fh_derivative_lambda",
    "fd_derivative_lambda",
    "first_order_estimate",
    "asymptote_check",
    "lambda_sweep",
    "LambdaSweepResult",
    "delta_limit_study",
    "DeltaLimitResult",
    "CheckResult",
    "CHECK_NAMES",
    "run_check",
]


@dataclass(frozen=True)
class SweepConfig:
    """Momentum sweep parameters: grid, band count, tolerance, optional extras."""

    p_min: float
    p_max: float
    p_steps: int = 121
    bands: int = 5
    tol: float = 1e-6
    lambdas: Optional[Tuple[float, ...]] = None
    large_p: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.p_min < self.p_max:
            raise ValueError("sweep requires p_min < p_max")
        if self.p_steps < 2:
            raise ValueError("sweep requires p_steps >= 2")
        if self.bands < 1:
            raise ValueError("sweep requires bands >= 1")
        if not self.tol > 0:
            raise ValueError("sweep requires tol > 0")
        if self.lambdas is not None:
            object.__setattr__(
                self, "lambdas", tuple(float(v) for v in self.lambdas)
            )
            if len(self.lambdas) == 0:
                raise ValueError("lambda list must not be empty")
        if self.large_p is not None and not self.large_p > 0:
            raise ValueError("large_p must be positive")

    def momenta(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.p_steps)


@dataclass(frozen=True)
class BandStructure:
    """Band energies on a momentum grid: energies[n, j] = eps_n(p_j)."""

    potential: Potential
    field: FieldConfig
    p_grid: np.ndarray
    energies: np.ndarray

    def __post_init__(self) -> None:
        p_grid = np.asarray(self.p_grid, dtype=float)
        energies = np.asarray(self.energies, dtype=float)
        object.__setattr__(self, "p_grid", p_grid)
        object.__setattr__(self, "energies", energies)
        if p_grid.ndim != 1 or np.any(np.diff(p_grid) <= 0):
            raise ValueError("p_grid must be strictly ascending")
        if energies.ndim != 2 or energies.shape[1] != p_grid.shape[0]:
            raise ValueError("energies must be a bands x momenta matrix")
        if np.any(np.diff(energies, axis=0) <= 0):
            raise ValueError("band energies must be strictly ascending at every p")

    @property
    def band_count(self) -> int:
        return int(self.energies.shape[0])


class Gap(NamedTuple):
    lower: float
    upper: float
    open: bool


def sweep(spec: Potential, field: FieldConfig, cfg: SweepConfig) -> BandStructure:
    """Solve the fiber at every momentum of the uniform grid, in index order."""
    ps = cfg.momenta()
    energies = np.empty((cfg.bands, cfg.p_steps))
    for j, p in enumerate(ps):
        try:
            fe = solve_fiber(spec, field, float(p), cfg.bands, cfg.tol)
        except (NonConvergence, UnboundedBelow) as exc:
            raise type(exc)(f"fiber solve failed at p={p:.6g}: {exc}") from exc
        energies[:, j] = fe.eigenvalues
    return BandStructure(potential=spec, field=field, p_grid=ps, energies=energies)


def band_width(bs: BandStructure, n: int) -> float:
    """max - min of band n over the computed grid (a lower bound on the true width)."""
    row = bs.energies[n]
    return float(row.max() - row.min())


def band_widths(bs: BandStructure) -> np.ndarray:
    return bs.energies.max(axis=1) - bs.energies.min(axis=1)


def gaps(bs: BandStructure) -> list:
    """Gap n between bands n and n+1: (max band n, min band n+1, open flag)."""
    out = []
    for n in range(bs.band_count - 1):
        lower = float(bs.energies[n].max())
        upper = float(bs.energies[n + 1].min())
        out.append(Gap(lower, upper, lower < upper))
    return out


def _trapezoid(values: np.ndarray, h: float) -> float:
    return float(h * (values.sum() - 0.5 * (values[0] + values[-1])))


def _fh_momentum_integral(spec, field, fe, n) -> float:
    x = fe.grid.interior()
    vprime = potentials.derivative(spec, x - fe.p / field.B)
    integrand = vprime * fe.eigenvectors[n] ** 2
    return -_trapezoid(integrand, fe.grid.spacing) / field.B


def fh_derivative_p(
    spec: Potential, field: FieldConfig, p: float, n: int, tol: float = 1e-6
) -> float:
    """d eps_n / dp via the eigenstate expectation of the shifted-profile derivative.

    Raises:
        DerivativeUnavailable: the profile has no analytic derivative; use
            `fd_derivative_p` instead.
    """
    fe = solve_fiber(spec, field, p, n + 1, tol)
    return _fh_momentum_integral(spec, field, fe, n)


def _fd_band_derivatives(spec, field, p, k, delta_p, tol) -> np.ndarray:
    # both displaced problems are solved on the converged midpoint grid with a
    # much tighter bisection tolerance, so the discretization bias cancels in
    # the difference and the bisection noise stays below tol
    fe = solve_fiber(spec, field, p, k, tol)
    bis = max(tol * delta_p, 1e-14)
    upper = eigenvalues_on_grid(
        spec, field, p + delta_p, k, bis, fe.grid,
        guesses=fe.eigenvalues, slack=1.0,
    )
    lower = eigenvalues_on_grid(
        spec, field, p - delta_p, k, bis, fe.grid,
        guesses=fe.eigenvalues, slack=1.0,
    )
    return (upper - lower) / (2.0 * delta_p)


def fd_derivative_p(
    spec: Potential,
    field: FieldConfig,
    p: float,
    n: int,
    delta_p: Optional[float] = None,
    tol: float = 1e-6,
) -> float:
    """Central finite difference of eps_n in p (second-order in delta_p)."""
    if delta_p is None:
        delta_p = 1e-3 * max(1.0, abs(p))
    if not delta_p > 0:
        raise ValueError("delta_p must be positive")
    return float(_fd_band_derivatives(spec, field, p, n + 1, delta_p, tol)[n])


def fh_derivative_lambda(
    spec: Potential,
    field: FieldConfig,
    p: float,
    n: int,
    lam: float,
    tol: float = 1e-6,
) -> float:
    """d eps_n / d lambda at coupling lam: expectation of the bare profile."""
    fe = solve_fiber(potentials.scale(spec, lam), field, p, n + 1, tol)
    x = fe.grid.interior()
    integrand = potentials.evaluate(spec, x - fe.p / field.B) * fe.eigenvectors[n] ** 2
    return _trapezoid(integrand, fe.grid.spacing)


def fd_derivative_lambda(
    spec: Potential,
    field: FieldConfig,
    p: float,
    n: int,
    lam: float,
    delta_lam: float = 1e-3,
    tol: float = 1e-6,
) -> float:
    """Central finite difference of eps_n in the coupling (oracle for the above)."""
    if not delta_lam > 0:
        raise ValueError("delta_lam must be positive")
    fe = solve_fiber(potentials.scale(spec, lam), field, p, n + 1, tol)
    bis = max(tol * delta_lam, 1e-14)
    upper = eigenvalues_on_grid(
        potentials.scale(spec, lam + delta_lam), field, p, n + 1, bis, fe.grid,
        guesses=fe.eigenvalues, slack=1.0,
    )
    lower = eigenvalues_on_grid(
        potentials.scale(spec, lam - delta_lam), field, p, n + 1, bis, fe.grid,
        guesses=fe.eigenvalues, slack=1.0,
    )
    return float((upper[n] - lower[n]) / (2.0 * delta_lam))


def first_order_estimate(
    spec: Potential, field: FieldConfig, p: float, j: int, lam: float
) -> float:
    """Weak-coupling estimate B(2j+1) + lam * integral of v(x - p/B) phi_j(x)^2.

    The integral uses the exact oscillator eigenfunction on a fine fixed grid
    over the default domain, so its quadrature error is negligible against
    the O(lam^2) remainder this estimate is compared to.
    """
    base_grid = default_grid(spec, field, p, j + 1)
    half_width = base_grid.x_max
    h_quad = min(base_grid.spacing, 0.004 / math.sqrt(field.B))
    m = int(math.ceil(half_width / h_quad))
    x = np.linspace(-half_width, half_width, 2 * m + 1)
    phi = hermite_function(j, field, x)
    integrand = potentials.evaluate(spec, x - p / field.B) * phi * phi
    integral = _trapezoid(integrand, x[1] - x[0])
    return field.B * (2 * j + 1) + lam * integral


def asymptote_check(
    spec: Potential,
    field: FieldConfig,
    n: int,
    P: float,
    tol: float = 1e-6,
) -> Tuple[float, float]:
    """Residuals of eps_n against the far-momentum plateaus.

    Returns (left, right) where left is |eps_n(-P) - B(2n+1) - v_plus| and
    right is |eps_n(+P) - B(2n+1) - v_minus|: moving the potential window far
    to the right exposes the well to the profile's left tail, and vice versa.
    """
    limits = potentials.asymptotic_limits(spec)
    if limits is None:
        raise ValueError("profile has no asymptotic limits")
    v_minus, v_plus = limits
    base = field.B * (2 * n + 1)
    eps_right = solve_fiber(spec, field, +P, n + 1, tol).eigenvalues[n]
    eps_left = solve_fiber(spec, field, -P, n + 1, tol).eigenvalues[n]
    return (abs(eps_left - base - v_plus), abs(eps_right - base - v_minus))


@dataclass(frozen=True)
class LambdaSweepResult:
    """Band widths per coupling value, ordered by increasing |lambda|."""

    lambdas: Tuple[float, ...]
    widths: np.ndarray  # len(lambdas) x bands
    strictly_increasing: Tuple[bool, ...]  # per band, along increasing |lambda|
    sign_definite: bool


def lambda_sweep(
    spec: Potential,
    field: FieldConfig,
    cfg: SweepConfig,
    lambdas: Sequence[float],
) -> LambdaSweepResult:
    """Sweep the coupling and report band widths and their monotonicity."""
    lams = tuple(sorted((float(v) for v in lambdas), key=abs))
    widths = np.empty((len(lams), cfg.bands))
    for i, lam in enumerate(lams):
        bs = sweep(potentials.scale(spec, lam), field, cfg)
        widths[i] = band_widths(bs)
    increasing = tuple(
        bool(np.all(np.diff(widths[:, n]) > 0.0)) for n in range(cfg.bands)
    )
    definite = potentials.classify_sign(spec) is not SignClass.INDEFINITE
    return LambdaSweepResult(lams, widths, increasing, definite)


@dataclass(frozen=True)
class DeltaLimitResult:
    """Ground-band energies along a shrinking-width Lorentzian family."""

    a_values: Tuple[float, ...]
    energies: np.ndarray
    successive_diffs: np.ndarray


def delta_limit_study(
    lam: float,
    p: float,
    a_values: Sequence[float],
    field: FieldConfig,
    tol: float = 1e-7,
) -> DeltaLimitResult:
    """Ground-band energy of Lorentzian(lam, a) at fixed p for each width a.

    The widths must decrease; the successive differences expose the Cauchy
    trend of the narrowing family.
    """
    a_tuple = tuple(float(a) for a in a_values)
    if len(a_tuple) < 2 or any(a1 >= a0 for a0, a1 in zip(a_tuple, a_tuple[1:])):
        raise ValueError("a_values must be strictly decreasing with length >= 2")
    energies = np.array(
        [
            solve_fiber(potentials.Lorentzian(lam, a), field, p, 1, tol).eigenvalues[0]
            for a in a_tuple
        ]
    )
    diffs = np.abs(np.diff(energies))
    return DeltaLimitResult(a_tuple, energies, diffs)


# ---------------------------------------------------------------------------
# named property checks (run by the CLI on a configured problem)
# ---------------------------------------------------------------------------

CHECK_NAMES = (
    "landau",
    "fh",
    "minimax",
    "gaps",
    "monotone",
    "asymptotes",
    "delta-limit",
    "symmetry",
)

_FH_REL_TOL = 1e-4
_ASYMPTOTE_TOL = 1e-2


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    witness: Optional[dict] = None


def run_check(
    name: str,
    spec: Potential,
    field: FieldConfig,
    cfg: SweepConfig,
    band_structure: Optional[BandStructure] = None,
) -> CheckResult:
    """Run one named property check against the configured problem."""
    if name == "landau":
        return _check_landau(spec, field, cfg)
    if name == "fh":
        return _check_fh(spec, field, cfg)
    if name == "minimax":
        return _check_minimax(spec, field, cfg)
    if name == "gaps":
        return _check_gaps(spec, field, cfg, band_structure)
    if name == "monotone":
        return _check_monotone(spec, field, cfg)
    if name == "asymptotes":
        return _check_asymptotes(spec, field, cfg)
    if name == "delta-limit":
        return _check_delta_limit(spec, field, cfg)
    if name == "symmetry":
        return _check_symmetry(spec, field, cfg)
    raise ValueError(f"unknown check {name!r}; known: {', '.join(CHECK_NAMES)}")


def _not_applicable(name: str, reason: str) -> CheckResult:
    return CheckResult(name, True, f"not applicable: {reason}")


def _check_landau(spec, field, cfg) -> CheckResult:
    zero = potentials.scale(spec, 0.0)
    levels = field.B * (2 * np.arange(cfg.bands) + 1)
    worst = 0.0
    witness = None
    for p in (0.0, cfg.p_max):
        fe = solve_fiber(zero, field, p, cfg.bands, cfg.tol)
        dev = np.abs(fe.eigenvalues - levels)
        n = int(dev.argmax())
        if dev[n] > worst:
            worst = float(dev[n])
            witness = {"p": p, "n": n, "value": float(fe.eigenvalues[n])}
    passed = worst <= cfg.tol
    return CheckResult(
        "landau",
        passed,
        f"max |eps_n - B(2n+1)| = {worst:.3e} at zero coupling (tol {cfg.tol:g})",
        None if passed else witness,
    )


def _check_fh(spec, field, cfg) -> CheckResult:
    if not potentials.has_derivative(spec):
        return _not_applicable(
            "fh", "profile has no analytic derivative (finite differences only)"
        )
    if potentials.is_c1(spec):
        band = _FH_REL_TOL
        note = ""
    else:
        # kinked profiles: the quadrature of the piecewise derivative carries
        # a localized O(h) error, so the agreement band is widened
        band = 1e-3 * math.sqrt(max(1.0, cfg.tol / 1e-6))
        note = " (kink allowance)"
    k = min(cfg.bands, 3)
    worst = 0.0
    witness = None
    for p in np.linspace(cfg.p_min, cfg.p_max, 5):
        p = float(p)
        delta_p = 1e-3 * max(1.0, abs(p))
        fe = solve_fiber(spec, field, p, k, cfg.tol)
        fd_all = _fd_band_derivatives(spec, field, p, k, delta_p, cfg.tol)
        for n in range(k):
            fh = _fh_momentum_integral(spec, field, fe, n)
            fd = float(fd_all[n])
            rel = abs(fh - fd) / (1.0 + abs(fd))
            if rel > worst:
                worst = rel
                witness = {"p": p, "n": n, "fh": fh, "fd": fd}
    passed = worst <= band
    return CheckResult(
        "fh",
        passed,
        f"max |fh - fd| / (1 + |fd|) = {worst:.3e} (tol {band:g}{note})",
        None if passed else witness,
    )


def _check_minimax(spec, field, cfg) -> CheckResult:
    sign = potentials.classify_sign(spec)
    if sign is SignClass.INDEFINITE:
        return _not_applicable("minimax", "profile is not sign-definite")
    lams = sorted(cfg.lambdas or (0.5, 1.0, 2.0))
    k = min(cfg.bands, 4)
    slack = 2.0 * cfg.tol
    worst = -math.inf
    witness = None
    for p in np.linspace(cfg.p_min, cfg.p_max, 5):
        p = float(p)
        eig_rows = [
            solve_fiber(potentials.scale(spec, lam), field, p, k, cfg.tol).eigenvalues
            for lam in lams
        ]
        for i in range(len(lams) - 1):
            if sign is SignClass.NON_NEGATIVE:
                violation = eig_rows[i] - eig_rows[i + 1]  # expect <= 0
            else:
                violation = eig_rows[i + 1] - eig_rows[i]
            n = int(violation.argmax())
            if violation[n] > worst:
                worst = float(violation[n])
                witness = {
                    "p": p,
                    "n": n,
                    "lambda_pair": (lams[i], lams[i + 1]),
                    "violation": float(violation[n]),
                }
    passed = worst <= slack
    return CheckResult(
        "minimax",
        passed,
        f"worst ordering violation {worst:.3e} over lambdas {lams} (slack {slack:g})",
        None if passed else witness,
    )


def _check_gaps(spec, field, cfg, band_structure) -> CheckResult:
    sup = potentials.sup_norm(spec)
    B = field.B
    sign = potentials.classify_sign(spec)
    definite = sign is not SignClass.INDEFINITE
    if not (sup < B or (definite and sup < 2 * B)):
        return _not_applicable(
            "gaps", f"sup-norm {sup:g} outside the guaranteed-gap regime for B={B:g}"
        )
    bs = band_structure or sweep(spec, field, cfg)
    levels = B * (2 * np.arange(bs.band_count) + 1)
    slack = 2.0 * cfg.tol
    dev = bs.energies - levels[:, None]
    if definite and sign is SignClass.NON_NEGATIVE:
        bound_ok = bool(np.all(dev >= -slack) and np.all(dev <= sup + slack))
    elif definite and sign is SignClass.NON_POSITIVE:
        bound_ok = bool(np.all(dev <= slack) and np.all(dev >= -sup - slack))
    else:
        bound_ok = bool(np.all(np.abs(dev) <= sup + slack))
    gap_list = gaps(bs)
    gaps_ok = all(g.open for g in gap_list)
    passed = bound_ok and gaps_ok
    detail = (
        f"bands within the sup-norm envelope: {bound_ok}; "
        f"{sum(g.open for g in gap_list)}/{len(gap_list)} computed gaps open"
    )
    witness = None
    if not passed:
        n = int(np.abs(dev).max(axis=1).argmax())
        j = int(np.abs(dev[n]).argmax())
        witness = {"n": n, "p": float(bs.p_grid[j]), "deviation": float(dev[n, j])}
    return CheckResult("gaps", passed, detail, witness)


def _check_monotone(spec, field, cfg) -> CheckResult:
    sign = potentials.classify_sign(spec)
    if sign is SignClass.INDEFINITE:
        return _not_applicable("monotone", "profile is not sign-definite")
    lams = cfg.lambdas or (0.5, 1.0, 2.0)
    # width monotonicity is sampled on a thinned momentum grid: widths are
    # grid maxima, so the subsample keeps the check affordable inside runs
    steps = min(cfg.p_steps, 41)
    sub_cfg = SweepConfig(
        p_min=cfg.p_min, p_max=cfg.p_max, p_steps=steps,
        bands=min(cfg.bands, 3), tol=cfg.tol,
    )
    result = lambda_sweep(spec, field, sub_cfg, lams)
    passed = all(result.strictly_increasing)
    detail = (
        f"band widths along |lambda| {result.lambdas}: "
        + "; ".join(
            f"n={n}: " + "/".join(f"{w:.4g}" for w in result.widths[:, n])
            for n in range(result.widths.shape[1])
        )
    )
    witness = None
    if not passed:
        bad = [n for n, okay in enumerate(result.strictly_increasing) if not okay]
        witness = {"bands": bad, "widths": result.widths[:, bad].tolist()}
    return CheckResult("monotone", passed, detail, witness)


def _default_large_p(spec, field: FieldConfig) -> float:
    radius = potentials.compact_support_radius(spec)
    scale = max(1.0, (radius or 0.0) * field.B)
    return 40.0 * math.sqrt(field.B) * scale


def _check_asymptotes(spec, field, cfg) -> CheckResult:
    limits = potentials.asymptotic_limits(spec)
    if limits is None:
        return _not_applicable("asymptotes", "profile has no asymptotic limits")
    P = cfg.large_p or _default_large_p(spec, field)
    left, right = asymptote_check(spec, field, 0, P, cfg.tol)
    passed = left < _ASYMPTOTE_TOL and right < _ASYMPTOTE_TOL
    return CheckResult(
        "asymptotes",
        passed,
        f"plateau residuals at p=-+{P:g}: left {left:.3e}, right {right:.3e} "
        f"(limits v-={limits[0]:g}, v+={limits[1]:g}, tol {_ASYMPTOTE_TOL:g})",
        None if passed else {"P": P, "left": left, "right": right},
    )


def _lorentzian_coupling(spec) -> Optional[float]:
    if isinstance(spec, potentials.Lorentzian):
        return spec.lam
    if isinstance(spec, potentials.Scaled):
        inner = _lorentzian_coupling(spec.inner)
        if inner is not None:
            return spec.factor * inner
    return None


def _check_delta_limit(spec, field, cfg) -> CheckResult:
    lam = _lorentzian_coupling(spec)
    if lam is None or lam == 0.0:
        return _not_applicable(
            "delta-limit", "narrowing-width study is defined for Lorentzian profiles"
        )
    result = delta_limit_study(
        lam, 0.0, (0.4, 0.2, 0.1, 0.05), field, tol=min(cfg.tol, 1e-7)
    )
    diffs = result.successive_diffs
    trend_ok = bool(np.all(np.diff(diffs) < 0.0))
    passed = trend_ok
    detail = (
        f"ground energies {np.array2string(result.energies, precision=6)} "
        f"with successive diffs {np.array2string(diffs, precision=3)}"
    )
    if lam < 0.0:
        below = bool(np.all(result.energies < field.B))
        passed = passed and below
        detail += f"; attractive energies below B: {below}"
    return CheckResult(
        "delta-limit",
        passed,
        detail,
        None if passed else {"energies": result.energies.tolist()},
    )


def _check_symmetry(spec, field, cfg) -> CheckResult:
    even = potentials.is_even(spec)
    pm = min(abs(cfg.p_min), abs(cfg.p_max))
    if pm == 0.0:
        pm = max(abs(cfg.p_min), abs(cfg.p_max))
    k = min(cfg.bands, 3)
    worst = 0.0
    witness = None
    for p in np.linspace(0.25 * pm, pm, 4):
        p = float(p)
        plus = solve_fiber(spec, field, p, k, cfg.tol).eigenvalues
        minus = solve_fiber(spec, field, -p, k, cfg.tol).eigenvalues
        dev = np.abs(plus - minus)
        n = int(dev.argmax())
        if dev[n] > worst:
            worst = float(dev[n])
            witness = {"p": p, "n": n, "difference": float(plus[n] - minus[n])}
    if even:
        passed = worst <= 2.0 * cfg.tol
        detail = f"even profile: max |eps(p) - eps(-p)| = {worst:.3e} (slack {2*cfg.tol:g})"
        return CheckResult("symmetry", passed, detail, None if passed else witness)
    passed = worst > 10.0 * cfg.tol
    detail = (
        f"asymmetric profile: max |eps(p) - eps(-p)| = {worst:.3e} "
        f"(detection threshold {10*cfg.tol:g})"
    )
    return CheckResult("symmetry", passed, detail, None if passed else witness)
