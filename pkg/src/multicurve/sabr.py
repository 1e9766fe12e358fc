"""SABR implied volatility and per-section calibration.

The volatility formula is the Hagan et al. lognormal expansion, fed with the
FRA rate of the forwarding curve in place of the classical forward.  Only the
terms up to first order in expiry (``A``) and fourth order in log-moneyness
(``B``) are kept.

Calibration fixes ``beta`` and fits ``(alpha, rho, nu)`` with a bounded
Hooke--Jeeves pattern search, minimising either the plain root-sum-square vol
error or the vega-weighted one.  The search is started from the best points of
a coarse ``(rho, nu)`` lattice (alpha matched to the ATM vol) and polls in
coordinates whitened by the residual Jacobian at the start, which keeps the
long curved valleys of the SABR objective from stalling the coordinate polls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date
from typing import Sequence

import numpy as np

from .errors import CalibrationError, DomainError
from .pricing import black_caplet

ATM_LOG_MONEYNESS = 1e-8

ALPHA_BOUNDS = (1e-6, 5.0)
RHO_BOUNDS = (-0.999, 0.999)
NU_BOUNDS = (1e-6, 5.0)

INITIAL_GUESS = (0.045, -0.10, 0.20)

# Poll steps are measured in whitened coordinates, i.e. roughly in units of the
# weighted residual norm.
MIN_STEP = 1e-11
MAX_EVALUATIONS = 10_000
INITIAL_STEP = 0.01
STARTS = 2
REWHITEN_EVALUATIONS = 500
START_RHOS = tuple(np.linspace(-0.9, 0.9, 13))
START_NUS = tuple(np.geomspace(0.05, 2.5, 10))


@dataclass(frozen=True)
class SabrParams:
    alpha: float
    beta: float = 0.5
    rho: float = 0.0
    nu: float = 0.2

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError(f"beta must lie in [0, 1], got {self.beta}")
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [-1, 1], got {self.rho}")
        if not self.nu > 0:
            raise DomainError(f"nu must be positive, got {self.nu}")

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "rho": self.rho, "nu": self.nu}


def _x_of_z(z: np.ndarray, rho: float) -> np.ndarray:
    """ln((sqrt(1 - 2 rho z + z^2) + z - rho) / (1 - rho)) without cancellation.

    Uses s - 1 = (z^2 - 2 rho z) / (s + 1) and, for z < 0, the reflection
    (s + z - rho)(s - z + rho) = 1 - rho^2.
    """
    s = np.sqrt(1.0 - 2.0 * rho * z + z * z)
    w = (z * z - 2.0 * rho * z) / (s + 1.0)
    return np.where(z >= 0.0, np.log1p((w + z) / (1.0 - rho)), -np.log1p((w - z) / (1.0 + rho)))


class _Smile:
    """Strike-dependent pieces of the SABR formula, fixed for given F, K, beta."""

    def __init__(self, forward, strike, beta: float):
        f = np.asarray(forward, dtype=float)
        k = np.asarray(strike, dtype=float)
        self.scalar = f.ndim == 0 and k.ndim == 0
        f, k = np.broadcast_arrays(np.atleast_1d(f), np.atleast_1d(k))
        if np.any(f <= 0.0) or np.any(k <= 0.0):
            raise DomainError("SABR lognormal volatility needs positive forward and strike")
        self.beta = beta
        self.log_fk = np.log(f / k)
        self.fk_half = (f * k) ** ((1.0 - beta) / 2.0)
        lb = (1.0 - beta) * self.log_fk
        self.b_term = 1.0 + lb * lb / 24.0 + lb ** 4 / 1920.0
        self.atm = np.abs(self.log_fk) < ATM_LOG_MONEYNESS
        self.any_atm = bool(self.atm.any())
        self.away = ~self.atm

    def vols(self, alpha: float, rho: float, nu: float, expiry: float) -> np.ndarray:
        a, b, r, n = alpha, self.beta, rho, nu
        if abs(r) >= 1.0:
            raise DomainError("rho = +/-1 is a boundary of the SABR formula")
        fk_half = self.fk_half
        a_term = 1.0 + (
            a * a * (1.0 - b) ** 2 / (24.0 * fk_half * fk_half)
            + a * b * n * r / (4.0 * fk_half)
            + n * n * (2.0 - 3.0 * r * r) / 24.0
        ) * expiry
        if self.any_atm:
            lead = np.empty_like(self.log_fk)
            lead[self.atm] = a / fk_half[self.atm]
            lf = self.log_fk[self.away]
            lead[self.away] = n * lf / _x_of_z(n / a * fk_half[self.away] * lf, r)
        else:
            lead = n * self.log_fk / _x_of_z(n / a * fk_half * self.log_fk, r)
        return lead * a_term / self.b_term


def sabr_vol(params: SabrParams, forward, strike, expiry: float):
    """Lognormal SABR implied volatility.

    ``forward`` and ``strike`` broadcast against each other; a scalar pair gives
    a float back.  Below ``ATM_LOG_MONEYNESS`` of log-moneyness the K -> F limit
    ``alpha / (F K)^((1-beta)/2)`` replaces the 0/0 leading factor.
    """
    if not expiry > 0.0:
        raise DomainError(f"expiry must be positive, got {expiry}")
    smile = _Smile(forward, strike, params.beta)
    vol = smile.vols(params.alpha, params.rho, params.nu, expiry)
    return float(vol[0]) if smile.scalar else vol


def sabr_vol_atm(params: SabrParams, forward: float, expiry: float) -> float:
    """Closed K = F reduction: alpha / F^(1-beta) * A(F, F)."""
    a, b, r, n = params.alpha, params.beta, params.rho, params.nu
    fb = forward ** (1.0 - b)
    a_term = 1.0 + (a * a * (1.0 - b) ** 2 / (24.0 * fb * fb) + a * b * n * r / (4.0 * fb)
                    + n * n * (2.0 - 3.0 * r * r) / 24.0) * expiry
    return a / fb * a_term


def black_vega(forward, strike, expiry: float, vol, discount: float = 1.0,
               accrual: float = 1.0, notional: float = 1.0):
    """Derivative of the Black caplet (or floorlet) value with respect to vol."""
    f = np.asarray(forward, dtype=float)
    k = np.asarray(strike, dtype=float)
    s = np.asarray(vol, dtype=float)
    if np.any(f <= 0.0) or np.any(k <= 0.0):
        raise DomainError("Black vega needs positive forward and strike")
    if np.any(s <= 0.0) or not expiry > 0.0:
        raise DomainError("Black vega needs positive volatility and expiry")
    sd = s * math.sqrt(expiry)
    d_plus = np.log(f / k) / sd + 0.5 * sd
    pdf = np.exp(-0.5 * d_plus * d_plus) / math.sqrt(2.0 * math.pi)
    out = notional * discount * accrual * f * pdf * math.sqrt(expiry)
    return float(out) if out.ndim == 0 else out


def black_caplet_price(forward: float, strike: float, expiry: float, vol: float,
                       discount: float = 1.0, accrual: float = 1.0, omega: int = 1,
                       notional: float = 1.0) -> float:
    return black_caplet(forward, strike, expiry, vol, discount, accrual, omega, notional)


@dataclass(frozen=True)
class SmileSection:
    """Caplet forward vols sharing one fixing date and underlying FRA rate."""

    expiry: float
    forward: float
    strikes: tuple[float, ...]
    vols: tuple[float, ...]
    maturity: date | None = None
    fixing: date | None = None
    discount: float = 1.0
    accrual: float = 0.5
    tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "strikes", tuple(float(k) for k in self.strikes))
        object.__setattr__(self, "vols", tuple(float(v) for v in self.vols))
        if len(self.strikes) != len(self.vols):
            raise DomainError("strikes and vols differ in length")
        if len(self.strikes) < 3:
            raise DomainError("a smile section needs at least three strikes")
        if any(b <= a for a, b in zip(self.strikes, self.strikes[1:])):
            raise DomainError("strikes must be strictly increasing")
        if any(v <= 0.0 for v in self.vols):
            raise DomainError("market vols must be positive")
        if not self.forward > 0.0 or not self.expiry > 0.0:
            raise DomainError("section needs positive FRA rate and expiry")


def vega_weights(section: SmileSection) -> np.ndarray:
    v = black_vega(section.forward, np.array(section.strikes), section.expiry,
                   np.array(section.vols), section.discount, section.accrual)
    return v / v.sum()


def objective_weights(section: SmileSection, objective: str) -> np.ndarray:
    n = len(section.strikes)
    if objective in ("standard", "std"):
        return np.full(n, 1.0 / n)
    if objective in ("vegaWeighted", "vega", "vega-weighted"):
        return vega_weights(section)
    raise ValueError(f"unknown objective {objective!r}")


def _normalise_objective(objective: str) -> str:
    if objective in ("standard", "std"):
        return "standard"
    if objective in ("vegaWeighted", "vega", "vega-weighted"):
        return "vegaWeighted"
    raise ValueError(f"unknown objective {objective!r}")


@dataclass
class CalibrationReport:
    params: SabrParams
    objective_name: str
    objective: float
    residuals: np.ndarray
    weights: np.ndarray
    evaluations: int
    converged: bool = True
    initial_objective: float = float("nan")
    section: SmileSection | None = field(default=None, repr=False)

    @property
    def max_abs_residual(self) -> float:
        return float(np.max(np.abs(self.residuals)))

    def to_dict(self) -> dict:
        sec = self.section
        return {
            "maturity": sec.maturity.isoformat() if sec is not None and sec.maturity else None,
            "fixing": sec.fixing.isoformat() if sec is not None and sec.fixing else None,
            "expiry": sec.expiry if sec is not None else None,
            "forward": sec.forward if sec is not None else None,
            "params": self.params.to_dict(),
            "objectiveName": self.objective_name,
            "objective": self.objective,
            "evaluations": self.evaluations,
            "strikes": list(sec.strikes) if sec is not None else None,
            "residuals": self.residuals.tolist(),
            "weights": self.weights.tolist(),
        }


def _to_search(alpha: float, rho: float, nu: float) -> np.ndarray:
    return np.array([math.log(alpha), rho, math.log(nu)])


def _from_search(u: np.ndarray) -> tuple[float, float, float]:
    return math.exp(u[0]), float(u[1]), math.exp(u[2])


_LOWER = _to_search(ALPHA_BOUNDS[0], RHO_BOUNDS[0], NU_BOUNDS[0])
_UPPER = _to_search(ALPHA_BOUNDS[1], RHO_BOUNDS[1], NU_BOUNDS[1])


@dataclass(frozen=True)
class PatternSearchResult:
    x: np.ndarray
    value: float
    evaluations: int
    converged: bool
    step: float


def pattern_search(func, x0: np.ndarray, lower: np.ndarray, upper: np.ndarray,
                   step: float = INITIAL_STEP, min_step: float = MIN_STEP,
                   max_evaluations: int = MAX_EVALUATIONS) -> PatternSearchResult:
    """Bounded Hooke--Jeeves search.

    Coordinate polls of size ``step`` followed by pattern moves along the last
    improving direction; the step halves whenever a poll finds no improvement.
    ``converged`` means the step fell below ``min_step`` within the budget.
    """
    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        return func(x)

    def explore(x, fx, h):
        x = x.copy()
        for i in range(x.size):
            for sign in (1.0, -1.0):
                trial = x.copy()
                trial[i] = min(max(x[i] + sign * h, lower[i]), upper[i])
                if trial[i] == x[i]:
                    continue
                ft = f(trial)
                if ft < fx:
                    x, fx = trial, ft
                    break
        return x, fx

    base = np.clip(np.asarray(x0, dtype=float), lower, upper)
    f_base = f(base)
    h = step
    while h >= min_step and evals < max_evaluations:
        x_new, f_new = explore(base, f_base, h)
        if f_new < f_base:
            while evals < max_evaluations:
                pattern = np.clip(2.0 * x_new - base, lower, upper)
                base, f_base = x_new, f_new
                f_pattern = f(pattern)
                x_try, f_try = explore(pattern, f_pattern, h)
                if f_try < f_base:
                    x_new, f_new = x_try, f_try
                else:
                    break
        else:
            h *= 0.5
    return PatternSearchResult(base, f_base, evals, h < min_step, h)


def _atm_alpha(atm_vol: float, rho: float, nu: float, forward: float, expiry: float,
               beta: float) -> float | None:
    """Smallest positive alpha reproducing ``atm_vol`` at K = F, or None."""
    fb = forward ** (1.0 - beta)
    coeffs = [
        (1.0 - beta) ** 2 / (24.0 * fb * fb) * expiry,
        beta * rho * nu / (4.0 * fb) * expiry,
        1.0 + nu * nu * (2.0 - 3.0 * rho * rho) / 24.0 * expiry,
        -atm_vol * fb,
    ]
    roots = [r.real for r in np.roots(coeffs) if abs(r.imag) < 1e-12 and r.real > 0.0]
    return min(roots) if roots else None


def _start_points(loss, section: SmileSection, beta: float, init: SabrParams) -> list:
    """Candidate starts sorted by loss: ``init`` plus an ATM-matched lattice."""
    atm_vol = float(np.interp(section.forward, section.strikes, section.vols))
    u = _to_search(init.alpha, init.rho, init.nu)
    points = [(loss(u), 0, u)]
    for rho in START_RHOS:
        for nu in START_NUS:
            alpha = _atm_alpha(atm_vol, rho, nu, section.forward, section.expiry, beta)
            if alpha is None or not ALPHA_BOUNDS[0] <= alpha <= ALPHA_BOUNDS[1]:
                continue
            u = _to_search(alpha, rho, nu)
            points.append((loss(u), len(points), u))
    points.sort(key=lambda p: (p[0], p[1]))
    return [p[2] for p in points]


def _whitening(weighted_residuals, u0: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Map from whitened to search coordinates: inverse singular values of the Jacobian."""
    jac = np.empty((len(weighted_residuals(u0)), u0.size))
    for k in range(u0.size):
        du = np.zeros(u0.size)
        du[k] = h
        jac[:, k] = (weighted_residuals(u0 + du) - weighted_residuals(u0 - du)) / (2.0 * h)
    if not np.all(np.isfinite(jac)):
        return np.eye(u0.size)
    _, sv, vt = np.linalg.svd(jac, full_matrices=False)
    if not sv[0] > 0.0:
        return np.eye(u0.size)
    return vt.T / np.maximum(sv, sv[0] * 1e-8)


def _whitened_search(weighted, loss, u0: np.ndarray, max_evaluations: int):
    """Pattern search in Jacobian-whitened coordinates, re-whitened every chunk.

    The whitening goes stale when the search travels far (e.g. nu towards its
    lower bound), so the search restarts from its current point with a fresh
    basis every ``REWHITEN_EVALUATIONS`` evaluations.
    """
    u = np.clip(u0, _LOWER, _UPPER)
    value = loss(u)
    step, evals = INITIAL_STEP, 1
    while True:
        # keep the finite-difference stencil inside the box
        centre = np.clip(u, _LOWER + 1e-5, _UPPER - 1e-5)
        basis = _whitening(weighted, centre)
        evals += 2 * u.size + 1

        def whitened(y):
            return loss(centre + basis @ y)

        budget = min(REWHITEN_EVALUATIONS, max_evaluations - evals)
        if budget <= 0:
            return u, value, evals, False
        result = pattern_search(whitened, np.zeros(u.size), np.full(u.size, -np.inf),
                                np.full(u.size, np.inf), step=step, max_evaluations=budget)
        evals += result.evaluations
        if result.value <= value:
            u, value = np.clip(centre + basis @ result.x, _LOWER, _UPPER), result.value
        if result.converged:
            return u, value, evals, True
        step = min(INITIAL_STEP, 16.0 * result.step)


def calibrate_section(section: SmileSection, objective: str = "standard",
                      beta: float = 0.5, init: SabrParams | None = None,
                      max_evaluations: int = MAX_EVALUATIONS,
                      starts: int = STARTS) -> CalibrationReport:
    """Fit ``(alpha, rho, nu)`` at fixed ``beta`` to one smile section.

    ``max_evaluations`` bounds each of the ``starts`` pattern searches.
    """
    name = _normalise_objective(objective)
    if init is None:
        init = SabrParams(INITIAL_GUESS[0], beta, INITIAL_GUESS[1], INITIAL_GUESS[2])
    if not (ALPHA_BOUNDS[0] <= init.alpha <= ALPHA_BOUNDS[1]
            and RHO_BOUNDS[0] <= init.rho <= RHO_BOUNDS[1]
            and NU_BOUNDS[0] <= init.nu <= NU_BOUNDS[1]):
        raise DomainError("initial SABR parameters outside the calibration box")
    strikes = np.array(section.strikes)
    market = np.array(section.vols)
    weights = objective_weights(section, name)
    expiry = section.expiry

    smile = _Smile(section.forward, strikes, beta)

    def residuals(alpha, rho, nu):
        return market - smile.vols(alpha, rho, nu, expiry)

    def weighted(u):
        u = np.clip(u, _LOWER, _UPPER)
        return residuals(*_from_search(u)) * weights

    def loss(u):
        r = weighted(u)
        value = math.sqrt(float(r @ r))
        return value if math.isfinite(value) else math.inf

    initial = loss(_to_search(init.alpha, init.rho, init.nu))
    best, total, converged = None, 0, False
    for u0 in _start_points(loss, section, beta, init)[:max(starts, 1)]:
        u, value, evals, ok = _whitened_search(weighted, loss, u0, max_evaluations)
        total += evals
        if best is None or value < best[1]:
            best, converged = (u, value), ok
    alpha, rho, nu = _from_search(best[0])
    params = SabrParams(alpha, beta, rho, nu)
    res = residuals(alpha, rho, nu)
    if name == "standard":
        # report the unweighted root-sum-square, not the 1/n-scaled search loss
        value = math.sqrt(float(res @ res))
        initial *= len(res)
    else:
        value = math.sqrt(float((res * weights) @ (res * weights)))
    report = CalibrationReport(params, name, value, res, weights, total, converged,
                               initial, section)
    if not converged:
        raise CalibrationError(f"pattern search hit the {max_evaluations}-evaluation budget",
                               best=report, objective=value)
    return report


@dataclass
class SurfaceCalibration:
    reports: list[CalibrationReport]
    errors: list[tuple[SmileSection, Exception]]
    objective_name: str

    @property
    def residuals(self) -> np.ndarray:
        if not self.reports:
            return np.empty(0)
        return np.concatenate([r.residuals for r in self.reports])

    @property
    def weights(self) -> np.ndarray:
        """Pooled weights: uniform for the standard objective, vega weights otherwise."""
        if not self.reports:
            return np.empty(0)
        if self.objective_name == "standard":
            n = sum(len(r.residuals) for r in self.reports)
            return np.full(n, 1.0 / n)
        w = np.concatenate([r.weights for r in self.reports])
        return w / w.sum()

    def summary(self) -> dict:
        r, w = self.residuals, self.weights
        if r.size == 0:
            return {"sections": 0, "failed": len(self.errors)}
        mean = float(w @ r)
        std = math.sqrt(float(w @ (r - mean) ** 2))
        return {
            "sections": len(self.reports),
            "failed": len(self.errors),
            "objective": self.objective_name,
            "minResidual": float(r.min()),
            "maxResidual": float(r.max()),
            "stdResidual": std,
            "maxObjective": max(rep.objective for rep in self.reports),
        }


def calibrate_surface(sections: Sequence[SmileSection], objective: str = "standard",
                      beta: float = 0.5, init: SabrParams | None = None) -> SurfaceCalibration:
    """Calibrate each section independently; failures are collected, not raised."""
    name = _normalise_objective(objective)
    reports, errors = [], []
    ordered = sorted(sections, key=lambda s: (s.expiry, s.maturity or date.min))
    for section in ordered:
        try:
            reports.append(calibrate_section(section, name, beta, init))
        except (CalibrationError, DomainError) as exc:
            errors.append((section, exc))
    return SurfaceCalibration(reports, errors, name)
