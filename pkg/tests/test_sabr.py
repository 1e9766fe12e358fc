import math

import numpy as np
import pytest

from multicurve.errors import CalibrationError, DomainError
from multicurve.pricing import black_caplet
from multicurve.sabr import (ATM_LOG_MONEYNESS, SabrParams, SmileSection, _x_of_z, black_vega,
                             calibrate_section, calibrate_surface, pattern_search, sabr_vol,
                             sabr_vol_atm, vega_weights)

STRIKES = np.array([1, 1.5, 2, 2.25, 2.5, 3, 3.5, 4, 5, 6, 7, 8, 9, 10]) / 100


# Truncated expansion evaluated at 50 significant digits.
REFERENCE_VOLS = [
    ((0.045, 0.5, -0.1, 0.2), 0.03, 0.04, 5.0, 0.2449340179452387274),
    ((0.045, 0.5, -0.1, 0.2), 0.03, 0.03, 5.0, 0.2641424324170238545),
    ((0.045, 0.5, -0.1, 0.2), 0.03, 0.01, 5.0, 0.37454855300852515743),
    ((0.2, 0.5, -0.8, 1.0), 0.03, 0.10, 10.0, 0.15184319204188130623),
    ((0.02, 0.5, 0.7, 2.0), 0.03, 0.005, 2.0, 0.88693324480708365741),
    # z ~ -28: exercises the reflected branch of x(z)
    ((0.02, 0.5, -0.3, 2.0), 0.03, 0.10, 2.0, 0.84737880281036820333),
]


@pytest.mark.parametrize("p,F,K,T,expected", REFERENCE_VOLS)
def test_sabr_vol_high_precision_reference(p, F, K, T, expected):
    params = SabrParams(p[0], p[1], p[2], p[3])
    assert sabr_vol(params, F, K, T) == pytest.approx(expected, rel=1e-13)


def test_vectorised_matches_scalar():
    p = SabrParams(0.05, 0.5, -0.3, 0.4)
    vec = sabr_vol(p, 0.03, STRIKES, 4.0)
    assert vec.shape == STRIKES.shape
    for k, v in zip(STRIKES, vec):
        assert sabr_vol(p, 0.03, float(k), 4.0) == pytest.approx(v, rel=1e-15)


@pytest.mark.parametrize("rho", [-0.9, -0.3, 0.0, 0.5, 0.95])
@pytest.mark.parametrize("z", [-50.0, -3.0, -0.6, -0.4, -1e-9, 1e-12, 1e-6, 0.3, 4.0, 80.0])
def test_x_of_z_against_naive_formula(rho, z):
    naive = math.log((math.sqrt(1 - 2 * rho * z + z * z) + z - rho) / (1 - rho))
    # the naive form loses digits for large negative z; compare loosely there
    tol = 1e-9 if z < -1 else 1e-12
    assert _x_of_z(np.array([z]), rho)[0] == pytest.approx(naive, rel=tol)


def test_atm_branch_switch_is_continuous():
    p = SabrParams(0.045, 0.5, -0.1, 0.2)
    F = 0.0312
    atm = sabr_vol_atm(p, F, 5.0)
    assert sabr_vol(p, F, F, 5.0) == atm
    inside = sabr_vol(p, F, F * math.exp(-0.5 * ATM_LOG_MONEYNESS), 5.0)
    outside = sabr_vol(p, F, F * math.exp(-2.0 * ATM_LOG_MONEYNESS), 5.0)
    assert abs(inside - atm) < 1e-8
    assert abs(outside - atm) < 1e-8


def test_parameter_validation():
    with pytest.raises(ValueError):
        SabrParams(-0.01, 0.5, 0.0, 0.2)
    with pytest.raises(ValueError):
        SabrParams(0.05, 0.5, 1.5, 0.2)
    with pytest.raises(DomainError):
        sabr_vol(SabrParams(0.05), -0.01, 0.02, 1.0)


def _section(params, F=0.032, T=3.0, noise=None):
    vols = sabr_vol(params, F, STRIKES, T)
    if noise is not None:
        vols = vols + noise
    return SmileSection(T, F, tuple(STRIKES), tuple(vols), discount=0.9, accrual=0.5)


@pytest.mark.parametrize("F,K,T", [(0.03, 0.02, 1.0), (0.03, 0.03, 5.0), (0.05, 0.08, 10.0)])
def test_black_vega_matches_central_difference(F, K, T):
    vol, h = 0.25, 1e-5
    up = black_caplet(F, K, T, vol + h, 0.95, 0.5)
    down = black_caplet(F, K, T, vol - h, 0.95, 0.5)
    assert black_vega(F, K, T, vol, 0.95, 0.5) == pytest.approx((up - down) / (2 * h), rel=1e-7)


def test_vega_weights_positive_and_normalised():
    w = vega_weights(_section(SabrParams(0.05, 0.5, -0.2, 0.4)))
    assert np.all(w > 0.0)
    assert w.sum() == pytest.approx(1.0, abs=1e-15)


def test_pattern_search_minimises_shifted_quadratic():
    target = np.array([0.3, -0.7, 1.2])
    x, value, evals, converged, _ = pattern_search(
        lambda u: float(np.sum((u - target) ** 2)), np.zeros(3),
        np.full(3, -5.0), np.full(3, 5.0), step=0.5, min_step=1e-10).__dict__.values()
    assert converged
    assert np.allclose(x, target, atol=1e-9)


def test_pattern_search_respects_bounds():
    r = pattern_search(lambda u: float(np.sum((u - 3.0) ** 2)), np.zeros(2),
                       np.full(2, -1.0), np.full(2, 1.0), step=0.5, min_step=1e-10)
    assert np.allclose(r.x, 1.0)


@pytest.mark.parametrize("truth", [
    SabrParams(0.045, 0.5, -0.1, 0.2),
    SabrParams(0.15, 0.5, 0.6, 0.9),
    SabrParams(0.012, 0.5, -0.75, 0.06),
])
def test_noiseless_round_trip(truth):
    rep = calibrate_section(_section(truth))
    got = rep.params
    assert rep.objective < 1e-8
    for a, b in [(got.alpha, truth.alpha), (got.rho, truth.rho), (got.nu, truth.nu)]:
        assert a == pytest.approx(b, rel=1e-4)


def test_objective_not_worse_than_initial_point():
    noise = np.random.default_rng(3).uniform(-0.002, 0.002, STRIKES.size)
    for objective in ("standard", "vegaWeighted"):
        rep = calibrate_section(_section(SabrParams(0.06, 0.5, -0.3, 0.5), noise=noise), objective)
        assert rep.objective <= rep.initial_objective


def test_distant_starts_agree():
    noise = np.random.default_rng(5).uniform(-0.002, 0.002, STRIKES.size)
    sec = _section(SabrParams(0.05, 0.5, -0.2, 0.4), noise=noise)
    a = calibrate_section(sec)
    b = calibrate_section(sec, init=SabrParams(0.5, 0.5, 0.8, 3.0))
    assert abs(a.objective - b.objective) < 1e-6


def test_flat_smile_beta_one_degenerates():
    sec = SmileSection(2.0, 0.03, tuple(STRIKES), (0.25,) * STRIKES.size)
    rep = calibrate_section(sec, beta=1.0)
    assert rep.params.alpha == pytest.approx(0.25, rel=1e-6)
    assert rep.params.nu < 1e-3


def test_budget_exhaustion_carries_best_so_far():
    sec = _section(SabrParams(0.05, 0.5, -0.2, 0.4))
    with pytest.raises(CalibrationError) as info:
        calibrate_section(sec, max_evaluations=30)
    best = info.value.best
    assert best is not None and best.objective == info.value.objective
    assert best.objective <= best.initial_objective


def test_reported_standard_objective_is_unnormalised():
    noise = np.random.default_rng(8).uniform(-0.002, 0.002, STRIKES.size)
    rep = calibrate_section(_section(SabrParams(0.05, 0.5, -0.2, 0.4), noise=noise))
    assert rep.objective == pytest.approx(math.sqrt(float(rep.residuals @ rep.residuals)), rel=1e-15)
    w = rep.weights
    assert np.allclose(w, 1.0 / STRIKES.size)


def test_surface_summary_statistics():
    rng = np.random.default_rng(1)
    sections = [_section(SabrParams(0.05, 0.5, -0.2, 0.4), T=t, noise=rng.uniform(-0.002, 0.002, 14))
                for t in (1.0, 2.0, 5.0)]
    for objective in ("standard", "vegaWeighted"):
        cal = calibrate_surface(sections, objective)
        summary = cal.summary()
        r, w = cal.residuals, cal.weights
        assert w.sum() == pytest.approx(1.0)
        mean = float(w @ r)
        assert summary["stdResidual"] == pytest.approx(math.sqrt(float(w @ (r - mean) ** 2)), rel=1e-12)
        assert summary["minResidual"] == r.min() and summary["maxResidual"] == r.max()
        assert summary["sections"] == 3 and summary["failed"] == 0
