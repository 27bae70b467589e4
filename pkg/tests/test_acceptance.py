"""Acceptance gate: one PASS/FAIL line per criterion, printed in the terminal summary.

Criterion 9 needs an external Euler reference wave (``x,eta0,u1,u2`` CSV with its
speed). Point ``WB_EULER_REFERENCE`` at it; ``WB_EULER_T_END`` sets the run length.
"""

import math
import os
import time

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from whitham_boussinesq import (
    WaveState,
    amplitude_speed_sweep,
    apriori_bound,
    continuous_dependence_test,
    dt_max,
    energy_E,
    evolve,
    load_reference,
    make_grid,
    petviashvili_solve,
    relative_difference,
    soliton_evolution_experiment,
)
from whitham_boussinesq.experiments import blowup_time, reference_from_soliton
from whitham_boussinesq.spectral import locate_peak, spectral_shift
from whitham_boussinesq.validation import gaussian_pulse, linear_phase_speed

pytestmark = pytest.mark.slow


def test_c1_linear_dispersion(criterion):
    start = time.perf_counter()
    errors = {k: abs(linear_phase_speed(k, eps=1e-8) / math.sqrt(math.tanh(k) / k) - 1) for k in (0.5, 1, 2, 4)}
    elapsed = time.perf_counter() - start
    worst = max(errors.values())
    ok = worst < 1e-6 and elapsed < 10
    criterion("1 linear dispersion", ok, f"max rel phase-speed error {worst:.2e} (< 1e-6), {elapsed:.1f} s (< 10 s)")
    assert ok


def test_c2_conservation(criterion):
    grid = make_grid(1024, 128.0)
    s0 = gaussian_pulse(grid)
    start = time.perf_counter()
    _, trace = evolve(s0, 50.0, dt_max(grid) / 4, sample_every=25)
    elapsed = time.perf_counter() - start
    h = np.array([r.hamiltonian for r in trace])
    drift = float(np.max(np.abs(h - h[0])) / abs(h[0]))
    mean_drift = max(
        max(abs(r.mean_eta - trace[0].mean_eta) for r in trace),
        max(abs(r.mean_vel - trace[0].mean_vel) for r in trace),
    )
    E0 = energy_E(s0)
    ok = E0 <= 1 and drift < 1e-8 and mean_drift < 1e-12 and elapsed < 60
    criterion(
        "2 conservation",
        ok,
        f"E(0)={E0:.3f}, H drift {drift:.2e} (< 1e-8), mean drift {mean_drift:.1e} (< 1e-12), {elapsed:.1f} s (< 60 s)",
    )
    assert ok


def test_c3_solitary_existence(criterion, soliton_grid):
    start = time.perf_counter()
    worst = 0.0
    all_converged = True
    for c in (1.05, 1.25, 1.5, 2.0, 3.0):
        res = petviashvili_solve(c, soliton_grid)
        all_converged &= res.converged
        worst = max(worst, res.residual)
    sweep = amplitude_speed_sweep(1.01, 1.5, 50, soliton_grid)
    amps = np.array([r.amplitude for r in sweep])
    monotone = bool(all(r.converged for r in sweep) and np.all(np.diff(amps) > 0))
    elapsed = time.perf_counter() - start
    ok = all_converged and worst < 1e-10 and monotone and elapsed < 300
    criterion(
        "3 solitary existence",
        ok,
        f"max residual {worst:.1e} (< 1e-10) over 5 speeds, a(c) strictly increasing on 50-point sweep: "
        f"{monotone}, {elapsed:.1f} s (< 300 s)",
    )
    assert ok


def test_c4_kdv_limit(criterion, soliton_grid):
    errs = []
    for eps in (0.01, 0.005, 0.0025):
        res = petviashvili_solve(1 + eps, soliton_grid)
        assert res.converged
        errs.append(abs(res.amplitude - 2 * eps) / (2 * eps))
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    ok = max(errs) < 0.1 and decreasing
    detail = ", ".join(f"{e:.2e}" for e in errs)
    criterion("4 KdV limit", ok, f"rel amplitude error vs 2eps for eps=0.01,0.005,0.0025: {detail} (< 0.1, decreasing)")
    assert ok


def test_c5_translation(criterion, soliton_125):
    g = soliton_125.grid
    c = soliton_125.c
    t_end = 0.5 * g.length / c
    s0 = WaveState(g, soliton_125.eta, soliton_125.vel)
    final, _ = evolve(s0, t_end, dt_max(g) / 8, sample_every=10**9)
    x_peak, _ = locate_peak(final.eta, g)
    realigned = relative_difference(spectral_shift(soliton_125.eta, g, x_peak), final.eta, g)
    exact = relative_difference(spectral_shift(soliton_125.eta, g, c * t_end), final.eta, g)
    ok = realigned < 1e-6 and exact < 1e-6
    criterion(
        "5 translation",
        ok,
        f"half-domain shape error {realigned:.2e} after peak realignment, {exact:.2e} at exact shift c*t (< 1e-6)",
    )
    assert ok


def test_c6_self_consistency(criterion, soliton_110):
    report, _ = soliton_evolution_experiment(reference_from_soliton(soliton_110), soliton_110.grid, 20.0)
    ok = report.d < 1e-6 and abs(report.c_fitted - 1.1) < 1e-4
    criterion(
        "6 fixed-point self-consistency",
        ok,
        f"d={report.d:.2e} (< 1e-6), |c_fitted - 1.1|={abs(report.c_fitted - 1.1):.1e} (< 1e-4)",
    )
    assert ok


def test_c7_apriori_bound(criterion):
    worst = 0.0
    for E0, C in ((0.1, 1.0), (0.5, 2.0)):
        t = np.linspace(0.0, 0.9 * blowup_time(E0, C), 200)
        sol = solve_ivp(
            lambda _, e: C * (e + e * e), (0.0, t[-1]), [E0], method="DOP853", t_eval=t, rtol=1e-13, atol=1e-16
        )
        worst = max(worst, float(np.max(np.abs(apriori_bound(E0, C, t) / sol.y[0] - 1))))
    ok = worst < 1e-10
    criterion("7 a priori bound", ok, f"max rel deviation from ODE integration {worst:.1e} (< 1e-10)")
    assert ok


def test_c8_continuous_dependence(criterion):
    grid = make_grid(512, 64.0)
    s0 = gaussian_pulse(grid)
    dt = dt_max(grid) / 4
    coarse = continuous_dependence_test(s0, 1e-6, 10.0, dt, sample_every=4)
    fine = continuous_dependence_test(s0, 1e-6, 10.0, dt / 2, sample_every=8)
    spread = abs(fine.rate - coarse.rate) / abs(coarse.rate)
    ok = coarse.bounded and fine.bounded and spread < 0.2
    criterion(
        "8 continuous dependence",
        ok,
        f"R(t) bounded: {coarse.bounded and fine.bounded}, C_hat {coarse.rate:.4g} vs {fine.rate:.4g} "
        f"under dt-halving, spread {spread:.1e} (< 0.2)",
    )
    assert ok


def test_c9_euler_reference(criterion, soliton_grid):
    path = os.environ.get("WB_EULER_REFERENCE")
    if not path:
        criterion("9 Euler reference", None, "WB_EULER_REFERENCE not set, no external Euler data supplied")
        pytest.skip("no Euler reference supplied")
    t_end = float(os.environ.get("WB_EULER_T_END", "100"))
    report, _ = soliton_evolution_experiment(load_reference(path), soliton_grid, t_end)
    ok = report.d < 1e-3 and abs(report.c_fitted - 1.22957) < 0.01
    criterion(
        "9 Euler reference",
        ok,
        f"d={report.d:.2e} (< 1e-3), c_fitted={report.c_fitted:.5f} (|. - 1.22957| < 0.01)",
    )
    assert ok
