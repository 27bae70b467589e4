import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from whitham_boussinesq.errors import ReferenceDataError
from whitham_boussinesq.evolution import DiagnosticsRecord, WaveState, dt_max, energy_E_fields
from whitham_boussinesq.experiments import (
    ReferenceWave,
    apriori_bound,
    blowup_time,
    build_initial,
    continuous_dependence_test,
    fit_apriori_constant,
    load_reference,
    reference_from_soliton,
    relative_difference,
    resample_to_grid,
    smooth_perturbation,
    soliton_evolution_experiment,
    tail_window,
    write_reference,
)
from whitham_boussinesq.spectral import apply_multiplier, make_grid, symbol_K
from whitham_boussinesq.validation import gaussian_pulse


def sech2(x, a=0.5, w=2.0):
    return a / np.cosh(x / w) ** 2


def write_csv(path, rows, header="x,eta0,u1,u2", comment=None):
    lines = [] if comment is None else [comment]
    lines.append(header)
    lines += [",".join(f"{v:.17g}" for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture
def ref_rows():
    x = np.linspace(-40, 40, 201)
    eta = sech2(x)
    return np.column_stack([x, eta, eta, np.zeros_like(x)])


class TestRelativeDifference:
    def test_identity_and_zero(self):
        g = make_grid(64, 20.0)
        eta = sech2(g.nodes)
        assert relative_difference(eta, eta, g) == 0.0
        assert relative_difference(eta, np.zeros(g.n), g) == pytest.approx(1.0)

    def test_zero_reference_rejected(self):
        g = make_grid(64, 20.0)
        with pytest.raises(ValueError):
            relative_difference(np.zeros(g.n), sech2(g.nodes), g)

    @settings(max_examples=30, deadline=None)
    @given(scale=st.floats(1e-6, 1e6), shift=st.floats(-3.0, 3.0))
    def test_scale_invariance(self, scale, shift):
        g = make_grid(64, 20.0)
        a, b = sech2(g.nodes), sech2(g.nodes - shift)
        assert relative_difference(scale * a, scale * b, g) == pytest.approx(
            relative_difference(a, b, g), rel=1e-10
        )


class TestLoadReference:
    def test_comment_speed(self, tmp_path, ref_rows):
        p = tmp_path / "wave.csv"
        write_csv(p, ref_rows, comment="# c=1.2")
        ref = load_reference(p)
        assert ref.c == 1.2
        np.testing.assert_array_equal(ref.x, ref_rows[:, 0])

    def test_sidecar_wins(self, tmp_path, ref_rows):
        p = tmp_path / "wave.csv"
        write_csv(p, ref_rows, comment="# c=1.2")
        (tmp_path / "wave.json").write_text(json.dumps({"c": 1.3}))
        assert load_reference(p).c == 1.3

    def test_missing_speed(self, tmp_path, ref_rows):
        p = tmp_path / "wave.csv"
        write_csv(p, ref_rows)
        with pytest.raises(ReferenceDataError) as info:
            load_reference(p)
        assert info.value.kind == "schema"

    def test_bad_header(self, tmp_path, ref_rows):
        p = tmp_path / "wave.csv"
        write_csv(p, ref_rows, header="x,eta,u,w", comment="# c=1.2")
        with pytest.raises(ReferenceDataError) as info:
            load_reference(p)
        assert info.value.kind == "schema"

    def test_non_monotone(self, tmp_path, ref_rows):
        rows = ref_rows.copy()
        rows[[50, 51]] = rows[[51, 50]]
        p = tmp_path / "wave.csv"
        write_csv(p, rows, comment="# c=1.2")
        with pytest.raises(ReferenceDataError) as info:
            load_reference(p)
        assert info.value.kind == "monotone"

    def test_no_decay(self, tmp_path):
        x = np.linspace(-5, 5, 50)
        p = tmp_path / "wave.csv"
        write_csv(p, np.column_stack([x, sech2(x), sech2(x), 0 * x]), comment="# c=1.2")
        with pytest.raises(ReferenceDataError) as info:
            load_reference(p)
        assert info.value.kind == "decay"

    def test_round_trip(self, tmp_path, ref_rows):
        ref = ReferenceWave(*ref_rows.T, c=1.15)
        write_reference(ref, tmp_path / "r.csv")
        back = load_reference(tmp_path / "r.csv")
        assert back.c == 1.15
        np.testing.assert_array_equal(back.eta0, ref.eta0)


class TestBuildInitial:
    def test_zero_velocity(self):
        g = make_grid(256, 64.0)
        x = g.nodes
        ref = ReferenceWave(x, sech2(x), 0 * x, 0 * x, 1.1)
        s = build_initial(ref, g)
        np.testing.assert_array_equal(s.vel, 0.0)
        np.testing.assert_array_equal(s.eta, sech2(x))

    def test_u1_gives_K_eta(self):
        g = make_grid(256, 64.0)
        x = g.nodes
        ref = ReferenceWave(x, sech2(x), sech2(x), 0 * x, 1.1)
        s = build_initial(ref, g)
        np.testing.assert_allclose(s.vel, apply_multiplier(symbol_K(), sech2(x), g), atol=1e-15)

    def test_u2_term(self):
        # u1 = 0, u2 = 1: v = K(d/dx eta0)
        g = make_grid(256, 64.0)
        x = g.nodes
        ref = ReferenceWave(x, sech2(x), 0 * x, 1 + 0 * x, 1.1)
        s = build_initial(ref, g)
        slope = -2 * sech2(x) * np.tanh(x / 2.0) / 2.0
        np.testing.assert_allclose(s.vel, apply_multiplier(symbol_K(), slope, g), atol=1e-10)

    def test_non_aligned_samples(self):
        g = make_grid(256, 64.0)
        xr = np.linspace(-31.0, 31.0, 1001)
        ref = ReferenceWave(xr, sech2(xr), 0 * xr, 0 * xr, 1.1)
        s = build_initial(ref, g)
        assert np.max(np.abs(s.eta - sech2(g.nodes))) < 1e-6

    def test_support_error(self, ref_rows):
        g = make_grid(64, 40.0)
        with pytest.raises(ReferenceDataError) as info:
            build_initial(ReferenceWave(*ref_rows.T, c=1.1), g)
        assert info.value.kind == "support"

    def test_resample_identity(self):
        g = make_grid(32, 10.0)
        v = np.sin(g.nodes)
        assert np.array_equal(resample_to_grid(g.nodes, v, g), v)


class TestSolitonExperiment:
    def test_time_zero(self, soliton_110):
        g = soliton_110.grid
        report, trace = soliton_evolution_experiment(reference_from_soliton(soliton_110), g, 0.0)
        assert report.d < 1e-12
        assert report.c_fitted == 1.1
        assert report.tail_mass == 0.0
        assert len(trace) == 1

    def test_short_run(self, soliton_110):
        g = soliton_110.grid
        report, trace = soliton_evolution_experiment(reference_from_soliton(soliton_110), g, 5.0)
        assert report.d < 1e-6
        assert report.c_fitted == pytest.approx(1.1, abs=1e-5)
        assert report.peak_position == pytest.approx(5.5, abs=1e-5)
        assert trace[-1].time == 5.0
        assert set(report.to_json()) == {"d", "c_fitted", "tail_mass", "t", "grid", "dt"}

    def test_negative_time(self, soliton_110):
        with pytest.raises(ValueError):
            soliton_evolution_experiment(reference_from_soliton(soliton_110), soliton_110.grid, -1.0)

    def test_tail_window(self):
        g = make_grid(256, 64.0)
        eta = sech2(g.nodes)
        eta[g.nodes < -20] += 1e-3
        mask = tail_window(eta, g, 0.0)
        assert mask[g.n // 2]
        # right reach sets the half-width, symmetric around the peak
        assert np.sum(mask) % 2 == 1
        width = np.sum(mask) // 2
        assert eta[g.n // 2 + width + 1] <= 1e-4 * eta[g.n // 2]


class TestAprioriBound:
    def test_initial_value(self):
        assert apriori_bound(0.3, 2.0, 0.0) == pytest.approx(0.3, rel=1e-15)

    def test_blowup_guard(self):
        tb = blowup_time(0.5, 2.0)
        assert tb == pytest.approx(math.log(3.0) / 2.0)
        with pytest.raises(ValueError):
            apriori_bound(0.5, 2.0, tb)
        with pytest.raises(ValueError):
            apriori_bound(0.5, 2.0, [0.0, 1.5 * tb])
        with pytest.raises(ValueError):
            apriori_bound(0.0, 2.0, 0.1)

    @pytest.mark.parametrize("E0,C", [(0.1, 1.0), (0.5, 2.0), (1.0, 0.3)])
    def test_matches_ode(self, E0, C):
        tb = blowup_time(E0, C)
        t = np.linspace(0, 0.9 * tb, 50)
        sol = solve_ivp(lambda _, e: C * (e + e * e), (0, t[-1]), [E0], method="DOP853",
                        t_eval=t, rtol=1e-13, atol=1e-15)
        np.testing.assert_allclose(apriori_bound(E0, C, t), sol.y[0], rtol=1e-10)

    def test_fit_constant_recovers_curve(self):
        E0, C = 0.2, 0.7
        times = np.linspace(0, 1.0, 11)
        E = apriori_bound(E0, C, times)
        trace = [DiagnosticsRecord(t, 0, e, 0, 0, 0, 0, 0) for t, e in zip(times, E)]
        assert fit_apriori_constant(trace) == pytest.approx(C, rel=1e-10)

    def test_fit_constant_is_dominating(self):
        times = np.linspace(0, 2.0, 9)
        E = 0.2 * (1 + 0.3 * np.sin(3 * times) ** 2)
        trace = [DiagnosticsRecord(t, 0, e, 0, 0, 0, 0, 0) for t, e in zip(times, E)]
        C = fit_apriori_constant(trace)
        assert np.all(apriori_bound(0.2, C, times) >= E * (1 - 1e-12))


@pytest.fixture(scope="module")
def setup():
    g = make_grid(256, 64.0)
    return gaussian_pulse(g), dt_max(g) / 4


class TestContinuousDependence:
    def test_perturbation_norm(self):
        g = make_grid(128, 32.0)
        theta, w = smooth_perturbation(g, 1e-6, seed=3)
        assert energy_E_fields(theta, w, g) == pytest.approx(1e-6, rel=1e-12)
        with pytest.raises(ValueError):
            smooth_perturbation(g, 0.0, seed=3)

    def test_deterministic(self, setup):
        s0, dt = setup
        a = continuous_dependence_test(s0, 1e-6, 1.0, dt, seed=5)
        b = continuous_dependence_test(s0, 1e-6, 1.0, dt, seed=5)
        np.testing.assert_array_equal(a.ratio, b.ratio)

    def test_linear_regime(self, setup):
        s0, dt = setup
        a = continuous_dependence_test(s0, 1e-6, 2.0, dt, sample_every=4)
        b = continuous_dependence_test(s0, 5e-7, 2.0, dt, sample_every=4)
        assert a.ratio[0] == pytest.approx(1.0)
        assert a.bounded
        np.testing.assert_allclose(a.ratio, b.ratio, rtol=1e-4)

    def test_flat_state(self):
        # around rest the flow is linear: R is independent of eps and stays O(1)
        g = make_grid(128, 32.0)
        s0 = WaveState(g, np.zeros(g.n), np.zeros(g.n))
        a = continuous_dependence_test(s0, 1e-9, 2.0, dt_max(g) / 4, sample_every=4)
        b = continuous_dependence_test(s0, 1e-7, 2.0, dt_max(g) / 4, sample_every=4)
        np.testing.assert_allclose(a.ratio, b.ratio, rtol=1e-6)
        assert np.all(np.abs(a.ratio - 1) < 0.1)
