"""Storage schedules, revival factors, and the four retrieval routes.

Frozen reference values were computed with 30-digit mpmath evaluation of
the closed forms; cross-method numbers come from independent adaptive
quadrature (scipy) of the defining integrals.
"""

import json
import math

import numpy as np
import pytest
from scipy import integrate

from holeburn.errors import (ConfigurationError, DomainError,
                             PreconditionError)
from holeburn.medium import HoleProfile, MediumParams, slow_light_velocity
from holeburn.propagation import PulseSpec, transmitted_gaussian
from holeburn.storage import (RetrievalResult, StorageSchedule,
                              appendix_series_field,
                              bandwidth_reduction_factor, default_schedule,
                              efficiency, established_signal, kappa,
                              kappa_finite_bandwidth, kappa_quadrature,
                              restored_field_full, retrieve, revival_envelope)

SQRT_PI = math.sqrt(math.pi)


def reduced_setup(alpha0_L, delta0_T, hold=10.0):
    """Params, pulse, and half-transit schedule in reduced units."""
    params = MediumParams.reduced(alpha0_L)
    pulse = PulseSpec(duration=delta0_T)
    t_pi1 = params.length / (2.0 * slow_light_velocity(params))
    schedule = StorageSchedule(t_pi1=t_pi1, t_pi2=t_pi1 + hold)
    return params, pulse, schedule


class TestStorageSchedule:
    def test_ordering_invariant(self):
        with pytest.raises(ConfigurationError):
            StorageSchedule(t_pi1=5.0, t_pi2=5.0)

    def test_bandwidth_invariant(self):
        with pytest.raises(ConfigurationError):
            StorageSchedule(t_pi1=0.0, t_pi2=1.0, delta1=-2.0)
        params = MediumParams.reduced(10.0)
        with pytest.raises(ConfigurationError):
            StorageSchedule(t_pi1=0.0, t_pi2=1.0, delta1=0.5).validate(params)

    def test_infinite_bandwidth_default(self):
        assert StorageSchedule(t_pi1=0.0, t_pi2=1.0).infinite_bandwidth

    def test_default_schedule(self):
        params = MediumParams.reduced(100.0)
        pulse, schedule = default_schedule(params)
        assert pulse.duration == pytest.approx(18.973665961010276, rel=1e-12)
        assert schedule.t_pi1 == pytest.approx(50.0 / SQRT_PI, rel=1e-12)


class TestKappa:
    def test_trivial_endpoints(self):
        assert kappa(0.0) == 0.0
        assert kappa(40.0) == pytest.approx(1.0, abs=1e-14)

    def test_frozen_values(self):
        assert kappa(1.0) == pytest.approx(0.91092614410921965, abs=1e-12)
        assert kappa(0.5) == pytest.approx(0.6461451359685607, abs=1e-12)

    def test_finite_c_prefactor(self):
        assert kappa(1.0, v_over_c=0.25) == pytest.approx(
            0.75 * 0.91092614410921965, abs=1e-12)

    def test_monotone(self):
        x = np.linspace(0.0, 4.0, 81)
        vals = kappa(x)
        assert np.all(np.diff(vals) >= 0.0)

    def test_quadrature_cross_validation(self):
        params = MediumParams.reduced(10.0)
        prof = HoleProfile.gaussian()
        for x in (0.1, 0.5, 1.0, 2.0, 5.0):
            assert kappa_quadrature(x, prof, params) == pytest.approx(
                kappa(x), abs=1e-6)


class TestBandwidthReduction:
    def test_frozen_value(self):
        assert bandwidth_reduction_factor(5.0) == pytest.approx(
            0.88716208329047837, abs=1e-12)

    def test_limits(self):
        # approaches 1 only like 1 - 1/(sqrt(pi) y); exact asymptote at
        # y = 50 (erf term is 1 to machine precision there)
        assert bandwidth_reduction_factor(50.0) == pytest.approx(
            1.0 - 1.0 / (50.0 * math.sqrt(math.pi)), abs=1e-12)
        assert bandwidth_reduction_factor(1e4) == pytest.approx(1.0, abs=1e-4)
        # linear onset y/sqrt(pi)
        assert bandwidth_reduction_factor(1e-4) == pytest.approx(
            1e-4 / math.sqrt(math.pi), rel=1e-4)

    def test_monotone_in_unit_interval(self):
        y = np.linspace(0.2, 8.0, 40)
        vals = np.array([bandwidth_reduction_factor(v) for v in y])
        assert np.all(np.diff(vals) > 0.0)
        assert np.all((vals > 0.0) & (vals < 1.0))

    def test_finite_bandwidth_kappa_long_time_ratio(self):
        # sharp cutoff at 5 hole widths scales the plateau by ~B(5)
        params = MediumParams.reduced(10.0)
        prof = HoleProfile.gaussian()
        ratio = kappa_finite_bandwidth(10.0, 5.0, prof, params) / kappa(10.0)
        assert ratio == pytest.approx(0.88716208329047837, rel=0.02)


class TestRevivalEnvelope:
    def test_vanishes_at_read_instant(self):
        params, pulse, schedule = reduced_setup(100.0, 19.0)
        assert revival_envelope(schedule.t_pi2, pulse, schedule, params) == 0.0

    def test_ninety_percent_point(self):
        # value at t_pi2 + 2/delta0 is kappa(1) times the frozen amplitude
        params, pulse, schedule = reduced_setup(100.0, 19.0)
        v = slow_light_velocity(params)
        t = schedule.t_pi2 + 2.0
        frozen = transmitted_gaussian(params.length - 2.0 * v, schedule.t_pi1,
                                      pulse.duration, params)
        assert revival_envelope(t, pulse, schedule, params) == pytest.approx(
            0.91092614410921965 * frozen, rel=1e-9)

    def test_out_of_depth(self):
        params, pulse, schedule = reduced_setup(100.0, 19.0)
        v = slow_light_velocity(params)
        t = schedule.t_pi2 + params.length / v + 1.0
        assert revival_envelope(t, pulse, schedule, params) == 0.0

    def test_finite_bandwidth_plateau_and_ringing(self):
        params, pulse, schedule = reduced_setup(100.0, 19.0)
        clipped = StorageSchedule(t_pi1=schedule.t_pi1, t_pi2=schedule.t_pi2,
                                  delta1=5.0)
        t = schedule.t_pi2 + np.linspace(16.0, 24.0, 33)
        full = revival_envelope(t, pulse, schedule, params)
        cut = revival_envelope(t, pulse, clipped, params,
                               profile=HoleProfile.gaussian())
        ratio = cut / full
        assert np.mean(ratio) == pytest.approx(0.887162, rel=0.02)
        # ringing: the deviation from the smooth plateau changes sign
        assert np.sum(np.diff(np.sign(ratio - np.mean(ratio))) != 0) >= 3


class TestEstablishedSignal:
    def test_zero_before_read(self):
        params, pulse, schedule = reduced_setup(100.0, 19.0)
        assert established_signal(schedule.t_pi2 - 1.0, pulse, schedule,
                                  params) == 0.0

    def test_peak_location_and_memory_depth(self):
        # peak near t - t_pi2 = L/(2v); truncated beyond L/v
        params = MediumParams.reduced(100.0)
        pulse, schedule = default_schedule(params)
        v = slow_light_velocity(params)
        y = np.linspace(1.0, 1.6 * params.length / v, 400)
        vals = established_signal(schedule.t_pi2 + y, pulse, schedule, params)
        peak_y = y[int(np.argmax(np.abs(vals)))]
        assert peak_y == pytest.approx(params.length / (2.0 * v), rel=0.15)
        # the retrieved pulse has a finite trailing edge; by 1.4 L/v it
        # has dropped below 1% of the peak
        beyond = np.abs(vals[y > 1.4 * params.length / v])
        assert np.max(beyond) < 0.01 * np.max(np.abs(vals))


class TestRestoredFieldFull:
    def test_vanishes_at_read_instant(self):
        params, pulse, schedule = reduced_setup(100.0, 19.0)
        assert restored_field_full(schedule.t_pi2, pulse, schedule,
                                   HoleProfile.gaussian(), params) == 0.0

    def test_finite_bandwidth_rejected(self):
        params, pulse, schedule = reduced_setup(100.0, 19.0)
        clipped = StorageSchedule(t_pi1=schedule.t_pi1, t_pi2=schedule.t_pi2,
                                  delta1=5.0)
        with pytest.raises(PreconditionError):
            restored_field_full(schedule.t_pi2 + 1.0, pulse, clipped,
                                HoleProfile.gaussian(), params)

    def test_time_translation_covariance(self):
        params, pulse, schedule = reduced_setup(25.0, 10.0)
        shift = 7.3
        moved_pulse = PulseSpec(duration=pulse.duration,
                                center_time=pulse.center_time + shift)
        moved = StorageSchedule(t_pi1=schedule.t_pi1 + shift,
                                t_pi2=schedule.t_pi2 + shift)
        prof = HoleProfile.gaussian()
        for y in (1.0, 4.0, 9.0):
            a = restored_field_full(schedule.t_pi2 + y, pulse, schedule,
                                    prof, params)
            b = restored_field_full(moved.t_pi2 + y, moved_pulse, moved,
                                    prof, params)
            assert b == pytest.approx(a, rel=1e-10)

    def test_matches_tabulated_profile(self):
        # the analytic gaussian kernel and the tabulated cosine-transform
        # kernel describe the same hole
        params, pulse, schedule = reduced_setup(25.0, 10.0)
        x = np.linspace(-8, 8, 321)
        tab = HoleProfile.tabulated(x, 1.0 - np.exp(-x * x))
        t = schedule.t_pi2 + 5.0
        a = restored_field_full(t, pulse, schedule, HoleProfile.gaussian(),
                                params)
        b = restored_field_full(t, pulse, schedule, tab, params)
        assert b == pytest.approx(a, rel=1e-3)


class TestAppendixSeries:
    def test_vanishes_at_read_instant(self):
        params, pulse, schedule = reduced_setup(4.0, 20.0)
        for order in (0, 2):
            assert appendix_series_field(schedule.t_pi2, pulse, schedule,
                                         params, order=order) == 0.0

    def test_order_cap(self):
        params, pulse, schedule = reduced_setup(4.0, 20.0)
        with pytest.raises(DomainError):
            appendix_series_field(schedule.t_pi2 + 1.0, pulse, schedule,
                                  params, order=7)

    def test_order_zero_against_independent_quadrature(self):
        # n = 0 truncation is the simple depth-slice field; reproduce it
        # with adaptive quadrature of the same integrand
        params, pulse, schedule = reduced_setup(4.0, 20.0)
        v = slow_light_velocity(params)
        a = params.alpha0 * v / params.delta0
        rho = params.delta0 * params.length / v
        dT = params.delta0 * pulse.duration
        x = params.delta0 * schedule.t_pi1
        y = 1.0

        def frozen(zeta, xh):
            w1 = dT * dT + a * zeta
            return dT / math.sqrt(w1) * math.exp(-(xh - zeta) ** 2 / (2 * w1))

        ref, err = integrate.dblquad(
            lambda p, q: math.exp(-0.25 * (p + q) ** 2)
            * frozen(rho - (y - q), x - p),
            max(0.0, y - rho), y, 0.0, 40.0, epsabs=1e-12, epsrel=1e-10)
        ref *= 0.5
        val = appendix_series_field(schedule.t_pi2 + y, pulse, schedule,
                                    params, order=0)
        assert val == pytest.approx(ref, rel=1e-8)

    def test_successive_order_ratio(self):
        # with condition delta0 min(t - t_pi2, L/v) << (delta0 T)^2 the
        # N = 2 correction is bounded by that small parameter
        params, pulse, schedule = reduced_setup(4.0, 20.0)
        t = schedule.t_pi2 + 1.0
        n0 = appendix_series_field(t, pulse, schedule, params, order=0)
        n2 = appendix_series_field(t, pulse, schedule, params, order=2)
        v = slow_light_velocity(params)
        bound = min(1.0, params.length / v) / (params.delta0 * pulse.duration) ** 2
        assert abs(n2 - n0) / abs(n0) < bound


class TestRetrieve:
    def test_result_contract(self):
        params, pulse, schedule = reduced_setup(25.0, 10.0)
        result = retrieve(pulse, schedule, params, method="established")
        assert 0.0 <= result.efficiency <= 1.0
        assert result.method == "established"
        assert result.envelope.samples[0] == 0.0  # t = t_pi2
        assert set(result.validity) >= {"revival_condition_fraction",
                                        "established_window_ok"}

    def test_series_method_label(self):
        params, pulse, schedule = reduced_setup(4.0, 20.0)
        result = retrieve(pulse, schedule, params, method="series",
                          series_order=1)
        assert result.method == "series(1)"

    def test_unknown_method(self):
        params, pulse, schedule = reduced_setup(25.0, 10.0)
        with pytest.raises(ConfigurationError):
            retrieve(pulse, schedule, params, method="magic")

    def test_efficiency_bounds_invariant(self):
        with pytest.raises(ConfigurationError):
            RetrievalResult(envelope=None, efficiency=1.5, method="revival")

    def test_save_formats(self, tmp_path):
        params, pulse, schedule = reduced_setup(25.0, 10.0)
        result = retrieve(pulse, schedule, params, method="established")
        path = tmp_path / "restored.csv"
        result.save(path, params, extra={"note": "test"})
        header = path.read_text().splitlines()[0]
        assert header == "#  t_minus_tpi2, re, im"
        side = json.loads((tmp_path / "restored.csv.json").read_text())
        assert side["method"] == "established"
        assert side["eta"] == pytest.approx(result.efficiency)
        assert side["note"] == "test"
        assert side["params"]["length"] == params.length

    def test_efficiency_golden_regression(self):
        # frozen full-quadrature reference at opacity 100, b = 0.6 schedule
        params = MediumParams.reduced(100.0)
        pulse, schedule = default_schedule(params)
        eta = efficiency(pulse, schedule, params, method="full_quadrature")
        assert eta == pytest.approx(0.8038156508928471, rel=1e-4)
