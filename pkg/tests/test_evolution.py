import cmath
import math

import numpy as np
import pytest

from tunnelwave.evolution import (
    EvolutionResult,
    FreeDensityUnderflowError,
    GaussianPacket,
    NonAsymptoticError,
    PacketValidityWarning,
    UnreliableRegimeError,
    asymptotic_cancellation,
    cutoff_error_estimate,
    eta,
    fit_loglog_slope,
    free_packet,
    longtime_exponent,
    tau_system,
    transmitted_packet,
    transmitted_packet_log,
    zeta,
)
from tunnelwave.potential import transmission_coefficient
from tunnelwave.presets import preset_profile
from tunnelwave.resonances import coefficient_C

SB = preset_profile("sb")
DB = preset_profile("db")
QB = preset_profile("qb")


def make_packet(units, energy=0.115, x_c=-5.0, sigma=0.5):
    return GaussianPacket(x_c, sigma, units.wavenumber_of_energy(energy), units)


class TestGaussianPacket:
    def test_derived_quantities(self):
        pk = make_packet(SB.units)
        assert pk.tau == pytest.approx(0.28937, abs=1e-4)
        assert pk.validity_ratio == pytest.approx(5.0)

    def test_validation(self):
        u = SB.units
        with pytest.raises(ValueError):
            GaussianPacket(5.0, 0.5, 0.4, u)
        with pytest.raises(ValueError):
            GaussianPacket(-5.0, -0.5, 0.4, u)
        with pytest.raises(ValueError):
            GaussianPacket(-5.0, 0.5, 0.0, u)


class TestFreePacket:
    def test_peak_value_at_t0(self):
        pk = make_packet(SB.units)
        want = (2 * math.pi) ** -0.25 / math.sqrt(pk.sigma) * cmath.exp(
            1j * pk.k0 * pk.x_c
        )
        assert free_packet(pk, pk.x_c, 0.0) == pytest.approx(want)

    def test_norm_conserved(self):
        pk = make_packet(SB.units)
        for t in (0.0, 10 * pk.tau, 100 * pk.tau):
            width = pk.sigma * abs(1 + 1j * t / pk.tau)
            center = pk.x_c + pk.velocity * t
            xs = np.linspace(center - 9 * width, center + 9 * width, 40001)
            norm = np.trapezoid(np.abs(free_packet(pk, xs, t)) ** 2, xs)
            assert norm == pytest.approx(1.0, abs=1e-8)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            free_packet(make_packet(SB.units), 0.0, -1.0)


class TestCutoffErrorEstimate:
    def test_reference_packet(self):
        pk = make_packet(SB.units)
        assert cutoff_error_estimate(pk, 1.0) == pytest.approx(math.exp(-25.0))
        assert cutoff_error_estimate(pk, 1.0) == pytest.approx(1.39e-11, rel=0.01)

    def test_warning_tier(self):
        pk = make_packet(SB.units, x_c=-3.0)
        assert pk.validity_ratio == pytest.approx(3.0)
        assert cutoff_error_estimate(pk, 1.0) == pytest.approx(1.23e-4, rel=0.01)

    def test_far_cutoff_vanishes(self):
        pk = make_packet(SB.units, x_c=-80.0)
        assert cutoff_error_estimate(pk, 1.0) == 0.0


class TestTransmittedPacket:
    def test_matches_oracle_sb_short_distance(self, sb_data):
        from tunnelwave.oracle import psi_quadrature

        pk = sb_data.packet
        tau_sys = tau_system(SB, sb_data.catalog)
        ts = np.linspace(0.05 * tau_sys, 12 * tau_sys, 25)
        x_d = 2 * SB.length
        psi_a = transmitted_packet(pk, SB, sb_data.catalog, sb_data.residues, x_d, ts)
        psi_o = np.array([psi_quadrature(pk, SB, x_d, t) for t in ts])
        rho_a = pk.sigma * np.abs(psi_a) ** 2
        rho_o = pk.sigma * np.abs(psi_o) ** 2
        assert np.max(np.abs(rho_a - rho_o)) <= 2e-2 * np.max(rho_o)

    def test_domain_validation(self, sb_data):
        pk = sb_data.packet
        with pytest.raises(ValueError):
            transmitted_packet(pk, SB, sb_data.catalog, sb_data.residues, 1.0, 5.0)
        with pytest.raises(ValueError):
            transmitted_packet(pk, SB, sb_data.catalog, sb_data.residues, 20.0, 0.0)

    def test_unreliable_packet_rejected(self, sb_data):
        close = GaussianPacket(-2.0, 0.5, 0.45, SB.units)
        with pytest.raises(UnreliableRegimeError):
            transmitted_packet(close, SB, sb_data.catalog, sb_data.residues, 20.0, 5.0)

    def test_warning_tier_packet(self, sb_data):
        mid = GaussianPacket(-3.5, 0.5, 0.45, SB.units)
        with pytest.warns(PacketValidityWarning):
            transmitted_packet(mid, SB, sb_data.catalog, sb_data.residues, 20.0, 5.0)

    def test_truncation_warning_on_short_catalog(self, sb_data):
        from tunnelwave.evolution import TruncationWarning

        with pytest.warns(TruncationWarning):
            transmitted_packet(
                sb_data.packet, SB, sb_data.catalog, sb_data.residues,
                2 * SB.length, 50.0, n_poles=4,
            )

    def test_early_time_residual_bounded(self, preset_data):
        # t -> 0+ leaves |psi| <= 2|C| |psi_free| (measured factor <= ~0.95)
        for data in preset_data.values():
            pk = data.packet
            profile = data.profile
            c_mag = abs(coefficient_C(profile, data.catalog, data.residues))
            t_tiny = 1e-3 * pk.tau
            for x in (profile.length + 0.1, profile.length + 1.0):
                log_psi = transmitted_packet_log(
                    pk, profile, data.catalog, data.residues, x, t_tiny
                )
                from tunnelwave.evolution import free_packet_log

                log_free = complex(free_packet_log(pk, x, t_tiny))
                bracket = math.exp((log_psi - log_free).real)
                assert bracket <= 2.0 * c_mag

    def test_qb_rabi_oscillations_short_distance(self, qb_data):
        # transitions among the closely spaced triplet levels show up as
        # multiple interior density peaks within the first few lifetimes
        pk = qb_data.packet
        tau_sys = tau_system(QB, qb_data.catalog)
        ts = np.linspace(0.02 * tau_sys, 3.0 * tau_sys, 400)
        logs = transmitted_packet_log(
            pk, QB, qb_data.catalog, qb_data.residues, 2 * QB.length, ts
        )
        rho = pk.sigma * np.exp(2.0 * np.asarray(logs).real)
        interior_peaks = [
            i
            for i in range(1, len(ts) - 1)
            if rho[i] > rho[i - 1] and rho[i] >= rho[i + 1] and rho[i] > 0.01 * rho.max()
        ]
        assert len(interior_peaks) >= 3

    def test_db_resonance_decay_shoulder(self, db_data):
        # at x_d = 200 L the decay of the sharp resonance leaves a small
        # interior peak near t/tau ~ 8 on the otherwise falling density
        pk = db_data.packet
        tau_sys = tau_system(DB, db_data.catalog)
        x_d = 200 * DB.length
        ts = np.linspace(5.5 * tau_sys, 10.5 * tau_sys, 101)
        logs = transmitted_packet_log(pk, DB, db_data.catalog, db_data.residues, x_d, ts)
        rho = pk.sigma * np.exp(2.0 * np.asarray(logs).real)
        peak = int(np.argmax(rho))
        assert 0 < peak < len(ts) - 1
        assert 7.0 <= ts[peak] / tau_sys <= 9.0


class TestZetaEta:
    def test_eta_algebra(self):
        assert eta(10.0, 10.0, 5.0) == 1.0
        assert eta(15.0, 10.0, 5.0) == 4.0
        with pytest.raises(ValueError):
            eta(4.0, 10.0, 5.0)

    def test_eta_energy_map_exact(self):
        u = SB.units
        k0 = u.wavenumber_of_energy(0.115)
        k = 1.3 * k0
        t0 = 1e5
        length = SB.length
        x = u.velocity(k) * t0 + length
        x0 = u.velocity(k0) * t0 + length
        e_mapped = eta(x, x0, length) * u.energy_of_wavenumber(k0)
        assert e_mapped == pytest.approx(u.energy_of_wavenumber(k), rel=1e-12)

    def test_zeta_nonnegative_and_matches_spectrum_at_large_t(self, sb_data):
        pk = sb_data.packet
        length = SB.length
        x0 = 2e5 * length
        t0 = (x0 - length) / pk.velocity
        etas = np.linspace(0.2, 3.0, 101)
        xs = length + np.sqrt(etas) * (x0 - length)
        zs = zeta(pk, SB, sb_data.catalog, sb_data.residues, xs, t0)
        assert np.all(zs >= 0.0)
        t_ref = transmission_coefficient(SB, etas * pk.energy)
        assert np.max(np.abs(zs - t_ref)) <= 2e-2

    def test_monotone_improvement_with_t0(self, sb_data):
        pk = sb_data.packet
        length = SB.length
        t_flight = (2e5 * length - length) / pk.velocity
        etas = np.linspace(0.2, 3.0, 101)
        t_ref = transmission_coefficient(SB, etas * pk.energy)
        devs = []
        for scale in (0.05, 0.25, 1.0):
            t0 = scale * t_flight
            xs = length + np.sqrt(etas) * pk.velocity * t0
            zs = zeta(pk, SB, sb_data.catalog, sb_data.residues, xs, t0)
            devs.append(np.max(np.abs(zs - t_ref)))
        assert devs[0] > devs[1] > devs[2]

    def test_small_t0_reproduces_only_fast_components(self, db_data):
        # early snapshots carry the fast part of the spectrum; the slow, sharp
        # resonance at eta = 1 is not reconstructed yet
        pk = db_data.packet
        length = DB.length
        t0 = 0.05 * (2e5 * length - length) / pk.velocity
        etas = np.linspace(0.2, 3.0, 281)
        xs = length + np.sqrt(etas) * pk.velocity * t0
        zs = zeta(pk, DB, db_data.catalog, db_data.residues, xs, t0)
        dev = np.abs(zs - transmission_coefficient(DB, etas * pk.energy))
        needle = np.abs(etas - 1.0) < 0.1
        fast = etas > 2.0
        assert np.max(dev[needle]) > 0.3
        assert np.max(dev[fast]) < 0.05

    def test_domain_checks(self, sb_data):
        pk = sb_data.packet
        with pytest.raises(ValueError):
            zeta(pk, SB, sb_data.catalog, sb_data.residues, SB.length, 10.0)
        with pytest.raises(ValueError):
            zeta(pk, SB, sb_data.catalog, sb_data.residues, 20.0, 0.0)

    def test_free_density_underflow(self, sb_data):
        pk = sb_data.packet
        with pytest.raises(FreeDensityUnderflowError):
            zeta(pk, SB, sb_data.catalog, sb_data.residues, 5e4, 1.0)


class TestLongtime:
    def test_synthetic_pure_power_law(self):
        ts = np.geomspace(10.0, 1e4, 60)
        assert fit_loglog_slope(ts, ts**-3.0) == pytest.approx(-3.0, abs=1e-12)

    def test_minus_three_all_presets(self, preset_data):
        for data in preset_data.values():
            profile = data.profile
            tau_sys = tau_system(profile, data.catalog)
            slope = longtime_exponent(
                data.packet,
                profile,
                data.catalog,
                data.residues,
                2 * profile.length,
                (50 * tau_sys, 500 * tau_sys),
            )
            assert slope == pytest.approx(-3.0, abs=0.1)

    def test_window_floor_enforced(self, sb_data):
        tau_sys = tau_system(SB, sb_data.catalog)
        with pytest.raises(ValueError):
            longtime_exponent(
                sb_data.packet, SB, sb_data.catalog, sb_data.residues,
                2 * SB.length, (tau_sys, 500 * tau_sys),
            )

    def test_nonasymptotic_regime_detected(self, db_data):
        # a far detector whose packet arrival postdates the whole window is
        # still filling: the local slope drifts and the fit must refuse
        tau_sys = tau_system(DB, db_data.catalog)
        with pytest.raises(NonAsymptoticError):
            longtime_exponent(
                db_data.packet, DB, db_data.catalog, db_data.residues,
                2e5 * DB.length, (50 * tau_sys, 500 * tau_sys),
            )

    def test_window_halves_agree_in_asymptotic_regime(self, db_data):
        # complement of the NonAsymptoticError trigger: past the 50 hbar/Gamma
        # floor the local slope is stable across the window
        tau_sys = tau_system(DB, db_data.catalog)
        slope = longtime_exponent(
            db_data.packet, DB, db_data.catalog, db_data.residues,
            2 * DB.length, (50 * tau_sys, 120 * tau_sys), samples=16,
        )
        assert slope == pytest.approx(-3.0, abs=0.15)


class TestCancellation:
    def test_leading_asymptotics_cancel_constant(self, preset_data):
        for data in preset_data.values():
            profile = data.profile
            tau_sys = tau_system(profile, data.catalog)
            residual, scale = asymptotic_cancellation(
                data.packet, profile, data.catalog, data.residues,
                2 * profile.length, 1e3 * tau_sys,
            )
            c_mag = abs(coefficient_C(profile, data.catalog, data.residues))
            assert residual <= 10.0 * scale
            assert residual <= 1e-2 * c_mag


class TestTauSystem:
    def test_sb_uses_first_pole(self, sb_data):
        widths = sb_data.catalog.widths(SB.units)
        assert tau_system(SB, sb_data.catalog) == pytest.approx(
            SB.units.hbar / widths[0]
        )

    def test_db_and_qb_pick_smallest_below_barrier(self, db_data, qb_data):
        assert tau_system(DB, db_data.catalog) == pytest.approx(640.4, abs=1.0)
        assert tau_system(QB, qb_data.catalog) == pytest.approx(142.2, abs=1.0)


class TestEvolutionResult:
    def test_density_invariant(self):
        xs = np.array([1.0, 2.0])
        ts = np.array([0.5, 1.5])
        amp = np.array([1 + 1j, 0.25j])
        res = EvolutionResult.from_amplitudes(xs, ts, amp, sigma=0.5, method="analytic")
        assert np.allclose(res.density, 0.5 * np.abs(amp) ** 2, rtol=1e-14)
        assert res.method == "analytic"
