import cmath
import math
import warnings

import mpmath as mp
import numpy as np
import pytest

from conftest import FSR, KAPPA0, LENGTH, OMEGA0
from fiberring.constants import C_LIGHT, TWO_PI
from fiberring.resonator import (
    CouplingRegime,
    DegenerateRingError,
    InfiniteFinesseError,
    LorentzianValidityWarning,
    ParameterError,
    ResonatorParams,
    RingAmplitudes,
    classify_regime,
    exact_ring_power,
    exact_ring_transmission,
    field_transmission,
    finesse,
    fsr_from_length,
    group_index_from_fsr,
    linewidth_from_rate,
    on_resonance_transmission,
    power_transmission,
    quality_factor,
    rates_from_ring,
    regime_coupling,
    ring_from_params,
    ring_from_rates,
    round_trip_phase,
)

NG = C_LIGHT / (FSR * LENGTH)


def params(k0=KAPPA0, ke=KAPPA0, fsr=FSR):
    return ResonatorParams(k0, ke, OMEGA0, fsr)


class TestValidation:
    @pytest.mark.parametrize(
        "kw",
        [
            dict(kappa0=0.0),
            dict(kappa0=-1.0),
            dict(kappa_ext=-1.0),
            dict(omega0=0.0),
            dict(fsr_hz=0.0),
            dict(length_m=-1.0),
            dict(group_index=1.0),
        ],
    )
    def test_domain(self, kw):
        base = dict(kappa0=KAPPA0, kappa_ext=KAPPA0, omega0=OMEGA0, fsr_hz=FSR)
        base.update(kw)
        with pytest.raises(ParameterError):
            ResonatorParams(**base)

    def test_speed_of_light_consistency(self):
        ResonatorParams(KAPPA0, 0.0, OMEGA0, FSR, LENGTH, NG)
        with pytest.raises(ParameterError):
            ResonatorParams(KAPPA0, 0.0, OMEGA0, FSR, LENGTH, NG * (1 + 1e-7))

    def test_unresolved_resonances_flagged(self):
        with pytest.warns(LorentzianValidityWarning):
            p = ResonatorParams(TWO_PI * 10e6, 0.0, OMEGA0, FSR)
        assert not p.well_resolved

    def test_default_regimes_not_flagged(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            for regime in ("under", "critical", "over"):
                params(ke=regime_coupling(KAPPA0, regime))

    def test_from_length(self):
        p = ResonatorParams.from_length(KAPPA0, 0.0, OMEGA0, LENGTH, 1.459)
        assert p.fsr_hz == pytest.approx(87.44e6, rel=1e-3)


class TestFieldTransmission:
    def test_critical_on_resonance_is_zero(self):
        assert field_transmission(params(), OMEGA0) == 0

    def test_decoupled_is_all_pass(self):
        d = np.linspace(-50, 50, 101) * KAPPA0
        t = field_transmission(params(ke=0.0), OMEGA0 + d)
        np.testing.assert_allclose(np.abs(t), 1.0, rtol=0, atol=1e-15)

    def test_overcoupled_on_resonance(self):
        # independent arbitrary-precision evaluation of the same expression
        k0 = mp.mpf(KAPPA0)
        ref = complex((k0 - 3 * k0) / (k0 + 3 * k0))
        t = field_transmission(params(ke=3 * KAPPA0), OMEGA0)
        assert t == pytest.approx(ref, abs=1e-15)
        assert t == pytest.approx(-0.5, abs=1e-15)
        assert power_transmission(params(ke=3 * KAPPA0), OMEGA0) == pytest.approx(0.25, abs=1e-15)

    def test_magnitude_bounded(self):
        d = np.linspace(-20, 20, 401) * KAPPA0
        for ke in (0.0, 0.1, 1.0, 7.0):
            assert np.all(np.abs(field_transmission(params(ke=ke * KAPPA0), OMEGA0 + d)) <= 1 + 1e-15)


class TestPowerTransmission:
    @pytest.mark.parametrize("ratio", [0.0, 0.3, 1.0, 3.0, 10.0])
    def test_matches_field(self, ratio):
        p = params(ke=ratio * KAPPA0)
        w = OMEGA0 + np.linspace(-5, 5, 51) * KAPPA0
        np.testing.assert_allclose(power_transmission(p, w), np.abs(field_transmission(p, w)) ** 2, atol=1e-15)

    @pytest.mark.parametrize("ratio", [0.2, 1.0, 4.0])
    def test_on_resonance_formula(self, ratio):
        p = params(ke=ratio * KAPPA0)
        k = p.kappa
        assert power_transmission(p, OMEGA0) == pytest.approx(((2 * KAPPA0 - k) / k) ** 2, abs=1e-15)
        assert p.on_resonance_transmission == pytest.approx(on_resonance_transmission(KAPPA0, k))

    def test_deep_overcoupling_limit(self):
        assert on_resonance_transmission(1.0, 1e9) == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("ratio", [0.3, 1.0, 3.0])
    def test_half_depth_at_detuning_kappa(self, ratio):
        # small omega0 keeps omega - omega0 exact
        p = ResonatorParams(KAPPA0, ratio * KAPPA0, 1.0, FSR)
        tr = p.on_resonance_transmission
        for s in (-1, 1):
            assert power_transmission(p, 1.0 + s * p.kappa) == pytest.approx((tr + 1) / 2, abs=1e-14)

    def test_linewidth(self):
        p = params()
        assert p.linewidth_hz == pytest.approx(2 * KAPPA0 / math.pi)
        assert linewidth_from_rate(p.kappa) == p.linewidth_hz


class TestExactRing:
    def test_critical(self):
        for a in (0.5, 0.9, 0.999):
            assert abs(exact_ring_transmission(RingAmplitudes(a, a), 0.0)) < 1e-15

    def test_lossless_all_pass(self):
        phi = np.linspace(-7, 7, 301)
        for r in (0.1, 0.7, 0.99):
            np.testing.assert_allclose(np.abs(exact_ring_transmission(RingAmplitudes(1.0, r), phi)), 1, atol=1e-14)

    def test_degenerate(self):
        with pytest.raises(DegenerateRingError):
            exact_ring_transmission(RingAmplitudes(1.0, 1.0), 0.3)
        with pytest.raises(DegenerateRingError):
            exact_ring_power(RingAmplitudes(1.0, 1.0), 0.3)

    def test_amplitude_domain(self):
        with pytest.raises(ParameterError):
            RingAmplitudes(0.0, 0.5)
        with pytest.raises(ParameterError):
            RingAmplitudes(0.5, 1.1)

    def test_periodic(self):
        amps = RingAmplitudes(0.95, 0.9)
        phi = np.linspace(-3, 3, 61)
        np.testing.assert_allclose(
            exact_ring_transmission(amps, phi), exact_ring_transmission(amps, phi + 2 * math.pi), atol=1e-13
        )

    def test_power_form_matches_complex(self):
        amps = RingAmplitudes(0.97, 0.91)
        phi = np.linspace(-4, 4, 101)
        np.testing.assert_allclose(exact_ring_power(amps, phi), np.abs(exact_ring_transmission(amps, phi)) ** 2, atol=1e-14)

    def test_anchor_against_lorentzian(self):
        p = ResonatorParams(KAPPA0, KAPPA0, OMEGA0, FSR, LENGTH, NG)
        amps = ring_from_rates(KAPPA0, KAPPA0, LENGTH, NG)
        d = np.linspace(-1, 1, 2001) * p.linewidth_hz * math.pi  # +-FWHM in rad/s
        airy = exact_ring_power(amps, round_trip_phase(d, FSR))
        lor = power_transmission(p, OMEGA0 + d)
        assert np.max(np.abs(airy - lor)) < 1e-3

    def test_phase_convention_reproduces_field(self):
        p = params(ke=2.0 * KAPPA0)
        amps = ring_from_params(p)
        d = np.linspace(-1, 1, 61) * p.kappa
        t_ring = exact_ring_transmission(amps, round_trip_phase(d, FSR))
        t_lor = field_transmission(p, OMEGA0 + d)
        # deviation is first order in the round-trip phase (0.12 rad at the edges)
        assert np.max(np.abs(t_ring - t_lor)) < 5e-3
        assert np.all(np.sign(t_ring.imag) == np.sign(t_lor.imag))


class TestRateMapping:
    def test_lossless_gives_zero_kappa0(self):
        k0, ke = rates_from_ring(RingAmplitudes(1.0, 0.9), LENGTH, NG)
        assert k0 == 0.0 and ke > 0

    def test_decoupled_gives_zero_kappa_ext(self):
        k0, ke = rates_from_ring(RingAmplitudes(0.9, 1.0), LENGTH, NG)
        assert ke == 0.0 and k0 > 0

    @pytest.mark.parametrize("k0,ke", [(KAPPA0, KAPPA0), (KAPPA0, 0.3 * KAPPA0), (0.1 * KAPPA0, 5 * KAPPA0)])
    def test_round_trip(self, k0, ke):
        amps = ring_from_rates(k0, ke, LENGTH, NG)
        back = rates_from_ring(amps, LENGTH, NG)
        assert back[0] == pytest.approx(k0, rel=1e-9)
        assert back[1] == pytest.approx(ke, rel=1e-9)

    def test_first_order_limit(self):
        # kappa0 -> (1 - a^2) fsr / 2 for small loss
        a = 1 - 1e-6
        k0, _ = rates_from_ring(RingAmplitudes(a, 1.0), LENGTH, NG)
        assert k0 == pytest.approx((1 - a * a) * FSR / 2, rel=1e-5)

    def test_finesse_relation(self):
        # 8.4 % round-trip power loss ~ 2 pi / F with F ~ 75: kappa0 ~ 2 pi 0.58 MHz
        a = math.sqrt(1 - 0.084)
        k0, _ = rates_from_ring(RingAmplitudes(a, 1.0), LENGTH, 1.459)
        assert k0 / TWO_PI == pytest.approx(0.58e6, rel=0.06)
        # the first-order relation itself is exact to the stated digits
        assert 0.084 * fsr_from_length(LENGTH, 1.459) / 2 / TWO_PI == pytest.approx(0.58e6, rel=0.01)


class TestFiguresOfMerit:
    def test_finesse(self):
        assert finesse(KAPPA0, FSR) == pytest.approx(75.431, abs=1e-3)
        with pytest.raises(InfiniteFinesseError):
            finesse(0.0, FSR)

    def test_quality_factor(self):
        assert quality_factor(OMEGA0, KAPPA0) == pytest.approx(3.037e8, rel=1e-3)
        with pytest.raises(InfiniteFinesseError):
            quality_factor(OMEGA0, 0.0)

    def test_fsr(self):
        assert fsr_from_length(LENGTH, NG) == pytest.approx(FSR, rel=1e-12)
        assert group_index_from_fsr(FSR, LENGTH) == pytest.approx(1.45795, abs=1e-5)
        assert fsr_from_length(4.0, 1.459) == pytest.approx(51.37e6, rel=1e-3)
        with pytest.raises(ParameterError):
            fsr_from_length(0.0, 1.5)

    def test_regimes(self):
        assert classify_regime(1.0, 0.5) is CouplingRegime.UNDERCOUPLED
        assert classify_regime(1.0, 1.005) is CouplingRegime.CRITICAL
        assert classify_regime(1.0, 2.0) is CouplingRegime.OVERCOUPLED
        assert classify_regime(1.0, 1.05, rel_tol=0.1) is CouplingRegime.CRITICAL
        assert [regime_coupling(2.0, r) for r in ("under", "critical", "over")] == [0.6, 2.0, 6.0]
        with pytest.raises(ValueError):
            regime_coupling(1.0, "sideways")
