import logging
import math
from dataclasses import replace

import numpy as np
import pytest

from coillink.errors import DomainError, NoRealResonanceError, ValidationError
from coillink.link_model import (CoilParams, ComplexValue, LinkScenario, LoadState, PrimaryTank,
                                 SecondaryTank, designed_capacitance,
                                 exact_resonance_capacitance, link_derived, mutual_inductance,
                                 primary_current, pte, pte_of_scenario, quality_factor,
                                 req_approx, resonant_frequency_exact, secondary_branch_impedance,
                                 secondary_current, z11,
                                 zeq_rational, zeq_simplified, zpri)
from coillink.presets import DRIVE_FREQUENCY

OMEGA = 2 * math.pi * DRIVE_FREQUENCY


def test_quality_factors_match_coil_table():
    assert quality_factor(OMEGA, 895e-9, 1.114) == pytest.approx(205.33, rel=0.005)
    assert quality_factor(OMEGA, 564e-9, 2.333) == pytest.approx(61.9, rel=0.005)


def test_designed_capacitors():
    assert designed_capacitance(562e-9, DRIVE_FREQUENCY) == pytest.approx(27.2e-12, rel=0.005)
    assert designed_capacitance(895e-9, DRIVE_FREQUENCY) == pytest.approx(17.10e-12, rel=0.002)


def test_mutual_inductance():
    assert mutual_inductance(0.0, 895e-9, 564e-9) == 0.0
    assert mutual_inductance(0.05, 1e-6, 1e-6) == pytest.approx(0.05e-6)
    with pytest.raises(DomainError):
        mutual_inductance(1.0, 1e-6, 1e-6)
    with pytest.raises(DomainError):
        mutual_inductance(0.1, -1e-6, 1e-6)


def test_invalid_components_are_rejected():
    with pytest.raises(ValidationError):
        CoilParams(0.0, 1.0)
    with pytest.raises(ValidationError):
        SecondaryTank(c_s2=27e-12, c_p=-1e-12)
    with pytest.raises(ValidationError):
        PrimaryTank(c_s1=17e-12, drive_frequency=0.0)


def test_coupling_must_be_below_one(flat):
    with pytest.raises(ValidationError, match="coupling"):
        flat.with_coupling(1.5)


def test_pte_of_presets(flat, bended):
    assert 0.38 <= pte_of_scenario(flat) <= 0.41
    assert 0.36 <= pte_of_scenario(bended) <= 0.40


def test_pte_increases_with_coupling(flat):
    values = [pte_of_scenario(flat.with_coupling(k)) for k in np.linspace(0.005, 0.5, 60)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_pte_is_zero_without_coupling():
    assert pte(0.0, 200.0, 60.0, 80.0) == 0.0


def test_link_derived_uses_parasitic_in_alpha(parasitic):
    effective = link_derived(parasitic)
    bare = link_derived(parasitic, use_bare_cs2=True)
    ratio = parasitic.secondary_tank.c2 / parasitic.secondary_tank.c_s2
    assert effective.alpha == pytest.approx(bare.alpha * ratio)
    assert effective.q1 == bare.q1


def test_exact_resonance_formula():
    l2, r = 564e-9, 12.5e3
    c2 = designed_capacitance(l2, DRIVE_FREQUENCY)
    omega0 = resonant_frequency_exact(l2, c2, r)
    # heavy damping lowers the resonance slightly below 1/sqrt(LC)
    assert omega0 < 1.0 / math.sqrt(l2 * c2)
    assert omega0 == pytest.approx(1.0 / math.sqrt(l2 * c2), rel=1e-3)


def test_exact_resonance_needs_real_root():
    with pytest.raises(NoRealResonanceError):
        resonant_frequency_exact(1e-6, 1e-12, 100.0)


def test_exact_resonance_capacitance_inverts_resonance():
    l2, r = 564e-9, 12.5e3
    c = exact_resonance_capacitance(l2, r, OMEGA)
    assert resonant_frequency_exact(l2, c, r) == pytest.approx(OMEGA, rel=1e-9)


def _random_scenario(rng) -> LinkScenario:
    l2 = rng.uniform(0.2e-6, 2e-6)
    frequency = rng.uniform(10e6, 60e6)
    return LinkScenario(
        primary_coil=CoilParams(rng.uniform(0.3e-6, 2e-6), rng.uniform(0.5, 3.0)),
        secondary_coil=CoilParams(l2, rng.uniform(0.5, 5.0)),
        primary_tank=PrimaryTank(c_s1=rng.uniform(5e-12, 50e-12), drive_frequency=frequency),
        secondary_tank=SecondaryTank(
            c_s2=designed_capacitance(l2, frequency) * rng.uniform(0.8, 1.2),
            r_load=rng.uniform(1e3, 50e3), r_sw=rng.uniform(100.0, 2e3)),
        coupling=rng.uniform(0.01, 0.5),
    )


def test_rational_and_direct_reflected_impedance_agree():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        scenario = _random_scenario(rng)
        omega = scenario.omega * rng.uniform(0.9, 1.1)
        for load in LoadState:
            a = complex(zeq_rational(omega, scenario, load))
            b = complex(zeq_simplified(omega, scenario, load))
            assert abs(a - b) / abs(b) < 1e-9


def test_reflected_impedance_is_real_at_exact_resonance(flat):
    for load in LoadState:
        r_eff = flat.effective_load(load)
        omega0 = resonant_frequency_exact(flat.secondary_coil.inductance,
                                          flat.secondary_tank.c2, r_eff)
        zeq = zeq_rational(omega0, flat, load)
        assert abs(zeq.im) / abs(zeq) < 1e-9


def test_reflected_impedance_scales_with_k_squared(parasitic):
    for k in (0.01, 0.05, 0.123):
        for load in LoadState:
            single = zeq_rational(parasitic.omega, parasitic.with_coupling(k), load)
            double = zeq_rational(parasitic.omega, parasitic.with_coupling(2 * k), load)
            assert double.re == 4 * single.re
            assert double.im == 4 * single.im


def test_no_coupling_reflects_nothing(flat):
    uncoupled = flat.with_coupling(0.0)
    for load in LoadState:
        assert abs(zeq_rational(flat.omega, uncoupled, load)) == 0.0
        assert abs(secondary_current(uncoupled, load)) == 0.0
    assert zpri(flat.omega, uncoupled, LoadState.LIGHT) == z11(flat.omega, uncoupled)


def test_designed_primary_is_resistive_at_drive_frequency(flat):
    impedance = z11(flat.omega, flat)
    assert impedance.re == flat.primary_coil.series_resistance
    assert abs(impedance.im) < 1e-9


def test_primary_current_without_coupling(flat):
    current = primary_current(flat.with_coupling(0.0), LoadState.LIGHT)
    assert current.magnitude == pytest.approx(1.0 / 1.114, rel=1e-9)
    assert abs(current.phase) < 1e-9


def test_heavy_load_draws_more_current_when_matched(flat):
    # a matched link reflects a larger resistance at light load
    light = primary_current(flat, LoadState.LIGHT)
    heavy = primary_current(flat, LoadState.HEAVY)
    assert heavy.magnitude > light.magnitude


def test_secondary_current_satisfies_secondary_loop(parasitic):
    for load in LoadState:
        i1 = complex(primary_current(parasitic, load))
        i2 = complex(secondary_current(parasitic, load))
        z2 = secondary_branch_impedance(parasitic.omega, parasitic, load)
        loop = 1j * parasitic.omega * parasitic.mutual_inductance * i1 + z2 * i2
        assert abs(loop) < 1e-12 * abs(z2 * i2)


def test_req_approximation_close_at_light_load(flat):
    exact = zeq_rational(flat.omega, flat, LoadState.LIGHT).re
    assert req_approx(flat, LoadState.LIGHT) == pytest.approx(exact, rel=0.02)


def test_req_approximation_without_load(flat):
    # an open secondary reflects ω²M²/R_s2
    unloaded = replace(flat, secondary_tank=replace(flat.secondary_tank, r_load=1e12))
    rs2 = flat.secondary_coil.series_resistance
    expected = (flat.omega * flat.mutual_inductance) ** 2 / rs2
    assert req_approx(unloaded, LoadState.LIGHT) == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("error, sign", [(-0.01, -1), (0.01, 1)])
def test_primary_reactance_follows_capacitor_error(flat, error, sign):
    detuned = flat.with_c_s1(flat.primary_tank.c_s1 * (1 + error))
    assert np.sign(z11(flat.omega, detuned).im) == sign


def test_parasitic_reflects_negative_reactance(parasitic):
    assert zeq_rational(parasitic.omega, parasitic, LoadState.LIGHT).im < 0


def test_parasitic_makes_tuned_primary_capacitive(parasitic):
    assert abs(z11(parasitic.omega, parasitic).im) < 1e-9
    for load in LoadState:
        assert zpri(parasitic.omega, parasitic, load).im < 0


def test_req_approximation_warns_when_poorly_filtered(flat, caplog):
    with caplog.at_level(logging.WARNING, logger="coillink"):
        req_approx(flat, LoadState.HEAVY)
    assert any("α" in record.getMessage() for record in caplog.records)


def test_complex_value_arithmetic():
    a = ComplexValue(3.0, 4.0)
    b = ComplexValue.from_complex(1 - 1j)
    assert abs(a) == 5.0
    assert complex(a + b) == 4 + 3j
    assert complex(a - b) == 2 + 5j
    assert ComplexValue(0.0, 2.0).phase == pytest.approx(math.pi / 2)
