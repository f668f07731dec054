"""
Builders that turn analysis and simulation results into ResultTables.

Shared by the command-line front end and the reproduction study so both
write the same CSV schema.
"""
import math
from typing import Iterable, Optional

from .errors import ValidationError
from .link_model import LinkScenario, LoadState, link_derived, pte, z11, zeq_rational, zpri
from .lsk_analysis import DetuneSolution, FlipThreshold, SweepResult
from .presets import designed_c_s1
from .results import ResultTable
from .transient import DecodeResult, Envelope, TransientConfig, Trace
from .utils import require_positive

NO_FLIP = "none"


def pte_table(scenarios: Iterable, load: LoadState = LoadState.LIGHT,
              use_bare_cs2: bool = False) -> ResultTable:
    """PTE and its ingredients for (name, scenario) pairs"""
    table = ResultTable(["preset", "coupling", "q1", "q2", "alpha", "q_l", "pte"],
                        plot_columns=["pte"], title="Power transfer efficiency")
    for name, scenario in scenarios:
        derived = link_derived(scenario, load, use_bare_cs2)
        efficiency = pte(scenario.coupling, derived.q1, derived.q2, derived.alpha)
        table.append([name, scenario.coupling, derived.q1, derived.q2, derived.alpha,
                      derived.q_l, efficiency])
    return table


def impedance_table(scenario: LinkScenario, frequency: Optional[float] = None) -> ResultTable:
    """Z11, Zeq, Zpri and I1 at one frequency for both load states"""
    frequency = frequency if frequency is not None else scenario.primary_tank.drive_frequency
    require_positive("frequency", frequency)
    omega = 2.0 * math.pi * frequency
    table = ResultTable(
        ["frequency", "load", "z11_re", "z11_im", "zeq_re", "zeq_im", "zpri_re", "zpri_im",
         "zpri_magnitude", "i1_magnitude", "i1_phase"],
        plot_columns=["zpri_magnitude"], title=f"Primary impedance, k = {scenario.coupling:g}")
    z_primary = z11(omega, scenario)
    for load in LoadState:
        reflected = zeq_rational(omega, scenario, load)
        total = zpri(omega, scenario, load)
        current = scenario.primary_tank.source_amplitude / complex(total)
        table.append([frequency, load.value, z_primary.re, z_primary.im, reflected.re,
                      reflected.im, total.re, total.im, total.magnitude, abs(current),
                      math.atan2(current.imag, current.real)])
    return table


def sweep_table(result: SweepResult, title: str = "LSK sweep") -> ResultTable:
    table = ResultTable(["k", "delta_zpri_re", "delta_zpri_im",
                         "delta_zpri_magnitude_difference", "delta_i1"],
                        plot_columns=["delta_i1"], title=title)
    for row in result.rows:
        table.append([row.k, row.delta_zpri.re, row.delta_zpri.im,
                      row.delta_zpri_magnitude_difference, row.delta_i1])
    return table


def flip_table(threshold: FlipThreshold) -> ResultTable:
    """One row; k_star is 'none' when the uplink never flips"""
    table = ResultTable(["k_min", "k_max", "k_star", "flipped", "sign_changes", "multiple"],
                        title="Flip threshold")
    k_star = threshold.k_star if threshold.flipped else NO_FLIP
    table.append([threshold.k_range[0], threshold.k_range[1], k_star, threshold.flipped,
                  threshold.sign_changes, threshold.multiple])
    return table


def detune_table(solution: DetuneSolution, scenario: LinkScenario) -> ResultTable:
    table = ResultTable(["c_s1_solved", "designed_c_s1", "relative_detune", "k_min", "k_max",
                         "margin_achieved", "detune_required"], title="Primary detune")
    table.append([solution.c_s1_solved, designed_c_s1(scenario), solution.relative_detune,
                  solution.flip_free_range[0], solution.flip_free_range[1],
                  solution.margin_achieved, solution.detune_required])
    return table


def trace_table(trace: Trace, stride: int = 1) -> ResultTable:
    """State waveforms, every `stride`-th sample"""
    if stride < 1:
        raise ValidationError(f"stride must be ≥ 1, got {stride}")
    table = ResultTable(["t", "i1", "i2", "v_c1", "v_c2", "sw"], plot_columns=["i1"],
                        title="Transient")
    columns = [trace.t[::stride], trace.i1[::stride], trace.i2[::stride],
               trace.v_c1[::stride], trace.v_c2[::stride], trace.sw[::stride].astype(int)]
    table.rows = [list(row) for row in zip(*(c.tolist() for c in columns))]
    return table


def envelope_table(env: Envelope) -> ResultTable:
    table = ResultTable(["t", "i1_envelope"], title="Primary current envelope")
    table.rows = [[t, a] for t, a in zip(env.t.tolist(), env.amplitude.tolist())]
    return table


def decode_table(result: DecodeResult, config: TransientConfig) -> ResultTable:
    table = ResultTable(["bit", "sw", "decoded", "envelope_mean", "threshold",
                         "polarity_flipped"], plot_columns=["envelope_mean"], title="LSK decode")
    for index, (sw, bit, mean) in enumerate(zip(config.sw_pattern, result.bits,
                                                result.per_bit_envelope_means)):
        table.append([index, sw, bit, mean, result.threshold, result.polarity_flipped])
    return table
