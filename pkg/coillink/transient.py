"""
Transient Simulation Module

Fixed-step time-domain simulation of the switched coupled-RLC link, the
per-carrier-cycle envelope of the primary current, and the LSK decoder that
reads the uplink bits (and their polarity) back from that envelope.

States are (i1, i2, v_c1, v_c2):
    V_s = R_s1·i1 + v_c1 + L1·di1/dt + M·di2/dt
    0   = R_s2·i2 + v_c2 + L2·di2/dt + M·di1/dt
    C_s1·dv_c1/dt = i1
    C2·dv_c2/dt   = i2 − v_c2/R_eff,    C2 = c_s2 + c_p
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (ComputationError, IndeterminateError, InstabilityError,
                     InsufficientDataError, ValidationError)
from .link_model import LinkScenario, LoadState
from .utils import require_positive

logger = logging.getLogger(__name__)

STEPS_PER_PERIOD = 200
MIN_STEPS_PER_PERIOD = 100
DEFAULT_BIT_PERIOD = 5e-6
DEFAULT_SETTLE_TIME = 20e-6
DEFAULT_PATTERN = (1, 0, 1, 0)
DEFAULT_SAMPLE_FRACTION = 0.5
MIN_SWING = 0.01
INSTABILITY_FACTOR = 1e6
CHECK_BLOCK = 4096


def parse_pattern(text: str) -> Tuple[int, ...]:
    """'1010' -> (1, 0, 1, 0)"""
    text = text.strip()
    if not text or any(ch not in "01" for ch in text):
        raise ValidationError(f"sw_pattern must be a non-empty string of 0/1, got {text!r}")
    return tuple(int(ch) for ch in text)


def format_pattern(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


@dataclass(frozen=True)
class TransientConfig:
    """
    Transient run settings.

    Attributes:
        time_step: Integration step in seconds; None means carrier period / 200
        duration: Simulated time in seconds; None means settle_time + bits × bit_period
        bit_period: Duration of one SW bit in seconds
        sw_pattern: Bits driving the modulation switch, active high (1 = heavy load)
        settle_time: Prefix before the first bit; the switch is open and decoding ignores it
        sample_fraction: Trailing fraction of each bit averaged by the decoder
    """
    time_step: Optional[float] = None
    duration: Optional[float] = None
    bit_period: float = DEFAULT_BIT_PERIOD
    sw_pattern: Tuple[int, ...] = DEFAULT_PATTERN
    settle_time: float = DEFAULT_SETTLE_TIME
    sample_fraction: float = DEFAULT_SAMPLE_FRACTION

    def __post_init__(self):
        if not self.sw_pattern or any(bit not in (0, 1) for bit in self.sw_pattern):
            raise ValidationError(f"sw_pattern must be a non-empty 0/1 sequence, got {self.sw_pattern!r}")
        object.__setattr__(self, "sw_pattern", tuple(int(bit) for bit in self.sw_pattern))
        require_positive("bit_period", self.bit_period)
        if not (math.isfinite(self.settle_time) and self.settle_time >= 0.0):
            raise ValidationError(f"settle_time must be ≥ 0, got {self.settle_time!r}")
        if not 0.0 < self.sample_fraction <= 1.0:
            raise ValidationError(f"sample_fraction must lie in (0, 1], got {self.sample_fraction!r}")
        if self.time_step is not None:
            require_positive("time_step", self.time_step)
        if self.duration is not None:
            require_positive("duration", self.duration)
            if self.duration < self.pattern_end * (1.0 - 1e-12):
                raise ValidationError(
                    f"duration {self.duration:.6g} s is shorter than settle_time + pattern "
                    f"({self.pattern_end:.6g} s)")

    @property
    def pattern_end(self) -> float:
        return self.settle_time + self.bit_period * len(self.sw_pattern)

    def resolve(self, carrier_frequency: float) -> "TransientConfig":
        """Fill the automatic fields and check the step against the carrier period"""
        require_positive("carrier_frequency", carrier_frequency)
        period = 1.0 / carrier_frequency
        time_step = self.time_step if self.time_step is not None else period / STEPS_PER_PERIOD
        if time_step > period / MIN_STEPS_PER_PERIOD * (1.0 + 1e-12):
            raise ValidationError(
                f"time_step {time_step:.4g} s exceeds carrier period / {MIN_STEPS_PER_PERIOD} "
                f"({period / MIN_STEPS_PER_PERIOD:.4g} s)")
        duration = self.duration if self.duration is not None else self.pattern_end
        return replace(self, time_step=time_step, duration=duration)

    def switch_state(self, t: np.ndarray) -> np.ndarray:
        """SW level at each time: low during settling and after the pattern"""
        position = np.floor((t - self.settle_time) / self.bit_period)
        pattern = np.asarray(self.sw_pattern, dtype=np.int8)
        inside = (t >= self.settle_time) & (position < len(pattern))
        sw = np.zeros(t.shape, dtype=np.int8)
        sw[inside] = pattern[position[inside].astype(int)]
        return sw


@dataclass(frozen=True)
class StateSpace:
    """
    x' = A·x + B·v_s for the state (i1, i2, v_c1, v_c2) at one load state.

    Attributes:
        a: 4×4 state matrix
        b: Input vector for the source voltage
        inductance: 2×2 inductance matrix [[L1, M], [M, L2]]
        c1, c2: Primary and total secondary capacitance
        r_eff: Effective load resistance
        load: The load state this system realizes
    """
    a: np.ndarray
    b: np.ndarray
    inductance: np.ndarray
    c1: float
    c2: float
    r_eff: float
    load: LoadState

    def stored_energy(self, x: np.ndarray) -> np.ndarray:
        """½·iᵀL·i + ½C1·v1² + ½C2·v2², for one state or a stack of states"""
        x = np.asarray(x, dtype=float)
        currents = x[..., :2]
        magnetic = 0.5 * np.einsum("...i,ij,...j->...", currents, self.inductance, currents)
        return magnetic + 0.5 * self.c1 * x[..., 2] ** 2 + 0.5 * self.c2 * x[..., 3] ** 2


@dataclass
class Envelope:
    """Per-carrier-period peak |i1|, timestamped at period centers"""
    t: np.ndarray
    amplitude: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def window_mean(self, start: float, stop: float) -> float:
        mask = (self.t >= start) & (self.t < stop)
        if not mask.any():
            raise InsufficientDataError(f"no envelope samples in [{start:.6g}, {stop:.6g}) s")
        return float(self.amplitude[mask].mean())


@dataclass
class Trace:
    """
    Uniformly sampled transient output.

    Attributes:
        t, i1, i2, v_c1, v_c2: State waveforms
        sw: Switch level per sample
        carrier_frequency: Drive frequency in Hz
        envelope: Derived |i1| envelope
    """
    t: np.ndarray
    i1: np.ndarray
    i2: np.ndarray
    v_c1: np.ndarray
    v_c2: np.ndarray
    sw: np.ndarray
    carrier_frequency: float
    envelope: Optional[Envelope] = None

    def __post_init__(self):
        lengths = {len(self.t), len(self.i1), len(self.i2), len(self.v_c1), len(self.v_c2), len(self.sw)}
        if len(lengths) != 1:
            raise ValidationError(f"trace series have different lengths: {sorted(lengths)}")
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise ValidationError("trace time axis is not strictly increasing")

    @property
    def time_step(self) -> float:
        return float(self.t[1] - self.t[0])

    def columns(self) -> Dict[str, np.ndarray]:
        return {"t": self.t, "i1": self.i1, "i2": self.i2, "v_c1": self.v_c1,
                "v_c2": self.v_c2, "sw": self.sw}


@dataclass(frozen=True)
class DecodeResult:
    """
    Decoded uplink.

    Attributes:
        bits: One decoded bit per SW bit (1 = envelope above threshold)
        polarity_flipped: True when bits are the complement of the SW pattern
        threshold: Midpoint of the per-bit envelope means, amperes
        per_bit_envelope_means: Envelope mean of each bit's sampling window
    """
    bits: Tuple[int, ...]
    polarity_flipped: bool
    threshold: float
    per_bit_envelope_means: Tuple[float, ...]


def build_state_space(scenario: LinkScenario, load: LoadState) -> StateSpace:
    """
    Linear state equations of the coupled link at one load state.

    Raises:
        ComputationError: when the inductance matrix is singular (k ≥ 1)
    """
    l1 = scenario.primary_coil.inductance
    l2 = scenario.secondary_coil.inductance
    m = scenario.mutual_inductance
    inductance = np.array([[l1, m], [m, l2]])
    determinant = l1 * l2 - m * m
    if not determinant > 0.0:
        raise ComputationError(f"singular inductance matrix (det = {determinant:.3g}), coupling must be < 1")
    gamma = np.linalg.inv(inductance)

    r1 = scenario.primary_coil.series_resistance
    r2 = scenario.secondary_coil.series_resistance
    c1 = scenario.primary_tank.c_s1
    c2 = scenario.secondary_tank.c2
    r_eff = scenario.effective_load(load)

    # Loop voltages (excluding the source) as a function of the state
    loop = np.array([
        [-r1, 0.0, -1.0, 0.0],
        [0.0, -r2, 0.0, -1.0],
    ])
    a = np.zeros((4, 4))
    a[:2, :] = gamma @ loop
    a[2, 0] = 1.0 / c1
    a[3, 1] = 1.0 / c2
    a[3, 3] = -1.0 / (r_eff * c2)
    b = np.zeros(4)
    b[:2] = gamma[:, 0]
    return StateSpace(a=a, b=b, inductance=inductance, c1=c1, c2=c2, r_eff=r_eff, load=load)


def trapezoidal_matrices(system: StateSpace, time_step: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Step matrices of the trapezoidal rule:
        x[n+1] = Φ·x[n] + Γ·(v[n] + v[n+1])
    with Φ = (I − hA/2)⁻¹(I + hA/2) and Γ = (I − hA/2)⁻¹·B·h/2.
    """
    identity = np.eye(4)
    half = 0.5 * time_step * system.a
    lhs = identity - half
    phi = np.linalg.solve(lhs, identity + half)
    gam = np.linalg.solve(lhs, system.b * (0.5 * time_step))
    return phi, gam


def _check_block(block: np.ndarray, peaks: List[np.ndarray], start_time: float):
    if not np.all(np.isfinite(block)):
        raise InstabilityError(f"non-finite state after t = {start_time:.6g} s")
    peak = np.abs(block).max(axis=0)
    if peaks:
        median = np.median(np.vstack(peaks), axis=0)
        grown = (median > 0.0) & (peak > INSTABILITY_FACTOR * median)
        if grown.any():
            raise InstabilityError(
                f"state grew beyond {INSTABILITY_FACTOR:.0e}× its running median after "
                f"t = {start_time:.6g} s; reduce time_step")
    peaks.append(peak)


def simulate(scenario: LinkScenario, config: Optional[TransientConfig] = None) -> Trace:
    """
    Integrate the switched link from rest with the trapezoidal rule.

    The source is V_s·sin(2π·f·t) from t = 0. The load switches
    instantaneously at bit edges between r_load (SW low) and r_load ∥ r_sw
    (SW high).

    Raises:
        InstabilityError: a state exceeded 1e6 × the running median of its block peaks
    """
    frequency = scenario.primary_tank.drive_frequency
    cfg = (config or TransientConfig()).resolve(frequency)
    h = cfg.time_step
    n_steps = int(math.ceil(cfg.duration / h - 1e-9))
    t = np.arange(n_steps + 1) * h
    source = scenario.primary_tank.source_amplitude * np.sin(2.0 * math.pi * frequency * t)
    drive = (source[:-1] + source[1:]).tolist()
    sw = cfg.switch_state(t)

    steppers = [trapezoidal_matrices(build_state_space(scenario, LoadState.from_bit(bit)), h)
                for bit in (0, 1)]
    logger.info(f"Simulating {cfg.duration * 1e6:.3g} µs in {n_steps} steps "
                f"(k = {scenario.coupling:.4g}, pattern {format_pattern(cfg.sw_pattern)})")

    states = np.empty((n_steps + 1, 4))
    x = np.zeros(4)
    states[0] = x
    levels = sw[:-1].tolist()
    peaks: List[np.ndarray] = []
    for start in range(0, n_steps, CHECK_BLOCK):
        stop = min(start + CHECK_BLOCK, n_steps)
        for n in range(start, stop):
            phi, gam = steppers[levels[n]]
            x = phi @ x + gam * drive[n]
            states[n + 1] = x
        _check_block(states[start + 1:stop + 1], peaks, start * h)

    trace = Trace(t=t, i1=states[:, 0], i2=states[:, 1], v_c1=states[:, 2], v_c2=states[:, 3],
                  sw=sw, carrier_frequency=frequency)
    trace.envelope = envelope(trace, frequency)
    return trace


def envelope(trace: Trace, carrier_frequency: float) -> Envelope:
    """
    Peak |i1| of every complete carrier period, timestamped at period centers.

    Raises:
        InsufficientDataError: fewer than two complete carrier periods
    """
    require_positive("carrier_frequency", carrier_frequency)
    period = 1.0 / carrier_frequency
    t0 = float(trace.t[0])
    span = float(trace.t[-1]) - t0
    n_full = int(math.floor(span / period + 1e-9))
    if n_full < 2:
        raise InsufficientDataError(
            f"trace spans {span:.4g} s, fewer than two carrier periods of {period:.4g} s")
    index = np.floor((trace.t - t0) / period + 1e-9).astype(int)
    keep = index < n_full
    index = index[keep]
    magnitude = np.abs(trace.i1[keep])
    starts = np.searchsorted(index, np.arange(n_full))
    if np.any(np.diff(starts) == 0):
        raise InsufficientDataError("some carrier periods hold no samples; time step too coarse")
    amplitude = np.maximum.reduceat(magnitude, starts)
    centers = t0 + (np.arange(n_full) + 0.5) * period
    return Envelope(t=centers, amplitude=amplitude)


def decode_lsk(env: Envelope, config: TransientConfig) -> DecodeResult:
    """
    Threshold the per-bit envelope means and compare with the SW pattern.

    Each bit is averaged over the trailing `sample_fraction` of its period.
    The threshold is the midpoint of the smallest and largest bit mean.

    Raises:
        IndeterminateError: swing below 1% of the mean level, or decoded bits
            matching neither the pattern nor its complement
        InsufficientDataError: a bit window holds no envelope samples
    """
    pattern = config.sw_pattern
    means = []
    for j in range(len(pattern)):
        bit_start = config.settle_time + j * config.bit_period
        window_start = bit_start + (1.0 - config.sample_fraction) * config.bit_period
        means.append(env.window_mean(window_start, bit_start + config.bit_period))
    means_array = np.array(means)
    low, high = float(means_array.min()), float(means_array.max())
    level = float(means_array.mean())
    if not high - low >= MIN_SWING * level:
        raise IndeterminateError(
            f"envelope swing {high - low:.4g} A is below {MIN_SWING:.0%} of its mean {level:.4g} A; "
            f"no modulation detected")
    threshold = 0.5 * (low + high)
    bits = tuple(int(m > threshold) for m in means)
    complement = tuple(1 - bit for bit in pattern)
    if bits == pattern:
        flipped = False
    elif bits == complement:
        flipped = True
    else:
        raise IndeterminateError(
            f"decoded {format_pattern(bits)} matches neither {format_pattern(pattern)} "
            f"nor its complement")
    logger.info(f"Decoded {format_pattern(bits)} for SW {format_pattern(pattern)}"
                f"{' (polarity flipped)' if flipped else ''}")
    return DecodeResult(bits=bits, polarity_flipped=flipped, threshold=threshold,
                        per_bit_envelope_means=tuple(means))
