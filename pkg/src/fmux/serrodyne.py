"""Electro-optic serrodyne frequency shift and the feed-forward lookup table.

The modulator driven at nu_rf with amplitude v0 imprints the temporal phase
theta * sin(2 pi nu_rf (t - t_lock)) with theta = pi v0 / v_pi. Around a
zero crossing the phase is linear in time and translates the spectrum by
delta_nu = pi (v0 / v_pi) nu_rf. The lookup table maps each herald time bin
to the drive voltage that lands the conditional signal center on the output
filter; bins needing more than the largest available shift are marked
out-of-range rather than rejected.

Spectra here follow the exp(-i 2 pi nu t) analysis convention, so a positive
delta_nu moves a spectrum toward positive frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import defaults
from .spectrometer import SpectrometerModel

__all__ = [
    "ShifterModel",
    "LUTEntry",
    "FeedForwardLUT",
    "OverdriveError",
    "QuadratureConvergenceError",
    "shift_magnitude",
    "voltage_for_shift",
    "max_shift",
    "build_lut",
    "apply_temporal_phase",
    "phase_jitter_purity",
    "write_lut_text",
    "default_shifter",
]


class OverdriveError(ValueError):
    """Requested drive voltage exceeds the configured maximum."""


class QuadratureConvergenceError(RuntimeError):
    """Quadrature refinement moved the result more than the contract allows."""


@dataclass(frozen=True)
class ShifterModel:
    """EOM drive parameters: half-wave voltage, RF rate, drive limit, timing jitter."""

    v_pi: float
    nu_rf: float
    v0_max: float
    sigma_jitter: float = 0.0

    def __post_init__(self):
        if not self.v_pi > 0:
            raise ValueError("v_pi must be positive")
        if not self.nu_rf > 0:
            raise ValueError("nu_rf must be positive")
        if self.v0_max < 0 or self.sigma_jitter < 0:
            raise ValueError("v0_max and sigma_jitter must be non-negative")


def default_shifter(sigma_jitter: float = defaults.PHASE_JITTER_STD) -> ShifterModel:
    """Shifter normalized to v_pi = 1 V with the reference 85 GHz drive limit."""
    v_pi = 1.0
    v0_max = defaults.SHIFT_MAX_HZ * v_pi / (math.pi * defaults.RF_FREQUENCY_HZ)
    return ShifterModel(v_pi=v_pi, nu_rf=defaults.RF_FREQUENCY_HZ, v0_max=v0_max,
                        sigma_jitter=sigma_jitter)


def shift_magnitude(v0: float, model: ShifterModel) -> float:
    """Signed serrodyne shift delta_nu = pi (v0 / v_pi) nu_rf, in Hz."""
    if abs(v0) > model.v0_max * (1.0 + 1e-12):
        raise OverdriveError(f"|v0|={abs(v0):.3g} V exceeds v0_max={model.v0_max:.3g} V")
    return math.pi * (v0 / model.v_pi) * model.nu_rf


def voltage_for_shift(delta_nu: float, model: ShifterModel) -> float:
    """Drive voltage producing a given shift; inverse of shift_magnitude."""
    return delta_nu * model.v_pi / (math.pi * model.nu_rf)


def max_shift(model: ShifterModel) -> float:
    """Largest available |delta_nu| in Hz."""
    return math.pi * (model.v0_max / model.v_pi) * model.nu_rf


@dataclass(frozen=True)
class LUTEntry:
    bin_index: int
    herald_frequency: float  # rad/s
    required_shift: float  # Hz
    v0: float  # volts, clipped to the drive limit
    drive_phase: float  # radians, 0 locks the pulse to a zero crossing
    in_range: bool


@dataclass(frozen=True)
class FeedForwardLUT:
    """Herald-bin indexed drive settings; lookups outside the table are out-of-range."""

    entries: dict
    model: ShifterModel
    target_center: float  # rad/s
    reference_frequency: float  # rad/s

    def lookup(self, bin_index: int) -> LUTEntry:
        entry = self.entries.get(int(bin_index))
        if entry is not None:
            return entry
        return LUTEntry(int(bin_index), math.nan, math.nan, 0.0, 0.0, False)

    def in_range_fraction(self, weights: dict | None = None) -> float:
        """Fraction of table entries in range, optionally weighted per bin."""
        if weights is None:
            flags = [e.in_range for e in self.entries.values()]
            return sum(flags) / len(flags)
        total = sum(weights.values())
        hit = sum(w for k, w in weights.items() if self.lookup(k).in_range)
        return hit / total


def build_lut(
    spectrometer: SpectrometerModel,
    target_center: float,
    model: ShifterModel,
    span: float = defaults.HERALD_SPAN,
) -> FeedForwardLUT:
    """Table of drive settings for every herald bin reachable within the span.

    The conditional signal center for a herald measured at omega_H sits at
    target_center - (omega_H - reference), so the corrective shift is
    +(omega_H - reference). Entries whose shift exceeds the drive limit are
    stored clipped and flagged out of range; their events are discarded by
    the output filter downstream.
    """
    reach = span / 2.0 + spectrometer.jitter.reach() / abs(spectrometer.dispersion)
    step = spectrometer.bin_frequency_step
    k_max = int(math.ceil(reach / step + 0.5))
    limit = max_shift(model)
    entries = {}
    for k in range(-k_max, k_max + 1):
        omega_h = float(spectrometer.bin_center_frequency(k))
        shift_hz = (omega_h - spectrometer.reference_frequency) / defaults.TWO_PI
        in_range = abs(shift_hz) <= limit * (1.0 + 1e-12)
        v0 = voltage_for_shift(shift_hz, model)
        v0 = float(np.clip(v0, -model.v0_max, model.v0_max))
        entries[k] = LUTEntry(k, omega_h, shift_hz, v0, 0.0, in_range)
    return FeedForwardLUT(entries, model, target_center, spectrometer.reference_frequency)


def write_lut_text(lut: FeedForwardLUT, path) -> None:
    """Columnar export: bin index, herald frequency (GHz), v0 (V), in-range flag."""
    with open(path, "w") as fh:
        fh.write("# feed-forward lookup table\n")
        fh.write(f"# target_center={lut.target_center!r} reference={lut.reference_frequency!r}\n")
        fh.write("# columns: bin herald_freq_ghz v0_volts in_range\n")
        for k in sorted(lut.entries):
            e = lut.entries[k]
            ghz = (e.herald_frequency - lut.reference_frequency) / (defaults.TWO_PI * 1e9)
            fh.write(f"{e.bin_index} {ghz:+.6f} {e.v0!r} {int(e.in_range)}\n")


def apply_temporal_phase(
    times: np.ndarray,
    amplitude: np.ndarray,
    v0: float,
    model: ShifterModel,
    mode: str = "sinusoidal",
    t_lock: float = 0.0,
) -> np.ndarray:
    """Imprint the drive phase on a time-domain wavepacket.

    sinusoidal applies exp(i theta sin(2 pi nu_rf (t - t_lock))); linearized
    applies exp(i 2 pi delta_nu (t - t_lock)), the tangent at the zero
    crossing. Both are unit-modulus so the L2 norm is untouched. t_lock = 0
    locks a pulse centered at t = 0 to the zero crossing (maximal linearity).
    """
    delta_nu = shift_magnitude(v0, model)
    t = np.asarray(times, dtype=float) - t_lock
    if mode == "sinusoidal":
        theta = delta_nu / model.nu_rf
        phase = theta * np.sin(2.0 * math.pi * model.nu_rf * t)
    elif mode == "linearized":
        phase = 2.0 * math.pi * delta_nu * t
    else:
        raise ValueError("mode must be 'sinusoidal' or 'linearized'")
    return np.asarray(amplitude, dtype=complex) * np.exp(1j * phase)


def _jitter_overlap_matrix(sigma: float, delta_nu: float, model: ShifterModel,
                           n_jitter: int, n_time: int) -> np.ndarray:
    # Gauss-Hermite in both the timing offset x and the pulse time t;
    # the pulse amplitude is exp(-t^2 sigma^2 / 2) for spectral width sigma.
    xi_x, wx = np.polynomial.hermite.hermgauss(n_jitter)
    x = math.sqrt(2.0) * model.sigma_jitter * xi_x  # offsets, s
    wx = wx / math.sqrt(math.pi)
    xi_t, wt = np.polynomial.hermite.hermgauss(n_time)
    t = xi_t / sigma  # |A0|^2 = sigma/sqrt(pi) exp(-sigma^2 t^2)
    wt = wt / math.sqrt(math.pi)
    theta = delta_nu / model.nu_rf
    omega_rf = 2.0 * math.pi * model.nu_rf
    # phase[t, x] of the drive sampled by a pulse arriving offset by x
    phase = theta * np.sin(omega_rf * (t[:, None] - x[None, :]))
    kernel = np.exp(1j * phase)
    overlap = np.einsum("t,tx,ty->xy", wt, kernel, kernel.conj())
    return wx, overlap


def phase_jitter_purity(
    sigma_jitter: float,
    sigma: float,
    delta_nu: float,
    model: ShifterModel | None = None,
    n_jitter: int = 64,
    n_time: int = 128,
    check_refinement: bool = True,
) -> float:
    """Purity of the shifted photon under Gaussian drive-timing jitter.

    The pulse (spectral amplitude std sigma, rad/s) samples the sinusoidal
    drive at a random offset x ~ N(0, sigma_jitter^2); purity is the double
    Gauss-Hermite quadrature of the squared overlap of the jittered
    wavepackets. Raises QuadratureConvergenceError if refinement moves the
    result by more than 1e-4.
    """
    if sigma_jitter < 0:
        raise ValueError("sigma_jitter must be non-negative")
    if not sigma > 0:
        raise ValueError("photon bandwidth must be positive")
    if model is None:
        model = default_shifter()
    model = ShifterModel(model.v_pi, model.nu_rf, model.v0_max, sigma_jitter)

    def evaluate(nj, nt):
        wx, overlap = _jitter_overlap_matrix(sigma, delta_nu, model, nj, nt)
        return float(np.einsum("x,y,xy->", wx, wx, np.abs(overlap) ** 2).real)

    purity = evaluate(n_jitter, n_time)
    if check_refinement:
        refined = evaluate(n_jitter + 32, 2 * n_time)
        if abs(refined - purity) > 1e-4:
            raise QuadratureConvergenceError(
                f"phase-jitter quadrature moved by {abs(refined - purity):.2e} on refinement"
            )
    return min(purity, 1.0)
