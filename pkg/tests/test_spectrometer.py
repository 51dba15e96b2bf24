import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fmux import defaults
from fmux.spectral import FrequencyGrid
from fmux.spectrometer import (
    FrequencyRangeError,
    JitterDistribution,
    SpectrometerModel,
    ZeroEvidenceError,
    arrival_time_to_frequency,
    conditional_outcome_distribution,
    frequency_to_arrival_time,
    herald_posterior,
    load_jitter_histogram,
    measured_jitter_spectrometer,
    nominal_spectrometer,
    sample_herald_event,
    time_to_bin,
)

GHZ = defaults.TWO_PI * 1e9


def quiet_spectrometer(sigma_t=0.0):
    return SpectrometerModel(
        dispersion=defaults.TIME_PER_FREQ,
        tdc_bin=defaults.TDC_BIN,
        jitter=JitterDistribution.gaussian(sigma_t),
        reference_frequency=defaults.HERALD_CENTER,
    )


def test_dispersion_map_round_trip():
    m = quiet_spectrometer()
    omega = defaults.HERALD_CENTER + np.linspace(-50.0, 50.0, 7) * GHZ
    t = frequency_to_arrival_time(m, omega)
    np.testing.assert_allclose(arrival_time_to_frequency(m, t), omega, rtol=1e-12)


def test_bin_frequency_step():
    # 33 ps per bin at 16 ps/GHz of dispersion
    m = quiet_spectrometer()
    assert math.isclose(m.bin_frequency_step, (33.0 / 16.0) * GHZ, rel_tol=1e-12)


def test_time_to_bin_centers_and_edges():
    m = quiet_spectrometer()
    b = m.tdc_bin
    t = np.array([0.0, 0.49 * b, 0.5 * b, 0.51 * b, -0.5 * b, -0.51 * b, 3.2 * b])
    k = time_to_bin(m, t)
    assert list(k) == [0, 0, 0, 1, 0, -1, 3]  # edge ties round toward t0


@given(st.floats(-200.0, 200.0))
def test_bin_quantization_error_bounded(detuning_ghz):
    m = quiet_spectrometer()
    omega = defaults.HERALD_CENTER + detuning_ghz * GHZ
    k = int(time_to_bin(m, frequency_to_arrival_time(m, omega)))
    back = float(m.bin_center_frequency(k))
    assert abs(back - omega) <= 0.5 * m.bin_frequency_step * (1 + 1e-9)


def test_zero_jitter_outcome_is_deterministic():
    m = quiet_spectrometer()
    omega_i = defaults.HERALD_CENTER + 17.3 * GHZ
    bins, p, freqs = conditional_outcome_distribution(m, omega_i)
    assert p.max() == 1.0
    k = bins[int(np.argmax(p))]
    assert abs(freqs[int(np.argmax(p))] - omega_i) <= 0.5 * m.bin_frequency_step
    assert k == int(time_to_bin(m, float(frequency_to_arrival_time(m, omega_i))))


def test_outcome_distribution_normalized_and_centered():
    m = quiet_spectrometer(sigma_t=300e-12)
    omega_i = defaults.HERALD_CENTER - 42.0 * GHZ
    bins, p, freqs = conditional_outcome_distribution(m, omega_i)
    assert abs(p.sum() - 1.0) < 1e-12
    mean = float(p @ freqs)
    assert abs(mean - omega_i) <= 0.5 * m.bin_frequency_step


def test_outcome_distribution_width_tracks_jitter():
    omega_i = defaults.HERALD_CENTER
    for sigma_t in (150e-12, 720e-12):
        m = quiet_spectrometer(sigma_t=sigma_t)
        _, p, freqs = conditional_outcome_distribution(m, omega_i)
        mean = float(p @ freqs)
        std = math.sqrt(float(p @ (freqs - mean) ** 2))
        expected = m.frequency_std()
        # quantization adds bin_step^2/12 of variance
        quant = m.bin_frequency_step**2 / 12.0
        assert abs(std - math.sqrt(expected**2 + quant)) < 0.02 * expected


def test_undersized_bin_set_rejected():
    m = quiet_spectrometer(sigma_t=300e-12)
    with pytest.raises(ValueError):
        conditional_outcome_distribution(m, defaults.HERALD_CENTER, bins=np.array([0, 1]))


def test_herald_posterior_flat_prior_tracks_likelihood():
    m = measured_jitter_spectrometer()
    grid = FrequencyGrid(defaults.HERALD_CENTER, 600.0 * GHZ, 601)
    prior = np.full(grid.points, 1.0 / grid.span)
    omega_h = defaults.HERALD_CENTER + 30.0 * GHZ
    post = herald_posterior(m, omega_h, grid, prior)
    w = grid.trapezoid_weights()
    assert abs(post @ w - 1.0) < 1e-9
    peak = grid.values[int(np.argmax(post))]
    assert abs(peak - omega_h) < 2.0 * m.bin_frequency_step
    # posterior std approaches the jitter width for a flat prior
    mean = float((w * post) @ grid.values)
    std = math.sqrt(float((w * post) @ (grid.values - mean) ** 2))
    assert abs(std - m.frequency_std()) < 0.05 * m.frequency_std()


def test_herald_posterior_zero_evidence():
    m = quiet_spectrometer(sigma_t=50e-12)
    grid = FrequencyGrid(defaults.HERALD_CENTER, 20.0 * GHZ, 101)
    prior = np.full(grid.points, 1.0 / grid.span)
    with pytest.raises(ZeroEvidenceError):
        herald_posterior(m, defaults.HERALD_CENTER + 500.0 * GHZ, grid, prior)


def test_sample_herald_event_reproducible():
    m = measured_jitter_spectrometer()
    omega = defaults.HERALD_CENTER + np.linspace(-20, 20, 64) * GHZ
    a = sample_herald_event(m, omega, np.random.default_rng(3))
    b = sample_herald_event(m, omega, np.random.default_rng(3))
    assert [e.time_bin_index for e in a] == [e.time_bin_index for e in b]
    one = sample_herald_event(m, float(omega[0]), np.random.default_rng(3))
    assert one.inferred_frequency == float(m.bin_center_frequency(one.time_bin_index))


def test_calibrated_span_guard():
    m = measured_jitter_spectrometer()
    with pytest.raises(FrequencyRangeError):
        frequency_to_arrival_time(m, defaults.HERALD_CENTER + 10 * defaults.HERALD_SPAN)


def test_gaussian_jitter_stats():
    j = JitterDistribution.gaussian(720e-12)
    assert j.time_std() == 720e-12
    assert abs(j.cdf(0.0) - 0.5) < 1e-12
    assert abs(j.interval_probability(-720e-12, 720e-12) - 0.6826894921) < 1e-6


def test_tabulated_jitter_round_trip():
    # triangular density on +/- 1 ns
    off = np.linspace(-1e-9, 1e-9, 201)
    counts = 1.0 - np.abs(off) / 1e-9
    j = JitterDistribution.from_table(off, counts)
    assert abs(np.trapezoid(j.density, j.offsets) - 1.0) < 1e-9
    assert abs(j.time_std() - 1e-9 / math.sqrt(6.0)) < 1e-3 * 1e-9
    samples = j.sample(np.random.default_rng(0), size=2000)
    assert samples.min() >= off[0] and samples.max() <= off[-1]


def test_tabulated_jitter_validation():
    with pytest.raises(ValueError):
        JitterDistribution(offsets=np.array([0.0, 1.0]), density=np.array([1.0, -0.5]))
    with pytest.raises(ValueError):
        JitterDistribution(sigma_t=1.0, offsets=np.array([0.0, 1.0]), density=np.array([1.0, 1.0]))


def test_load_jitter_histogram(tmp_path):
    path = tmp_path / "jitter.txt"
    off_ps = np.linspace(-800.0, 800.0, 81)
    counts = np.exp(-0.5 * (off_ps / 240.0) ** 2)
    np.savetxt(path, np.column_stack([off_ps, counts]))
    j = load_jitter_histogram(path)
    assert abs(j.time_std() - 240e-12) < 5e-12
    m = quiet_spectrometer()
    m = SpectrometerModel(m.dispersion, m.tdc_bin, j, m.reference_frequency)
    _, p, _ = conditional_outcome_distribution(m, defaults.HERALD_CENTER)
    assert abs(p.sum() - 1.0) < 1e-9


def test_factory_interpretations():
    fwhm = nominal_spectrometer("fwhm")
    std = nominal_spectrometer("std")
    ratio = std.frequency_std() / fwhm.frequency_std()
    assert abs(ratio - 2.0 * math.sqrt(2.0 * math.log(2.0))) < 1e-9
    measured = measured_jitter_spectrometer()
    assert abs(measured.frequency_std() - defaults.MEASURED_JITTER_FREQ_STD) < 1e-3
    with pytest.raises(ValueError):
        nominal_spectrometer("hwhm")


def test_herald_grid_centered_and_odd():
    m = quiet_spectrometer()
    g = m.herald_grid(129)
    assert g.points == 129
    assert g.center == m.reference_frequency
    assert math.isclose(g.step, m.bin_frequency_step, rel_tol=1e-12)
    with pytest.raises(ValueError):
        m.herald_grid(128)
