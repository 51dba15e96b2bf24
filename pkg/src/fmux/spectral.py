"""Frequency grids, joint spectral amplitudes, and Schmidt-mode purity.

The joint spectral amplitude (JSA) f(omega_s, omega_i) of a photon pair is
held on a uniform 2-D grid. Purity is evaluated by singular-value
decomposition with trapezoid quadrature weights folded into the amplitude
matrix, so Schmidt coefficients converge with grid refinement. These routines
are the independent oracle for the heralded-state purity engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from . import defaults

__all__ = [
    "FrequencyGrid",
    "PumpEnvelope",
    "TopHatWindow",
    "GaussianWindow",
    "JointSpectralAmplitude",
    "GridTooNarrowError",
    "FilterOverlapError",
    "build_anticorrelated_jsa",
    "build_factorable_jsa",
    "schmidt_purity",
    "schmidt_coefficients",
    "rotated_gaussian_purity",
    "apply_filter",
    "intensity_correlation",
    "write_jsa_text",
    "read_jsa_text",
]


class GridTooNarrowError(ValueError):
    """Amplitude has not decayed at the grid boundary; results would be biased."""


class FilterOverlapError(ValueError):
    """Filter window removes all amplitude on the grid."""


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform angular-frequency grid, symmetric about its center.

    Parameters
    ----------
    center : float
        Center frequency, rad/s.
    span : float
        Full width from first to last sample, rad/s.
    points : int
        Sample count, at least 2. Odd counts place a sample on the center.
    """

    center: float
    span: float
    points: int

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("grid needs at least 2 points")
        if not self.span > 0:
            raise ValueError("grid span must be positive")

    @property
    def step(self) -> float:
        return self.span / (self.points - 1)

    @property
    def detunings(self) -> np.ndarray:
        return np.linspace(-0.5 * self.span, 0.5 * self.span, self.points)

    @property
    def values(self) -> np.ndarray:
        return self.center + self.detunings

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.points, self.step)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def refined(self, factor: int = 2) -> "FrequencyGrid":
        """Same span with (points-1)*factor + 1 samples (keeps end points)."""
        return FrequencyGrid(self.center, self.span, (self.points - 1) * factor + 1)


@dataclass(frozen=True)
class PumpEnvelope:
    """Gaussian pump spectral amplitude exp(-(w - center)^2 / (2 sigma^2)).

    center is the pump (sum) frequency in rad/s; sigma is the amplitude
    std-dev in rad/s.
    """

    sigma: float
    center: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("pump sigma must be positive")

    def amplitude(self, omega) -> np.ndarray:
        x = (np.asarray(omega, dtype=float) - self.center) / self.sigma
        return np.exp(-0.5 * x * x)


@dataclass(frozen=True)
class TopHatWindow:
    """Flat passband of given full width.

    The amplitude response is 1 inside and 0 outside; a sample lying exactly
    on an edge gets sqrt(1/2) so its intensity carries half weight, matching
    the trapezoid rule on a grid that ends at the filter edges.
    """

    center: float
    full_width: float

    def __post_init__(self):
        if not self.full_width > 0:
            raise ValueError("window width must be positive")

    @property
    def half_width(self) -> float:
        return 0.5 * self.full_width

    def amplitude(self, omega) -> np.ndarray:
        x = np.abs(np.asarray(omega, dtype=float) - self.center)
        edge_tol = 1e-9 * self.full_width
        a = np.where(x < self.half_width - edge_tol, 1.0, 0.0)
        return np.where(np.abs(x - self.half_width) <= edge_tol, math.sqrt(0.5), a)


@dataclass(frozen=True)
class GaussianWindow:
    """Gaussian amplitude acceptance exp(-(w - center)^2 / (2 sigma^2))."""

    center: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("window sigma must be positive")

    def amplitude(self, omega) -> np.ndarray:
        x = (np.asarray(omega, dtype=float) - self.center) / self.sigma
        return np.exp(-0.5 * x * x)


def _grid_norm(signal_grid: FrequencyGrid, herald_grid: FrequencyGrid, amplitude) -> float:
    ws = signal_grid.trapezoid_weights()
    wh = herald_grid.trapezoid_weights()
    return float(np.sqrt(np.einsum("i,j,ij->", ws, wh, np.abs(amplitude) ** 2)))


@dataclass(frozen=True)
class JointSpectralAmplitude:
    """Complex pair amplitude on the (signal, herald) grid, unit L2 norm.

    amplitude[i, j] is f(signal_grid.values[i], herald_grid.values[j]); the
    norm is taken with trapezoid grid weights.
    """

    signal_grid: FrequencyGrid
    herald_grid: FrequencyGrid
    amplitude: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitude, dtype=complex)
        if a.shape != (self.signal_grid.points, self.herald_grid.points):
            raise ValueError("amplitude shape does not match grids")
        if not np.all(np.isfinite(a.view(float))):
            raise ValueError("amplitude contains non-finite entries")
        object.__setattr__(self, "amplitude", a)
        norm = _grid_norm(self.signal_grid, self.herald_grid, a)
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"amplitude not normalized (norm={norm:.3e})")

    def joint_intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def weighted_matrix(self) -> np.ndarray:
        """Amplitude with sqrt quadrature weights folded in; SVD-ready."""
        ws = np.sqrt(self.signal_grid.trapezoid_weights())
        wh = np.sqrt(self.herald_grid.trapezoid_weights())
        return ws[:, None] * self.amplitude * wh[None, :]

    def signal_marginal(self) -> np.ndarray:
        """Intensity marginal over the herald axis (density in the signal variable)."""
        wh = self.herald_grid.trapezoid_weights()
        return self.joint_intensity() @ wh

    def herald_marginal(self) -> np.ndarray:
        ws = self.signal_grid.trapezoid_weights()
        return ws @ self.joint_intensity()


def _normalized(signal_grid, herald_grid, amplitude) -> JointSpectralAmplitude:
    norm = _grid_norm(signal_grid, herald_grid, amplitude)
    if norm <= 0 or not math.isfinite(norm):
        raise ValueError("cannot normalize zero or non-finite amplitude")
    return JointSpectralAmplitude(signal_grid, herald_grid, amplitude / norm)


def default_grid(center: float, sigma: float = defaults.PUMP_SIGMA) -> FrequencyGrid:
    """513 points spanning +/-6 sigma, the package-wide default discretization."""
    return FrequencyGrid(center, 12.0 * sigma, 513)


def build_anticorrelated_jsa(
    pump: PumpEnvelope,
    signal_grid: FrequencyGrid,
    herald_grid: FrequencyGrid,
    phase_matching_sigma: float | None = None,
    phase_matching_center: float = 0.0,
    check_truncation: bool = True,
) -> JointSpectralAmplitude:
    """JSA governed by the pump envelope alone: f ~ exp(-(ws + wi - wp)^2 / 2 sigma^2).

    Phase matching is flat by default (broadband crystal); passing
    phase_matching_sigma applies an optional Gaussian factor in the difference
    frequency ws - wi - phase_matching_center. The result is real,
    non-negative, and unit norm.

    Raises GridTooNarrowError when the envelope has not decayed below 1e-6 of
    its on-grid peak at the extreme reachable sum (or difference) detunings,
    which signals truncation bias. check_truncation=False skips the guard for
    deliberate flat-envelope studies.
    """
    ws = signal_grid.values[:, None]
    wh = herald_grid.values[None, :]
    amp = pump.amplitude(ws + wh)
    if phase_matching_sigma is not None:
        if not phase_matching_sigma > 0:
            raise ValueError("phase matching sigma must be positive")
        d = (ws - wh - phase_matching_center) / phase_matching_sigma
        amp = amp * np.exp(-0.5 * d * d)
    if check_truncation:
        peak = float(amp.max())
        sum_offset = signal_grid.center + herald_grid.center - pump.center
        reach = 0.5 * (signal_grid.span + herald_grid.span)
        # the envelope is 1-D in the sum detuning; test its own domain edges
        edge = max(
            pump.amplitude(pump.center + sum_offset + reach),
            pump.amplitude(pump.center + sum_offset - reach),
        )
        if phase_matching_sigma is not None:
            diff_offset = signal_grid.center - herald_grid.center - phase_matching_center
            lo = (diff_offset - reach) / phase_matching_sigma
            hi = (diff_offset + reach) / phase_matching_sigma
            edge = max(edge, math.exp(-0.5 * lo * lo), math.exp(-0.5 * hi * hi))
        if edge > 1e-6 * peak:
            raise GridTooNarrowError(
                f"envelope at grid edge is {edge / peak:.2e} of peak (limit 1e-6)"
            )
    return _normalized(signal_grid, herald_grid, amp)


def build_factorable_jsa(
    signal_sigma: float,
    herald_sigma: float,
    signal_grid: FrequencyGrid,
    herald_grid: FrequencyGrid,
    signal_center: float | None = None,
    herald_center: float | None = None,
    check_truncation: bool = True,
) -> JointSpectralAmplitude:
    """Separable Gaussian-product JSA; Schmidt purity 1 by construction."""
    if not (signal_sigma > 0 and herald_sigma > 0):
        raise ValueError("sigmas must be positive")
    sc = signal_grid.center if signal_center is None else signal_center
    hc = herald_grid.center if herald_center is None else herald_center
    a = np.exp(-0.5 * ((signal_grid.values - sc) / signal_sigma) ** 2)
    b = np.exp(-0.5 * ((herald_grid.values - hc) / herald_sigma) ** 2)
    if check_truncation:
        for vec, name in ((a, "signal"), (b, "herald")):
            edge = max(vec[0], vec[-1])
            if edge > 1e-6 * vec.max():
                raise GridTooNarrowError(
                    f"{name} Gaussian at grid edge is {edge / vec.max():.2e} of peak"
                )
    return _normalized(signal_grid, herald_grid, np.outer(a, b))


def schmidt_coefficients(jsa: JointSpectralAmplitude) -> np.ndarray:
    """Schmidt weights lambda_k (squared singular values, normalized to sum 1)."""
    s = linalg.svdvals(jsa.weighted_matrix())
    lam = s * s
    return lam / lam.sum()


def schmidt_purity(jsa: JointSpectralAmplitude) -> float:
    """Spectral purity Tr(rho^2) = sum_k lambda_k^2 of the reduced state."""
    lam = schmidt_coefficients(jsa)
    return float(np.dot(lam, lam))


def schmidt_number(jsa: JointSpectralAmplitude) -> float:
    """Effective mode count K = 1 / sum lambda_k^2 (inverse of the purity)."""
    return 1.0 / schmidt_purity(jsa)


def rotated_gaussian_purity(sum_sigma: float, difference_sigma: float) -> float:
    """Closed-form Schmidt purity of a two-Gaussian correlated JSA.

    For f ~ exp(-(ws+wi-wp)^2/(2 a^2)) * exp(-(ws-wi-d0)^2/(2 b^2)) the
    principal axes lie along the +/-45 degree diagonals with amplitude
    std-devs a/sqrt(2) and b/sqrt(2), and the Schmidt spectrum is geometric
    with purity 2ab/(a^2 + b^2). Equal widths give a separable (purity 1)
    state; strong anticorrelation (a << b) gives ~2a/b.
    """
    if not (sum_sigma > 0 and difference_sigma > 0):
        raise ValueError("sigmas must be positive")
    return 2.0 * sum_sigma * difference_sigma / (sum_sigma**2 + difference_sigma**2)


def apply_filter(
    jsa: JointSpectralAmplitude, window, axis: str = "signal"
) -> tuple[JointSpectralAmplitude, float]:
    """Apply a spectral window along one axis and renormalize.

    Returns (filtered JSA, transmitted probability), the probability being
    the L2 norm squared of the windowed amplitude before renormalization.
    Raises FilterOverlapError when the window removes everything.
    """
    if axis == "signal":
        w = window.amplitude(jsa.signal_grid.values)[:, None]
    elif axis == "herald":
        w = window.amplitude(jsa.herald_grid.values)[None, :]
    else:
        raise ValueError("axis must be 'signal' or 'herald'")
    amp = jsa.amplitude * w
    norm = _grid_norm(jsa.signal_grid, jsa.herald_grid, amp)
    transmitted = norm * norm
    if transmitted <= 1e-300:
        raise FilterOverlapError("window does not overlap the amplitude")
    return JointSpectralAmplitude(jsa.signal_grid, jsa.herald_grid, amp / norm), transmitted


def intensity_correlation(jsa: JointSpectralAmplitude) -> float:
    """Pearson correlation of (omega_s, omega_i) under the joint intensity."""
    ws = jsa.signal_grid.trapezoid_weights()
    wh = jsa.herald_grid.trapezoid_weights()
    p = ws[:, None] * jsa.joint_intensity() * wh[None, :]
    p = p / p.sum()
    xs = jsa.signal_grid.detunings
    xh = jsa.herald_grid.detunings
    ps = p.sum(axis=1)
    ph = p.sum(axis=0)
    ms = float(xs @ ps)
    mh = float(xh @ ph)
    vs = float(((xs - ms) ** 2) @ ps)
    vh = float(((xh - mh) ** 2) @ ph)
    cov = float((xs - ms) @ p @ (xh - mh))
    return cov / math.sqrt(vs * vh)


def write_jsa_text(jsa: JointSpectralAmplitude, path) -> None:
    """Self-describing columnar export: header metadata, then ws wi Re Im rows."""
    with open(path, "w") as fh:
        fh.write("# joint spectral amplitude\n")
        for tag, grid in (("signal", jsa.signal_grid), ("herald", jsa.herald_grid)):
            fh.write(
                f"# {tag}_center={grid.center!r} {tag}_span={grid.span!r} "
                f"{tag}_points={grid.points}\n"
            )
        fh.write("# columns: omega_s omega_i re im\n")
        vs = jsa.signal_grid.values
        vh = jsa.herald_grid.values
        for i in range(jsa.signal_grid.points):
            for j in range(jsa.herald_grid.points):
                a = jsa.amplitude[i, j]
                fh.write(f"{float(vs[i])!r} {float(vh[j])!r} "
                         f"{float(a.real)!r} {float(a.imag)!r}\n")


def read_jsa_text(path) -> JointSpectralAmplitude:
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" in token:
                        k, v = token.split("=", 1)
                        meta[k] = float(v)
                continue
            rows.append([float(t) for t in line.split()])
    try:
        sg = FrequencyGrid(meta["signal_center"], meta["signal_span"], int(meta["signal_points"]))
        hg = FrequencyGrid(meta["herald_center"], meta["herald_span"], int(meta["herald_points"]))
    except KeyError as exc:
        raise ValueError(f"missing grid metadata in {path}") from exc
    data = np.asarray(rows)
    if data.shape[0] != sg.points * hg.points:
        raise ValueError("row count does not match grid metadata")
    amp = (data[:, 2] + 1j * data[:, 3]).reshape(sg.points, hg.points)
    return JointSpectralAmplitude(sg, hg, amp)
