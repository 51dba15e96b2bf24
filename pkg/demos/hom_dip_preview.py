"""Hong-Ou-Mandel visibility predicted from purity and pair statistics.

Visibility factors as purity times (1 - g2): distinguishability and
multi-pair background suppress the dip independently. The demo evaluates both
factors from the model, sketches the dip, and puts the bench measurement next
to it.
"""

import math

import numpy as np

from fmux import defaults, heralded, statistics

GHZ = defaults.TWO_PI * 1e9


def sketch(delays_ps, curve, height=10):
    band = 0.5 / height
    lines = []
    for level in range(height, -1, -1):
        t = level / height
        row = "".join("*" if abs(c - t) <= band else " " for c in curve)
        lines.append(f"  {t:4.2f} |{row}|")
    axis = f"       {delays_ps[0]:+.0f} ps" + " " * (len(curve) - 14) + f"{delays_ps[-1]:+.0f} ps"
    return "\n".join(lines) + "\n" + axis


def main():
    model = heralded.default_model()
    purity = heralded.purity_integral(model)
    dm = heralded.assemble_density_matrix(model)
    w = dm.grid.trapezoid_weights()
    p = np.real(np.diag(dm.matrix)) * w
    x = dm.grid.detunings
    mean = float(p @ x)
    sigma_eff = math.sqrt(float(p @ (x - mean) ** 2))  # heralded intensity rms width

    counts = statistics.MultiplexedStatisticsModel(
        n_modes=statistics.effective_mode_count(defaults.SHIFT_RANGE_HZ,
                                                defaults.MARGINAL_FWHM_HZ),
        mu=defaults.MEAN_PAIR_NUMBER,
        eta_s=defaults.KLYSHKO_SIGNAL,
        eta_h=defaults.KLYSHKO_HERALD,
        multiplexing_enabled=True,
    )
    g2 = statistics.analytic_counting(counts).g2_h
    visibility = statistics.hom_visibility(purity, g2)

    print("anchor points of the visibility law")
    print(f"  perfect purity, g2 = 0.14:  {statistics.hom_visibility(1.0, 0.14):.4f}")
    print(f"  purity 0.84,    g2 = 0.14:  {statistics.hom_visibility(0.84, 0.14):.4f}")
    print()
    print("model prediction at the operating point")
    print(f"  purity            {purity:.4f}")
    print(f"  g2                {g2:.4f}")
    print(f"  visibility        {visibility:.4f}")
    print(f"  heralded rms width {sigma_eff / GHZ:.2f} GHz sets the dip width")
    print()

    delays = np.linspace(-40e-12, 40e-12, 64)
    curve = np.asarray(statistics.hom_dip_curve(purity, g2, sigma_eff, delays))
    print("coincidence rate vs relative delay (normalized to the baseline)")
    print(sketch(delays * 1e12, curve))
    print()

    gap = visibility - defaults.MEASURED_HOM_VISIBILITY
    print(f"the bench measured {defaults.MEASURED_HOM_VISIBILITY} +/- "
          f"{defaults.MEASURED_HOM_VISIBILITY_ERR}; the model sits {gap:.3f} higher.")
    print("the gap is expected: interferometer mode matching, polarization, and")
    print("detector afterpulsing are outside this model. both numbers clear the")
    print("0.5 classical bound comfortably.")


if __name__ == "__main__":
    main()
