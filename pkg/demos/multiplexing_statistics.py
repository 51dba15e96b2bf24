"""What frequency multiplexing buys in rate, and what it does not cost in g2.

Compares the multiplexed source against the single-mode equivalent with the
thermal counting model, spot-checks it by Monte Carlo, and shows how the
enhancement saturates as more modes are accepted.
"""

from dataclasses import replace

from fmux import defaults, statistics


def main():
    n = statistics.effective_mode_count(defaults.SHIFT_RANGE_HZ, defaults.MARGINAL_FWHM_HZ)
    mux = statistics.MultiplexedStatisticsModel(
        n_modes=n,
        mu=defaults.MEAN_PAIR_NUMBER,
        eta_s=defaults.KLYSHKO_SIGNAL,
        eta_h=defaults.KLYSHKO_HERALD,
        multiplexing_enabled=True,
    )
    single = replace(mux, multiplexing_enabled=False)

    print(f"correctable span {defaults.SHIFT_RANGE_HZ / 1e9:.0f} GHz over a "
          f"{defaults.MARGINAL_FWHM_HZ / 1e9:.0f} GHz photon: "
          f"{n:.2f} effective modes")
    print()

    print("heralded-coincidence enhancement vs pair number (analytic)")
    print(f"  {'mu':>6}  {'p_sh mux':>10}  {'p_sh single':>11}  {'gain':>6}  "
          f"{'g2 mux':>8}  {'g2 single':>9}")
    for mu in (0.002, 0.005, 0.01, 0.02, 0.03):
        rm = statistics.analytic_counting(replace(mux, mu=mu))
        rs = statistics.analytic_counting(replace(single, mu=mu))
        print(f"  {mu:>6.3f}  {rm.p_sh:>10.2e}  {rs.p_sh:>11.2e}  "
              f"{rm.p_sh / rs.p_sh:>6.3f}  {rm.g2_h:>8.4f}  {rs.g2_h:>9.4f}")
    print()
    print(f"at the operating point the model gives a factor "
          f"{statistics.analytic_counting(mux).p_sh / statistics.analytic_counting(single).p_sh:.3f}"
          f"; the bench measured {defaults.MEASURED_ENHANCEMENT}.")
    print("g2 stays put: extra rate comes from accepting more herald modes,")
    print("each as weakly pumped as before, not from pumping harder.")
    print()

    pulses = 16_000_000
    mc_mux = statistics.monte_carlo_counting(mux, pulses, rng=7, workers=4)
    mc_single = statistics.monte_carlo_counting(single, pulses, rng=8, workers=4)
    print(f"Monte Carlo spot check, {pulses} pulses per arm (seeds 7 and 8)")
    print(f"  enhancement  {mc_mux.p_sh / mc_single.p_sh:.3f}")
    print(f"  g2 mux       {mc_mux.g2_h:.4f} +/- {mc_mux.se_g2_h:.4f}")
    print(f"  g2 single    {mc_single.g2_h:.4f} +/- {mc_single.se_g2_h:.4f}")
    print()

    print("the gain tracks the accepted mode count nearly one-for-one at this")
    print("pump level, so the lever is bandwidth: span over photon width")
    print(f"  {'modes accepted':>15}  {'gain':>6}")
    base = statistics.analytic_counting(replace(mux, n_modes=1.0)).p_sh
    for k in (1.5, 2.0, n, 4.0, 6.0, 8.0):
        gain = statistics.analytic_counting(replace(mux, n_modes=k)).p_sh / base
        tag = "  <- operating point" if abs(k - n) < 1e-9 else ""
        print(f"  {k:>15.2f}  {gain:>6.3f}{tag}")
    print()
    print("pushing the pump instead erodes the per-mode gain (the gain column")
    print("above falls with mu) and spends the g2 budget.")


if __name__ == "__main__":
    main()
