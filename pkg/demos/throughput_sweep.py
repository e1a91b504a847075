"""
Sweeping the arrival rate
=========================

Below the downstream's peak flow the tandem passes almost everything it
receives; above it the transfer rate detaches from the arrival rate and
saturates.  Travel times on both sections grow sharply through the
transition.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from roadqueues import (
    FundamentalDiagram,
    SectionParams,
    TandemConfig,
    solve_bisection,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

sec1 = FundamentalDiagram(SectionParams(0.1, 100.0, 180.0))
sec2 = FundamentalDiagram(SectionParams(0.1, 50.0, 180.0))

rates = np.arange(100.0, 3001.0, 100.0)
solutions = [solve_bisection(TandemConfig(sec1, sec2, float(lam)))
             for lam in rates]
theta = np.array([s.transfer_rate for s in solutions])
delta = np.array([s.exit_rate for s in solutions])
w1 = np.array([s.report1.expected_time for s in solutions]) * 3600.0
w2 = np.array([s.report2.expected_time for s in solutions]) * 3600.0

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
ax1.plot(rates, theta, "o-", label="transfer rate", ms=3.5)
ax1.plot(rates, delta, "s-", label="exit rate", ms=3.5)
ax1.plot(rates, rates, ":", color="gray", label="arrival rate")
ax1.axhline(sec2.q_max, color="red", lw=0.8, ls="--",
            label=f"downstream peak {sec2.q_max:.0f}")
ax1.set_xlabel("arrival rate (veh/h)")
ax1.set_ylabel("veh/h")
ax1.set_title("throughput saturation")
ax1.legend()

ax2.plot(rates, w1, "o-", label="upstream section", ms=3.5)
ax2.plot(rates, w2, "s-", label="downstream section", ms=3.5)
ax2.axhline(0.1 / 100.0 * 3600.0, color="gray", lw=0.8, ls=":")
ax2.axhline(0.1 / 50.0 * 3600.0, color="gray", lw=0.8, ls=":")
ax2.set_xlabel("arrival rate (veh/h)")
ax2.set_ylabel("expected crossing time (s)")
ax2.set_title("travel times (dotted: free flow)")
ax2.legend()

fig.tight_layout()
fig.savefig(OUT / "throughput_sweep.png", dpi=130)
print(f"wrote {OUT / 'throughput_sweep.png'}")

for lam in (500, 1500, 2500):
    k = int(np.where(rates == lam)[0][0])
    print(f"lambda {lam:5d}: transfer {theta[k]:7.1f} veh/h, "
          f"exit {delta[k]:7.1f} veh/h, "
          f"times {w1[k]:5.1f} s / {w2[k]:5.1f} s")

print("the same sweep is available from the command line: "
      "roadqueues tandem sweep --config <file>")
