"""
One section as a finite queue
=============================

The occupancy of a single section under Poisson arrivals is a
birth-death chain whose death rates follow the flow law.  This demo
shows how the stationary distribution and the performance measures
respond to the arrival rate, and checks the result against an exact
chain solved independently.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from roadqueues import (
    FundamentalDiagram,
    SectionParams,
    birth_death_stationary,
    flow_profile,
    performance_measures,
    stationary_flow_form,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

sec2 = FundamentalDiagram(SectionParams(0.1, 50.0, 180.0))

# light traffic leaves the section nearly empty; past the peak flow the
# distribution flips to the congested side
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
counts = np.arange(0, 19)
for lam in (1000.0, 2000.0, 3000.0):
    dist = stationary_flow_form(lam, sec2)
    ax1.plot(counts, dist.probs, "o-", label=f"{lam:.0f} veh/h")
    exact = birth_death_stationary(lam, flow_profile(sec2)[1:])
    gap = float(np.max(np.abs(dist.probs - exact.probs)))
    print(f"lambda {lam:6.0f}: blocking {dist.blocking:.4f}, "
          f"mean count {dist.mean():5.2f}, exact-chain gap {gap:.1e}")
ax1.set_xlabel("cars on the section")
ax1.set_ylabel("stationary probability")
ax1.set_title(f"occupancy (peak flow {sec2.q_max:.0f} veh/h)")
ax1.legend()

# blocking and travel time as functions of load
rates = np.linspace(50.0, 4000.0, 80)
blocking = []
times = []
for lam in rates:
    dist = stationary_flow_form(float(lam), sec2)
    report = performance_measures(float(lam), dist)
    blocking.append(report.blocking_probability)
    times.append(report.expected_time * 3600.0)  # seconds
ax2.plot(rates, blocking, label="blocking probability")
ax2.set_xlabel("arrival rate (veh/h)")
ax2.set_ylabel("blocking probability")
ax2t = ax2.twinx()
ax2t.plot(rates, times, "r--", label="expected time")
ax2t.set_ylabel("expected time on the section (s)")
ax2.set_title("performance vs load")

fig.tight_layout()
fig.savefig(OUT / "single_section_analysis.png", dpi=130)
print(f"wrote {OUT / 'single_section_analysis.png'}")

free_flow = 0.1 / 50.0 * 3600.0
print(f"free-flow crossing time {free_flow:.1f} s; "
      f"at 4000 veh/h the expected time is {times[-1]:.1f} s")
