"""
Speed laws, the quadratic flow law, and demand/supply splitting
===============================================================

Two road sections serve as the running example throughout these demos:
a 0.1 km section with a 100 km/h free speed feeding a 0.1 km section
with a 50 km/h free speed, both at a jam density of 180 veh/km, so each
holds at most 18 cars.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from roadqueues import (
    Exponential,
    FundamentalDiagram,
    SectionParams,
    demand_profile,
    exponential_speed,
    fit_beta_gamma,
    flow_profile,
    linear_speed,
    supply_profile,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

params1 = SectionParams(0.1, 100.0, 180.0)
params2 = SectionParams(0.1, 50.0, 180.0)
sec1 = FundamentalDiagram(params1)
sec2 = FundamentalDiagram(params2)

print(f"section 1: capacity {params1.capacity} cars, peak flow {sec1.q_max:.1f} veh/h")
print(f"section 2: capacity {params2.capacity} cars, peak flow {sec2.q_max:.1f} veh/h")

# speeds fall as the section fills; the exponential law can mimic the
# linear one or bend differently depending on (beta, gamma)
counts = np.arange(1, 19)
linear = [linear_speed(int(n), params1) for n in counts]
gentle = [exponential_speed(int(n), 100.0, 19.0, 1.0) for n in counts]
sharp = [exponential_speed(int(n), 100.0, 10.0, 2.0) for n in counts]

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
ax1.plot(counts, linear, "o-", label="linear")
ax1.plot(counts, gentle, "s--", label="exponential, beta=19 gamma=1")
ax1.plot(counts, sharp, "^:", label="exponential, beta=10 gamma=2")
ax1.set_xlabel("cars on the section")
ax1.set_ylabel("speed (km/h)")
ax1.set_title("speed laws")
ax1.legend()

# the flow law is a parabola; demand rides its rising branch and then
# saturates, supply is flat and then rides the falling branch
all_counts = np.arange(0, 19)
ax2.plot(all_counts, flow_profile(sec1), "o-", label="flow")
ax2.plot(all_counts, demand_profile(sec1), "--", label="demand")
ax2.plot(all_counts, supply_profile(sec1), ":", label="supply")
ax2.set_xlabel("cars on the section")
ax2.set_ylabel("veh/h")
ax2.set_title("flow, demand and supply (section 1)")
ax2.legend()

fig.tight_layout()
fig.savefig(OUT / "fundamental_diagrams.png", dpi=130)
print(f"wrote {OUT / 'fundamental_diagrams.png'}")

# fitting the exponential law through two measured (count, speed) points
# recovers its parameters
beta, gamma = 14.0, 1.6
a, b = 5, 15
va = exponential_speed(a, 100.0, beta, gamma)
vb = exponential_speed(b, 100.0, beta, gamma)
beta_fit, gamma_fit = fit_beta_gamma(100.0, a, va, b, vb)
print(f"fit through ({a}, {va:.2f}) and ({b}, {vb:.2f}): "
      f"beta {beta_fit:.6f} (true {beta}), gamma {gamma_fit:.6f} (true {gamma})")

diagram = FundamentalDiagram(params1, Exponential(beta_fit, gamma_fit))
print(f"resulting model: {diagram.model}")
