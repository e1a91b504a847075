"""
How good is the decomposition?
==============================

The tandem solver never solves the joint two-dimensional chain; it
couples two one-dimensional chains through a scalar rate.  For small
capacities the exact joint chain can be solved directly, which turns
the approximation error into a number instead of a hope.
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
    comparison_report,
    joint_tandem_stationary,
    solve_bisection,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# four-car sections keep the joint chain at 25 states
mini1 = FundamentalDiagram(SectionParams(4.0 / 180.0, 100.0, 180.0))
mini2 = FundamentalDiagram(SectionParams(4.0 / 180.0, 50.0, 180.0))
print(f"mini pair: capacities {mini1.capacity}/{mini2.capacity}, "
      f"downstream peak {mini2.q_max:.1f} veh/h")

multiples = np.linspace(0.01, 1.5, 25)
tv1 = []
tv2 = []
for mult in multiples:
    report = comparison_report(TandemConfig(mini1, mini2, float(mult * mini2.q_max)))
    tv1.append(report["tv_p1"])
    tv2.append(report["tv_p2"])

fig, axes = plt.subplots(1, 3, figsize=(15, 4.2))
axes[0].plot(multiples, tv1, "o-", label="upstream marginal", ms=3.5)
axes[0].plot(multiples, tv2, "s-", label="downstream marginal", ms=3.5)
axes[0].set_xlabel("arrival rate / downstream peak flow")
axes[0].set_ylabel("total variation distance")
axes[0].set_title("decomposition error vs load")
axes[0].legend()

# at heavy load the exact joint mass migrates to the full-full corner;
# the decomposition keeps the product-like shape of its construction
lam = 1.5 * mini2.q_max
exact = joint_tandem_stationary(TandemConfig(mini1, mini2, lam))
approx = solve_bisection(TandemConfig(mini1, mini2, lam)).joint
for ax, matrix, title in ((axes[1], exact, "exact joint"),
                          (axes[2], approx, "decomposition joint")):
    im = ax.imshow(matrix, origin="lower", cmap="viridis",
                   vmin=0.0, vmax=float(exact.max()))
    ax.set_xlabel("downstream count")
    ax.set_ylabel("upstream count")
    ax.set_title(f"{title} at {lam:.0f} veh/h")
    fig.colorbar(im, ax=ax, shrink=0.85)

fig.tight_layout()
fig.savefig(OUT / "oracle_comparison.png", dpi=130)
print(f"wrote {OUT / 'oracle_comparison.png'}")

# the benchmark pair (18-car sections, 361 joint states) is still easy
sec1 = FundamentalDiagram(SectionParams(0.1, 100.0, 180.0))
sec2 = FundamentalDiagram(SectionParams(0.1, 50.0, 180.0))
for lam in (1000.0, 2000.0, 3000.0):
    report = comparison_report(TandemConfig(sec1, sec2, lam))
    print(f"benchmark lambda {lam:6.0f}: TV {report['tv_p1']:.4f} / "
          f"{report['tv_p2']:.4f}, transfer rate {report['theta_decomposition']:7.1f} "
          f"(decomposition) vs {report['theta_joint']:7.1f} (exact)")
