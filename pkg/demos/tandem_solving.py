"""
Solving the two-section tandem
==============================

The transfer rate between the sections must reproduce itself through
the upstream throughput, a scalar fixed point.  Bisection always finds
the root because the residual is strictly decreasing and changes sign;
direct self-substitution is faster when it converges but falls into a
two-value cycle once the downstream reacts too strongly.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from roadqueues import (
    FundamentalDiagram,
    SectionParams,
    SolutionMode,
    TandemConfig,
    fixed_point_residual,
    iteration_convergence_check,
    solve_bisection,
    solve_iteration,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

sec1 = FundamentalDiagram(SectionParams(0.1, 100.0, 180.0))
sec2 = FundamentalDiagram(SectionParams(0.1, 50.0, 180.0))

fig, axes = plt.subplots(1, 3, figsize=(15, 4.2))

# the residual changes sign exactly once
cfg = TandemConfig(sec1, sec2, 2000.0)
root = solve_bisection(cfg).transfer_rate
grid = np.linspace(1.0, 2000.0, 300)
axes[0].plot(grid, [fixed_point_residual(float(t), cfg) for t in grid])
axes[0].axhline(0.0, color="gray", lw=0.8)
axes[0].axvline(root, color="red", ls=":", label=f"root {root:.1f}")
axes[0].set_xlabel("transfer rate (veh/h)")
axes[0].set_ylabel("residual (veh/h)")
axes[0].set_title("fixed-point residual at 2000 veh/h arrivals")
axes[0].legend()

# self-substitution at three loads: fast convergence, then cycling
for lam, style in ((1500.0, "o-"), (2000.0, "s-"), (3000.0, "^-")):
    sol = solve_iteration(TandemConfig(sec1, sec2, lam))
    axes[1].plot(range(len(sol.trace)), sol.trace, style,
                 label=f"{lam:.0f} veh/h ({sol.mode.value})", ms=3.5)
    if sol.mode is SolutionMode.OSCILLATORY_AVERAGED:
        print(f"lambda {lam:.0f}: cycle between {sol.adherence[1]:.1f} and "
              f"{sol.adherence[0]:.1f}, reported midpoint {sol.transfer_rate:.1f}")
    else:
        print(f"lambda {lam:.0f}: converged to {sol.transfer_rate:.1f} "
              f"in {len(sol.trace) - 1} steps")
axes[1].set_xlabel("iteration")
axes[1].set_ylabel("iterate (veh/h)")
axes[1].set_title("self-substitution traces")
axes[1].legend()

# the stability statistic against its sufficient bound
lams = np.arange(200.0, 3001.0, 100.0)
stats = []
bounds = []
for lam in lams:
    c = TandemConfig(sec1, sec2, float(lam))
    r = solve_bisection(c).transfer_rate
    check = iteration_convergence_check(r, c)
    stats.append(check.statistic)
    bounds.append(check.bound)
axes[2].plot(lams, stats, label="statistic S at the root")
axes[2].plot(lams, bounds, "--", label="bound rate/lambda")
axes[2].set_xlabel("arrival rate (veh/h)")
axes[2].set_title("sufficient condition for convergence")
axes[2].legend()

fig.tight_layout()
fig.savefig(OUT / "tandem_solving.png", dpi=130)
print(f"wrote {OUT / 'tandem_solving.png'}")

# a full solution bundles rates, distributions and per-section reports
sol = solve_bisection(TandemConfig(sec1, sec2, 1500.0))
print(f"at 1500 veh/h: transfer {sol.transfer_rate:.1f} veh/h, "
      f"exit {sol.exit_rate:.1f} veh/h, "
      f"upstream mean {sol.report1.expected_count:.2f} cars, "
      f"downstream mean {sol.report2.expected_count:.2f} cars")
check = iteration_convergence_check(sol.transfer_rate,
                                    TandemConfig(sec1, sec2, 1500.0))
print(f"at the root: S={check.statistic:.4f} vs bound {check.bound:.4f}, "
      f"sufficient condition satisfied: {check.satisfied}")
