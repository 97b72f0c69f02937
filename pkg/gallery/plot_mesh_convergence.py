"""
Mesh refinement on Smith-Hutton
===============================

The standard benchmark has ``alpha = 1000``, so the inlet jump is thinner
than any practical mesh. The pointwise error stays near one on every grid
and only the mean error shows convergence.
"""

import matplotlib.pyplot as plt
import numpy as np

from dstream import SchemeConfig, SolveConfig, exact_field, make_problem, solve
from dstream.benchmarks import SMITH_HUTTON_LADDER

schemes = {
    "Upwind": (SchemeConfig.upwind(), SolveConfig()),
    "DStreaM R1": (SchemeConfig.dstream(1), SolveConfig()),
    "DStreaM R3 limited": (SchemeConfig.dstream(3, limited=True), SolveConfig()),
    "Min-Mod": (SchemeConfig.tvd("minmod"), SolveConfig(alpha=0.8)),
}

#%%
# Errors and iteration counts over the ladder.

h = []
l1 = {k: [] for k in schemes}
linf = {k: [] for k in schemes}
for nx, ny in SMITH_HUTTON_LADDER:
    problem = make_problem("smith-hutton", nx, ny)
    exact = exact_field(problem).values
    h.append(problem.grid.delta)
    for name, (scheme, cfg) in schemes.items():
        field, report = solve(problem, scheme, cfg=cfg)
        err = np.abs(field.values - exact)
        l1[name].append(err.mean())
        linf[name].append(err.max())
        print(f"{nx:4d}x{ny:<4d} {name:>20}: {report.iterations:4d} it, "
              f"max {err.max():.3f}, mean {err.mean():.4f}")

#%%

fig, (a, b) = plt.subplots(1, 2, figsize=(11, 4))
for name in schemes:
    a.loglog(h, l1[name], "o-", label=name)
    b.semilogx(h, linf[name], "o-", label=name)
a.set_xlabel("h")
a.set_ylabel("mean |error|")
b.set_xlabel("h")
b.set_ylabel("max |error|")
a.legend()
fig.tight_layout()
plt.show()
