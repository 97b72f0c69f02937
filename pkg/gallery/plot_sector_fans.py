"""
Sector fans by range
====================

Each range splits every sector of the previous fan in two by inserting the
lattice point of the mediant direction. The selected sector for a given
velocity is the one whose median points most nearly against the flow.
"""

import matplotlib.pyplot as plt
import numpy as np

from dstream import build_fan, select_sector

#%%
# Fan directions for ranges 1 to 5.

fig, axes = plt.subplots(1, 5, figsize=(16, 3.6))
for r, ax in zip(range(1, 6), axes):
    fan = build_fan(r)
    for dx, dy in fan.directions:
        ax.plot([0, dx], [0, dy], color="0.6", lw=0.8)
        ax.plot(dx, dy, "o", ms=3, color="C0")
    ax.set_title(f"range {r}: {len(fan)} sectors")
    ax.set_aspect("equal")
    ax.set_xticks([])
    ax.set_yticks([])
plt.show()

#%%
# Sector picked for the profile flow V = (0.8, 1). At range 5 one edge of the
# chosen triangle lies exactly on the backward characteristic (-4, -5).

u, v = 0.8, 1.0
fig, ax = plt.subplots(figsize=(5, 5))
for r in range(1, 6):
    s = select_sector(build_fan(r), lambda sector: (u, v))
    tri = np.array([(0, 0), s.n1, s.n2, (0, 0)])
    ax.plot(tri[:, 0], tri[:, 1], label=f"R{r}: {s.n1}, {s.n2}")
ax.plot([0, -4], [0, -5], "k--", lw=1, label="backward characteristic")
ax.set_aspect("equal")
ax.legend(fontsize=8)
plt.show()
