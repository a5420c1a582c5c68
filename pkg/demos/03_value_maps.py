# %% [markdown]
# # Norm, time and horizon as functions of each other
#
# One mode with b = 1/2, y0 = 1, z_d = 0 and T = 1 has closed forms for every
# map, which makes it a good place to see what each solver returns.
#
# | map | closed form |
# |-----|-------------|
# | r(M, tau) | max(0, 1 - M (T - tau) / 2) |
# | M(tau, r) | 2 (1 - r) / (T - tau) |
# | tau(M, r) | T - 2 (1 - r) / M |
# | M^tau | 2 / (T - tau) |
# | T_M | 2 / M |
# | M_T | 2 / T |

# %%
import math

import numpy as np

from octl import ModelConfig, build_model, m_tau, solve_nocp, solve_np, solve_tocp, solve_tp

model = build_model(ModelConfig(num_modes=1, omega=((0.0, math.pi / 2),)))
one, zero = np.array([1.0]), np.array([0.0])

rows = [
    ("M(0, 0.5)", solve_np(model, one, zero, 0.0, 0.5), 1.0),
    ("tau(2, 0.5)", solve_tp(model, one, zero, 2.0, 0.5), 0.5),
    ("M^0.5", m_tau(model, one, zero, 0.5), 4.0),
    ("T_M at M=0.5", solve_tocp(model, one, 0.5), 4.0),
    ("M_T at T=4", solve_nocp(model, one, 4.0), 0.5),
]
for name, res, exact in rows:
    lo, hi = res.bracket
    print(f"{name:14s} {res.value:.6f}  exact {exact:.6f}  bracket width {hi - lo:.1e}  "
          f"probes {res.probe_count}")

# %% [markdown]
# Each value comes from bisection on a monotone yes/no question ("does bound
# M reach the ball?"), answered by the conditional-gradient solver with a
# duality certificate so that most probes stop after a few iterations.  The
# maps invert each other: the minimal time for bound M_T is T again.

# %%
M_T = solve_nocp(model, one, 1.5).value
print("T_{M_T} for T = 1.5:", solve_tocp(model, one, M_T).value)
