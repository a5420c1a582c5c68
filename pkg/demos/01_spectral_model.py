# %% [markdown]
# # The spectral model
#
# The state is the vector of sine coefficients of the wave function on
# (0, pi).  Mode k rotates at frequency k^2, and the control enters through
# the coupling matrix B, which is the control region restricted to the
# first N modes.

# %%
import math

import numpy as np

from octl import ModelConfig, build_model, coupling_matrix, duhamel_interval

model = build_model(ModelConfig(num_modes=4, omega=((0.0, math.pi / 2),)))
print("eigenvalues:", model.eigenvalues)
print("coupling matrix:\n", np.round(model.coupling, 4))

# %% [markdown]
# B is a compression of a projection, so its spectrum lies in [0, 1].  A
# control region covering the whole domain gives the identity.

# %%
print("spectrum of B:", np.round(np.linalg.eigvalsh(model.coupling), 4))
print("full domain:", np.allclose(coupling_matrix(((0.0, math.pi),), 4), np.eye(4)))

# %% [markdown]
# Without control the flow is a pure rotation of each mode, so norms are
# preserved.  With a constant control on an interval the Duhamel integral has
# a closed form, so splitting the interval changes nothing.

# %%
y0 = np.array([1.0, 0.5j, 0.0, -0.25])
print("norm before/after free flow:", np.linalg.norm(y0),
      np.linalg.norm(model.free_propagate(y0, 3.7)))

u = np.array([0.3, -0.2j, 0.1, 0.0])
whole = duhamel_interval(y0, u, 0.0, 0.8, model)
halves = duhamel_interval(duhamel_interval(y0, u, 0.0, 0.4, model), u, 0.4, 0.8, model)
print("one step vs two half steps:", np.abs(whole - halves).max())
