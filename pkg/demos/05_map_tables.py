# %% [markdown]
# # Plot-ready tables of the value maps
#
# `sample_map` evaluates a map on a grid; points outside its domain get NaN
# and an error status instead of stopping the sweep.  Set OCTL_THREADS to
# spread the points over threads.

# %%
import math
from pathlib import Path
import tempfile

import numpy as np

from octl import ModelConfig, build_model, sample_map
from octl.cli import emit_map_csv

model = build_model(ModelConfig(num_modes=2, omega=((0.0, math.pi / 2),)))
y0 = np.array([1.0, 0.0])
z_d = np.array([0.0, 0.3j])

out = Path(tempfile.mkdtemp())
for kind, grid in [("r_of_M", np.linspace(0, 2, 9)),
                   ("M_sup_tau", [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]),
                   ("T_of_M", [0.5, 1.0, 2.0, 4.0])]:
    sample = sample_map(kind, grid, model=model, y0=y0, z_d=z_d)
    emit_map_csv(sample, out / f"{kind}.csv")
    print((out / f"{kind}.csv").read_text())
