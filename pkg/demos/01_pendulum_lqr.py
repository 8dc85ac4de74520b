# %% [markdown]
# # Cart-pole plant and LQR design
#
# Linearize the inverted pendulum on a cart about the upright position,
# sample it with a zero-order hold at 10 ms and design the state feedback.

# %%
import numpy as np

from vcinet.plant import (
    PENDULUM_Q,
    PENDULUM_R,
    PUBLISHED_GAIN,
    PendulumParams,
    lqr_design,
    pendulum_continuous,
    pendulum_plant,
)

params = PendulumParams()
a_c, b_c = pendulum_continuous(params)
print("continuous poles:", np.round(np.linalg.eigvals(a_c), 3))

# %% [markdown]
# One pole sits in the right half plane, so the open loop is unstable.
# After sampling the same pole lies outside the unit circle.

# %%
plant = pendulum_plant(params)
print("discrete poles:", np.round(np.abs(np.linalg.eigvals(plant.a)), 4))

# %% [markdown]
# LQR with the benchmark weights. The package uses the law `u = L x`, so the
# minus sign lives inside `L`.

# %%
design = lqr_design(plant.a, plant.b, PENDULUM_Q, PENDULUM_R)
print("L =", np.round(design.gain, 3))
print("reference gain (u = -K x convention):", PUBLISHED_GAIN)
print("closed-loop spectral radius:",
      round(max(abs(np.linalg.eigvals(plant.a + plant.b @ design.gain))), 4))
