# %% [markdown]
# # Virtual control inputs
#
# The controller predicts the inputs the actuator will really apply by
# mixing the candidates still held in earlier packets, weighted by the
# predicted buffer age. A tiny scalar example makes the arithmetic visible.

# %%
import numpy as np

from vcinet.plant import PlantModel
from vcinet.vci import VciController, build_transition_matrix, predict_weights

p = build_transition_matrix([0.5, 0.3, 0.2])
ctrl = VciController(PlantModel([[1.0]], [[1.0]]), [[-0.5]], p)
print("stationary age distribution:", ctrl.alpha_inf)
print("weights one step ahead:", predict_weights(p, ctrl.alpha_inf, 1))

# %% [markdown]
# Suppose the previous packet promised `0.8` for the current step. With
# `x = 1` the fresh input is `-0.5`; the expected applied input is
# `0.5 * -0.5 + 0.4 * 0.8 + 0.1 * 0 = 0.07`, the predicted state `1.07`
# and the next entry `-0.535`.

# %%
ctrl.eta = np.array([0.8])
print("packet:", ctrl.generate_sequence([1.0]).inputs[:, 0])

# %% [markdown]
# The filtered variant tracks the age belief online from state measurements.

# %%
rng = np.random.default_rng(1)
plant = PlantModel([[1.05]], [[1.0]], [[0.01]])
filt = VciController(plant, [[-0.6]], build_transition_matrix([0.4, 0.3, 0.2, 0.1]),
                     mode="filtered")
x = np.array([1.0])
for k in range(5):
    packet = filt.generate_sequence(x, k)
    x = plant.a @ x + plant.b @ packet.inputs[0] + rng.normal(scale=0.1, size=1)
    print(k, "belief", np.round(filt.belief, 3))
