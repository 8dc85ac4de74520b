# %% [markdown]
# # Mean-square stability of the networked loop
#
# With stationary weights the packet is a linear map of the plant state and
# the still-pending inputs. The loop becomes a jump linear system driven by
# the buffer age; its mean-square stability is a spectral radius test.

# %%
import numpy as np

from vcinet.network import DelayModel, truncated_weights
from vcinet.numerics import stationary_distribution
from vcinet.plant import PENDULUM_Q, PENDULUM_R, lqr_gain, pendulum_plant
from vcinet.stability import closed_loop_modes, moment_iteration_oracle, mss_check
from vcinet.vci import build_augmented_gain, build_transition_matrix

plant = pendulum_plant()
gain = lqr_gain(plant.a, plant.b, PENDULUM_Q, PENDULUM_R)
n_seq = 2


def verdict(delay):
    p = build_transition_matrix(truncated_weights(delay, n_seq))
    l_tilde = build_augmented_gain(plant, gain, stationary_distribution(p), n_seq)
    sys = closed_loop_modes(plant, l_tilde, n_seq, p)
    return mss_check(sys), moment_iteration_oracle(sys, steps=2000)

# %% [markdown]
# Sweep the loss probability: the loop survives moderate loss and breaks down
# when nearly every packet is dropped.

# %%
for loss in (0.0, 0.2, 0.5, 0.8, 0.9, 0.99):
    v, oracle = verdict(DelayModel([0.9, 0.07, 0.03], loss))
    print(f"loss {loss:4.2f}: radius {v.radius:.4f} mss={v.is_mss} oracle={oracle}")
