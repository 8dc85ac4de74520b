# %% [markdown]
# # Delays, packet sequences and the actuator buffer
#
# Each step the controller sends a packet of `N + 1` inputs. The link delays
# or drops it; the actuator keeps the newest packet and applies the entry
# matching its age. Age `N + 1` means the buffer ran dry and the default
# input is used.

# %%
from collections import defaultdict

import numpy as np

from vcinet.actuator import ActuatorBuffer, Packet
from vcinet.network import DelayModel, sample_delays, truncated_weights
from vcinet.numerics import stationary_distribution
from vcinet.vci import build_transition_matrix

n_seq = 2
delay = DelayModel([0.3, 0.25, 0.2, 0.15, 0.1], loss_prob=0.1)
q = truncated_weights(delay, n_seq)
p = build_transition_matrix(q)
print("q =", np.round(q, 4))
print("P =\n", np.round(p, 4))

# %% [markdown]
# Drive the buffer with sampled delays and compare the age histogram to the
# stationary distribution of `P`.

# %%
rng = np.random.default_rng(0)
delays = sample_delays(delay, rng, 50_000)
buf = ActuatorBuffer(n_seq, [0.0])
arrivals = defaultdict(list)
ages = []
for k, d in enumerate(delays):
    if d >= 0:
        arrivals[k + d].append(Packet(k, np.zeros((n_seq + 1, 1))))
    for packet in arrivals.pop(k, ()):
        buf.offer(packet)
    ages.append(buf.actuate(k)[1])

hist = np.bincount(ages, minlength=n_seq + 2) / len(ages)
alpha = stationary_distribution(p)
print("empirical :", np.round(hist, 4))
print("stationary:", np.round(alpha, 4))
print("total variation:", round(0.5 * np.abs(hist - alpha).sum(), 4))
