"""Closed-loop episodes over the lossy link and paired Monte Carlo batches."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from collections import defaultdict

import numpy as np

from .actuator import ActuatorBuffer, Packet
from .network import LOST, DelayModel, sample_delay, truncated_weights
from .plant import sample_noise, step
from .vci import VciController, build_transition_matrix

__all__ = [
    "CONTROLLERS",
    "EpisodeConfig",
    "EpisodeResult",
    "McStats",
    "run_episode",
    "ol_sequence",
    "quadratic_cost",
    "monte_carlo",
    "episode_seed",
]

CONTROLLERS = ("cs", "ol", "vci", "vci-filtered")


@dataclass(frozen=True, eq=False)
class EpisodeConfig:
    """Everything one episode depends on.

    ``controller`` is one of ``cs`` (direct link, no network), ``ol``
    (open-loop rollout sequences), ``vci`` (stationary age weights) and
    ``vci-filtered`` (Wonham-filtered age weights).
    """

    plant: object
    delay: DelayModel
    gain: np.ndarray
    x0: np.ndarray
    q: np.ndarray
    r: np.ndarray
    controller: str = "vci"
    n_seq: int = 2
    default_input: np.ndarray = None
    horizon: int = 150
    seed: int = 0

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise ValueError(f"controller must be one of {CONTROLLERS}, got {self.controller!r}")
        if self.horizon < 1:
            raise ValueError("horizon must be at least one step")
        if self.n_seq < 0:
            raise ValueError("n_seq must be nonnegative")
        s, n = self.plant.state_dim, self.plant.input_dim
        gain = np.atleast_2d(np.asarray(self.gain, dtype=float))
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        if gain.shape != (n, s) or x0.shape != (s,):
            raise ValueError("gain or x0 does not match the plant dimensions")
        u_d = (np.zeros(n) if self.default_input is None
               else np.asarray(self.default_input, dtype=float).reshape(n))
        object.__setattr__(self, "gain", gain)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "q", np.atleast_2d(np.asarray(self.q, dtype=float)))
        object.__setattr__(self, "r", np.atleast_2d(np.asarray(self.r, dtype=float)))
        object.__setattr__(self, "default_input", u_d)


@dataclass(eq=False)
class EpisodeResult:
    states: np.ndarray    # (K, s), x_0 .. x_{K-1}
    inputs: np.ndarray    # (K, n), applied inputs
    theta: np.ndarray     # (K,), buffer age; 0 for the direct link
    step_costs: np.ndarray
    final_state: np.ndarray

    @property
    def cost(self):
        return float(self.step_costs.sum())


@dataclass(eq=False)
class McStats:
    controller: str
    costs: np.ndarray = field(repr=False)

    @property
    def runs(self):
        return self.costs.size

    @property
    def mean(self):
        return float(self.costs.mean())

    @property
    def std_error(self):
        if self.costs.size < 2:
            return 0.0
        return float(self.costs.std(ddof=1) / np.sqrt(self.costs.size))


def ol_sequence(gain, plant, x, n_seq):
    """Open-loop rollout ``u(k+m|k) = L (A + B L)^m x``, ignoring earlier packets."""
    x = np.asarray(x, dtype=float).reshape(-1)
    out = np.empty((n_seq + 1, plant.input_dim))
    out[0] = gain @ x
    for m in range(1, n_seq + 1):
        x = plant.a @ x + plant.b @ out[m - 1]
        out[m] = gain @ x
    return out


def quadratic_cost(result, q, r):
    """Sum of ``x'Qx + u'Ru`` over the recorded steps."""
    q = np.atleast_2d(q)
    r = np.atleast_2d(r)
    xs, us = result.states, result.inputs
    return float(np.einsum("ki,ij,kj->", xs, q, xs) + np.einsum("ki,ij,kj->", us, r, us))


def episode_seed(master_seed, run):
    return int(master_seed) ^ int(run)


def _streams(seed):
    noise, delay, scratch = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(noise), np.random.default_rng(delay),
            np.random.default_rng(scratch))


def run_episode(cfg):
    """Simulate ``cfg.horizon`` steps and record the trajectory.

    Per step: measure ``x_k``, send the packet (or apply ``L x_k`` directly
    for ``cs``), deliver every packet due at ``k``, actuate, then step the
    plant with fresh noise.
    """
    plant, n_seq = cfg.plant, cfg.n_seq
    s, n, horizon = plant.state_dim, plant.input_dim, cfg.horizon
    noise_rng, delay_rng, _ = _streams(cfg.seed)

    controller = None
    if cfg.controller in ("vci", "vci-filtered"):
        p = build_transition_matrix(truncated_weights(cfg.delay, n_seq))
        mode = "filtered" if cfg.controller == "vci-filtered" else "stationary"
        controller = VciController(plant, cfg.gain, p, cfg.default_input, mode)
    buffer = ActuatorBuffer(n_seq, cfg.default_input)
    in_flight = defaultdict(list)

    states = np.empty((horizon, s))
    inputs = np.empty((horizon, n))
    theta = np.zeros(horizon, dtype=int)
    x = cfg.x0.copy()
    for k in range(horizon):
        states[k] = x
        if cfg.controller == "cs":
            u = cfg.gain @ x
        else:
            if controller is None:
                packet = Packet(k, ol_sequence(cfg.gain, plant, x, n_seq))
            else:
                packet = controller.generate_sequence(x, k)
            delay = sample_delay(cfg.delay, delay_rng)
            if delay is not LOST:
                in_flight[k + delay].append(packet)
            for arrived in in_flight.pop(k, ()):
                buffer.offer(arrived)
            u, theta[k] = buffer.actuate(k)
        inputs[k] = u
        x = step(plant, x, u, sample_noise(plant, noise_rng))

    step_costs = (np.einsum("ki,ij,kj->k", states, cfg.q, states)
                  + np.einsum("ki,ij,kj->k", inputs, cfg.r, inputs))
    return EpisodeResult(states, inputs, theta, step_costs, x)


def _episode_cost(cfg):
    return run_episode(cfg).cost


def monte_carlo(cfg, runs, controllers=None, workers=1):
    """Paired Monte Carlo over ``runs`` episodes per controller.

    Run ``r`` uses seed ``cfg.seed ^ r`` for every controller, so noise and
    delay draws are shared across controllers.  Results do not depend on
    ``workers``.

    Returns
    -------
    dict
        Controller name to :class:`McStats`.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    controllers = (cfg.controller,) if controllers is None else tuple(controllers)
    jobs = [replace(cfg, controller=c, seed=episode_seed(cfg.seed, r))
            for c in controllers for r in range(runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            costs = list(pool.map(_episode_cost, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        costs = [_episode_cost(job) for job in jobs]
    costs = np.array(costs).reshape(len(controllers), runs)
    return {c: McStats(c, costs[i]) for i, c in enumerate(controllers)}
