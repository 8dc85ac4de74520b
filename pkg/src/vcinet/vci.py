"""Sequence-based controller built on virtual control inputs.

The actuator's buffer age ``theta`` (steps since the buffered packet was
generated, ``N + 1`` meaning "default input") is a Markov chain.  The
controller keeps a probability vector over ``theta``, turns it into the
expected input the actuator will apply at each future step, and rolls the
plant forward in expectation to fill the packet.

Past packets are kept in ``eta``: the still-applicable tails of the last
``N`` packets, newest packet first.  For ``N = 3`` and one input::

    eta = [u(k|k-1), u(k+1|k-1), u(k+2|k-1), u(k|k-2), u(k+1|k-2), u(k|k-3)]
"""

import numpy as np

from .actuator import Packet
from .numerics import as_matrix, stationary_distribution

__all__ = [
    "DegenerateWeightsError",
    "build_transition_matrix",
    "predict_weights",
    "stationary_weights",
    "wonham_correct",
    "wonham_update",
    "expected_virtual_input",
    "eta_size",
    "eta_slot",
    "advance_eta",
    "VciController",
    "build_augmented_gain",
]


class DegenerateWeightsError(ValueError):
    """Every age that could still be served has probability zero."""


def build_transition_matrix(q):
    """Transition matrix of the buffer age for delay weights ``q`` (length N+2).

    Row ``i`` has ``q[j]`` for ``j <= i``, the complement ``1 - sum(q[:i+1])``
    on the superdiagonal, and zeros beyond (the age grows by at most one).
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.size < 2 or np.any(q < 0) or abs(q.sum() - 1.0) > 1e-9:
        raise ValueError("q must be a probability vector of length N + 2")
    k = q.size
    p = np.tril(np.tile(q, (k, 1)))
    for i in range(k - 1):
        # remainder instead of 1 - cumsum keeps each row summing to 1
        p[i, i + 1] = max(0.0, 1.0 - p[i, : i + 1].sum())
    return p


def predict_weights(p, alpha, m):
    """Age probabilities ``m`` steps ahead restricted to ages that stay servable.

    ``(P^m)' alpha`` is truncated to its first ``N + 2 - m`` entries and
    renormalized; the dropped entries belong to packets not sent yet.
    """
    p = np.asarray(p, dtype=float)
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    k = p.shape[0]
    if alpha.size != k:
        raise ValueError(f"alpha must have length {k}")
    if not 0 <= m <= k - 2:
        raise ValueError(f"prediction offset must lie in [0, {k - 2}]")
    pred = np.linalg.matrix_power(p.T, m) @ alpha
    return _renormalize(pred[: k - m])


def _renormalize(v):
    total = v.sum()
    if not total > 0:
        raise DegenerateWeightsError("predicted age distribution has no mass left")
    return v / total


def _or_default(v):
    # No servable age left: the actuator can only fall back to its default.
    total = v.sum()
    if total > 0:
        return v / total
    out = np.zeros_like(v)
    out[-1] = 1.0
    return out


def stationary_weights(alpha_inf, n_seq):
    """``[predict_weights(P, alpha_inf, j) for j in range(N)]`` without ``P``.

    ``alpha_inf`` is a fixed point of ``P'``, so prediction only truncates.
    Where truncation leaves no mass, all weight goes to the default input.
    Empty when ``n_seq == 0``.
    """
    alpha_inf = np.asarray(alpha_inf, dtype=float).reshape(-1)
    if alpha_inf.size != n_seq + 2:
        raise ValueError("alpha_inf must have length n_seq + 2")
    return [_or_default(alpha_inf[: n_seq + 2 - j]) for j in range(n_seq)]


def _log_likelihoods(residuals, cov, rel_tol=1e-9):
    """Gaussian log-densities of residual rows, allowing singular ``cov``.

    Residual components outside the support of ``cov`` make a candidate
    impossible (log-density ``-inf``).
    """
    w, v = np.linalg.eigh(cov)
    keep = w > rel_tol * max(w.max(), 0.0)
    if not keep.any() or w.max() <= 0:
        raise ValueError("process noise covariance is zero; the filter needs a density")
    vs, ws = v[:, keep], w[keep]
    coords = residuals @ vs
    off = residuals - coords @ vs.T
    scale = max(1.0, float(np.abs(residuals).max()))
    impossible = np.linalg.norm(off, axis=1) > rel_tol * scale
    logp = -0.5 * np.sum(coords**2 / ws, axis=1)
    logp -= 0.5 * (ws.size * np.log(2 * np.pi) + np.sum(np.log(ws)))
    logp[impossible] = -np.inf
    return logp


def wonham_correct(belief, x_now, x_prev, candidates, plant):
    """Measurement update of the belief over the previous step's buffer age.

    ``candidates[i]`` is the input the actuator applied at the previous step
    if the age then was ``i``.  Returns ``None`` when every candidate is
    ruled out (zero or underflowing likelihoods).
    """
    belief = np.asarray(belief, dtype=float).reshape(-1)
    cands = np.atleast_2d(np.asarray(candidates, dtype=float))
    if cands.shape[0] != belief.size:
        cands = cands.reshape(belief.size, -1)
    base = np.asarray(x_now, dtype=float) - plant.a @ np.asarray(x_prev, dtype=float)
    residuals = base[None, :] - cands @ plant.b.T
    logp = _log_likelihoods(residuals, plant.noise_cov)
    with np.errstate(divide="ignore"):
        logpost = np.log(belief) + logp
    top = logpost.max()
    if not np.isfinite(top):
        return None
    post = np.exp(logpost - top)
    return post / post.sum()


def wonham_update(belief, x_now, x_prev, candidates, plant, p):
    """Filter step: likelihood correction, then one-step prediction through ``P``.

    Falls back to prediction alone when the correction returns ``None``.
    """
    post = wonham_correct(belief, x_now, x_prev, candidates, plant)
    if post is None:
        post = np.asarray(belief, dtype=float).reshape(-1)
    pred = np.asarray(p, dtype=float).T @ post
    return pred / pred.sum()


def expected_virtual_input(alpha, candidates, u_d):
    """Mean of the Dirac mixture over ``candidates`` plus the default input."""
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    cands = np.asarray(candidates, dtype=float)
    if cands.ndim == 1:
        cands = cands[:, None]
    if alpha.size != cands.shape[0] + 1:
        raise ValueError("alpha needs exactly one more entry than candidates")
    u_d = np.asarray(u_d, dtype=float).reshape(-1)
    return alpha[:-1] @ cands + alpha[-1] * u_d


def eta_size(n, n_seq):
    return n * n_seq * (n_seq + 1) // 2


def eta_slot(n_seq, age, offset):
    """Block index in ``eta`` of ``u(k+offset | k-age)``."""
    if not (1 <= age <= n_seq and 0 <= offset <= n_seq - age):
        raise IndexError(f"no slot for age {age}, offset {offset} with N={n_seq}")
    return (age - 1) * (n_seq + 1) - (age - 1) * age // 2 + offset


def advance_eta(eta, inputs, n_seq):
    """Next-step ``eta`` after sending ``inputs``: drop consumed heads, push the new tail."""
    inputs = np.asarray(inputs, dtype=float)
    n = inputs.shape[1]
    old = np.asarray(eta, dtype=float).reshape(-1, n) if n_seq else np.zeros((0, n))
    new = np.empty_like(old)
    if n_seq:
        new[: n_seq] = inputs[1:]
    for age in range(2, n_seq + 1):
        for j in range(n_seq - age + 1):
            new[eta_slot(n_seq, age, j)] = old[eta_slot(n_seq, age - 1, j + 1)]
    return new.reshape(-1)


def _rollout(a, b, gain, weights, u_d, x, eta, n_seq):
    """Packet entries for state ``x`` given past tails ``eta`` and age weights."""
    n = b.shape[1]
    held = eta.reshape(-1, n)
    out = np.empty((n_seq + 1, n))
    out[0] = gain @ x
    ex = x
    for m in range(1, n_seq + 1):
        j = m - 1
        cands = [out[j]] + [held[eta_slot(n_seq, i, j)] for i in range(1, n_seq - j + 1)]
        eu = expected_virtual_input(weights[j], cands, u_d)
        ex = a @ ex + b @ eu
        out[m] = gain @ ex
    return out


class VciController:
    """Virtual-control-input controller with its packet history.

    Parameters
    ----------
    plant : PlantModel
    gain : (n, s) array_like
        Feedback gain of the law ``u = gain @ x`` designed without the network.
    transition : (N+2, N+2) array_like
        Buffer-age transition matrix; fixes ``N``.
    default_input : array_like, optional
        Actuator default, zeros if omitted.
    mode : {"stationary", "filtered"}
        Use the stationary age distribution, or track it with the Wonham filter.
    """

    def __init__(self, plant, gain, transition, default_input=None, mode="stationary"):
        if mode not in ("stationary", "filtered"):
            raise ValueError(f"unknown weight mode {mode!r}")
        self.plant = plant
        self.gain = as_matrix(gain, "gain")
        self.transition = np.asarray(transition, dtype=float)
        self.n_seq = self.transition.shape[0] - 2
        n = plant.input_dim
        if self.gain.shape != (n, plant.state_dim):
            raise ValueError("gain shape does not match the plant")
        self.default_input = (np.zeros(n) if default_input is None
                              else np.asarray(default_input, dtype=float).reshape(n))
        self.mode = mode
        self.alpha_inf = stationary_distribution(self.transition)
        self._stationary = stationary_weights(self.alpha_inf, self.n_seq)
        self.reset()

    def reset(self):
        n = self.plant.input_dim
        self.eta = np.zeros(eta_size(n, self.n_seq))
        # one-step prediction from an empty buffer
        self.belief = self.transition[-1].copy()
        self._prev = None

    @property
    def weights(self):
        """Age weights for offsets ``0 .. N-1`` used by the next packet."""
        if self.mode == "stationary":
            return self._stationary
        p_t = self.transition.T
        out, pred = [], self.belief
        for j in range(self.n_seq):
            out.append(_or_default(pred[: self.n_seq + 2 - j]))
            pred = p_t @ pred
        return out

    def propose(self, x, eta=None):
        """Packet entries for state ``x`` without touching the controller state."""
        x = np.asarray(x, dtype=float).reshape(-1)
        eta = self.eta if eta is None else np.asarray(eta, dtype=float).reshape(-1)
        return _rollout(self.plant.a, self.plant.b, self.gain, self.weights,
                        self.default_input, x, eta, self.n_seq)

    def _filter(self, x):
        if self._prev is None:
            return
        x_prev, eta_prev, inputs_prev = self._prev
        n = self.plant.input_dim
        held = eta_prev.reshape(-1, n)
        cands = [inputs_prev[0]]
        cands += [held[eta_slot(self.n_seq, i, 0)] for i in range(1, self.n_seq + 1)]
        cands.append(self.default_input)
        self.belief = wonham_update(self.belief, x, x_prev, np.array(cands),
                                    self.plant, self.transition)

    def generate_sequence(self, x, k=0):
        """Compute, record and return the packet for step ``k``."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if self.mode == "filtered":
            self._filter(x)
        inputs = self.propose(x)
        self._prev = (x, self.eta, inputs)
        self.eta = advance_eta(self.eta, inputs, self.n_seq)
        return Packet(k, inputs)


def build_augmented_gain(plant, gain, alpha_inf, n_seq, u_d=None):
    """Matrix ``Lt`` with ``packet = Lt @ [x; eta]`` for stationary weights.

    Built column by column from the rollout applied to unit vectors, which
    is exact because the rollout is linear when the default input is zero.
    """
    n, s = plant.input_dim, plant.state_dim
    if u_d is not None and np.any(np.asarray(u_d, dtype=float) != 0):
        raise ValueError("augmented gain needs a zero default input")
    gain = as_matrix(gain, "gain")
    weights = stationary_weights(alpha_inf, n_seq)
    d = eta_size(n, n_seq)
    zero_u = np.zeros(n)
    cols = []
    for e in np.eye(s + d):
        out = _rollout(plant.a, plant.b, gain, weights, zero_u, e[:s], e[s:], n_seq)
        cols.append(out.reshape(-1))
    return np.column_stack(cols)
