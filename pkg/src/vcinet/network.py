"""Controller-to-actuator link: i.i.d. packet delays with random loss."""

from dataclasses import dataclass

import numpy as np

__all__ = ["LOST", "DelayModel", "truncated_weights", "sample_delay", "sample_delays"]

#: Returned by :func:`sample_delay` for a dropped packet.
LOST = None


@dataclass(frozen=True, eq=False)
class DelayModel:
    """Delay distribution over ``{0, ..., len(pmf) - 1}`` steps plus loss.

    ``pmf`` describes delays of packets that are not lost; a packet is
    dropped with probability ``loss_prob`` independently of its delay.
    """

    pmf: np.ndarray
    loss_prob: float = 0.0

    def __post_init__(self):
        pmf = np.atleast_1d(np.asarray(self.pmf, dtype=float))
        if pmf.ndim != 1 or pmf.size == 0:
            raise ValueError("pmf must be a nonempty 1-d sequence")
        if np.any(pmf < 0) or abs(pmf.sum() - 1.0) > 1e-9:
            raise ValueError(f"pmf must be nonnegative and sum to 1, sums to {pmf.sum()!r}")
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError("loss_prob must lie in [0, 1]")
        object.__setattr__(self, "pmf", pmf)
        object.__setattr__(self, "loss_prob", float(self.loss_prob))
        object.__setattr__(self, "_cdf", np.cumsum(pmf))

    @property
    def max_delay(self):
        return self.pmf.size - 1


def truncated_weights(model, n_seq):
    """Delay weights ``q`` of length ``n_seq + 2`` for the buffer-age chain.

    ``q[i]`` for ``i <= n_seq`` is the probability that a packet arrives
    exactly ``i`` steps after it was sent. The last entry collects lost
    packets and every delay beyond ``n_seq``: such a packet never carries
    an input that is still applicable when it arrives.
    """
    if n_seq < 0:
        raise ValueError("n_seq must be nonnegative")
    q = np.zeros(n_seq + 2)
    k = min(model.pmf.size, n_seq + 1)
    q[:k] = (1.0 - model.loss_prob) * model.pmf[:k]
    q[-1] = max(0.0, 1.0 - q[:-1].sum())
    return q


def sample_delay(model, rng):
    """One packet delay in steps, or :data:`LOST`."""
    if rng.random() < model.loss_prob:
        return LOST
    idx = int(np.searchsorted(model._cdf, rng.random(), side="right"))
    return min(idx, model.max_delay)


def sample_delays(model, rng, size):
    """Vectorized draws; lost packets are encoded as ``-1``.

    Consumes the generator differently from repeated :func:`sample_delay`
    calls, so don't mix the two on one stream when reproducibility matters.
    """
    lost = rng.random(size) < model.loss_prob
    idx = np.searchsorted(model._cdf, rng.random(size), side="right")
    out = np.minimum(idx, model.max_delay)
    out[lost] = -1
    return out
