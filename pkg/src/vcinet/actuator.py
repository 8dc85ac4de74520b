"""Actuator-side packet buffer (newest time stamp wins)."""

from dataclasses import dataclass

import numpy as np

__all__ = ["Packet", "ActuatorBuffer", "ClockError"]


class ClockError(ValueError):
    """Actuation requested before the buffered packet was generated."""


@dataclass(frozen=True, eq=False)
class Packet:
    """Control sequence generated at step ``timestamp``.

    ``inputs[m]`` is the input meant for step ``timestamp + m``; there are
    ``N + 1`` rows of dimension ``n``.
    """

    timestamp: int
    inputs: np.ndarray

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=float)
        if inputs.ndim == 1:
            inputs = inputs[:, None]
        if inputs.ndim != 2 or inputs.shape[0] == 0:
            raise ValueError("packet inputs must be a nonempty (N+1, n) array")
        object.__setattr__(self, "inputs", inputs)

    @property
    def n_seq(self):
        return self.inputs.shape[0] - 1


class ActuatorBuffer:
    """Holds the freshest control sequence received so far.

    Parameters
    ----------
    n_seq : int
        Packets carry ``n_seq + 1`` inputs.
    default_input : array_like
        Input applied when nothing applicable is buffered.
    """

    def __init__(self, n_seq, default_input):
        self.n_seq = int(n_seq)
        self.default_input = np.asarray(default_input, dtype=float).reshape(-1)
        self.held = None

    def offer(self, packet):
        """Store ``packet`` if it is newer than the held one; return whether it was."""
        if packet.n_seq != self.n_seq or packet.inputs.shape[1] != self.default_input.size:
            raise ValueError("packet shape does not match the buffer")
        if self.held is None or packet.timestamp > self.held.timestamp:
            self.held = packet
            return True
        return False

    def actuate(self, k):
        """Input to apply at step ``k`` and the buffer age.

        The age is ``n_seq + 1`` whenever the default input is used.
        """
        if self.held is None:
            return self.default_input.copy(), self.n_seq + 1
        age = k - self.held.timestamp
        if age < 0:
            raise ClockError(f"step {k} precedes buffered packet {self.held.timestamp}")
        if age > self.n_seq:
            return self.default_input.copy(), self.n_seq + 1
        return self.held.inputs[age].copy(), age
