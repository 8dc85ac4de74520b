"""Mean-square stability of the closed loop as a Markov jump linear system.

The network and actuator are written as a linear system driven by the
buffer age ``theta``::

    eta[k+1] = F eta[k] + G U[k]
    u[k]     = H(theta) eta[k] + J(theta) U[k]

and with ``U[k] = Lt [x; eta]`` the augmented state evolves by one of
``N + 2`` matrices selected by ``theta``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .numerics import spectral_radius
from .vci import eta_size, eta_slot

__all__ = [
    "MemoryCapError",
    "JumpLinearSystem",
    "MssVerdict",
    "build_shift_matrices",
    "build_selection_matrices",
    "closed_loop_modes",
    "mss_check",
    "moment_iteration_oracle",
    "DEFAULT_MAX_ENTRIES",
]

#: Largest allowed side length ``(N+2) m^2`` of the stability test matrix.
DEFAULT_MAX_ENTRIES = 4096


class MemoryCapError(MemoryError):
    pass


@dataclass(frozen=True, eq=False)
class JumpLinearSystem:
    modes: tuple
    transition: np.ndarray

    def __post_init__(self):
        modes = tuple(np.asarray(m, dtype=float) for m in self.modes)
        p = np.asarray(self.transition, dtype=float)
        dim = modes[0].shape[0]
        if any(m.shape != (dim, dim) for m in modes):
            raise ValueError("all modes must be square with the same size")
        if p.shape != (len(modes), len(modes)):
            raise ValueError("transition matrix size must match the number of modes")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "transition", p)

    @property
    def dim(self):
        return self.modes[0].shape[0]


@dataclass(frozen=True)
class MssVerdict:
    radius: float

    @property
    def is_mss(self):
        return self.radius < 1.0


def _block(n, rows, cols, r, c):
    """Identity block ``I_n`` at block position (r, c) of a zero matrix."""
    out = np.zeros((rows * n, cols * n))
    out[r * n:(r + 1) * n, c * n:(c + 1) * n] = np.eye(n)
    return out


def build_shift_matrices(n, n_seq):
    """``F`` (d x d) and ``G`` (d x (N+1)n) with ``d = n N (N+1) / 2``."""
    nb = eta_size(1, n_seq)
    f = np.zeros((nb * n, nb * n))
    g = np.zeros((nb * n, (n_seq + 1) * n))
    for j in range(n_seq):
        g += _block(n, nb, n_seq + 1, eta_slot(n_seq, 1, j), j + 1)
    for age in range(2, n_seq + 1):
        for j in range(n_seq - age + 1):
            f += _block(n, nb, nb, eta_slot(n_seq, age, j), eta_slot(n_seq, age - 1, j + 1))
    return f, g


def build_selection_matrices(n, n_seq, theta):
    """``H_theta`` (n x d) and ``J_theta`` (n x (N+1)n) picking the applied input."""
    if not 0 <= theta <= n_seq + 1:
        raise ValueError(f"theta must lie in [0, {n_seq + 1}]")
    nb = eta_size(1, n_seq)
    h = np.zeros((n, nb * n))
    j = np.zeros((n, (n_seq + 1) * n))
    if theta == 0:
        j[:, :n] = np.eye(n)
    elif theta <= n_seq:
        c = eta_slot(n_seq, theta, 0)
        h[:, c * n:(c + 1) * n] = np.eye(n)
    return h, j


def closed_loop_modes(plant, l_tilde, n_seq, transition):
    """Closed-loop jump system for a zero default input.

    Mode ``theta`` is ``[[A, B H], [0, F]] + [[B J], [G]] @ Lt``.
    """
    a, b = plant.a, plant.b
    s, n = plant.state_dim, plant.input_dim
    f, g = build_shift_matrices(n, n_seq)
    d = f.shape[0]
    l_tilde = np.asarray(l_tilde, dtype=float)
    if l_tilde.shape != ((n_seq + 1) * n, s + d):
        raise ValueError(f"augmented gain must be {(n_seq + 1) * n}x{s + d}, got {l_tilde.shape}")
    modes = []
    for theta in range(n_seq + 2):
        h, j = build_selection_matrices(n, n_seq, theta)
        open_part = np.block([[a, b @ h], [np.zeros((d, s)), f]])
        drive = np.vstack([b @ j, g])
        modes.append(open_part + drive @ l_tilde)
    return JumpLinearSystem(tuple(modes), transition)


def mss_check(sys, max_entries=DEFAULT_MAX_ENTRIES):
    """Spectral radius of ``(P' kron I) blockdiag(A_i kron A_i)`` over all modes.

    Raises
    ------
    MemoryCapError
        When the test matrix would exceed ``max_entries`` rows.
    """
    m = sys.dim
    size = len(sys.modes) * m * m
    if size > max_entries:
        raise MemoryCapError(
            f"stability matrix would be {size}x{size}, above the cap of {max_entries}; "
            "raise the cap or reduce N")
    big = np.kron(sys.transition.T, np.eye(m * m)) @ block_diag(
        *[np.kron(mode, mode) for mode in sys.modes])
    return MssVerdict(spectral_radius(big))


def moment_iteration_oracle(sys, steps=5000, low=1e-8, high=1e8):
    """Iterate the coupled second moments and report how they end up.

    ``M_j <- sum_i p_ij A_i M_i A_i'`` from ``M_i = I``.  Returns ``True``
    once the total trace drops below ``low``, ``False`` once it exceeds
    ``high``, and ``None`` if neither happens within ``steps``.
    """
    if steps < 100:
        raise ValueError("use at least 100 steps")
    modes = np.stack(sys.modes)
    p = sys.transition
    moments = np.repeat(np.eye(sys.dim)[None], len(modes), axis=0)
    for _ in range(steps):
        prop = np.einsum("iab,ibc,idc->iad", modes, moments, modes)
        moments = np.einsum("ij,iab->jab", p, prop)
        total = np.einsum("jaa->", moments)
        if total < low:
            return True
        if not total < high:
            return False
    return None
