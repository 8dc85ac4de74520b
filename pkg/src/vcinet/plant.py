"""Discrete-time linear plant, the cart-pole preset and LQR synthesis."""

from dataclasses import dataclass, field

import numpy as np

from .numerics import as_matrix, solve_dare, zoh_discretize

__all__ = [
    "PlantModel",
    "PendulumParams",
    "LqrDesign",
    "step",
    "sample_noise",
    "pendulum_continuous",
    "pendulum_plant",
    "lqr_gain",
    "lqr_design",
    "PENDULUM_Q",
    "PENDULUM_R",
    "PENDULUM_X0",
    "PUBLISHED_GAIN",
]

# LQR weights and initial state of the cart-pole benchmark.
PENDULUM_Q = np.diag([5000.0, 0.0, 100.0, 0.0])
PENDULUM_R = np.array([[100.0]])
PENDULUM_X0 = np.array([0.0, 0.2, 0.2, 0.0])
# Gain printed for the benchmark; compared against, never used.
PUBLISHED_GAIN = np.array([[-6.54, -5.50, 28.72, 5.50]])


def _noise_factor(cov):
    """Matrix F with F F' = cov; diagonal shortcut, then Cholesky, then eigh."""
    if np.count_nonzero(cov - np.diag(np.diag(cov))) == 0:
        d = np.diag(cov)
        if np.any(d < 0):
            raise ValueError("noise covariance has negative variances")
        return np.diag(np.sqrt(d))
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    # Singular PSD covariances are fine; indefinite ones are not.
    w, v = np.linalg.eigh(cov)
    if w.min() < -1e-12 * max(1.0, abs(w).max()):
        raise ValueError("noise covariance is indefinite") from None
    return v * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True, eq=False)
class PlantModel:
    """``x[k+1] = a x[k] + b u[k] + w[k]`` with ``w ~ N(0, noise_cov)``."""

    a: np.ndarray
    b: np.ndarray
    noise_cov: np.ndarray = None
    _factor: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = as_matrix(self.a, "a")
        b = as_matrix(self.b, "b")
        s = a.shape[0]
        if a.shape != (s, s):
            raise ValueError(f"a must be square, got {a.shape}")
        if b.shape[0] != s:
            raise ValueError(f"b must have {s} rows, got {b.shape[0]}")
        cov = np.zeros((s, s)) if self.noise_cov is None else as_matrix(self.noise_cov)
        if cov.shape != (s, s):
            raise ValueError(f"noise_cov must be {s}x{s}, got {cov.shape}")
        if not np.allclose(cov, cov.T):
            raise ValueError("noise_cov must be symmetric")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "noise_cov", cov)
        object.__setattr__(self, "_factor", _noise_factor(cov))

    @property
    def state_dim(self):
        return self.a.shape[0]

    @property
    def input_dim(self):
        return self.b.shape[1]


@dataclass(frozen=True)
class PendulumParams:
    """Physical parameters of the cart-pole, defaults from the benchmark table."""

    cart_mass: float = 0.5
    pendulum_mass: float = 0.5
    cart_friction: float = 0.1
    length_to_com: float = 0.3
    inertia: float = 0.006
    sampling_time: float = 0.01
    noise_std: float = 0.0
    gravity: float = 9.81

    def __post_init__(self):
        for name in ("cart_mass", "pendulum_mass", "cart_friction", "length_to_com",
                     "inertia", "sampling_time", "gravity"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")


@dataclass(frozen=True, eq=False)
class LqrDesign:
    q: np.ndarray
    r: np.ndarray
    gain: np.ndarray
    riccati: np.ndarray


def step(model, x, u, w=None):
    """Advance the plant one step: ``A x + B u + w``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if x.shape[0] != model.state_dim or u.shape[0] != model.input_dim:
        raise ValueError("state or input dimension does not match the model")
    nxt = model.a @ x + model.b @ u
    if w is not None:
        w = np.asarray(w, dtype=float).reshape(-1)
        if w.shape[0] != model.state_dim:
            raise ValueError("noise dimension does not match the model")
        nxt = nxt + w
    return nxt


def sample_noise(model, rng):
    """Zero-mean Gaussian process noise draw.

    Always consumes ``state_dim`` standard normals from ``rng`` so that
    noise streams stay aligned across configurations.
    """
    return model._factor @ rng.standard_normal(model.state_dim)


def pendulum_continuous(params):
    """Linearized cart-pole about the upright equilibrium.

    State ordering is ``[cart position, cart velocity, angle, angular
    velocity]``, input is the horizontal force on the cart.

    Returns
    -------
    a_c : (4, 4) ndarray
    b_c : (4, 1) ndarray
    """
    big_m, m = params.cart_mass, params.pendulum_mass
    b, l, inertia, g = params.cart_friction, params.length_to_com, params.inertia, params.gravity
    p = inertia * (big_m + m) + big_m * m * l**2
    a_c = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, -(inertia + m * l**2) * b / p, m**2 * g * l**2 / p, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, -m * l * b / p, m * g * l * (big_m + m) / p, 0.0],
    ])
    b_c = np.array([[0.0], [(inertia + m * l**2) / p], [0.0], [m * l / p]])
    return a_c, b_c


def pendulum_plant(params=None):
    """Sampled cart-pole with noise on cart position and angle only."""
    params = PendulumParams() if params is None else params
    a_d, b_d = zoh_discretize(*pendulum_continuous(params), params.sampling_time)
    var = params.noise_std**2
    return PlantModel(a_d, b_d, np.diag([var, 0.0, var, 0.0]))


def lqr_gain(a, b, q, r):
    """Infinite-horizon discrete LQR gain ``L`` for the law ``u = L x``.

    The feedback sign lives inside ``L``: ``L = -(R + B'SB)^-1 B'SA``.
    """
    return lqr_design(a, b, q, r).gain


def lqr_design(a, b, q, r):
    a, b, q, r = (as_matrix(v) for v in (a, b, q, r))
    s = solve_dare(a, b, q, r)
    gain = -np.linalg.solve(r + b.T @ s @ b, b.T @ s @ a)
    return LqrDesign(q=q, r=r, gain=gain, riccati=s)
