"""Dense real-matrix helpers shared by the rest of the package.

Everything here is a pure function of its (array-like) inputs.
"""

import numpy as np
from scipy.linalg import expm

__all__ = [
    "ConvergenceError",
    "NonUniqueStationaryError",
    "as_matrix",
    "kron",
    "spectral_radius",
    "zoh_discretize",
    "solve_dare",
    "dare_residual",
    "stationary_distribution",
]


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap."""


class NonUniqueStationaryError(ValueError):
    """The Markov chain has more than one stationary distribution."""


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-d float array (scalars and vectors promoted)."""
    m = np.atleast_2d(np.asarray(a, dtype=float))
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got shape {m.shape}")
    if m.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def kron(a, b):
    """Kronecker product of two nonempty matrices."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def spectral_radius(m):
    """Largest eigenvalue modulus of a square real matrix.

    Uses a full eigenvalue decomposition so complex dominant pairs are
    handled correctly.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"spectral radius needs a square matrix, got {m.shape}")
    return float(np.max(np.abs(np.linalg.eigvals(m))))


def zoh_discretize(a_c, b_c, t_s):
    """Exact zero-order-hold discretization of ``dx/dt = a_c x + b_c u``.

    Parameters
    ----------
    a_c : (s, s) array_like
        Continuous-time state matrix.
    b_c : (s, n) array_like
        Continuous-time input matrix.
    t_s : float
        Sampling time in seconds, ``t_s > 0``.

    Returns
    -------
    a_d, b_d : ndarray
        ``exp(a_c t_s)`` and ``(int_0^t_s exp(a_c r) dr) b_c``.
    """
    a_c = as_matrix(a_c, "a_c")
    b_c = as_matrix(b_c, "b_c")
    s = a_c.shape[0]
    if a_c.shape != (s, s):
        raise ValueError(f"a_c must be square, got {a_c.shape}")
    if b_c.shape[0] != s:
        raise ValueError(f"b_c needs {s} rows, got {b_c.shape[0]}")
    if not t_s > 0:
        raise ValueError("sampling time must be positive")
    n = b_c.shape[1]
    # exp([[A, B], [0, 0]] t) = [[A_d, B_d], [0, I]]
    block = np.zeros((s + n, s + n))
    block[:s, :s] = a_c
    block[:s, s:] = b_c
    phi = expm(block * t_s)
    return phi[:s, :s], phi[:s, s:]


def _riccati_map(a, b, q, r, s):
    sa = s @ a
    bts = b.T @ sa
    gain = np.linalg.solve(r + b.T @ s @ b, bts)
    nxt = a.T @ sa - bts.T @ gain + q
    return 0.5 * (nxt + nxt.T)


def dare_residual(a, b, q, r, s):
    """Frobenius norm of ``A'SA - A'SB(R+B'SB)^-1 B'SA + Q - S``."""
    a, b, q, r, s = (np.atleast_2d(np.asarray(v, dtype=float)) for v in (a, b, q, r, s))
    return float(np.linalg.norm(_riccati_map(a, b, q, r, s) - s))


def solve_dare(a, b, q, r, tol=1e-12, max_iter=1_000_000, stall=50):
    """Solve the discrete algebraic Riccati equation by fixed-point iteration.

    Starts from ``S = Q`` and iterates the Riccati map until the Frobenius
    change drops below ``tol``. When the change has already fallen below
    ``tol`` relative to ``|S|`` but sits on a rounding floor for ``stall``
    iterations, the iterate is accepted as converged.

    Raises
    ------
    ConvergenceError
        No convergence within ``max_iter`` (typically a non-stabilizable pair).
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    q = as_matrix(q, "q")
    r = as_matrix(r, "r")
    s_dim, n = b.shape
    if a.shape != (s_dim, s_dim) or q.shape != (s_dim, s_dim) or r.shape != (n, n):
        raise ValueError("inconsistent DARE dimensions")
    if not np.allclose(q, q.T) or not np.allclose(r, r.T):
        raise ValueError("q and r must be symmetric")

    s = 0.5 * (q + q.T)
    best = np.inf
    since_best = 0
    for _ in range(max_iter):
        with np.errstate(over="ignore", invalid="ignore"):
            nxt = _riccati_map(a, b, q, r, s)
        if not np.all(np.isfinite(nxt)):
            break
        change = np.linalg.norm(nxt - s)
        s = nxt
        if change < tol:
            return s
        if change < best:
            best, since_best = change, 0
        else:
            since_best += 1
        if change < tol * max(1.0, np.linalg.norm(s)) and since_best >= stall:
            return s
    raise ConvergenceError(
        "Riccati iteration did not converge; check that (a, b) is stabilizable")


def stationary_distribution(p, tol=1e-10):
    """Unique stationary distribution ``alpha = P' alpha`` of a row-stochastic ``p``.

    The null space of ``P' - I`` is found by SVD; a null space of dimension
    other than one raises :class:`NonUniqueStationaryError`. The vector is
    then obtained from ``P' - I`` stacked with the normalization row.
    """
    p = as_matrix(p, "p")
    k = p.shape[0]
    if p.shape != (k, k):
        raise ValueError(f"transition matrix must be square, got {p.shape}")
    if np.any(p < -1e-12) or not np.allclose(p.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError("transition matrix must be row-stochastic")

    g = p.T - np.eye(k)
    sv = np.linalg.svd(g, compute_uv=False)
    null_dim = int(np.sum(sv <= 1e-9 * max(1.0, sv[0])))
    if null_dim != 1:
        raise NonUniqueStationaryError(
            f"chain has {null_dim} linearly independent stationary vectors")

    aug = np.vstack([g, np.ones((1, k))])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    alpha, *_ = np.linalg.lstsq(aug, rhs, rcond=None)
    alpha = np.clip(alpha, 0.0, None)
    alpha /= alpha.sum()
    if np.max(np.abs(p.T @ alpha - alpha)) > tol:
        raise ValueError("stationary solve lost accuracy")
    return alpha
