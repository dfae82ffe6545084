"""Univariate phase-type building blocks.

A phase-type (PH) lifetime is the absorption time of a Markov jump process on
transient states ``0..p-1`` plus one absorbing state, parameterized by a
sub-intensity matrix ``T`` (the transient-to-transient generator block) and an
initial probability vector ``pi``. The inhomogeneous (IPH) variant observed on
the age scale applies a strictly increasing time transform ``g`` to the
absorption time; this module ships the matrix-Gompertz transform used for
human mortality, ``g(x) = log(beta x + 1) / beta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataValidationError
from .linalg import expm, expm_batch, solve

__all__ = [
    "SubIntensity",
    "CoxianStructure",
    "GeneralStructure",
    "GompertzTransform",
    "validate_initial_vector",
    "ph_density",
    "ph_survival",
    "iph_density",
    "iph_survival",
    "sample_absorption_time",
    "sample_absorption_times",
    "random_sub_intensity",
]

_ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class SubIntensity:
    """Sub-intensity matrix of a terminating Markov jump process.

    Off-diagonal entries are nonnegative transition rates, diagonal entries
    are strictly negative, and every row sum is <= 0; the deficit is the exit
    rate to the absorbing state.

    Attributes
    ----------
    matrix : (p, p) ndarray
    exit_rates : (p,) ndarray
        ``-matrix @ ones``, with tiny negative round-off clipped to zero.
    """

    matrix: np.ndarray
    exit_rates: np.ndarray = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"sub-intensity must be square, got shape {m.shape}")
        if m.shape[0] < 1:
            raise ValueError("sub-intensity must have at least one state")
        if not np.all(np.isfinite(m)):
            raise ValueError("sub-intensity has non-finite entries")
        off = m[~np.eye(m.shape[0], dtype=bool)]
        if off.size and off.min() < 0.0:
            raise ValueError("off-diagonal rates must be >= 0")
        if np.diag(m).max() >= 0.0:
            raise ValueError("diagonal entries must be < 0")
        exits = -m.sum(axis=1)
        if exits.min() < -_ROW_SUM_TOL:
            raise ValueError(
                f"row sums must be <= 0 (min exit rate {exits.min():.3e})"
            )
        m = m.copy()
        m.flags.writeable = False
        exits = np.clip(exits, 0.0, None)
        exits.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "exit_rates", exits)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_rates(cls, transition_rates, exit_rates) -> "SubIntensity":
        """Assemble from nonnegative off-diagonal rates and exit rates,
        filling the diagonal with minus the total outflow per state."""
        trans = np.array(transition_rates, dtype=float)
        exits = np.asarray(exit_rates, dtype=float)
        p = trans.shape[0]
        if trans.shape != (p, p) or exits.shape != (p,):
            raise ValueError("transition_rates must be (p, p) and exit_rates (p,)")
        np.fill_diagonal(trans, 0.0)
        trans[np.arange(p), np.arange(p)] = -(trans.sum(axis=1) + exits)
        return cls(trans)


@dataclass(frozen=True)
class CoxianStructure:
    """Feed-forward chain: state k may only move to k+1 or exit."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    def transition_mask(self) -> np.ndarray:
        """Boolean (p, p) mask of admissible off-diagonal transitions."""
        mask = np.zeros((self.dim, self.dim), dtype=bool)
        idx = np.arange(self.dim - 1)
        mask[idx, idx + 1] = True
        return mask

    def validate(self, sub: SubIntensity) -> None:
        """Raise if ``sub`` carries rates outside the admissible pattern."""
        if sub.dim != self.dim:
            raise ValueError(f"dimension mismatch: structure {self.dim}, matrix {sub.dim}")
        forbidden = ~(self.transition_mask() | np.eye(self.dim, dtype=bool))
        if np.any(sub.matrix[forbidden] != 0.0):
            raise ValueError("matrix has transitions outside the feed-forward pattern")


@dataclass(frozen=True)
class GeneralStructure:
    """Unrestricted transient-state topology."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    def transition_mask(self) -> np.ndarray:
        return ~np.eye(self.dim, dtype=bool)

    def validate(self, sub: SubIntensity) -> None:
        if sub.dim != self.dim:
            raise ValueError(f"dimension mismatch: structure {self.dim}, matrix {sub.dim}")


@dataclass(frozen=True)
class GompertzTransform:
    """Matrix-Gompertz time change ``g(x) = log(beta x + 1) / beta``.

    ``inverse`` maps an observed age to operational (Markov) time,
    ``forward`` maps operational time back to age, and ``intensity`` is the
    derivative ``(g^{-1})'(y) = exp(beta y)``, the factor that converts
    operational-time densities to age densities.
    """

    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0.0):
            raise ValueError(f"beta must be finite and > 0, got {self.beta}")

    def inverse(self, y):
        """Operational time ``(exp(beta y) - 1) / beta`` for age y >= 0."""
        y = _check_nonneg(y, "y")
        return np.expm1(self.beta * y) / self.beta

    def forward(self, x):
        """Age ``log(beta x + 1) / beta`` for operational time x >= 0."""
        x = _check_nonneg(x, "x")
        return np.log1p(self.beta * x) / self.beta

    def intensity(self, y):
        """Jacobian ``exp(beta y)`` of the inverse transform at age y."""
        y = _check_nonneg(y, "y")
        return np.exp(self.beta * y)


def _check_nonneg(v, name: str):
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    if v.size and v.min() < 0.0:
        raise ValueError(f"{name} must be >= 0")
    return v[()] if v.ndim == 0 else v


def validate_initial_vector(pi, dim: int, *, tol: float = 1e-9) -> np.ndarray:
    """Check pi is a length-``dim`` probability vector; returns it as float64."""
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (dim,):
        raise DataValidationError(
            f"initial vector must have shape ({dim},), got {pi.shape}"
        )
    if not np.all(np.isfinite(pi)):
        raise DataValidationError("initial vector has non-finite entries")
    if pi.min() < -1e-12:
        raise DataValidationError("initial vector has negative entries")
    if abs(pi.sum() - 1.0) > tol:
        raise DataValidationError(
            f"initial vector sums to {pi.sum():.12f}, expected 1"
        )
    return pi


def _survival_matrix(sub: SubIntensity, x) -> np.ndarray:
    """Rows ``exp(T x_m)`` stacked, for scalar or 1-d x; see callers."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return expm(sub.matrix, float(x))[None]
    stack = sub.matrix[None, :, :] * x[:, None, None]
    return expm_batch(stack)


def ph_density(sub: SubIntensity, pi, x):
    """Phase-type density ``pi @ exp(T x) @ exit_rates`` at x >= 0.

    ``x`` may be a scalar or a 1-d array; the result matches its shape.
    """
    pi = validate_initial_vector(pi, sub.dim)
    xv = _check_nonneg(x, "x")
    mats = _survival_matrix(sub, xv)
    vals = (pi @ mats) @ sub.exit_rates
    return float(vals[0]) if np.ndim(x) == 0 else vals


def ph_survival(sub: SubIntensity, pi, x):
    """Phase-type survival ``pi @ exp(T x) @ ones`` at x >= 0."""
    pi = validate_initial_vector(pi, sub.dim)
    xv = _check_nonneg(x, "x")
    mats = _survival_matrix(sub, xv)
    vals = (pi @ mats).sum(axis=-1)
    return float(vals[0]) if np.ndim(x) == 0 else vals


def _inverse_clipped(transform: GompertzTransform, yv):
    """Operational times for age-scale evaluation.

    Ages extreme enough to overflow the transform are mapped to the largest
    finite operational time; the survival factor there underflows to exactly
    zero, which is the correct limit.
    """
    with np.errstate(over="ignore"):
        x = np.asarray(transform.inverse(yv), dtype=float)
    return np.where(np.isfinite(x), x, np.finfo(float).max / 1e10)


def iph_density(sub: SubIntensity, pi, transform: GompertzTransform, y):
    """Age-scale density: PH density at ``g^{-1}(y)`` times the Jacobian."""
    yv = _check_nonneg(y, "y")
    with np.errstate(over="ignore", invalid="ignore"):
        vals = ph_density(sub, pi, _inverse_clipped(transform, yv))
        vals = np.where(vals > 0.0, vals * transform.intensity(yv), 0.0)
    return float(vals) if np.ndim(y) == 0 else vals


def iph_survival(sub: SubIntensity, pi, transform: GompertzTransform, y):
    """Age-scale survival: PH survival evaluated at ``g^{-1}(y)``."""
    yv = _check_nonneg(y, "y")
    vals = ph_survival(sub, pi, _inverse_clipped(transform, yv))
    return float(vals) if np.ndim(y) == 0 else vals


def sample_absorption_time(sub: SubIntensity, start_state: int, rng) -> float:
    """Simulate one jump path from ``start_state`` until absorption and
    return the (operational-time) absorption instant."""
    if not 0 <= start_state < sub.dim:
        raise ValueError(f"start_state must be in [0, {sub.dim}), got {start_state}")
    return float(
        sample_absorption_times(sub, np.array([start_state]), rng)[0]
    )


def sample_absorption_times(sub: SubIntensity, start_states, rng) -> np.ndarray:
    """Vectorized jump-path simulation for an array of start states.

    All paths advance in lockstep: one exponential holding draw and one
    categorical jump draw per alive path per round. Output is deterministic
    given ``rng``'s state.
    """
    starts = np.asarray(start_states)
    if starts.ndim != 1:
        raise ValueError("start_states must be 1-d")
    if starts.size and not (starts.min() >= 0 and starts.max() < sub.dim):
        raise ValueError("start states out of range")

    p = sub.dim
    rates = -np.diag(sub.matrix)  # (p,) total outflow per state
    jump = np.concatenate(
        [np.where(np.eye(p, dtype=bool), 0.0, sub.matrix), sub.exit_rates[:, None]],
        axis=1,
    ) / rates[:, None]  # (p, p+1) jump-chain probabilities
    cum = np.cumsum(jump, axis=1)
    cum[:, -1] = 1.0  # close any round-off gap so draws always land

    n = starts.size
    times = np.zeros(n)
    state = starts.astype(np.int64).copy()
    alive = np.ones(n, dtype=bool)
    while True:
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        cur = state[idx]
        times[idx] += rng.exponential(1.0 / rates[cur])
        u = rng.random(idx.size)
        nxt = (u[:, None] >= cum[cur]).sum(axis=1)
        absorbed = nxt == p
        alive[idx[absorbed]] = False
        state[idx[~absorbed]] = nxt[~absorbed]
    return times


def random_sub_intensity(structure, rng, low: float = 0.1, high: float = 2.0) -> SubIntensity:
    """Draw admissible rates uniformly from [low, high) on ``structure``'s
    pattern (exit rate included for every state)."""
    p = structure.dim
    mask = structure.transition_mask()
    trans = np.zeros((p, p))
    trans[mask] = rng.uniform(low, high, size=int(mask.sum()))
    exits = rng.uniform(low, high, size=p)
    return SubIntensity.from_rates(trans, exits)


def mean_from_state(sub: SubIntensity, state: int) -> float:
    """Expected absorption time started from ``state``: ``e_k' (-T)^{-1} 1``."""
    if not 0 <= state < sub.dim:
        raise ValueError(f"state must be in [0, {sub.dim}), got {state}")
    return float(solve(-sub.matrix, np.ones(sub.dim))[state])


def _scale_to_mean(sub: SubIntensity, state: int, target: float) -> SubIntensity:
    """Rescale all rates so the mean absorption time from ``state`` equals
    ``target`` (used to seed estimation at a sensible magnitude)."""
    if not (np.isfinite(target) and target > 0.0):
        raise ValueError(f"target mean must be positive, got {target}")
    factor = mean_from_state(sub, state) / target
    return SubIntensity(sub.matrix * factor)
