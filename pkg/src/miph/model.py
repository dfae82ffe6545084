"""Multivariate inhomogeneous phase-type (mIPH) joint lifetime models.

A d-variate lifetime vector is built from d terminating Markov jump processes
that share a single random start state drawn from an initial vector ``pi`` and
evolve independently afterwards, each margin observed through its own
increasing time transform. The shared start state is the only source of
dependence, which keeps every joint quantity an explicit sum over states:

    S(y)  = sum_j pi_j  prod_i  e_j' exp(T_i g_i^{-1}(y_i)) 1
    f(y)  = sum_j pi_j  prod_i  e_j' exp(T_i g_i^{-1}(y_i)) t_i (g_i^{-1})'(y_i)

Initial vectors may be tied to covariates through multinomial-logistic
coefficients ``gamma`` (reference state 0, zero row), or fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .exceptions import NumericalError
from .linalg import expm_batch, kron_product, kron_sum, solve
from .phasetype import (
    GompertzTransform,
    SubIntensity,
    iph_density,
    iph_survival,
    sample_absorption_times,
    validate_initial_vector,
)

__all__ = [
    "Margin",
    "MIPHModel",
    "joint_density",
    "joint_survival",
    "joint_cdf",
    "marginal_density",
    "marginal_survival",
    "condition_on_value",
    "condition_on_survival",
    "kendall_tau",
    "spearman_rho",
    "psi1",
    "psi2",
    "cross_ratio",
    "conditional_expectation",
    "sample_joint",
    "sample_joint_rows",
]

_SURVIVAL_TRUNCATION = 1e-12
_DENOM_FLOOR = 1e-300


@dataclass(frozen=True)
class Margin:
    """One coordinate of the joint model: a sub-intensity matrix plus the
    time transform under which that coordinate is observed."""

    sub: SubIntensity
    transform: GompertzTransform


@dataclass(frozen=True)
class MIPHModel:
    """Joint model: margins sharing one latent start state.

    Exactly one of ``gamma`` (covariate-linked initial vectors via softmax,
    reference row 0 fixed at zero) and ``fixed_pi`` may be set; both may be
    omitted when initial vectors are always supplied by the caller.
    """

    margins: tuple[Margin, ...]
    gamma: np.ndarray | None = None
    fixed_pi: np.ndarray | None = None

    def __post_init__(self):
        margins = tuple(self.margins)
        if len(margins) < 1:
            raise ValueError("model needs at least one margin")
        dims = {m.sub.dim for m in margins}
        if len(dims) != 1:
            raise ValueError(f"margins disagree on state-space size: {sorted(dims)}")
        object.__setattr__(self, "margins", margins)
        if self.gamma is not None and self.fixed_pi is not None:
            raise ValueError("set gamma or fixed_pi, not both")
        if self.gamma is not None:
            g = np.asarray(self.gamma, dtype=float)
            if g.ndim != 2 or g.shape[0] != self.dim:
                raise ValueError(
                    f"gamma must be (p, g) with p = {self.dim}, got {g.shape}"
                )
            if not np.all(np.isfinite(g)):
                raise ValueError("gamma has non-finite entries")
            if np.any(g[0] != 0.0):
                raise ValueError("gamma row 0 is the reference and must be zero")
            object.__setattr__(self, "gamma", g)
        if self.fixed_pi is not None:
            object.__setattr__(
                self, "fixed_pi", validate_initial_vector(self.fixed_pi, self.dim)
            )

    @property
    def dim(self) -> int:
        """Number of transient states p."""
        return self.margins[0].sub.dim

    @property
    def n_margins(self) -> int:
        return len(self.margins)

    def initial_vectors(self, covariates) -> np.ndarray:
        """Per-observation initial vectors.

        With ``gamma`` set, rows are ``softmax(A @ gamma.T)`` (computed with
        max subtraction); with ``fixed_pi`` set, that vector is broadcast.
        """
        a = np.asarray(covariates, dtype=float)
        if a.ndim != 2:
            raise ValueError(f"covariates must be 2-d, got shape {a.shape}")
        if self.gamma is not None:
            if a.shape[1] != self.gamma.shape[1]:
                raise ValueError(
                    f"covariate width {a.shape[1]} does not match gamma "
                    f"width {self.gamma.shape[1]}"
                )
            return softmax_rows(a @ self.gamma.T)
        if self.fixed_pi is not None:
            return np.broadcast_to(self.fixed_pi, (a.shape[0], self.dim)).copy()
        raise ValueError("model carries neither gamma nor fixed_pi")


def softmax_rows(eta) -> np.ndarray:
    """Row-wise softmax with max subtraction; rows sum to 1 exactly enough."""
    eta = np.asarray(eta, dtype=float)
    z = eta - eta.max(axis=1, keepdims=True)
    np.exp(z, out=z)
    z /= z.sum(axis=1, keepdims=True)
    return z


def _check_points(model: MIPHModel, y):
    """Coerce y to (n, d); remembers whether the input was a single point."""
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 1
    if scalar:
        y = y[None, :]
    if y.ndim != 2 or y.shape[1] != model.n_margins:
        raise ValueError(
            f"expected points with {model.n_margins} coordinates, got shape {y.shape}"
        )
    if not np.all(np.isfinite(y)):
        raise ValueError("evaluation points have non-finite entries")
    if y.size and y.min() < 0.0:
        raise ValueError("evaluation points must be >= 0")
    return y, scalar


def _factor_rows(margin: Margin, y: np.ndarray, kind: str) -> np.ndarray:
    """Per-state factors for one margin at ages ``y`` (1-d).

    Row m, column j is ``e_j' exp(T x_m) 1`` (kind="survival") or
    ``e_j' exp(T x_m) t * exp(beta y_m)`` (kind="density"), with
    ``x = g^{-1}(y)``. Ages far enough out that the operational time
    overflows get exact-zero rows (the mathematical limit).
    """
    beta = margin.transform.beta
    with np.errstate(over="ignore"):
        x = np.expm1(beta * y) / beta
    ok = np.isfinite(x)
    out = np.zeros((y.size, margin.sub.dim))
    if np.any(ok):
        mats = expm_batch(margin.sub.matrix[None, :, :] * x[ok, None, None])
        if kind == "survival":
            out[ok] = mats.sum(axis=-1)
        else:
            out[ok] = (mats @ margin.sub.exit_rates) * np.exp(beta * y[ok])[:, None]
    return out


def joint_density(model: MIPHModel, pi, y):
    """Joint density at one point ``(d,)`` or a batch ``(n, d)`` of points."""
    pi = validate_initial_vector(pi, model.dim)
    pts, scalar = _check_points(model, y)
    factors = np.ones((pts.shape[0], model.dim))
    for i, margin in enumerate(model.margins):
        factors *= _factor_rows(margin, pts[:, i], "density")
    vals = factors @ pi
    return float(vals[0]) if scalar else vals


def joint_survival(model: MIPHModel, pi, y):
    """Joint survival P(Y_1 > y_1, ..., Y_d > y_d)."""
    pi = validate_initial_vector(pi, model.dim)
    pts, scalar = _check_points(model, y)
    factors = np.ones((pts.shape[0], model.dim))
    for i, margin in enumerate(model.margins):
        factors *= _factor_rows(margin, pts[:, i], "survival")
    vals = factors @ pi
    return float(vals[0]) if scalar else vals


def joint_cdf(model: MIPHModel, pi, y):
    """Joint distribution function P(Y_1 <= y_1, ..., Y_d <= y_d)."""
    pi = validate_initial_vector(pi, model.dim)
    pts, scalar = _check_points(model, y)
    factors = np.ones((pts.shape[0], model.dim))
    for i, margin in enumerate(model.margins):
        factors *= 1.0 - _factor_rows(margin, pts[:, i], "survival")
    vals = factors @ pi
    return float(vals[0]) if scalar else vals


def marginal_survival(model: MIPHModel, pi, margin: int, y):
    """Survival of one coordinate, ignoring the others."""
    m = model.margins[_check_margin(model, margin)]
    return iph_survival(m.sub, pi, m.transform, y)


def marginal_density(model: MIPHModel, pi, margin: int, y):
    """Density of one coordinate, ignoring the others."""
    m = model.margins[_check_margin(model, margin)]
    return iph_density(m.sub, pi, m.transform, y)


def _check_margin(model: MIPHModel, margin: int) -> int:
    margin = int(margin)
    if not 0 <= margin < model.n_margins:
        raise ValueError(
            f"margin must be in [0, {model.n_margins}), got {margin}"
        )
    return margin


def _reduced(model: MIPHModel, drop: int, start: np.ndarray) -> MIPHModel:
    margins = tuple(m for i, m in enumerate(model.margins) if i != drop)
    return MIPHModel(margins=margins, fixed_pi=start)


def condition_on_value(model: MIPHModel, pi, margin: int, y: float):
    """Condition on ``Y_margin = y`` (an observed death time).

    Returns the reduced model over the remaining margins together with the
    updated start-state vector ``alpha_j \\propto pi_j e_j' exp(T x) t``
    (the transform's Jacobian cancels in the normalization).
    """
    margin = _check_margin(model, margin)
    if model.n_margins < 2:
        raise ValueError("conditioning needs at least two margins")
    pi = validate_initial_vector(pi, model.dim)
    y = float(y)
    if not (np.isfinite(y) and y >= 0.0):
        raise ValueError(f"conditioning age must be finite and >= 0, got {y}")
    m = model.margins[margin]
    weights = pi * (expm_batch(m.sub.matrix[None] * m.transform.inverse(y))[0]
                    @ m.sub.exit_rates)
    total = weights.sum()
    if not np.isfinite(total) or total < _DENOM_FLOOR:
        raise NumericalError(
            f"conditioning density underflowed at y = {y} (mass {total:.3e})"
        )
    alpha = weights / total
    return _reduced(model, margin, alpha), alpha


def condition_on_survival(model: MIPHModel, pi, margin: int, y: float):
    """Condition on ``Y_margin >= y`` (margin still alive at age y).

    Returns the reduced model and ``nu_j \\propto pi_j e_j' exp(T x) 1``.
    """
    margin = _check_margin(model, margin)
    if model.n_margins < 2:
        raise ValueError("conditioning needs at least two margins")
    pi = validate_initial_vector(pi, model.dim)
    y = float(y)
    if not (np.isfinite(y) and y >= 0.0):
        raise ValueError(f"conditioning age must be finite and >= 0, got {y}")
    m = model.margins[margin]
    weights = pi * expm_batch(m.sub.matrix[None] * m.transform.inverse(y))[0].sum(axis=1)
    total = weights.sum()
    if not np.isfinite(total) or total < _DENOM_FLOOR:
        raise NumericalError(
            f"conditioning survival underflowed at y = {y} (mass {total:.3e})"
        )
    nu = weights / total
    return _reduced(model, margin, nu), nu


def _precedence_matrix(sub: SubIntensity) -> np.ndarray:
    """U[a, b] = P(a copy started in b is absorbed while a copy started in a
    is still alive), for two independent copies of the same chain.

    Solves ``-(T (+) T) u = 1 (x) t`` and unstacks row-major, so entry
    ``(a, b)`` sits at flat index ``a * p + b``.
    """
    p = sub.dim
    rhs = kron_product(np.ones(p), sub.exit_rates)
    u = solve(-kron_sum(sub.matrix, sub.matrix), rhs)
    return u.reshape(p, p)


def _check_pair(model: MIPHModel, pair) -> tuple[int, int]:
    k, l = (int(pair[0]), int(pair[1]))
    if k == l:
        raise ValueError("pair must name two distinct margins")
    _check_margin(model, k)
    _check_margin(model, l)
    return k, l


def kendall_tau(model: MIPHModel, pi, pair=(0, 1)) -> float:
    """Kendall's tau between two margins.

    Rank correlations are invariant under the margins' strictly increasing
    time transforms, so this works on the untransformed chains:

        tau = 4 sum_{a,b} pi_a pi_b U_k[a,b] U_l[a,b] - 1
    """
    k, l = _check_pair(model, pair)
    pi = validate_initial_vector(pi, model.dim)
    u_k = _precedence_matrix(model.margins[k].sub)
    u_l = _precedence_matrix(model.margins[l].sub)
    return float(4.0 * pi @ (u_k * u_l) @ pi - 1.0)


def spearman_rho(model: MIPHModel, pi, pair=(0, 1)) -> float:
    """Spearman's rho between two margins.

        rho = 12 sum_j pi_j (pi' U_k)[j] (pi' U_l)[j] - 3,

    with the same precedence matrices as Kendall's tau; ``(pi' U)[j]`` is the
    probability that the coupled margin started in j outlives an independent
    copy started from ``pi``.
    """
    k, l = _check_pair(model, pair)
    pi = validate_initial_vector(pi, model.dim)
    a_k = pi @ _precedence_matrix(model.margins[k].sub)
    a_l = pi @ _precedence_matrix(model.margins[l].sub)
    return float(12.0 * pi @ (a_k * a_l) - 3.0)


def _bivariate_parts(model: MIPHModel, pi, y1: float, y2: float):
    """Per-state survival/density factor vectors for a bivariate model."""
    if model.n_margins != 2:
        raise ValueError("this measure is defined for bivariate models")
    pi = validate_initial_vector(pi, model.dim)
    for y in (y1, y2):
        if not (np.isfinite(y) and y >= 0.0):
            raise ValueError(f"ages must be finite and >= 0, got {y}")
    sv1 = _factor_rows(model.margins[0], np.array([y1]), "survival")[0]
    sv2 = _factor_rows(model.margins[1], np.array([y2]), "survival")[0]
    dv1 = _factor_rows(model.margins[0], np.array([y1]), "density")[0]
    dv2 = _factor_rows(model.margins[1], np.array([y2]), "density")[0]
    return pi, sv1, sv2, dv1, dv2


def psi1(model: MIPHModel, pi, y1: float, y2: float) -> float:
    """Survival dependence ratio S(y1, y2) / (S_1(y1) S_2(y2)).

    Equals 1 everywhere iff the margins are independent; > 1 signals
    positive association at (y1, y2).
    """
    pi, sv1, sv2, _, _ = _bivariate_parts(model, pi, y1, y2)
    joint = pi @ (sv1 * sv2)
    s1 = pi @ sv1
    s2 = pi @ sv2
    denom = s1 * s2
    if denom < _DENOM_FLOOR:
        raise NumericalError(
            f"marginal survival underflowed at ({y1}, {y2}); ratio undefined"
        )
    return float(joint / denom)


def psi2(model: MIPHModel, pi, margin: int, y: float) -> float:
    """Conditional-expectation ratio E[Y_m | Y_other >= y] / E[Y_m]."""
    margin = _check_margin(model, margin)
    if model.n_margins != 2:
        raise ValueError("this measure is defined for bivariate models")
    other = 1 - margin
    numer = conditional_expectation(model, pi, margin, given=(other, y))
    denom = conditional_expectation(model, pi, margin)
    return float(numer / denom)


def cross_ratio(model: MIPHModel, pi, u: float) -> float:
    """Clayton-type cross-ratio on the diagonal, CR(u, u).

    CR = S * d2S/dy1dy2 / (dS/dy1 * dS/dy2) evaluated at (u, u), with all
    derivatives taken on the joint survival function; the mixed partial is
    the joint density. Identically 1 for one-state models and > 1 under the
    positive dependence induced by a shared start state.
    """
    u = float(u)
    pi, sv1, sv2, dv1, dv2 = _bivariate_parts(model, pi, u, u)
    s = pi @ (sv1 * sv2)
    f = pi @ (dv1 * dv2)
    d1 = pi @ (dv1 * sv2)  # = -dS/dy1
    d2 = pi @ (sv1 * dv2)  # = -dS/dy2
    denom = d1 * d2
    if denom < _DENOM_FLOOR:
        raise NumericalError(f"survival gradient underflowed at u = {u}")
    return float(s * f / denom)


def _survival_safe(margin: Margin, pi: np.ndarray, y: float) -> float:
    """Marginal survival that returns 0 past the transform's overflow point
    instead of raising; quadrature probes arbitrarily far out."""
    val = _factor_rows(margin, np.array([float(y)]), "survival")[0] @ pi
    return float(val)


def _truncation_point(margin: Margin, pi: np.ndarray) -> float:
    hi = 0.5
    for _ in range(200):
        if _survival_safe(margin, pi, hi) < _SURVIVAL_TRUNCATION:
            return hi
        hi *= 2.0
    raise NumericalError("survival does not decay; expectation diverges")


def conditional_expectation(
    model: MIPHModel, pi, margin: int, given: tuple[int, float] | None = None
) -> float:
    """E[Y_margin], optionally given survival of another margin.

    ``given = (l, y_l)`` conditions on ``Y_l >= y_l`` first. The expectation
    integrates the (conditional) marginal survival by adaptive quadrature
    with relative tolerance 1e-7, truncated where survival drops below 1e-12.
    """
    margin = _check_margin(model, margin)
    if given is not None:
        l, y_l = int(given[0]), float(given[1])
        if l == margin:
            raise ValueError("conditioning margin must differ from the target margin")
        reduced, nu = condition_on_survival(model, pi, l, y_l)
        target = margin - 1 if margin > l else margin
        return conditional_expectation(reduced, nu, target)

    pi = validate_initial_vector(pi, model.dim)
    m = model.margins[margin]
    hi = _truncation_point(m, pi)
    val, _ = integrate.quad(
        lambda t: _survival_safe(m, pi, t), 0.0, hi, epsabs=1e-12, epsrel=1e-7,
        limit=200,
    )
    return float(val)


def _draw_starts(pi_rows: np.ndarray, rng) -> np.ndarray:
    cum = np.cumsum(pi_rows, axis=1)
    cum[:, -1] = 1.0
    u = rng.random(pi_rows.shape[0])
    return (u[:, None] >= cum).sum(axis=1)


def sample_joint(model: MIPHModel, pi, rng, n: int) -> np.ndarray:
    """Draw ``n`` joint lifetimes (ages), shape (n, d)."""
    pi = validate_initial_vector(pi, model.dim)
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rows = np.broadcast_to(pi, (n, model.dim))
    return sample_joint_rows(model, rows, rng)


def sample_joint_rows(model: MIPHModel, pi_rows, rng) -> np.ndarray:
    """Like :func:`sample_joint` with one initial vector per row."""
    pi_rows = np.asarray(pi_rows, dtype=float)
    if pi_rows.ndim != 2 or pi_rows.shape[1] != model.dim:
        raise ValueError(f"pi_rows must be (n, {model.dim}), got {pi_rows.shape}")
    starts = _draw_starts(pi_rows, rng)
    out = np.empty((pi_rows.shape[0], model.n_margins))
    for i, m in enumerate(model.margins):
        x = sample_absorption_times(m.sub, starts, rng)
        out[:, i] = m.transform.forward(x)
    return out
