"""EM estimation for covariate-linked multivariate phase-type lifetimes.

The observed data are right-censored joint lifetimes with per-subject
covariates. One EM iteration runs four steps:

* E: posterior expectations of start-state indicators (B), state occupancies
  (Z) and transition/exit counts (N) given the current parameters, on the
  operational time scale. Censored margins contribute survival kernels,
  uncensored margins density kernels; all occupation/transition integrals
  reduce to one 2p x 2p block exponential per (observation, margin) because
  the integrand's middle factor is rank one.
* R: weighted multinomial-logistic regression of the B-weights on the
  covariates (softmax link, state 0 is the zero reference row), by damped
  Newton iteration.
* M: closed-form rate updates ``t_ks = E[N_ks] / E[Z_k]`` on the admissible
  structure pattern.
* I: numeric update of the time-transform parameters by direct search on the
  observed log-likelihood over log(beta).

Times enter estimation on the internal scale (years / 100); see `dataio`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from .exceptions import NumericalError
from .linalg import expm_batch
from .model import Margin, MIPHModel
from .phasetype import (
    CoxianStructure,
    GeneralStructure,
    GompertzTransform,
    SubIntensity,
    _scale_to_mean,
    random_sub_intensity,
)

__all__ = [
    "ObservationSet",
    "SufficientStats",
    "FitConfig",
    "FitReport",
    "transform_data",
    "e_step",
    "r_step",
    "m_step",
    "i_step",
    "observed_loglik",
    "fit",
]

_DENOM_FLOOR = 1e-300
_STAT_TOL = 1e-12


@dataclass(frozen=True)
class ObservationSet:
    """Right-censored joint lifetimes with a regression design.

    Attributes
    ----------
    y : (n, d) ndarray
        Observed times (death or censoring ages) on the internal scale.
    delta : (n, d) ndarray of int
        1 where the margin's death was observed, 0 where censored.
    covariates : (n, g) ndarray
        Design matrix; the first column must be constant 1.
    """

    y: np.ndarray
    delta: np.ndarray
    covariates: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        delta = np.asarray(self.delta)
        a = np.asarray(self.covariates, dtype=float)
        if y.ndim != 2 or y.shape[0] < 1 or y.shape[1] < 1:
            raise ValueError(f"y must be (n, d) with n, d >= 1, got {y.shape}")
        if delta.shape != y.shape:
            raise ValueError(f"delta shape {delta.shape} != y shape {y.shape}")
        if a.ndim != 2 or a.shape[0] != y.shape[0] or a.shape[1] < 1:
            raise ValueError(f"covariates must be (n, g), got {a.shape}")
        if not np.all(np.isfinite(y)) or y.min() < 0.0:
            raise ValueError("y must be finite and >= 0")
        if not np.all(np.isin(delta, (0, 1))):
            raise ValueError("delta entries must be 0 or 1")
        if not np.all(np.isfinite(a)):
            raise ValueError("covariates must be finite")
        if np.any(a[:, 0] != 1.0):
            raise ValueError("covariates' first column must be constant 1")
        for arr, name in ((y, "y"), (delta.astype(np.int8), "delta"), (a, "covariates")):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def n_margins(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class SufficientStats:
    """E-step output.

    Attributes
    ----------
    b : (n, p) ndarray
        Start-state weights; each row sums to d (every margin contributes its
        posterior over the shared start state).
    z : (d, p) ndarray
        Expected total occupation time per margin and state.
    n_trans : (d, p, p) ndarray
        Expected transition counts (zero diagonal).
    n_exit : (d, p) ndarray
        Expected absorption counts, accumulated over uncensored entries only.
    """

    b: np.ndarray
    z: np.ndarray
    n_trans: np.ndarray
    n_exit: np.ndarray

    def __post_init__(self):
        b, z, nt, ne = (np.asarray(v, dtype=float)
                        for v in (self.b, self.z, self.n_trans, self.n_exit))
        if b.ndim != 2:
            raise ValueError("b must be (n, p)")
        p = b.shape[1]
        if z.ndim != 2 or z.shape[1] != p:
            raise ValueError("z must be (d, p)")
        d = z.shape[0]
        if nt.shape != (d, p, p) or ne.shape != (d, p):
            raise ValueError("n_trans must be (d, p, p) and n_exit (d, p)")
        for arr, name in ((b, "b"), (z, "z"), (nt, "n_trans"), (ne, "n_exit")):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            if arr.size and arr.min() < -_STAT_TOL:
                raise ValueError(f"{name} has negative entries")
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class FitConfig:
    """Knobs for :func:`fit`.

    ``loglik_tolerance`` is per observation: the loop stops once successive
    log-likelihoods differ by less than ``loglik_tolerance * n``. Set it to
    None to always run ``max_iterations`` (fixed-iteration protocol).
    ``i_step_every = 0`` freezes the transform parameters at ``beta_init``.
    """

    p: int
    structure: str = "coxian"
    max_iterations: int = 1000
    loglik_tolerance: float | None = 1e-7
    seed: int = 0
    beta_init: float | tuple = 1.0
    i_step_every: int = 1
    i_step_mode: str = "joint"
    i_step_maxfev: int = 200
    log_beta_bounds: tuple = (-5.0, 7.0)
    r_step_grad_tol: float = 1e-8
    r_step_coef_cap: float = 1e3
    m_step_diag_floor: float = -1e-8

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.structure not in ("coxian", "general"):
            raise ValueError(f"unknown structure {self.structure!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.i_step_every < 0:
            raise ValueError("i_step_every must be >= 0")
        if self.i_step_mode not in ("joint", "coordinate"):
            raise ValueError(f"unknown i_step_mode {self.i_step_mode!r}")


@dataclass(frozen=True)
class FitReport:
    """Result of :func:`fit`: the fitted model, the per-iteration observed
    log-likelihood trace, and whether the tolerance rule triggered."""

    model: MIPHModel
    loglik_trace: np.ndarray
    iterations: int
    converged: bool

    @property
    def final_loglik(self) -> float:
        return float(self.loglik_trace[-1])


def _as_betas(beta_init, d: int) -> np.ndarray:
    betas = np.asarray(beta_init, dtype=float)
    if betas.ndim == 0:
        betas = np.full(d, float(betas))
    if betas.shape != (d,):
        raise ValueError(f"beta_init must be scalar or length {d}")
    if not np.all(np.isfinite(betas)) or betas.min() <= 0.0:
        raise ValueError("beta values must be finite and > 0")
    return betas


def transform_data(obs: ObservationSet, betas) -> np.ndarray:
    """Operational times ``x = (exp(beta_i y_i) - 1) / beta_i``, (n, d).

    Raises if any entry overflows the float range (reported with its row and
    margin index).
    """
    betas = _as_betas(betas, obs.n_margins)
    with np.errstate(over="ignore"):
        x = np.expm1(obs.y * betas) / betas
    bad = ~np.isfinite(x)
    if np.any(bad):
        rows, cols = np.nonzero(bad)
        raise NumericalError(
            "operational time overflow at (row, margin) "
            f"{list(zip(rows[:5].tolist(), cols[:5].tolist()))}"
            f"{' ...' if rows.size > 5 else ''}"
        )
    return x


def _margin_kernels(sub: SubIntensity, x_col, delta_col):
    """exp(T x) for one margin plus the per-state evidence vector a, where
    a[m, j] = e_j' exp(T x_m) t (death observed) or e_j' exp(T x_m) 1
    (censored). Transform Jacobians are constant over states and cancel in
    every posterior, so they are left out here."""
    mats = expm_batch(sub.matrix[None, :, :] * x_col[:, None, None])
    a = np.where(
        delta_col[:, None].astype(bool),
        mats @ sub.exit_rates,
        mats.sum(axis=-1),
    )
    return mats, a


def e_step(x, delta, per_obs_pi, subs) -> SufficientStats:
    """Posterior expectations of the complete-data statistics.

    Parameters
    ----------
    x : (n, d) array_like
        Operational times (already transformed).
    delta : (n, d) array_like
        Censoring indicators (1 = death observed).
    per_obs_pi : (n, p) array_like
        Initial vector for each observation (rows sum to 1).
    subs : sequence of SubIntensity
        One per margin.

    Notes
    -----
    For observation m and margin i, the occupancy and transition expectations
    are the diagonal/entries of

        U = integral_0^{x_mi} exp(T_i (x - s)) v c' exp(T_i s) ds,

    where v is the exit-rate vector (death) or the all-ones vector (censored)
    and c is the posterior over the shared start state given the other
    margins. U comes from one 2p x 2p block exponential (see linalg);
    linearity in the middle factor collapses the per-state integrals into one.

    Observations whose evidence underflows the denominator floor (1e-300)
    are dropped from the statistics with a warning; their b-rows are zero.
    """
    x = np.asarray(x, dtype=float)
    delta = np.asarray(delta)
    per_obs_pi = np.asarray(per_obs_pi, dtype=float)
    n, d = x.shape
    if delta.shape != (n, d):
        raise ValueError("delta shape must match x")
    if len(subs) != d:
        raise ValueError(f"expected {d} sub-intensity matrices, got {len(subs)}")
    p = subs[0].dim
    if any(s.dim != p for s in subs):
        raise ValueError("margins disagree on state-space size")
    if per_obs_pi.shape != (n, p):
        raise ValueError(f"per_obs_pi must be (n, p) = {(n, p)}")
    if not np.all(np.isfinite(x)) or (x.size and x.min() < 0.0):
        raise ValueError("x must be finite and >= 0")

    mats = []
    evidence = []
    for i, sub in enumerate(subs):
        e_i, a_i = _margin_kernels(sub, x[:, i], delta[:, i])
        mats.append(e_i)
        evidence.append(a_i)

    w = per_obs_pi.copy()
    for a_i in evidence:
        w *= a_i
    denom = w.sum(axis=1)
    valid = denom >= _DENOM_FLOOR
    if not np.all(valid):
        bad = np.flatnonzero(~valid)
        warnings.warn(
            f"evidence underflow for {bad.size} observation(s) "
            f"(rows {bad[:10].tolist()}{' ...' if bad.size > 10 else ''}); "
            "they are excluded from this iteration's statistics",
            RuntimeWarning,
        )
    if not np.any(valid):
        raise NumericalError("evidence underflowed for every observation")

    b = np.zeros((n, p))
    b[valid] = d * w[valid] / denom[valid, None]

    z = np.zeros((d, p))
    n_trans = np.zeros((d, p, p))
    n_exit = np.zeros((d, p))
    idx = np.flatnonzero(valid)
    offdiag = ~np.eye(p, dtype=bool)
    for i, sub in enumerate(subs):
        # posterior over the start state given the *other* margins
        c = per_obs_pi[idx].copy()
        for l in range(d):
            if l != i:
                c *= evidence[l][idx]
        c /= denom[idx, None]

        died = delta[idx, i].astype(bool)
        v = np.where(died[:, None], sub.exit_rates, np.ones(p))

        blocks = np.zeros((idx.size, 2 * p, 2 * p))
        blocks[:, :p, :p] = sub.matrix
        blocks[:, p:, p:] = sub.matrix
        blocks[:, :p, p:] = v[:, :, None] * c[:, None, :]
        blocks *= x[idx, i, None, None]
        integral = expm_batch(blocks)[:, :p, p:]  # (m, p, p)

        z[i] = np.einsum("mkk->k", integral)
        n_trans[i] = np.where(offdiag, sub.matrix * integral.sum(axis=0).T, 0.0)
        if np.any(died):
            n_exit[i] = sub.exit_rates * np.einsum(
                "mj,mjk->k", c[died], mats[i][idx][died]
            )
    # round tiny negatives from the block exponentials up to zero
    return SufficientStats(
        b=np.clip(b, 0.0, None),
        z=np.clip(z, 0.0, None),
        n_trans=np.clip(n_trans, 0.0, None),
        n_exit=np.clip(n_exit, 0.0, None),
    )


def r_step(b, covariates, gamma_init=None, *, grad_tol: float = 1e-8,
           max_iter: int = 200, coef_cap: float = 1e3):
    """Weighted multinomial-logistic update of the initial-vector link.

    Maximizes ``sum_m sum_k b[m, k] log softmax(A_m gamma')_k`` over the
    coefficient rows 1..p-1 (row 0 is the zero reference) by Newton iteration
    with step halving; the objective is concave. Coefficients are capped at
    ``coef_cap`` in absolute value, with a warning, when the weights are
    quasi-separated and the maximizer runs away.

    Returns ``(gamma, per_obs_pi)``.
    """
    b = np.asarray(b, dtype=float)
    a = np.asarray(covariates, dtype=float)
    n, p = b.shape
    if a.ndim != 2 or a.shape[0] != n:
        raise ValueError("covariates must be (n, g)")
    g = a.shape[1]
    if gamma_init is None:
        gamma = np.zeros((p, g))
    else:
        gamma = np.array(gamma_init, dtype=float)
        if gamma.shape != (p, g):
            raise ValueError(f"gamma_init must be ({p}, {g}), got {gamma.shape}")
        if np.any(gamma[0] != 0.0):
            raise ValueError("gamma_init row 0 must be zero (reference state)")
    if p == 1:
        return gamma, np.ones((n, 1))

    weight = b.sum(axis=1)  # (n,) ~= d

    def value_and_probs(gm):
        eta = a @ gm.T
        logp = eta - logsumexp(eta, axis=1, keepdims=True)
        return float((b * logp).sum()), np.exp(logp)

    cur, probs = value_and_probs(gamma)
    for _ in range(max_iter):
        resid = b - weight[:, None] * probs  # (n, p)
        grad = resid[:, 1:].T @ a  # (p-1, g)
        if np.max(np.abs(grad)) <= grad_tol:
            break

        pf = probs[:, 1:]  # (n, p-1)
        diag = np.einsum("m,mk,ma,mb->kab", weight, pf, a, a)
        cross = np.einsum("m,mk,ml,ma,mb->kalb", weight, pf, pf, a, a)
        neg_hess = -cross
        kk = np.arange(p - 1)
        neg_hess[kk, :, kk, :] += diag
        neg_hess = neg_hess.reshape((p - 1) * g, (p - 1) * g)

        try:
            direction = np.linalg.solve(neg_hess, grad.ravel())
        except np.linalg.LinAlgError:
            ridge = 1e-10 * max(np.max(np.diag(neg_hess)), 1.0)
            direction = np.linalg.solve(
                neg_hess + ridge * np.eye(neg_hess.shape[0]), grad.ravel()
            )
        direction = direction.reshape(p - 1, g)

        step = 1.0
        improved = False
        while step >= 1e-10:
            trial = gamma.copy()
            trial[1:] += step * direction
            new, new_probs = value_and_probs(trial)
            if new >= cur:
                gamma, cur, probs = trial, new, new_probs
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        if np.max(np.abs(gamma)) > coef_cap:
            warnings.warn(
                "initial-vector regression coefficients hit the cap "
                f"({coef_cap:g}); weights look quasi-separated",
                RuntimeWarning,
            )
            gamma = np.clip(gamma, -coef_cap, coef_cap)
            gamma[0] = 0.0
            _, probs = value_and_probs(gamma)
            break
    return gamma, probs


def m_step(stats: SufficientStats, structure, *, diag_floor: float = -1e-8):
    """Closed-form rate updates on the admissible pattern.

    ``t_ks = E[N_ks] / E[Z_k]`` and ``t_k = E[N_k] / E[Z_k]`` per margin;
    this maximizes the complete-data surrogate exactly. States with zero
    expected occupancy get all rates zero and their diagonal set to
    ``diag_floor`` (with a warning) so the matrix stays a valid generator
    block.
    """
    z = stats.z
    d, p = z.shape
    mask = structure.transition_mask()
    if structure.dim != p:
        raise ValueError(f"structure dimension {structure.dim} != stats dimension {p}")
    out = []
    for i in range(d):
        occupied = z[i] > 0.0
        if not np.all(occupied):
            silent = np.flatnonzero(~occupied)
            warnings.warn(
                f"margin {i}: states {silent.tolist()} have zero expected "
                "occupancy; their rates are zeroed and the diagonal floored",
                RuntimeWarning,
            )
        with np.errstate(divide="ignore", invalid="ignore"):
            trans = np.where(occupied[:, None] & mask, stats.n_trans[i] / z[i][:, None], 0.0)
            exits = np.where(occupied, stats.n_exit[i] / z[i], 0.0)
        matrix = trans.copy()
        diag = -(trans.sum(axis=1) + exits)
        dead = (~occupied) | (diag >= 0.0)
        diag[dead] = diag_floor
        matrix[np.arange(p), np.arange(p)] = diag
        out.append(SubIntensity(matrix))
    return out


def _age_scale_loglik(y, delta, per_obs_pi, subs, betas):
    """Observed log-likelihood with the transform Jacobians included.

    Returns (total, floored_rows): rows whose likelihood underflows 1e-300
    contribute log(1e-300) and are reported back to the caller.
    """
    n, d = y.shape
    lik = per_obs_pi.copy()
    for i, sub in enumerate(subs):
        beta = betas[i]
        with np.errstate(over="ignore"):
            x = np.expm1(beta * y[:, i]) / beta
        ok = np.isfinite(x)
        factors = np.zeros((n, sub.dim))
        if np.any(ok):
            mats = expm_batch(sub.matrix[None, :, :] * x[ok, None, None])
            died = delta[ok, i].astype(bool)
            vals = np.where(
                died[:, None],
                (mats @ sub.exit_rates) * np.exp(beta * y[ok, i])[:, None],
                mats.sum(axis=-1),
            )
            factors[ok] = vals
        lik *= factors
    rows = lik.sum(axis=1)
    floored = np.flatnonzero(~(rows >= _DENOM_FLOOR))
    safe = np.clip(rows, _DENOM_FLOOR, None)
    return float(np.log(safe).sum()), floored


def observed_loglik(obs: ObservationSet, model: MIPHModel) -> float:
    """Observed-data log-likelihood of ``model`` on ``obs``.

    Censored margins contribute survival factors, uncensored margins density
    factors (with the time-transform Jacobian). Rows with vanishing
    likelihood raise, reporting the offending row indices.
    """
    if model.n_margins != obs.n_margins:
        raise ValueError(
            f"model has {model.n_margins} margins, data has {obs.n_margins}"
        )
    per_obs_pi = model.initial_vectors(obs.covariates)
    subs = [m.sub for m in model.margins]
    betas = np.array([m.transform.beta for m in model.margins])
    total, floored = _age_scale_loglik(obs.y, obs.delta, per_obs_pi, subs, betas)
    if floored.size:
        raise NumericalError(
            f"likelihood underflowed to 0 for rows {floored[:10].tolist()}"
            f"{' ...' if floored.size > 10 else ''}"
        )
    return total


def i_step(obs: ObservationSet, per_obs_pi, subs, betas_init, *,
           mode: str = "joint", log_bounds=(-5.0, 7.0), maxfev: int = 200,
           xatol: float = 1e-4, fatol: float = 1e-7) -> np.ndarray:
    """Update the transform parameters by direct search on the observed
    log-likelihood over log(beta).

    ``mode="joint"`` runs one Nelder-Mead search over all margins at once
    (box-bounded in log space); ``mode="coordinate"`` runs a bounded scalar
    search margin by margin. Either way the incumbent is kept whenever the
    search fails to improve on it, so the step never lowers the likelihood.
    """
    betas_init = _as_betas(betas_init, obs.n_margins)
    per_obs_pi = np.asarray(per_obs_pi, dtype=float)
    lo, hi = float(log_bounds[0]), float(log_bounds[1])

    def negative(log_betas):
        betas = np.exp(np.clip(log_betas, lo, hi))
        total, _ = _age_scale_loglik(obs.y, obs.delta, per_obs_pi, subs, betas)
        return -total

    x0 = np.clip(np.log(betas_init), lo, hi)
    f0 = negative(x0)
    if not np.isfinite(f0):
        raise NumericalError("transform objective is non-finite at the incumbent")

    if mode == "joint":
        # explicit warm simplex: scipy's default shrinks to ~2.5e-4 steps
        # around zero coordinates, which stalls the search at log(beta) = 0
        simplex = np.tile(x0, (x0.size + 1, 1))
        for k in range(x0.size):
            simplex[k + 1, k] = np.clip(x0[k] + 0.1, lo, hi)
        res = optimize.minimize(
            negative, x0, method="Nelder-Mead",
            bounds=[(lo, hi)] * x0.size,
            options={"maxfev": maxfev, "xatol": xatol, "fatol": fatol,
                     "initial_simplex": simplex},
        )
        if np.isfinite(res.fun) and res.fun < f0:
            return np.exp(np.clip(res.x, lo, hi))
        return betas_init
    if mode == "coordinate":
        log_betas = x0.copy()
        best = f0
        for i in range(log_betas.size):
            def scalar(v, i=i):
                trial = log_betas.copy()
                trial[i] = v
                return negative(trial)

            res = optimize.minimize_scalar(
                scalar, bounds=(lo, hi), method="bounded",
                options={"xatol": xatol},
            )
            if np.isfinite(res.fun) and res.fun < best:
                log_betas[i] = res.x
                best = res.fun
        return np.exp(log_betas)
    raise ValueError(f"unknown mode {mode!r}")


def _make_structure(name: str, p: int):
    return CoxianStructure(p) if name == "coxian" else GeneralStructure(p)


def _initial_sub_intensities(obs, structure, betas, rng):
    """Admissible random rates, rescaled so the mean absorption time from the
    middle state matches the sample mean of the uncensored transformed times.
    Keeps iteration 1 on a sane numeric scale."""
    x = transform_data(obs, betas)
    anchor = (structure.dim + 1) // 2 - 1  # middle state, 0-based
    subs = []
    for i in range(obs.n_margins):
        died = obs.delta[:, i].astype(bool)
        sample = x[died, i] if np.any(died) else x[:, i]
        target = float(sample.mean())
        if not np.isfinite(target) or target <= 0.0:
            target = 1.0
        subs.append(_scale_to_mean(random_sub_intensity(structure, rng), anchor, target))
    return subs


def fit(obs: ObservationSet, config: FitConfig) -> FitReport:
    """Run the EM loop and return the fitted model plus its trace.

    Deterministic given ``(obs, config)``: the only randomness is the
    rate initialization, seeded by ``config.seed``.
    """
    n, d = obs.y.shape
    structure = _make_structure(config.structure, config.p)
    rng = np.random.default_rng(config.seed)
    betas = _as_betas(config.beta_init, d)
    subs = _initial_sub_intensities(obs, structure, betas, rng)
    gamma = np.zeros((config.p, obs.covariates.shape[1]))
    per_obs_pi = np.full((n, config.p), 1.0 / config.p)

    trace = []
    converged = False
    prev = None
    for it in range(1, config.max_iterations + 1):
        try:
            x = transform_data(obs, betas)
            stats = e_step(x, obs.delta, per_obs_pi, subs)
            gamma, per_obs_pi = r_step(
                stats.b, obs.covariates, gamma,
                grad_tol=config.r_step_grad_tol,
                coef_cap=config.r_step_coef_cap,
            )
            subs = m_step(stats, structure, diag_floor=config.m_step_diag_floor)
            if config.i_step_every and it % config.i_step_every == 0:
                betas = i_step(
                    obs, per_obs_pi, subs, betas,
                    mode=config.i_step_mode,
                    log_bounds=config.log_beta_bounds,
                    maxfev=config.i_step_maxfev,
                )
        except NumericalError as err:
            raise NumericalError(f"EM iteration {it}: {err}") from err

        ll, floored = _age_scale_loglik(obs.y, obs.delta, per_obs_pi, subs, betas)
        if floored.size:
            warnings.warn(
                f"iteration {it}: {floored.size} row(s) at the likelihood floor",
                RuntimeWarning,
            )
        trace.append(ll)
        if (
            config.loglik_tolerance is not None
            and prev is not None
            and abs(ll - prev) < config.loglik_tolerance * n
        ):
            converged = True
            break
        prev = ll

    margins = tuple(
        Margin(sub=subs[i], transform=GompertzTransform(float(betas[i])))
        for i in range(d)
    )
    model = MIPHModel(margins=margins, gamma=gamma)
    return FitReport(
        model=model,
        loglik_trace=np.asarray(trace),
        iterations=len(trace),
        converged=converged,
    )
