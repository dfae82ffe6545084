"""File formats, the conditional Kaplan-Meier estimator, and simulation.

CSV data files are bivariate with the fixed header
``time1,time2,delta1,delta2,age1,age2``: observed times and entry ages in
years, censoring indicators in {0, 1}. On load, times and ages are divided by
100 (the internal scale keeps matrix exponentials well-conditioned) and the
regression design ``(1, age1, age2, age1 * age2)`` is assembled from the
scaled ages.

Models travel as JSON documents with ``"format": "miph-v1"`` carrying the
sub-intensity matrices, transform parameters, and either regression
coefficients or a fixed initial vector.
"""

from __future__ import annotations

import csv
import json

import numpy as np
from scipy.optimize import brentq

from .estimation import ObservationSet
from .exceptions import DataValidationError, NumericalError
from .model import Margin, MIPHModel, sample_joint_rows
from .phasetype import GompertzTransform, SubIntensity

__all__ = [
    "TIME_SCALE",
    "load_csv",
    "write_csv",
    "standard_design",
    "save_model",
    "load_model",
    "beran_cdf",
    "generate_synthetic",
]

TIME_SCALE = 100.0
_CSV_COLUMNS = ("time1", "time2", "delta1", "delta2", "age1", "age2")
_FORMAT = "miph-v1"


def standard_design(age1, age2) -> np.ndarray:
    """Design matrix ``(1, age1, age2, age1 * age2)`` from scaled ages."""
    age1 = np.asarray(age1, dtype=float)
    age2 = np.asarray(age2, dtype=float)
    ones = np.ones_like(age1)
    return np.column_stack([ones, age1, age2, age1 * age2])


def load_csv(path) -> ObservationSet:
    """Read a bivariate lifetime CSV (times/ages in years) into an
    :class:`~miph.estimation.ObservationSet` on the internal scale.

    Raises :class:`DataValidationError` naming the file line for any
    non-numeric cell, negative time/age, or indicator outside {0, 1}.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataValidationError(f"{path}: file is empty") from None
        missing = [c for c in _CSV_COLUMNS if c not in header]
        if missing:
            raise DataValidationError(f"{path}: missing columns {missing}")
        where = {c: header.index(c) for c in _CSV_COLUMNS}

        records = []
        for lineno, row in enumerate(reader, start=2):
            if not any(cell.strip() for cell in row):
                continue  # blank line
            if len(row) != len(header):
                raise DataValidationError(
                    f"{path}, line {lineno}: expected {len(header)} fields, "
                    f"got {len(row)}"
                )
            values = {}
            for col in _CSV_COLUMNS:
                cell = row[where[col]].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise DataValidationError(
                        f"{path}, line {lineno}, column {col}: "
                        f"non-numeric value {cell!r}"
                    ) from None
                if not np.isfinite(v):
                    raise DataValidationError(
                        f"{path}, line {lineno}, column {col}: non-finite value"
                    )
                values[col] = v
            for col in ("time1", "time2", "age1", "age2"):
                if values[col] < 0.0:
                    raise DataValidationError(
                        f"{path}, line {lineno}, column {col}: negative value"
                    )
            for col in ("delta1", "delta2"):
                if values[col] not in (0.0, 1.0):
                    raise DataValidationError(
                        f"{path}, line {lineno}, column {col}: indicator must "
                        f"be 0 or 1, got {values[col]!r}"
                    )
            records.append([values[c] for c in _CSV_COLUMNS])

    if not records:
        raise DataValidationError(f"{path}: no data rows")
    data = np.asarray(records)
    y = data[:, 0:2] / TIME_SCALE
    delta = data[:, 2:4].astype(np.int8)
    ages = data[:, 4:6] / TIME_SCALE
    return ObservationSet(y=y, delta=delta,
                          covariates=standard_design(ages[:, 0], ages[:, 1]))


def write_csv(path, obs: ObservationSet) -> None:
    """Write an ObservationSet back to the bivariate CSV schema (years).

    Floats are written with 17 significant digits, so a load/write cycle
    round-trips every field to full double precision.
    """
    if obs.n_margins != 2:
        raise DataValidationError("CSV schema is bivariate; data has "
                                  f"{obs.n_margins} margins")
    a = obs.covariates
    if a.shape[1] != 4 or not np.array_equal(a[:, 3], a[:, 1] * a[:, 2]):
        raise DataValidationError(
            "only the standard design (1, age1, age2, age1*age2) can be "
            "written back to CSV"
        )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for m in range(obs.n):
            writer.writerow(
                [format(obs.y[m, 0] * TIME_SCALE, ".17g"),
                 format(obs.y[m, 1] * TIME_SCALE, ".17g"),
                 int(obs.delta[m, 0]),
                 int(obs.delta[m, 1]),
                 format(a[m, 1] * TIME_SCALE, ".17g"),
                 format(a[m, 2] * TIME_SCALE, ".17g")]
            )


def save_model(model: MIPHModel, path) -> None:
    """Serialize a model to the versioned JSON document format."""
    doc = {
        "format": _FORMAT,
        "time_scale": TIME_SCALE,
        "p": model.dim,
        "d": model.n_margins,
        "margins": [
            {
                "sub_intensity": m.sub.matrix.tolist(),
                "beta": m.transform.beta,
            }
            for m in model.margins
        ],
        "gamma": None if model.gamma is None else model.gamma.tolist(),
        "pi": None if model.fixed_pi is None else model.fixed_pi.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_model(path) -> MIPHModel:
    """Load a model saved by :func:`save_model`; validates the format tag."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise DataValidationError(f"{path}: not valid JSON ({err})") from None
    if not isinstance(doc, dict) or doc.get("format") != _FORMAT:
        raise DataValidationError(
            f"{path}: expected a {_FORMAT!r} document, got format "
            f"{doc.get('format')!r}" if isinstance(doc, dict)
            else f"{path}: expected a JSON object"
        )
    try:
        margins = tuple(
            Margin(
                sub=SubIntensity(np.asarray(m["sub_intensity"], dtype=float)),
                transform=GompertzTransform(float(m["beta"])),
            )
            for m in doc["margins"]
        )
        gamma = doc.get("gamma")
        pi = doc.get("pi")
        return MIPHModel(
            margins=margins,
            gamma=None if gamma is None else np.asarray(gamma, dtype=float),
            fixed_pi=None if pi is None else np.asarray(pi, dtype=float),
        )
    except (KeyError, TypeError, ValueError) as err:
        raise DataValidationError(f"{path}: malformed model document: {err}") from None


def beran_cdf(times, deltas, covariates, query, bandwidth: float, t):
    """Conditional distribution function by kernel-weighted product limit.

    ``F(t | a) = 1 - prod_{i: x_(i) <= t} (1 - delta_(i) w_(i) / W_(i))``
    where ``w_i`` is a Gaussian kernel weight in the covariates
    (``exp(-||a - A_i||^2 / (2 b^2))``; the normalizing constant cancels) and
    ``W_i`` sums the weights of subjects still at risk. Ties are ordered
    uncensored-first, original order within; with constant covariates, any
    bandwidth reduces the estimator to the Kaplan-Meier product limit.

    Parameters
    ----------
    times, deltas : (n,) array_like
    covariates : (n,) or (n, q) array_like
        Kernel covariates (e.g. scaled entry ages), *not* a design matrix.
    query : scalar or (q,) array_like
        Covariate point to condition on.
    bandwidth : float
        Kernel bandwidth b > 0, in the covariates' units.
    t : scalar or array_like
        Evaluation time(s); values below the smallest observation give 0.
    """
    times = np.asarray(times, dtype=float)
    deltas = np.asarray(deltas)
    cov = np.asarray(covariates, dtype=float)
    if cov.ndim == 1:
        cov = cov[:, None]
    n = times.shape[0]
    if times.ndim != 1 or n < 1:
        raise ValueError("times must be a nonempty 1-d array")
    if deltas.shape != (n,) or cov.shape[0] != n:
        raise ValueError("times, deltas and covariates must agree on n")
    if not np.all(np.isin(deltas, (0, 1))):
        raise ValueError("deltas entries must be 0 or 1")
    q = np.atleast_1d(np.asarray(query, dtype=float))
    if q.shape != (cov.shape[1],):
        raise ValueError(f"query must have {cov.shape[1]} coordinates")
    bandwidth = float(bandwidth)
    if not (np.isfinite(bandwidth) and bandwidth > 0.0):
        raise ValueError(f"bandwidth must be > 0, got {bandwidth}")

    dist2 = (((cov - q) / bandwidth) ** 2).sum(axis=1)
    with np.errstate(under="ignore"):
        weights = np.exp(-0.5 * dist2)
    if not np.any(weights > 0.0):
        raise NumericalError(
            "all kernel weights underflowed; increase the bandwidth or move "
            "the query point closer to the data"
        )

    # event order: time ascending, uncensored before censored at ties,
    # original order as the final tiebreak
    order = np.lexsort((np.arange(n), 1 - deltas.astype(np.int64), times))
    ts = times[order]
    ws = weights[order]
    ds = deltas[order].astype(bool)
    at_risk = np.cumsum(ws[::-1])[::-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        factors = np.where(ds & (at_risk > 0.0), 1.0 - ws / at_risk, 1.0)
    surv_steps = np.cumprod(factors)

    t_arr = np.asarray(t, dtype=float)
    idx = np.searchsorted(ts, t_arr, side="right")
    flat = np.concatenate([[1.0], surv_steps])
    vals = 1.0 - flat[idx]
    return float(vals) if np.ndim(t) == 0 else vals


def generate_synthetic(model: MIPHModel, covariate_sampler, censoring_rate: float,
                       n: int, seed: int) -> ObservationSet:
    """Simulate right-censored joint lifetimes from a model.

    ``covariate_sampler(rng, n)`` must return an (n, g) design matrix with a
    leading 1-column, matched to the model's coefficient width. Censoring
    times are independent exponentials whose common rate is calibrated by
    root finding so the expected censored fraction over all margins equals
    ``censoring_rate``. Deterministic given ``seed``.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    censoring_rate = float(censoring_rate)
    if not (0.0 <= censoring_rate < 1.0):
        raise ValueError(f"censoring_rate must be in [0, 1), got {censoring_rate}")
    rng = np.random.default_rng(seed)
    design = np.asarray(covariate_sampler(rng, n), dtype=float)
    if design.ndim != 2 or design.shape[0] != n:
        raise ValueError(f"covariate sampler must return (n, g), got {design.shape}")
    pi_rows = model.initial_vectors(design)
    y = sample_joint_rows(model, pi_rows, rng)

    if censoring_rate == 0.0:
        delta = np.ones_like(y, dtype=np.int8)
        return ObservationSet(y=y, delta=delta, covariates=design)

    flat = y.ravel()

    def censored_fraction(rate):
        return float(np.mean(-np.expm1(-rate * flat))) - censoring_rate

    rate = brentq(censored_fraction, 1e-12, 1e12, xtol=1e-14, rtol=1e-12)
    cens = rng.exponential(1.0 / rate, size=y.shape)
    delta = (y <= cens).astype(np.int8)
    return ObservationSet(y=np.minimum(y, cens), delta=delta, covariates=design)
