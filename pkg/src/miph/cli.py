"""Command-line interface.

Subcommands::

    miph fit       DATA.csv  --p 10 [--output DIR] ...
    miph eval      MODEL.json --ages 63,63 --points "12,30;30,12" | --grid 0:40:41
    miph measures  MODEL.json --ages 63,63 [--cr-grid 0:29:30] ...
    miph simulate  MODEL.json --n 1000 --ages 63,63 [--censoring-rate 0.2]
    miph beran     DATA.csv  --ages 63,63 [--bandwidth 0.001]

Times and ages are given and reported in years; the conversion to the
internal scale (years / 100) happens inside. All outputs are CSV/JSON text
(written to --output or stdout), never images. Exit codes: 0 success,
2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import sys
from pathlib import Path

import numpy as np

from . import dataio, estimation, model as model_ops
from .exceptions import DataValidationError, NumericalError

_AGE_RANGE_SCALED = (0.0, 1.5)


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _parse_pair(text: str, what: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise DataValidationError(f"{what} must be two comma-separated numbers, got {text!r}")
    try:
        a, b = float(parts[0]), float(parts[1])
    except ValueError:
        raise DataValidationError(f"{what} must be numeric, got {text!r}") from None
    if not (np.isfinite(a) and np.isfinite(b)) or a < 0 or b < 0:
        raise DataValidationError(f"{what} must be finite and >= 0")
    return a, b


def _parse_points(text: str) -> np.ndarray:
    pts = [_parse_pair(chunk, "point") for chunk in text.split(";") if chunk.strip()]
    if not pts:
        raise DataValidationError("no evaluation points given")
    return np.asarray(pts)


def _parse_grid(text: str, what: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise DataValidationError(f"{what} must look like start:stop:num, got {text!r}")
    try:
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise DataValidationError(f"{what} must be numeric, got {text!r}") from None
    if num < 1 or stop < start or start < 0:
        raise DataValidationError(f"{what}: need 0 <= start <= stop and num >= 1")
    return np.linspace(start, stop, num)


def _check_age_range(scaled_ages) -> None:
    lo, hi = _AGE_RANGE_SCALED
    for a in np.atleast_1d(scaled_ages):
        if not lo <= a <= hi:
            _warn(
                f"age {a * dataio.TIME_SCALE:g} years is outside the calibrated "
                f"range [{lo * dataio.TIME_SCALE:g}, {hi * dataio.TIME_SCALE:g}]; "
                "results are extrapolations"
            )


def _initial_vector(mdl, ages_arg: str | None) -> np.ndarray:
    """Resolve the initial vector from --ages (gamma models) or the model."""
    if mdl.gamma is not None:
        if ages_arg is None:
            raise DataValidationError(
                "model links initial vectors to covariates; pass --ages A1,A2"
            )
        a1, a2 = _parse_pair(ages_arg, "--ages")
        scaled = np.array([a1, a2]) / dataio.TIME_SCALE
        _check_age_range(scaled)
        if mdl.gamma.shape[1] != 4:
            raise DataValidationError(
                "model expects a custom design matrix; --ages only supports "
                "the standard (1, age1, age2, age1*age2) design"
            )
        return mdl.initial_vectors(dataio.standard_design(scaled[:1], scaled[1:]))[0]
    if mdl.fixed_pi is not None:
        if ages_arg is not None:
            _warn("model carries a fixed initial vector; --ages ignored")
        return mdl.fixed_pi
    raise DataValidationError("model carries neither coefficients nor an initial vector")


@contextlib.contextmanager
def _thread_limit(threads):
    if threads is None:
        yield
        return
    if threads < 1:
        raise DataValidationError("--threads must be >= 1")
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover - declared dependency
        _warn("threadpoolctl unavailable; --threads ignored")
        yield
        return
    with threadpool_limits(limits=int(threads)):
        yield


@contextlib.contextmanager
def _open_output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _cmd_fit(args) -> int:
    obs = dataio.load_csv(args.data)
    tolerance = None if args.fixed_iterations else args.tolerance
    config = estimation.FitConfig(
        p=args.p,
        structure=args.structure,
        max_iterations=args.iterations,
        loglik_tolerance=tolerance,
        seed=args.seed,
        beta_init=args.beta_init,
        i_step_every=args.i_step_every,
        i_step_mode=args.i_step_mode,
    )
    report = estimation.fit(obs, config)

    out_dir = Path(args.output if args.output is not None else ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    model_path = out_dir / "model.json"
    trace_path = out_dir / "loglik.csv"
    dataio.save_model(report.model, model_path)
    with open(trace_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "loglik"])
        for i, ll in enumerate(report.loglik_trace, start=1):
            writer.writerow([i, format(ll, ".17g")])

    betas = ", ".join(f"{m.transform.beta:.6g}" for m in report.model.margins)
    print(f"fitted {report.model.dim}-state model on {obs.n} observations")
    print(f"iterations: {report.iterations} (converged: {report.converged})")
    print(f"final log-likelihood: {report.final_loglik:.6f}")
    print(f"transform parameters: {betas}")
    print(f"model written to {model_path}, trace to {trace_path}")
    return 0


def _cmd_eval(args) -> int:
    mdl = dataio.load_model(args.model)
    if mdl.n_margins != 2:
        raise DataValidationError("eval expects a bivariate model")
    pi = _initial_vector(mdl, args.ages)
    if args.points is None and args.grid is None:
        raise DataValidationError("pass --points or --grid")
    if args.points is not None:
        pts_years = _parse_points(args.points)
    else:
        axis = _parse_grid(args.grid, "--grid")
        g1, g2 = np.meshgrid(axis, axis, indexing="ij")
        pts_years = np.column_stack([g1.ravel(), g2.ravel()])
    pts = pts_years / dataio.TIME_SCALE

    dens = model_ops.joint_density(mdl, pi, pts) / dataio.TIME_SCALE**2
    surv = model_ops.joint_survival(mdl, pi, pts)
    cdf = model_ops.joint_cdf(mdl, pi, pts)
    with _open_output(args.output) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time1", "time2", "density", "survival", "cdf"])
        for k in range(pts.shape[0]):
            writer.writerow(
                [format(pts_years[k, 0], "g"), format(pts_years[k, 1], "g"),
                 format(dens[k], ".12g"), format(surv[k], ".12g"),
                 format(cdf[k], ".12g")]
            )
    return 0


def _cmd_measures(args) -> int:
    mdl = dataio.load_model(args.model)
    if mdl.n_margins != 2:
        raise DataValidationError("measures expects a bivariate model")
    pi = _initial_vector(mdl, args.ages)
    cr_grid = _parse_grid(args.cr_grid, "--cr-grid")
    psi_grid = _parse_grid(args.psi_grid, "--psi-grid")

    rows = [
        ("kendall_tau", "", "", model_ops.kendall_tau(mdl, pi)),
        ("spearman_rho", "", "", model_ops.spearman_rho(mdl, pi)),
    ]
    for u in psi_grid:
        val = model_ops.psi1(mdl, pi, u / dataio.TIME_SCALE, u / dataio.TIME_SCALE)
        rows.append(("psi1", format(u, "g"), format(u, "g"), val))
    for margin in (0, 1):
        base = model_ops.conditional_expectation(mdl, pi, margin)
        for u in psi_grid:
            num = model_ops.conditional_expectation(
                mdl, pi, margin, given=(1 - margin, u / dataio.TIME_SCALE)
            )
            rows.append(
                (f"psi2_margin{margin + 1}", "", format(u, "g"), num / base)
            )
    for u in cr_grid:
        val = model_ops.cross_ratio(mdl, pi, u / dataio.TIME_SCALE)
        rows.append(("cross_ratio", format(u, "g"), format(u, "g"), val))

    with _open_output(args.output) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["measure", "time1", "time2", "value"])
        for name, y1, y2, val in rows:
            writer.writerow([name, y1, y2, format(val, ".12g")])
    return 0


def _cmd_simulate(args) -> int:
    mdl = dataio.load_model(args.model)
    if mdl.n_margins != 2:
        raise DataValidationError("simulate expects a bivariate model")
    if (args.ages is None) == (args.covariates is None):
        raise DataValidationError("pass exactly one of --ages or --covariates")

    if args.ages is not None:
        if args.n is None:
            raise DataValidationError("--n is required with --ages")
        a1, a2 = _parse_pair(args.ages, "--ages")
        scaled = np.array([a1, a2]) / dataio.TIME_SCALE
        _check_age_range(scaled)
        n = args.n

        def sampler(rng, size):
            return dataio.standard_design(
                np.full(size, scaled[0]), np.full(size, scaled[1])
            )
    else:
        ages = _read_age_csv(args.covariates)
        n = ages.shape[0] if args.n is None else args.n
        if n != ages.shape[0]:
            raise DataValidationError(
                f"--n {n} does not match {ages.shape[0]} covariate rows"
            )
        scaled = ages / dataio.TIME_SCALE
        _check_age_range(scaled.ravel())

        def sampler(rng, size):
            return dataio.standard_design(scaled[:, 0], scaled[:, 1])

    if mdl.gamma is not None and mdl.gamma.shape[1] != 4:
        raise DataValidationError(
            "model expects a custom design; the CLI only builds the standard one"
        )
    obs = dataio.generate_synthetic(mdl, sampler, args.censoring_rate, n, args.seed)
    if args.output is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["time1", "time2", "delta1", "delta2", "age1", "age2"])
        for m in range(obs.n):
            writer.writerow(
                [format(obs.y[m, 0] * dataio.TIME_SCALE, ".17g"),
                 format(obs.y[m, 1] * dataio.TIME_SCALE, ".17g"),
                 int(obs.delta[m, 0]), int(obs.delta[m, 1]),
                 format(obs.covariates[m, 1] * dataio.TIME_SCALE, ".17g"),
                 format(obs.covariates[m, 2] * dataio.TIME_SCALE, ".17g")]
            )
    else:
        dataio.write_csv(args.output, obs)
        print(f"wrote {obs.n} rows to {args.output}")
    return 0


def _read_age_csv(path) -> np.ndarray:
    """Two-column helper format for simulate: age1,age2 in years."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataValidationError(f"{path}: file is empty") from None
        for col in ("age1", "age2"):
            if col not in header:
                raise DataValidationError(f"{path}: missing column {col}")
        i1, i2 = header.index("age1"), header.index("age2")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not any(cell.strip() for cell in row):
                continue
            try:
                rows.append([float(row[i1]), float(row[i2])])
            except (ValueError, IndexError):
                raise DataValidationError(
                    f"{path}, line {lineno}: expected numeric age1,age2"
                ) from None
    if not rows:
        raise DataValidationError(f"{path}: no data rows")
    ages = np.asarray(rows)
    if not np.all(np.isfinite(ages)) or ages.min() < 0:
        raise DataValidationError(f"{path}: ages must be finite and >= 0")
    return ages


def _cmd_beran(args) -> int:
    obs = dataio.load_csv(args.data)
    a1, a2 = _parse_pair(args.ages, "--ages")
    query = np.array([a1, a2]) / dataio.TIME_SCALE
    _check_age_range(query)
    bandwidth = args.bandwidth
    if args.bandwidth_unit == "years":
        bandwidth = bandwidth / dataio.TIME_SCALE
    grid_years = _parse_grid(args.grid, "--grid")
    grid = grid_years / dataio.TIME_SCALE
    ages = obs.covariates[:, 1:3]

    margins = (0, 1) if args.margin == "both" else (int(args.margin) - 1,)
    with _open_output(args.output) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["margin", "time", "cdf", "survival"])
        for margin in margins:
            cdf = dataio.beran_cdf(
                obs.y[:, margin], obs.delta[:, margin], ages, query, bandwidth, grid
            )
            for t_years, v in zip(grid_years, cdf):
                writer.writerow(
                    [margin + 1, format(t_years, "g"),
                     format(v, ".12g"), format(1.0 - v, ".12g")]
                )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="miph",
        description="Joint lifetime models of multivariate phase type.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0,
                       help="random seed where the command draws anything")
        p.add_argument("--threads", type=int, default=None,
                       help="cap BLAS threads (default: machine parallelism)")
        p.add_argument("--output", default=None, help="output file/directory")

    p_fit = sub.add_parser("fit", help="estimate a model from a lifetime CSV")
    p_fit.add_argument("data", help="CSV with time1,time2,delta1,delta2,age1,age2")
    p_fit.add_argument("--p", type=int, required=True, help="number of states")
    p_fit.add_argument("--structure", choices=("coxian", "general"), default="coxian")
    p_fit.add_argument("--iterations", type=int, default=1000)
    p_fit.add_argument("--tolerance", type=float, default=1e-7,
                       help="per-observation log-likelihood stopping tolerance")
    p_fit.add_argument("--fixed-iterations", action="store_true",
                       help="disable the tolerance rule; run --iterations exactly")
    p_fit.add_argument("--beta-init", type=float, default=1.0)
    p_fit.add_argument("--i-step-every", type=int, default=1,
                       help="how often to update the transforms (0 = frozen)")
    p_fit.add_argument("--i-step-mode", choices=("joint", "coordinate"),
                       default="joint")
    common(p_fit)
    p_fit.set_defaults(func=_cmd_fit)

    p_eval = sub.add_parser("eval", help="evaluate density/survival/CDF")
    p_eval.add_argument("model", help="model JSON")
    p_eval.add_argument("--ages", default=None, help="couple ages in years, e.g. 63,63")
    p_eval.add_argument("--points", default=None,
                        help='times in years: "t1,t2;t1,t2;..."')
    p_eval.add_argument("--grid", default=None,
                        help="years start:stop:num, evaluated on the square grid")
    common(p_eval)
    p_eval.set_defaults(func=_cmd_eval)

    p_meas = sub.add_parser("measures", help="dependence measures and curves")
    p_meas.add_argument("model", help="model JSON")
    p_meas.add_argument("--ages", default=None, help="couple ages in years")
    p_meas.add_argument("--cr-grid", default="0:29:30",
                        help="cross-ratio diagonal grid, years start:stop:num")
    p_meas.add_argument("--psi-grid", default="0:29:30",
                        help="psi curves grid, years start:stop:num")
    common(p_meas)
    p_meas.set_defaults(func=_cmd_measures)

    p_sim = sub.add_parser("simulate", help="draw synthetic censored data")
    p_sim.add_argument("model", help="model JSON")
    p_sim.add_argument("--n", type=int, default=None, help="number of couples")
    p_sim.add_argument("--censoring-rate", type=float, default=0.0)
    p_sim.add_argument("--ages", default=None,
                       help="constant couple ages in years, e.g. 63,63")
    p_sim.add_argument("--covariates", default=None,
                       help="CSV with age1,age2 columns (years), one row per couple")
    common(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_ber = sub.add_parser("beran", help="conditional Kaplan-Meier curves")
    p_ber.add_argument("data", help="CSV with time1,time2,delta1,delta2,age1,age2")
    p_ber.add_argument("--ages", required=True, help="query ages in years")
    p_ber.add_argument("--bandwidth", type=float, default=0.001)
    p_ber.add_argument("--bandwidth-unit", choices=("scaled", "years"),
                       default="scaled",
                       help="units of --bandwidth (default: internal scale)")
    p_ber.add_argument("--margin", choices=("1", "2", "both"), default="both")
    p_ber.add_argument("--grid", default="0:40:81",
                       help="evaluation times, years start:stop:num")
    common(p_ber)
    p_ber.set_defaults(func=_cmd_beran)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _thread_limit(args.threads):
            return args.func(args)
    except (NumericalError, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    except (DataValidationError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
