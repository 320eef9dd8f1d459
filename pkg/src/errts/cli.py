"""``errts`` command-line driver.

Exit codes: 0 success, 1 data error, 2 model or bound error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from errts import __version__
from errts.corrected import block_bootstrap, fit_corrected
from errts.error_models import TAU_A, ErrorModel, contaminate, identity_error, scale_from_tau
from errts.estimation import ArModel, fit_ee, fit_ls
from errts.exceptions import DataError, ModelError
from errts.forecasting import adjust_initials, make_forecast, to_levels
from errts.io import EpidemicTable, bundled_dataset, ingest, mortality_rate
from errts.montecarlo import SimSpec, simulate_ar
from errts.naive import naive_limit_arp, omega1, omega2
from errts.pipeline import SensitivitySpec, analyze, build_error, render, wald_p_value
from errts.selection import adf_test, aic, screen, select_lag
from errts.series import Series, autocov_summary, difference

log = logging.getLogger("errts")

COMMANDS = ("fit", "naive", "correct", "forecast", "sensitivity", "simulate", "adf", "select")
DEFAULT_GRIDS = {"additive": (0.1, 0.2), "multiplicative": (0.3, 0.6)}


class _Parser(argparse.ArgumentParser):
    """Report usage errors as data errors (exit code 1)."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise DataError(message)


def _lag_arg(text: str) -> int | None:
    if str(text) == "auto":
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("lag must be positive")
    return value


def _diff_arg(text: str) -> int | None:
    if str(text) == "auto":
        return None
    if str(text) in ("0", "1"):
        return int(text)
    raise argparse.ArgumentTypeError("expected auto, 0 or 1")


def _float_list(text: str | Sequence[float]) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    try:
        return tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common_parser() -> argparse.ArgumentParser:
    c = argparse.ArgumentParser(add_help=False)
    g = c.add_argument_group("data")
    g.add_argument("--input", help="CSV with date,cases,deaths or date,value (default: bundled synthetic data)")
    g.add_argument("--definition", type=int, choices=(1, 2, 3), default=1, help="mortality-rate definition")
    g.add_argument("--count-basis", choices=("cumulative", "daily"), default="cumulative")
    g.add_argument("--diff", type=_diff_arg, default=None, help="differencing order: auto, 0 or 1")
    g.add_argument("--lag", type=_lag_arg, default=None, help="AR order or auto")
    g.add_argument("--max-lag", type=int, default=5, help="largest lag considered by auto selection")
    e = c.add_argument_group("measurement error")
    e.add_argument("--error", choices=("additive", "multiplicative"))
    e.add_argument("--alpha0", type=float, default=0.0)
    e.add_argument("--alpha1", type=float)
    e.add_argument("--sigma-e2", type=float, default=0.0)
    e.add_argument("--beta0", type=float)
    e.add_argument("--sigma-u2", type=float, default=0.0)
    e.add_argument("--u-dist", choices=("lognormal", "gamma"), default="lognormal")
    e.add_argument("--tau-a", type=float, help="set alpha1 or beta0 to 1/(1 - tau_a)")
    e.add_argument("--grid", type=_float_list, help="comma-separated error variances")
    a = c.add_argument_group("analysis")
    a.add_argument("--horizon", type=int, default=5)
    a.add_argument("--level", type=float, default=0.95)
    a.add_argument("--boot-reps", type=int, default=1000)
    a.add_argument("--block-len", type=int)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--interval-scale", choices=("sqrt", "literal"), default="sqrt")
    a.add_argument("--method", choices=("ls", "ee"), default="ls", help="estimator for `fit`")
    s = c.add_argument_group("simulation")
    s.add_argument("--phi", type=_float_list, help="AR coefficients for `simulate`")
    s.add_argument("--phi0", type=float, default=0.0)
    s.add_argument("--sigma-eps2", type=float, default=1.0)
    s.add_argument("--length", type=int, default=200)
    s.add_argument("--start", default="2020-01-01", help="date of the first simulated value")
    o = c.add_argument_group("output")
    o.add_argument("--out", help="output file (default: stdout)")
    o.add_argument("--format", choices=("json", "text", "csv"), default="json")
    o.add_argument("--config", help="JSON file of option values; command-line flags take precedence")
    o.add_argument("-v", "--verbose", action="store_true")
    return c


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = _Parser(prog="errts", description="Autoregressive analysis of series observed with measurement error.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "fit": "naive AR fit of the series",
        "naive": "predicted naive limits versus the observed naive fit",
        "correct": "error-corrected fit with block-bootstrap standard errors",
        "forecast": "h-step forecasts with error-adjusted intervals",
        "sensitivity": "naive and corrected analyses over an error-variance grid",
        "simulate": "simulate an AR series, optionally contaminated",
        "adf": "augmented Dickey-Fuller screening",
        "select": "AIC lag selection",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        cfg = json.loads(Path(known.config).read_text())
    except OSError as exc:
        raise DataError(f"cannot read config {known.config}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"config {known.config}: invalid JSON ({exc.msg}, line {exc.lineno})") from None
    if not isinstance(cfg, dict):
        raise DataError("config must be a JSON object")
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    conv = {"lag": _lag_arg, "diff": _diff_arg, "grid": _float_list, "phi": _float_list}
    for subparser in sub.choices.values():
        dests = {a.dest for a in subparser._actions}
        values = {}
        for key, val in cfg.items():
            dest = key.lstrip("-").replace("-", "_")
            if dest not in dests or dest in ("config", "help"):
                raise DataError(f"unknown config key {key!r}")
            values[dest] = conv[dest](val) if dest in conv and val is not None else val
        subparser.set_defaults(**values)


# --------------------------------------------------------------------------
# inputs


def _load_series(args) -> Series:
    data = bundled_dataset() if args.input is None else ingest(args.input)
    if isinstance(data, EpidemicTable):
        return mortality_rate(data, args.definition, args.count_basis)
    return data


def _prepare(series: Series, args):
    if args.diff is None:
        res = screen(series)
        return res.series, res.adf, res.warning
    work = series
    for _ in range(args.diff):
        work = difference(work)
    return work, None, False


def _lag(work: Series, args) -> int:
    if args.lag is not None:
        return args.lag
    return select_lag(work, min(args.max_lag, max(1, (len(work) - 1) // 5)))


def _scale(args, explicit: float | None, sensitivity: bool) -> float:
    if args.tau_a is not None:
        if explicit is not None:
            raise DataError("give either --tau-a or an explicit scale, not both")
        return scale_from_tau(args.tau_a)
    if explicit is not None:
        return explicit
    return scale_from_tau(TAU_A) if sensitivity else 1.0


def _error(args, variance: float | None = None, sensitivity: bool = False) -> ErrorModel | None:
    if args.error is None:
        if args.tau_a is not None:
            raise DataError("--tau-a needs --error")
        return None
    if args.error == "additive":
        v = args.sigma_e2 if variance is None else variance
        return build_error("additive", v, _scale(args, args.alpha1, sensitivity), args.alpha0)
    v = args.sigma_u2 if variance is None else variance
    return build_error("multiplicative", v, _scale(args, args.beta0, sensitivity), dist=args.u_dist)


def _alpha(args) -> float:
    if not 0 < args.level < 1:
        raise DataError("--level must lie in (0, 1)")
    return 1.0 - args.level


def _params(model: ArModel) -> dict[str, float]:
    return {n: float(v) for n, v in zip(model.param_names, model.params)}


def _header(series: Series, work: Series, adf, warn: bool, p: int) -> dict[str, Any]:
    return {
        "n_obs": len(series),
        "diff_order": work.diff_order,
        "adf": None if adf is None else {"statistic": adf.statistic, "p_value": adf.p_value},
        "adf_warning": warn,
        "lag": p,
    }


# --------------------------------------------------------------------------
# commands


def cmd_fit(args) -> dict[str, Any]:
    series = _load_series(args)
    work, adf, warn = _prepare(series, args)
    p = _lag(work, args)
    fit = fit_ls(work, p) if args.method == "ls" else fit_ee(autocov_summary(work, p))
    out = _header(series, work, adf, warn, p)
    out.update(method=fit.method.value, params=_params(fit.model), stationary=fit.model.stationary)
    return out


def cmd_naive(args) -> dict[str, Any]:
    err = _error(args)
    if err is None:
        raise DataError("`naive` needs --error and its parameters")
    series = _load_series(args)
    work, adf, warn = _prepare(series, args)
    p = _lag(work, args)
    corrected = fit_corrected(work, p, err).model
    corrected.require_stationary()
    predicted = naive_limit_arp(corrected, err)
    observed = fit_ee(autocov_summary(work, p)).model
    out = _header(series, work, adf, warn, p)
    out["corrected"] = _params(corrected)
    out["predicted_naive"] = {
        "phi0": predicted.phi0_star,
        **{f"phi{j + 1}": v for j, v in enumerate(predicted.phi_star)},
        "sigma_eps2": predicted.var_eps_star,
    }
    out["observed_naive"] = _params(observed)
    if p == 1:
        m = corrected
        if err.kind == "additive":
            out["attenuation"] = omega1(m.phi[0], m.sigma_eps2, err.alpha1, err.sigma_e2)
        else:
            out["attenuation"] = omega2(m.phi0, m.phi[0], m.sigma_eps2, err.sigma_u2)
    return out


def cmd_correct(args) -> dict[str, Any]:
    err = _error(args) or identity_error()
    series = _load_series(args)
    work, adf, warn = _prepare(series, args)
    p = _lag(work, args)
    fit = fit_corrected(work, p, err)
    boot = block_bootstrap(work, p, err, args.block_len, args.boot_reps, args.seed)
    out = _header(series, work, adf, warn, p)
    out["stationary"] = fit.stationary
    out["params"] = [
        {"name": n, "est": float(e), "se": float(s), "p_value": wald_p_value(e, s)}
        for n, e, s in zip(fit.model.param_names, fit.model.params, boot.se)
    ]
    out["bootstrap"] = {"reps": boot.n_reps, "failed": boot.n_failed, "block_len": boot.block_len}
    return out


def _forecast_rows(fc) -> dict[str, Any]:
    dates = fc.dates()
    return {
        "scale": fc.scale,
        "dates": None if dates is None else [d.isoformat() for d in dates],
        "points": fc.points.tolist(),
        "mspe": fc.mspe.tolist(),
        "lower": fc.lower.tolist(),
        "upper": fc.upper.tolist(),
        "mspe_total": fc.mspe_total,
    }


def cmd_forecast(args) -> dict[str, Any]:
    err = _error(args) or identity_error()
    series = _load_series(args)
    work, adf, warn = _prepare(series, args)
    p = _lag(work, args)
    model = fit_corrected(work, p, err).model
    fc = make_forecast(model, work, err, args.horizon, _alpha(args), args.interval_scale, args.seed)
    out = _header(series, work, adf, warn, p)
    out["params"] = _params(model)
    out["forecast"] = _forecast_rows(fc)
    if work.diff_order == 1:
        anchor = float(adjust_initials(series.values[-1], err))
        out["forecast_level"] = _forecast_rows(to_levels(fc, anchor))
    return out


def cmd_sensitivity(args) -> dict[str, Any]:
    if args.error is None:
        raise DataError("`sensitivity` needs --error")
    grid = args.grid or DEFAULT_GRIDS[args.error]
    explicit = args.alpha1 if args.error == "additive" else args.beta0
    spec = SensitivitySpec(
        kind=args.error,
        grid=grid,
        scale=_scale(args, explicit, sensitivity=True),
        alpha0=args.alpha0,
        dist=args.u_dist,
        lag=args.lag,
        max_lag=args.max_lag,
        diff=args.diff,
        horizon=args.horizon,
        alpha=_alpha(args),
        boot_reps=args.boot_reps,
        block_len=args.block_len,
        seed=args.seed,
        interval_scale=args.interval_scale,
    )
    return analyze(_load_series(args), spec)


def cmd_simulate(args) -> dict[str, Any]:
    if not args.phi:
        raise DataError("`simulate` needs --phi")
    model = ArModel(args.phi0, tuple(args.phi), args.sigma_eps2)
    x = simulate_ar(SimSpec(model, args.length, seed=args.seed))
    err = _error(args)
    if err is not None:
        x = contaminate(x, err, seed=args.seed + 1)
    try:
        start = _dt.date.fromisoformat(args.start)
    except ValueError:
        raise DataError(f"invalid --start date {args.start!r}") from None
    dates = [(start + _dt.timedelta(days=i)).isoformat() for i in range(len(x))]
    return {"dates": dates, "values": x.values.tolist()}


def cmd_adf(args) -> dict[str, Any]:
    series = _load_series(args)
    if args.diff is None:
        res = screen(series)
        return {"diff_order": res.diff_order, "statistic": res.adf.statistic, "p_value": res.adf.p_value,
                "lags_used": res.adf.lags_used, "warning": res.warning}
    work = difference(series) if args.diff == 1 else series
    res = adf_test(work)
    return {"diff_order": args.diff, "statistic": res.statistic, "p_value": res.p_value,
            "lags_used": res.lags_used, "warning": False}


def cmd_select(args) -> dict[str, Any]:
    series = _load_series(args)
    work, adf, warn = _prepare(series, args)
    p_max = min(args.max_lag, max(1, (len(work) - 1) // 5))
    p = select_lag(work, p_max)
    out = _header(series, work, adf, warn, p)
    out["aic"] = {str(k): aic(work, k, p_max) for k in range(1, p_max + 1)}
    return out


HANDLERS = {
    "fit": cmd_fit,
    "naive": cmd_naive,
    "correct": cmd_correct,
    "forecast": cmd_forecast,
    "sensitivity": cmd_sensitivity,
    "simulate": cmd_simulate,
    "adf": cmd_adf,
    "select": cmd_select,
}


# --------------------------------------------------------------------------
# output


def _flatten(obj: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(obj, dict):
        rows = []
        for k, v in obj.items():
            rows.extend(_flatten(v, f"{prefix}.{k}" if prefix else str(k)))
        return rows
    if isinstance(obj, list) and obj and isinstance(obj[0], dict):
        rows = []
        for i, v in enumerate(obj):
            rows.extend(_flatten(v, f"{prefix}[{i}]"))
        return rows
    return [(prefix, obj)]


def _forecast_csv(rows: dict[str, Any], variant: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["date", "point", "pe", "lo", "hi", "variant"])
    labels = rows["dates"] or [str(h + 1) for h in range(len(rows["points"]))]
    for i, lab in enumerate(labels):
        w.writerow([lab, repr(rows["points"][i]), repr(rows["mspe"][i]), repr(rows["lower"][i]),
                    repr(rows["upper"][i]), variant])
    return buf.getvalue()


def format_output(command: str, result: dict[str, Any], fmt: str) -> str:
    if command == "sensitivity":
        return render(result, fmt)
    if fmt == "json":
        return json.dumps(result, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        if command == "simulate":
            lines = ["date,value"] + [f"{d},{v!r}" for d, v in zip(result["dates"], result["values"])]
            return "\n".join(lines) + "\n"
        if command == "forecast":
            return _forecast_csv(result.get("forecast_level") or result["forecast"], "corrected")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerows(_flatten(result))
        return buf.getvalue()
    if command == "simulate":
        return "".join(f"{d}  {v:.6f}\n" for d, v in zip(result["dates"], result["values"]))
    rows = _flatten(result)
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
        result = HANDLERS[args.command](args)
        text = format_output(args.command, result, args.format)
        if args.out:
            try:
                Path(args.out).write_text(text)
            except OSError as exc:
                raise DataError(f"cannot write {args.out}: {exc.strerror}") from None
        else:
            sys.stdout.write(text)
    except SystemExit as exc:  # --help, --version
        return int(exc.code or 0)
    except DataError as exc:
        print(f"errts: data error: {exc}", file=sys.stderr)
        return 1
    except ModelError as exc:
        print(f"errts: model error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"errts: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
