"""End-to-end sensitivity analysis of a surrogate series.

``analyze`` screens for a unit root, selects the lag, fits the naive model
and one corrected model per grid value, and forecasts with each. The report
is a plain dict; ``render`` turns it into JSON, an aligned text table or a
CSV of forecast points.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Literal, Sequence

import numpy as np
from scipy.stats import norm

from errts.corrected import block_bootstrap, corrected_moments_mean, fit_corrected
from errts.error_models import TAU_A, AdditiveError, ErrorModel, MultiplicativeError, scale_from_tau, validate_bounds
from errts.exceptions import DataError, ModelError
from errts.forecasting import Forecast, adjust_initials, make_forecast, to_levels
from errts.selection import AdfResult, adf_test, screen, select_lag
from errts.series import Series, as_series, autocov_summary, difference

log = logging.getLogger(__name__)

__all__ = ["SensitivitySpec", "analyze", "render", "wald_p_value", "build_error"]


@dataclass(frozen=True)
class SensitivitySpec:
    """Error mechanism, variance grid and analysis settings.

    ``scale`` is ``alpha1`` (additive) or ``beta0`` (multiplicative); by
    default ``1 / (1 - tau_a)``. ``lag`` and ``diff`` of ``None`` mean
    automatic selection.
    """

    kind: Literal["additive", "multiplicative"]
    grid: tuple[float, ...]
    labels: tuple[str, ...] | None = None
    scale: float = field(default_factory=lambda: scale_from_tau(TAU_A))
    alpha0: float = 0.0
    dist: str = "lognormal"
    lag: int | None = None
    max_lag: int = 5
    diff: int | None = None
    horizon: int = 5
    alpha: float = 0.05
    boot_reps: int = 1000
    block_len: int | None = None
    seed: int = 0
    interval_scale: Literal["sqrt", "literal"] = "sqrt"
    mc_reps: int = 20000

    def __post_init__(self) -> None:
        if self.kind not in ("additive", "multiplicative"):
            raise DataError(f"unknown error kind {self.kind!r}")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise DataError("sensitivity grid is empty")
        if any(v < 0 for v in grid):
            raise DataError("grid values must be non-negative")
        object.__setattr__(self, "grid", grid)
        if self.labels is None:
            labels = ("small", "large") if len(grid) == 2 else tuple(f"v{i + 1}" for i in range(len(grid)))
        else:
            labels = tuple(self.labels)
        if len(labels) != len(grid):
            raise DataError("labels and grid differ in length")
        object.__setattr__(self, "labels", labels)

    def error_model(self, value: float) -> ErrorModel:
        return build_error(self.kind, value, self.scale, self.alpha0, self.dist)


def build_error(kind: str, variance: float, scale: float = 1.0, alpha0: float = 0.0, dist: str = "lognormal"):
    if kind == "additive":
        return AdditiveError(alpha0=alpha0, alpha1=scale, sigma_e2=variance)
    if kind == "multiplicative":
        return MultiplicativeError(beta0=scale, sigma_u2=variance, dist=dist)
    raise DataError(f"unknown error kind {kind!r}")


def wald_p_value(est: float, se: float) -> float | None:
    """Two-sided normal p-value of ``est / se``; ``None`` when ``se`` is zero."""
    if not se > 0:
        return None
    return float(2 * norm.sf(abs(est / se)))


def _error_dict(err: ErrorModel | None) -> dict[str, Any] | None:
    if err is None:
        return None
    if isinstance(err, AdditiveError):
        return {"kind": "additive", "alpha0": err.alpha0, "alpha1": err.alpha1, "sigma_e2": err.sigma_e2}
    return {"kind": "multiplicative", "beta0": err.beta0, "sigma_u2": err.sigma_u2, "dist": err.dist}


def _forecast_dict(fc: Forecast) -> dict[str, Any]:
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


def _adf_dict(res: AdfResult | None) -> dict[str, Any] | None:
    if res is None:
        return None
    return {"statistic": res.statistic, "p_value": res.p_value, "lags_used": res.lags_used, "n_obs": res.n_obs}


def _prepare(series: Series, spec: SensitivitySpec):
    """Differencing order, the working series, and the ADF result on it."""
    if spec.diff is None:
        res = screen(series, max_diff=1)
        if res.warning:
            log.warning("no unit-root rejection after differencing once")
        return res.diff_order, res.series, res.adf, res.warning
    work = series
    for _ in range(spec.diff):
        work = difference(work)
    adf = adf_test(work) if len(work) >= 15 and not work.is_constant else None
    return spec.diff, work, adf, False


def _variant(label: str, err: ErrorModel | None, work: Series, levels: Series, p: int, spec: SensitivitySpec):
    from errts.error_models import identity_error

    model_err = identity_error() if err is None else err
    row: dict[str, Any] = {"label": label, "error": _error_dict(err)}
    summary = autocov_summary(work, p)
    if err is not None and not validate_bounds(err, summary.gamma0, corrected_moments_mean(summary, err)):
        row["status"] = "bound_violation"
        row["message"] = f"{err.kind} error variance {err.error_variance} exceeds the bound implied by the data"
        return row
    try:
        fit = fit_corrected(work, p, model_err)
        boot = block_bootstrap(work, p, model_err, spec.block_len, spec.boot_reps, spec.seed)
    except ModelError as exc:
        row["status"] = "failed"
        row["message"] = str(exc)
        return row
    params = []
    for name, est, se in zip(fit.model.param_names, fit.model.params, boot.se):
        params.append({"name": name, "est": float(est), "se": float(se), "p_value": wald_p_value(est, se)})
    row["status"] = "ok"
    row["stationary"] = fit.stationary
    row["params"] = params
    row["bootstrap"] = {"reps": boot.n_reps, "failed": boot.n_failed, "block_len": boot.block_len}
    fc = make_forecast(
        fit.model, work, model_err, spec.horizon, spec.alpha, spec.interval_scale, spec.seed, spec.mc_reps
    )
    row["forecast"] = _forecast_dict(fc)
    if work.diff_order > 0 and levels.diff_order == work.diff_order - 1:
        anchor = float(adjust_initials(levels.values[-1], model_err))
        row["forecast_level"] = _forecast_dict(to_levels(fc, anchor))
    return row


def analyze(series: Series, spec: SensitivitySpec) -> dict[str, Any]:
    """Naive and corrected fits, bootstrap inference and forecasts for every grid value."""
    series = as_series(series)
    d, work, adf, warn = _prepare(series, spec)
    if d > 1:
        raise DataError("level forecasts support at most one difference")
    p = spec.lag if spec.lag is not None else select_lag(work, min(spec.max_lag, max(1, (len(work) - 1) // 5)))
    levels = series
    rows = [_variant("naive", None, work, levels, p, spec)]
    order = sorted(range(len(spec.grid)), key=lambda i: spec.grid[i])
    for i in order:
        rows.append(_variant(spec.labels[i], spec.error_model(spec.grid[i]), work, levels, p, spec))
    return {
        "n_obs": len(series),
        "origin": None if series.origin is None else series.origin.isoformat(),
        "diff_order": d,
        "adf": _adf_dict(adf),
        "adf_warning": warn,
        "lag": p,
        "horizon": spec.horizon,
        "level": 1 - spec.alpha,
        "interval_scale": spec.interval_scale,
        "seed": spec.seed,
        "error_kind": spec.kind,
        "variants": rows,
    }


def _fmt(v: float | None, width: int = 10) -> str:
    if v is None:
        return "NA".rjust(width)
    return f"{v:{width}.4f}"


def _render_text(report: dict[str, Any]) -> str:
    out = [
        f"n_obs={report['n_obs']}  diff_order={report['diff_order']}  lag={report['lag']}  "
        f"level={report['level']:.2f}"
    ]
    if report.get("adf"):
        a = report["adf"]
        out.append(f"ADF statistic {a['statistic']:.4f}  p-value {a['p_value']:.4f}")
    for row in report["variants"]:
        out.append("")
        err = row["error"]
        desc = "naive" if err is None else ", ".join(f"{k}={v}" for k, v in err.items())
        out.append(f"[{row['label']}] {desc}")
        if row["status"] != "ok":
            out.append(f"  {row['status']}: {row['message']}")
            continue
        out.append(f"  {'param':<12}{'EST':>10}{'SE':>10}{'p-value':>10}")
        for prm in row["params"]:
            out.append(f"  {prm['name']:<12}{_fmt(prm['est'])}{_fmt(prm['se'])}{_fmt(prm['p_value'])}")
        fc = row.get("forecast_level") or row["forecast"]
        out.append(f"  forecast ({fc['scale']})")
        out.append(f"  {'h':<12}{'point':>10}{'MSPE':>10}{'lower':>10}{'upper':>10}")
        labels = fc["dates"] or [str(h + 1) for h in range(len(fc["points"]))]
        for i, lab in enumerate(labels):
            out.append(
                f"  {lab:<12}{_fmt(fc['points'][i])}{_fmt(fc['mspe'][i])}{_fmt(fc['lower'][i])}{_fmt(fc['upper'][i])}"
            )
        out.append(f"  {'total MSPE':<12}{'':>10}{_fmt(fc['mspe_total'])}")
    return "\n".join(out) + "\n"


def _render_csv(report: dict[str, Any]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["date", "point", "pe", "lo", "hi", "variant"])
    for row in report["variants"]:
        if row["status"] != "ok":
            continue
        fc = row.get("forecast_level") or row["forecast"]
        labels = fc["dates"] or [str(h + 1) for h in range(len(fc["points"]))]
        for i, lab in enumerate(labels):
            w.writerow([lab, repr(fc["points"][i]), repr(fc["mspe"][i]), repr(fc["lower"][i]), repr(fc["upper"][i]), row["label"]])
    return buf.getvalue()


def render(report: dict[str, Any], fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    if fmt == "text":
        return _render_text(report)
    if fmt == "csv":
        return _render_csv(report)
    raise DataError(f"unknown format {fmt!r}")

