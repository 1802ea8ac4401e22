"""Command-line interface: ``careless exact|simulate|trajectory|bounds|sweep|metastable|replay``.

Scalar reports are JSON on stdout; tables are CSV.  Every CSV written with
``--out`` gets a ``<out>.manifest.json`` sidecar that ``careless replay`` can
re-run to reproduce the same bytes.  Exit codes: 0 ok, 2 usage, 3 domain
(e.g. ``p = 1`` given to the solver), 4 I/O.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import click
import numpy as np

from . import __version__
from ._backend import BACKEND
from .bounds import (default_variant, escape_rate, hitting_regime, mean_field_interval,
                     metastability_deviation_bound, unconditional_lower_bound,
                     unconditional_upper_bound)
from .chain import Params
from .errors import DomainError
from .hitting import dense_oracle_solve, solve_hitting_times
from .marginal import (classify_qstar_regime, default_epsilon, marginal_coeffs,
                       marginal_mixing_time, q_at)
from .simulate import (DEFAULT_MAX_STEPS, PRNG_NAME, batch_hitting_stats,
                       check_metastable_window, substream_seed, trajectory_stats)

SEED_ENV = "CARELESS_SEED"


class DomainFailure(click.ClickException):
    exit_code = 3


class IOFailure(click.ClickException):
    exit_code = 4


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except DomainError as exc:
            raise DomainFailure(str(exc)) from exc
        except OSError as exc:
            raise IOFailure(str(exc)) from exc


@dataclass
class RunManifest:
    command: str
    params: dict
    seed: int | None
    argv: list
    version: str = __version__
    prng: str = PRNG_NAME
    backend: str = BACKEND
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))


def _manifest(command: str, params: dict, seed=None) -> RunManifest:
    argv = [command]
    for key, val in params.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                argv.append(flag)
        elif val is not None:
            argv += [flag, str(val)]
    return RunManifest(command, params, seed, argv)


def _num(x):
    """JSON-safe float: non-finite values become null."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _logreport(lv, tag: str) -> dict:
    return {"log10": _num(lv.log10) if lv.ln_v != math.inf else None,
            "value": _num(lv.value), "infinite": lv.ln_v == math.inf, "tag": tag}


def _csv_fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return repr(x) if math.isfinite(x) else ("inf" if x > 0 else "-inf")
    return str(x)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_fmt(v) for v in row])
    return buf.getvalue()


def _emit_csv(text: str, out, manifest: RunManifest | None) -> None:
    if out is None:
        click.echo(text, nl=False)
        return
    with open(out, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)
    if manifest is not None:
        with open(f"{out}.manifest.json", "w", encoding="utf-8") as fh:
            json.dump(asdict(manifest), fh, indent=2)
            fh.write("\n")


def _emit_json(obj, stream=None) -> None:
    click.echo(json.dumps(obj, indent=2), file=stream)


def _params(n, p) -> Params:
    return Params(n, p)


n_opt = click.option("--n", "n", type=click.IntRange(min=1), required=True, help="Number of coupon types.")
p_opt = click.option("--p", "p", type=click.FloatRange(0.0, 1.0), required=True, help="Per-round loss probability.")
seed_opt = click.option("--seed", type=click.IntRange(min=0), envvar=SEED_ENV, default=0,
                        show_default=True, help=f"Master seed (env {SEED_ENV}).")
out_opt = click.option("--out", type=click.Path(dir_okay=False), default=None,
                       help="CSV output path (stdout if omitted).")
workers_opt = click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True,
                           help="Threads for replications; output does not depend on it.")


@click.group(cls=_Group)
@click.version_option(__version__, prog_name="careless",
                      message=f"%(prog)s %(version)s (kernels: {BACKEND}; prng: {PRNG_NAME})")
def cli():
    """Careless coupon collector: exact hitting times, bounds, simulation."""


@cli.command()
@n_opt
@p_opt
@click.option("--full-vector", is_flag=True, help="Also report h(k) for every k.")
@click.option("--oracle", is_flag=True, help="Cross-check against the dense reference solve.")
@click.option("--json", "fmt", flag_value="json", default=True, help="JSON report (default).")
@click.option("--csv", "fmt", flag_value="csv", help="CSV output.")
def exact(n, p, full_vector, oracle, fmt):
    """Exact expected hitting time via banded elimination."""
    params = _params(n, p)
    sol = solve_hitting_times(params)
    report = {"n": n, "p": p, "h0": _num(sol.h0), "overflow": sol.overflow,
              "residual_inf": _num(sol.residual_inf), "residual_ok": sol.residual_ok,
              "method": sol.method, "backend": BACKEND}
    if sol.overflow:
        report["note"] = "h exceeds double range; see `careless bounds` for log-scale estimates"
    if oracle:
        ref = dense_oracle_solve(params)
        both = np.isfinite(sol.h) & np.isfinite(ref.h)
        diff = float(np.max(np.abs(sol.h[both] - ref.h[both]) / np.abs(ref.h[both]))) if both.any() else None
        report["oracle_h0"] = _num(ref.h0)
        report["oracle_max_rel_diff"] = diff
    if full_vector:
        report["h"] = [_num(x) for x in sol.h]
    if fmt == "csv":
        if full_vector:
            text = _csv_text(["k", "h"], [(k, float(x)) for k, x in enumerate(sol.h)])
        else:
            text = _csv_text(["n", "p", "h0", "overflow", "residual_inf"],
                             [(n, p, sol.h0, sol.overflow, sol.residual_inf)])
        click.echo(text, nl=False)
    else:
        _emit_json(report)


def _simulate(n, p, runs, seed, max_steps, workers):
    stats = batch_hitting_stats(_params(n, p), runs, seed, max_steps, workers)
    rows = [(o.replication, o.seed, o.hitting_time, o.censored) for o in stats.outcomes]
    return stats, _csv_text(["replication", "seed", "hitting_time", "censored"], rows)


@cli.command()
@n_opt
@p_opt
@click.option("--runs", type=click.IntRange(min=1), default=1000, show_default=True)
@seed_opt
@click.option("--max-steps", type=click.IntRange(min=1), default=DEFAULT_MAX_STEPS, show_default=True)
@out_opt
@workers_opt
def simulate(n, p, runs, seed, max_steps, out, workers):
    """Sample hitting times; per-run CSV plus a JSON summary."""
    stats, text = _simulate(n, p, runs, seed, max_steps, workers)
    man = _manifest("simulate", {"n": n, "p": p, "runs": runs, "seed": seed,
                                 "max_steps": max_steps}, seed)
    _emit_csv(text, out, man)
    summary = {"n": n, "p": p, "runs": runs, "mean": _num(stats.mean),
               "stderr": _num(stats.stderr), "variance": _num(stats.variance),
               "censored": stats.censored, "mean_defined": stats.mean_defined,
               "manifest": asdict(man)}
    _emit_json(summary, stream=None if out else sys.stderr)


def _trajectory(n, p, horizon, runs, seed, full, workers):
    params = _params(n, p)
    st = trajectory_stats(params, runs, seed, horizon, full, workers)
    rows = [(t, float(st.mean_fraction[t]), float(st.stderr[t]), q_at(params, t, 0.0))
            for t in range(horizon + 1)]
    return _csv_text(["t", "mean_fraction", "stderr", "theory"], rows)


@cli.command()
@n_opt
@p_opt
@click.option("--horizon", type=click.IntRange(min=1), required=True)
@click.option("--runs", type=click.IntRange(min=1), default=1000, show_default=True)
@seed_opt
@click.option("--full", is_flag=True, help="Simulate the set-valued chain instead of the count chain.")
@out_opt
@workers_opt
def trajectory(n, p, horizon, runs, seed, full, out, workers):
    """Mean fraction |S_t|/n per round, with the closed-form marginal as `theory`."""
    text = _trajectory(n, p, horizon, runs, seed, full, workers)
    man = _manifest("trajectory", {"n": n, "p": p, "horizon": horizon, "runs": runs,
                                   "seed": seed, "full": full}, seed)
    _emit_csv(text, out, man)


def bounds_report(params: Params, epsilon: float | None, delta: float, window: int) -> dict:
    n, p = params.n, params.p
    coeffs = marginal_coeffs(params)
    qs = coeffs.q_star
    if epsilon is None:
        epsilon = default_epsilon(params)
    elif p < 1.0 and not 0.0 < epsilon < min(qs, 1.0):
        raise click.BadParameter(f"epsilon must lie in (0, q*={qs:.6g})", param_hint="--epsilon")
    rep = {"n": n, "p": p, "q_star": qs, "a": coeffs.a, "b": coeffs.b, "epsilon": epsilon}
    qr = classify_qstar_regime(params)
    rep["qstar_regime"] = {"label": qr.label.value, "scale": qr.scale, "c": qr.c}
    if n >= 2:
        reg = hitting_regime(params)
        rep["regime"] = reg.label.value
        rep["regime_log10_scale"] = _num(reg.log10_scale)
        rep["regime_boundary"] = reg.boundary
        rep["regime_tag"] = "heuristic"
    if p >= 1.0:
        rep.update(t_mix=0, mf_lower=None, mf_upper=None,
                   rigorous_lower=_logreport(unconditional_lower_bound(params), "rigorous"),
                   rigorous_upper=None, rho=None)
    else:
        rep["t_mix"] = marginal_mixing_time(params, epsilon)
        mf = mean_field_interval(params, epsilon)
        rep["mf_lower"] = _logreport(mf.lower, "heuristic")
        rep["mf_lower"]["clamped"] = mf.lower_clamped
        rep["mf_upper"] = _logreport(mf.upper, "heuristic")
        rep["rigorous_lower"] = _logreport(unconditional_lower_bound(params), "rigorous")
        rep["rigorous_upper"] = _logreport(unconditional_upper_bound(params, epsilon), "rigorous")
        esc = escape_rate(params, epsilon)
        rep["rho"] = {"ln": _num(esc.rho.ln_v), "log10": _num(esc.rho.log10),
                      "value": _num(esc.rho.value), "block_len": esc.block_len,
                      "good_threshold": esc.good_threshold, "tag": "rigorous"}
    variant = default_variant(params)
    mb = metastability_deviation_bound(params, delta, window, variant)
    rep["metastability_bound"] = {"variant": variant, "delta": delta, "window": window,
                                  "log10": _num(mb.prob_bound.log10),
                                  "value": _num(mb.prob_bound.value),
                                  "vacuous": mb.vacuous, "tag": "rigorous"}
    return rep


@cli.command()
@n_opt
@p_opt
@click.option("--epsilon", type=float, default=None, help="Mixing tolerance (default q*/n).")
@click.option("--delta", type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True),
              default=0.2, show_default=True)
@click.option("--window", type=click.IntRange(min=1), default=10_000, show_default=True)
def bounds(n, p, epsilon, delta, window):
    """All analytic quantities as JSON, each tagged rigorous or heuristic."""
    _emit_json(bounds_report(_params(n, p), epsilon, delta, window))


def parse_grid(text: str) -> list[float]:
    """``start:stop:step``, endpoints inclusive within 1e-12."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise click.BadParameter(f"expected start:stop:step, got {text!r}", param_hint="--p-grid")
    if step <= 0:
        raise click.BadParameter("step must be positive", param_hint="--p-grid")
    if stop < start - 1e-12:
        return []
    count = int(math.floor((stop - start) / step + 1e-12)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _sweep(n, p_values, runs, seed, max_steps, no_sim, workers):
    rows = []
    for i, p in enumerate(p_values):
        params = _params(n, p)
        if p >= 1.0:
            h0, overflow = math.inf, False
        else:
            sol = solve_hitting_times(params)
            h0, overflow = sol.h0, sol.overflow
        sim_mean = sim_se = None
        censored = None
        if not no_sim:
            st = batch_hitting_stats(params, runs, substream_seed(seed, i), max_steps, workers)
            sim_mean, sim_se, censored = st.mean, st.stderr, st.censored
        lb = unconditional_lower_bound(params).log10
        if p >= 1.0:
            ub = mf_up = math.inf
        else:
            eps = default_epsilon(params)
            ub = unconditional_upper_bound(params, eps).log10
            mf_up = mean_field_interval(params, eps).upper.log10
        regime = hitting_regime(params).label.value if n >= 2 else ""
        rows.append((n, p, h0, overflow, sim_mean, sim_se, censored, lb, ub, mf_up, regime))
    header = ["n", "p", "exact_h0", "exact_overflow", "sim_mean", "sim_stderr", "censored",
              "lb_log10", "ub_log10", "mf_upper_log10", "regime"]
    return _csv_text(header, rows)


@cli.command()
@n_opt
@click.option("--p-list", default=None, help="Comma-separated p values.")
@click.option("--p-grid", default=None, help="start:stop:step, inclusive.")
@click.option("--runs", type=click.IntRange(min=1), default=1000, show_default=True)
@seed_opt
@click.option("--max-steps", type=click.IntRange(min=1), default=DEFAULT_MAX_STEPS, show_default=True)
@click.option("--no-sim", is_flag=True, help="Skip Monte Carlo columns.")
@out_opt
@workers_opt
def sweep(n, p_list, p_grid, runs, seed, max_steps, no_sim, out, workers):
    """Exact, simulated and bound values over a grid of p."""
    if (p_list is None) == (p_grid is None):
        raise click.UsageError("give exactly one of --p-list or --p-grid")
    if p_list is not None:
        try:
            values = [float(x) for x in p_list.split(",") if x.strip()]
        except ValueError:
            raise click.BadParameter(f"not a list of numbers: {p_list!r}", param_hint="--p-list")
    else:
        values = parse_grid(p_grid)
    if not values:
        raise click.UsageError("empty p grid")
    text = _sweep(n, values, runs, seed, max_steps, no_sim, workers)
    man = _manifest("sweep", {"n": n, "p_list": ",".join(repr(v) for v in values),
                              "runs": runs, "seed": seed, "max_steps": max_steps,
                              "no_sim": no_sim}, seed)
    _emit_csv(text, out, man)


@cli.command()
@n_opt
@p_opt
@click.option("--delta", type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True), required=True)
@click.option("--window", type=click.IntRange(min=1), default=10_000, show_default=True)
@click.option("--runs", type=click.IntRange(min=1), default=100, show_default=True)
@seed_opt
@click.option("--variant", type=click.Choice(["auto", "small_p", "large_p"]), default="auto",
              show_default=True)
@click.option("--epsilon", type=float, default=None, help="Mixing tolerance (default delta*q*/2).")
@workers_opt
def metastable(n, p, delta, window, runs, seed, variant, epsilon, workers):
    """Analytic band-exit bound next to the simulated violation frequency."""
    params = _params(n, p)
    if variant == "auto":
        variant = default_variant(params)
    bound = metastability_deviation_bound(params, delta, window, variant)
    chk = check_metastable_window(params, delta, window, runs, seed, variant, epsilon, workers)
    freq = chk.violation_frequency
    report = {
        "n": n, "p": p, "q_star": marginal_coeffs(params).q_star, "delta": delta,
        "window": window, "variant": variant, "start": chk.start,
        "analytic": {"log10": _num(bound.prob_bound.log10), "value": _num(bound.prob_bound.value),
                     "vacuous": bound.vacuous, "tag": "rigorous"},
        "empirical": {"runs": runs, "violations": int(chk.violated.sum()),
                      "violation_frequency": freq},
        "empirical_le_analytic": None if bound.vacuous else freq <= bound.prob_bound.value,
        "manifest": asdict(_manifest("metastable", {"n": n, "p": p, "delta": delta,
                                                    "window": window, "runs": runs,
                                                    "seed": seed, "variant": variant}, seed)),
    }
    _emit_json(report)


@cli.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Where to write the regenerated CSV.")
def replay(manifest, out):
    """Re-run the command recorded in a manifest sidecar."""
    with open(manifest, encoding="utf-8") as fh:
        man = json.load(fh)
    argv = list(man["argv"]) + ["--out", out]
    if man["command"] not in ("simulate", "trajectory", "sweep"):
        raise click.UsageError(f"cannot replay command {man['command']!r}")
    cli.main(args=argv, prog_name="careless", standalone_mode=False)


def main(argv=None):
    cli.main(args=argv, prog_name="careless")


if __name__ == "__main__":
    main()
