"""Command-line front end: JSON config in, CSV/JSON artifacts out.

Subcommands evaluate the analytic correlator on grids (``chi``), emit
figure-ready curve bundles (``figure2``, ``figure3a``, ``figure3b``),
build evolution-time schedules (``schedule``), run the Monte Carlo
sampler (``simulate``), re-analyze stored shot records (``correlate``),
and fit spectrum parameters to measured curves (``fit``).

All frequencies are rad/s internally; ``--freq-units hz`` converts the
frequency-valued config fields (names starting with ``omega``) by 2 pi
on input.  Spectral amplitudes are never rescaled.  Every CSV artifact
is written atomically and paired with a ``<out>.json`` sidecar echoing
the resolved config and the package version; JSON artifacts embed the
same echo inline.
"""

import argparse
import copy
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .correlator import (
    EvolutionPair,
    QubitParams,
    autocorrelation_analytic,
    chi_minus_approx,
    chi_pair,
)
from .fitting import (
    FitParam,
    FitProblem,
    discriminate_gamma,
    estimate_alpha_slope,
    fit,
)
from .montecarlo import (
    CorrelationCurve,
    GridSpec,
    Protocol,
    correlation_curve,
    records_from_csv,
    records_to_csv,
    run_protocol,
)
from .schedules import (
    build_schedule,
    constant_contrast_schedule,
    oneoverf_schedule,
)
from .spectra import (
    OverhauserModel,
    PowerLawModel,
    TabulatedModel,
    WhiteModel,
    coupling_from_g,
)

__all__ = ["main"]

TWO_PI = 2.0 * math.pi

# config keys holding frequencies, converted under --freq-units hz
_FREQ_KEYS = {
    "omega_q",
    "omega_l",
    "omega_e",
    "omega_low",
    "omega_high",
    "omega_min",
    "omega_max",
}


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def _atomic_write(path, text: str):
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else _fmt(c) for c in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_sidecar(path, config, notes):
    doc = {"version": __version__, "config": config, "notes": notes}
    _atomic_write(str(path) + ".json", json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _convert_hz(obj):
    """Multiply frequency-named fields by 2 pi, recursively."""
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            if k in _FREQ_KEYS and v is not None:
                if isinstance(v, (list, tuple)):
                    out[k] = [x * TWO_PI for x in v]
                elif isinstance(v, dict):
                    out[k] = {
                        kk: (vv * TWO_PI if kk in ("start", "stop") else vv)
                        for kk, vv in v.items()
                    }
                else:
                    out[k] = v * TWO_PI
            else:
                out[k] = _convert_hz(v)
        return out
    if isinstance(obj, list):
        return [_convert_hz(v) for v in obj]
    return obj


def _section(config, name):
    sec = config.get(name)
    if sec is None:
        raise ConfigError(f"config section '{name}' is required")
    if not isinstance(sec, dict):
        raise ConfigError(f"config section '{name}' must be an object")
    return sec


def _field(sec, secname, key, kind=float, default=_fmt):
    # default sentinel _fmt means "required"
    if key not in sec:
        if default is _fmt:
            raise ConfigError(f"config field '{secname}.{key}' is required")
        return default
    try:
        return kind(sec[key])
    except (TypeError, ValueError):
        raise ConfigError(
            f"config field '{secname}.{key}' has invalid value {sec[key]!r}"
        ) from None


def _grid_values(sec, secname, key):
    """A float list, or {start, stop, num[, spacing]} expanded log/linear."""
    if key not in sec:
        raise ConfigError(f"config field '{secname}.{key}' is required")
    val = sec[key]
    if isinstance(val, (int, float)):
        return np.array([float(val)])
    if isinstance(val, list):
        return np.asarray([float(v) for v in val])
    if isinstance(val, dict):
        start = _field(val, f"{secname}.{key}", "start")
        stop = _field(val, f"{secname}.{key}", "stop")
        num = _field(val, f"{secname}.{key}", "num", int)
        spacing = val.get("spacing", "log")
        if spacing == "log":
            return np.geomspace(start, stop, num)
        if spacing == "linear":
            return np.linspace(start, stop, num)
        raise ConfigError(f"config field '{secname}.{key}.spacing' must be log or linear")
    raise ConfigError(f"config field '{secname}.{key}' must be number, list, or grid object")


def build_spectrum(config):
    """Construct the SpectrumModel described by config['spectrum']."""
    sec = _section(config, "spectrum")
    family = _field(sec, "spectrum", "family", str)
    if family == "overhauser":
        coupling = sec.get("coupling_c")
        if coupling is None:
            g = _field(sec, "spectrum", "g_factor")
            coupling = coupling_from_g(g)
        omega_e = sec.get("omega_e")
        omega_e = math.inf if omega_e in (None, "inf") else float(omega_e)
        kw = dict(
            omega_l=_field(sec, "spectrum", "omega_l"),
            omega_e=omega_e,
            gamma=_field(sec, "spectrum", "gamma", float, 1.0),
            coupling_c=float(coupling),
        )
        try:
            if "rms_field" in sec:
                return OverhauserModel.from_rms(float(sec["rms_field"]), **kw)
            return OverhauserModel(s0=_field(sec, "spectrum", "s0"), **kw)
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"spectrum: {e}") from None
    if family == "white":
        try:
            return WhiteModel(
                level=_field(sec, "spectrum", "level"),
                omega_high=_field(sec, "spectrum", "omega_high"),
            )
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"spectrum: {e}") from None
    if family == "power_law":
        try:
            return PowerLawModel(
                amplitude=_field(sec, "spectrum", "amplitude"),
                alpha=_field(sec, "spectrum", "alpha"),
                omega_low=_field(sec, "spectrum", "omega_low"),
                omega_high=_field(sec, "spectrum", "omega_high"),
            )
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"spectrum: {e}") from None
    if family == "tabulated":
        path = _field(sec, "spectrum", "path", str)
        try:
            return TabulatedModel.from_csv(path)
        except (OSError, ValueError) as e:
            raise ConfigError(f"spectrum: {e}") from None
    raise ConfigError(f"config field 'spectrum.family' unknown: {family!r}")


def build_qubit(config):
    sec = config.get("qubit", {})
    if not isinstance(sec, dict):
        raise ConfigError("config section 'qubit' must be an object")
    try:
        return QubitParams(
            omega_q=_field(sec, "qubit", "omega_q", float, 0.0),
            coupling_c=_field(sec, "qubit", "coupling_c", float, 1.0),
            readout_flip_prob=_field(sec, "qubit", "readout_flip_prob", float, 0.0),
            dead_time=_field(sec, "qubit", "dead_time", float, 0.0),
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"qubit: {e}") from None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_chi(config, args):
    spectrum = build_spectrum(config)
    qubit = build_qubit(config)
    sec = _section(config, "chi")
    taus = _grid_values(sec, "chi", "tau")
    dts = _grid_values(sec, "chi", "delta_t")
    tag_regime = isinstance(spectrum, OverhauserModel) and math.isfinite(
        spectrum.omega_e
    )
    header = ["delta_t", "tau", "chi_minus", "chi_plus", "correlation"]
    if tag_regime:
        header.append("regime")
    rows = []
    for tau in taus:
        for dt in dts:
            pair = EvolutionPair(tau, dt)
            cm, cp = chi_pair(spectrum, pair)
            corr = autocorrelation_analytic(spectrum, pair, qubit)
            row = [dt, tau, cm, cp, corr]
            if tag_regime:
                row.append(chi_minus_approx(spectrum, pair).branch)
            rows.append(row)
    _write_csv(args.out, header, rows)
    notes = {"regime_column": tag_regime}
    if isinstance(spectrum, OverhauserModel) and not tag_regime:
        notes["regime_column_reason"] = "no finite cutoff; regime map undefined"
    _write_sidecar(args.out, config, notes)


def cmd_schedule(config, args):
    sec = _section(config, "schedule")
    kind = _field(sec, "schedule", "kind", str)
    dts = _grid_values(sec, "schedule", "delta_t")
    if kind == "constant_contrast":
        model = build_spectrum(config)
        if not isinstance(model, OverhauserModel):
            raise ConfigError(
                "config field 'schedule.kind' constant_contrast needs an overhauser spectrum"
            )
        target = _field(sec, "schedule", "target", float, 2.0)
        try:
            sched = constant_contrast_schedule(model, dts, target=target)
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"schedule: {e}") from None
        notes = {"kind": kind, "target": target}
    elif kind == "oneoverf":
        level = _field(sec, "schedule", "level")
        variant = _field(sec, "schedule", "variant", str, "exact")
        try:
            sched = oneoverf_schedule(level, dts, variant=variant)
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"schedule: {e}") from None
        notes = {
            "kind": kind,
            "level": level,
            "variant": variant,
            "variant_meaning": (
                "exact holds tau^2(ln(delta_t/tau)+3/2) fixed via the secondary "
                "Lambert branch; literal is the principal-branch form "
                "delta_t*exp(W0(-2*level/delta_t^2))"
            ),
        }
    else:
        raise ConfigError(f"config field 'schedule.kind' unknown: {kind!r}")
    sched.to_csv(args.out)
    _write_sidecar(args.out, config, notes)


def _protocol_from_config(config):
    sec = _section(config, "protocol")
    qubit = build_qubit(config)
    try:
        prot = Protocol(
            tau=_field(sec, "protocol", "tau"),
            cycle_period=_field(sec, "protocol", "cycle_period"),
            n_cycles=_field(sec, "protocol", "n_cycles", int),
            qubit=qubit,
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"protocol: {e}") from None
    n_records = _field(sec, "protocol", "n_records", int, 1)
    lags = sec.get("lags")
    if lags is None:
        lags = [m for m in (1, 2, 3, 5, 8) if m < prot.n_cycles]
    grid_sec = config.get("grid", {})
    try:
        grid = GridSpec(
            n_modes=_field(grid_sec, "grid", "n_modes", int, 4096),
            omega_min=_field(grid_sec, "grid", "omega_min", float, None),
            omega_max=_field(grid_sec, "grid", "omega_max", float, None),
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"grid: {e}") from None
    return prot, n_records, lags, grid


def _records_path(out):
    root, ext = os.path.splitext(str(out))
    return root + ".records" + (ext or ".csv")


def cmd_simulate(config, args):
    spectrum = build_spectrum(config)
    prot, n_records, lags, grid = _protocol_from_config(config)
    eps = prot.qubit.readout_flip_prob
    records = run_protocol(
        spectrum, prot, n_records, seed=args.seed, grid=grid, threads=args.threads
    )
    raw = correlation_curve(records, lags)
    header = ["delta_t_s", "tau_s", "correlation", "stderr", "n_pairs"]
    rows = []
    if eps > 0.0:
        corrected = correlation_curve(records, lags, correct_epsilon=eps)
        header += ["correlation_raw", "stderr_raw"]
        for i in range(len(lags)):
            rows.append(
                [
                    corrected.delta_t[i],
                    corrected.tau[i],
                    corrected.correlation[i],
                    corrected.stderr[i],
                    corrected.n_pairs[i],
                    raw.correlation[i],
                    raw.stderr[i],
                ]
            )
    else:
        for i in range(len(lags)):
            rows.append(
                [
                    raw.delta_t[i],
                    raw.tau[i],
                    raw.correlation[i],
                    raw.stderr[i],
                    raw.n_pairs[i],
                ]
            )
    rec_path = _records_path(args.out)
    records_to_csv(records, rec_path)
    _write_sidecar(
        rec_path,
        config,
        {
            "tau": prot.tau,
            "cycle_period": prot.cycle_period,
            "n_records": n_records,
            "seed": args.seed,
        },
    )
    _write_csv(args.out, header, rows)
    notes = {"seed": args.seed, "records_csv": os.path.basename(rec_path)}
    if eps > 0.0:
        notes["fidelity"] = (
            "correlation/stderr are corrected by (1-2*epsilon)^-2; raw columns appended"
        )
    _write_sidecar(args.out, config, notes)


def cmd_correlate(config, args):
    sec = _section(config, "correlate")
    path = _field(sec, "correlate", "records", str)
    tau = sec.get("tau")
    cycle = sec.get("cycle_period")
    if tau is None or cycle is None:
        # fall back to the sidecar written by cmd_simulate
        try:
            with open(str(path) + ".json") as fh:
                side = json.load(fh)
            tau = side["notes"]["tau"] if tau is None else tau
            cycle = side["notes"]["cycle_period"] if cycle is None else cycle
        except (OSError, KeyError, json.JSONDecodeError):
            raise ConfigError(
                "config fields 'correlate.tau' and 'correlate.cycle_period' are "
                f"required (no readable sidecar at {path}.json)"
            ) from None
    try:
        records = records_from_csv(path, tau=float(tau), cycle_period=float(cycle))
    except (OSError, ValueError) as e:
        raise ConfigError(f"correlate: {e}") from None
    lags = sec.get("lags")
    if lags is None:
        shortest = min(len(r) for r in records)
        lags = [m for m in (1, 2, 3, 5, 8) if m < shortest]
    eps = _field(sec, "correlate", "epsilon", float, 0.0)
    curve = correlation_curve(records, lags, correct_epsilon=eps or None)
    curve.to_csv(args.out)
    _write_sidecar(args.out, config, {"n_records": len(records), "epsilon": eps})


def _load_curve(path):
    try:
        return CorrelationCurve.from_csv(path)
    except OSError as e:
        raise ConfigError(f"fit: {e}") from None
    except ValueError as e:
        msg = str(e)
        if "header" in msg:
            raise ConfigError(
                f"fit: {msg}; if the file lacks a stderr column, supply "
                "uncertainties before fitting"
            ) from None
        raise ConfigError(f"fit: {msg}") from None


def cmd_fit(config, args):
    sec = _section(config, "fit")
    curve = _load_curve(_field(sec, "fit", "input", str))
    mode = _field(sec, "fit", "mode", str, "fit")
    if mode == "alpha":
        window = sec.get("corr_window", (0.02, 0.48))
        try:
            est = estimate_alpha_slope(
                curve.delta_t, curve.correlation, curve.stderr, corr_window=tuple(window)
            )
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"fit: {e}") from None
        result = est.to_dict()
    elif mode == "discriminate":
        kw = {}
        if "omega_e_bounds" in sec:
            kw["omega_e_bounds"] = tuple(float(v) for v in sec["omega_e_bounds"])
        if "gammas" in sec:
            kw["gammas"] = tuple(float(v) for v in sec["gammas"])
        try:
            decision = discriminate_gamma(
                curve.delta_t,
                curve.tau,
                curve.correlation,
                curve.stderr,
                omega_l=_field(sec, "fit", "omega_l"),
                coupling_c=_field(sec, "fit", "coupling_c", float, 1.0),
                qubit=build_qubit(config),
                **kw,
            )
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"fit: {e}") from None
        result = decision.to_dict()
    elif mode == "fit":
        family = _field(sec, "fit", "family", str)
        free = sec.get("free")
        if not isinstance(free, dict) or not free:
            raise ConfigError(
                "config field 'fit.free' must map parameter names to [lower, upper]"
            )
        fixed = sec.get("fixed", {})
        params = []
        for name, bounds in free.items():
            try:
                lo, hi = (float(b) for b in bounds)
            except (TypeError, ValueError):
                raise ConfigError(
                    f"config field 'fit.free.{name}' must be a [lower, upper] pair"
                ) from None
            params.append(FitParam(name, lo, hi))

        def build(values, family=family, fixed=fixed):
            spec = {"family": family, **fixed, **values}
            return build_spectrum({"spectrum": spec})

        try:
            problem = FitProblem(
                delta_t=curve.delta_t,
                tau=curve.tau,
                correlation=curve.correlation,
                stderr=curve.stderr,
                build=build,
                params=tuple(params),
                qubit=build_qubit(config),
            )
            res = fit(
                problem,
                init=sec.get("init"),
                n_starts=_field(sec, "fit", "n_starts", int, 8),
                max_eval=_field(sec, "fit", "max_eval", int, 10000),
                seed=args.seed,
            )
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"fit: {e}") from None
        result = res.to_dict()
    else:
        raise ConfigError(f"config field 'fit.mode' unknown: {mode!r}")
    doc = {
        "version": __version__,
        "config": config,
        "mode": mode,
        "result": result,
    }
    _atomic_write(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _figure_model(config, secname, rms_default, gamma=1.0, omega_e_scale=1.0):
    sec = config.get(secname, {})
    omega_l = _field(sec, secname, "omega_l", float, TWO_PI * 0.1)
    omega_e = _field(sec, secname, "omega_e", float, TWO_PI * 1.0e4) * omega_e_scale
    g = _field(sec, secname, "g_factor", float, -0.44)
    rms = _field(sec, secname, "rms_field", float, rms_default)
    return OverhauserModel.from_rms(rms, omega_l, omega_e, gamma, coupling_from_g(g))


def cmd_figure2(config, args):
    # correlator vs delay for a ladder of evolution times; no canonical
    # rms amplitude exists, so the default is an assumption recorded in
    # the sidecar
    sec = config.get("figure2", {})
    rms_default = 3.0e-5
    model = _figure_model(config, "figure2", rms_default)
    taus = np.asarray(sec.get("tau", np.geomspace(5.0e-8, 5.0e-6, 5)), dtype=float)
    dts = (
        _grid_values(sec, "figure2", "delta_t")
        if "delta_t" in sec
        else np.geomspace(1.0e-6, 1.0e2, 41)
    )
    rows = []
    for tau in taus:
        for dt in dts:
            pair = EvolutionPair(tau, dt)
            cm, _ = chi_pair(model, pair)
            corr = autocorrelation_analytic(model, pair)
            rows.append([dt, tau, corr, cm, "" if pair.is_physical else "unphysical"])
    _write_csv(args.out, ["delta_t_s", "tau_s", "correlation", "chi_minus", "flags"], rows)
    _write_sidecar(
        args.out,
        config,
        {
            "rms_field": _field(sec, "figure2", "rms_field", float, rms_default),
            "rms_field_is_assumption": "rms_field" not in sec,
        },
    )


def cmd_figure3a(config, args):
    # constant-contrast curves for four spectrum variants sharing the
    # gamma=1 schedule: gamma1, gamma2, doubled cutoff, and no cutoff
    sec = config.get("figure3a", {})
    rms_default = 7.0e-3
    dts = (
        _grid_values(sec, "figure3a", "delta_t")
        if "delta_t" in sec
        else np.geomspace(1.0e-5, 20.0, 40)
    )
    target = _field(sec, "figure3a", "target", float, 2.0)
    base = _figure_model(config, "figure3a", rms_default, gamma=1.0)
    sched = constant_contrast_schedule(base, dts, target=target)
    variants = {
        "gamma1": base,
        "gamma2": _figure_model(config, "figure3a", rms_default, gamma=2.0),
        "omega_e_x2": _figure_model(config, "figure3a", rms_default, omega_e_scale=2.0),
        "no_cutoff": OverhauserModel(
            s0=base.s0,
            omega_l=base.omega_l,
            omega_e=math.inf,
            gamma=1.0,
            coupling_c=base.coupling_c,
        ),
    }
    rows = []
    for name, model in variants.items():
        for pair in sched.pairs():
            corr = autocorrelation_analytic(model, pair)
            rows.append([name, pair.delta_t, pair.tau, corr])
    _write_csv(args.out, ["variant", "delta_t_s", "tau_s", "correlation"], rows)
    _write_sidecar(
        args.out,
        config,
        {
            "schedule": "constant contrast on the gamma1 variant, shared by all curves",
            "target": target,
            "rms_field_is_assumption": "rms_field" not in sec,
        },
    )


def cmd_figure3b(config, args):
    # pair exponent along the 1/f schedule for slopes around 1
    sec = config.get("figure3b", {})
    level = _field(sec, "figure3b", "level", float, 1.0e-7)
    variant = _field(sec, "figure3b", "variant", str, "exact")
    alphas = [float(a) for a in sec.get("alpha", (0.9, 1.0, 1.1))]
    dts = (
        _grid_values(sec, "figure3b", "delta_t")
        if "delta_t" in sec
        else np.geomspace(3.0e-3, 3.0, 16)
    )
    amplitude = _field(sec, "figure3b", "amplitude", float, math.pi / level)
    omega_low = _field(sec, "figure3b", "omega_low", float, 1.0e-5)
    omega_high = _field(sec, "figure3b", "omega_high", float, 1.0e8)
    try:
        sched = oneoverf_schedule(level, dts, variant=variant)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"figure3b: {e}") from None
    rows = []
    for alpha in alphas:
        model = PowerLawModel(
            amplitude=amplitude, alpha=alpha, omega_low=omega_low, omega_high=omega_high
        )
        for pair in sched.pairs():
            cm, _ = chi_pair(model, pair)
            corr = autocorrelation_analytic(model, pair)
            rows.append([f"alpha_{alpha:g}", pair.delta_t, pair.tau, cm, corr])
    _write_csv(
        args.out, ["variant", "delta_t_s", "tau_s", "chi_minus", "correlation"], rows
    )
    _write_sidecar(
        args.out,
        config,
        {"level": level, "schedule_variant": variant, "amplitude": amplitude},
    )


_COMMANDS = {
    "chi": (cmd_chi, True),
    "correlate": (cmd_correlate, True),
    "simulate": (cmd_simulate, True),
    "schedule": (cmd_schedule, True),
    "fit": (cmd_fit, True),
    "figure2": (cmd_figure2, False),
    "figure3a": (cmd_figure3a, False),
    "figure3b": (cmd_figure3b, False),
}


def _parser():
    p = argparse.ArgumentParser(
        prog="shotcorr",
        description="Noise spectroscopy from shot-shot correlations of single-shot readout.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, config_required) in _COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument(
            "--config",
            required=config_required,
            help="JSON config file" + ("" if config_required else " (optional)"),
        )
        sp.add_argument("--out", required=True, help="output artifact path")
        sp.add_argument("--seed", type=int, default=0, help="random seed (simulate)")
        sp.add_argument("--threads", type=int, default=None, help="worker threads")
        sp.add_argument(
            "--freq-units",
            choices=("hz", "rad"),
            default="rad",
            help="units of frequency-valued config fields (hz multiplies by 2 pi)",
        )
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    config = {}
    if args.config:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except OSError as e:
            print(f"error: cannot read config: {e}", file=sys.stderr)
            return 1
        except json.JSONDecodeError as e:
            print(f"error: config is not valid JSON: {e}", file=sys.stderr)
            return 1
    if not isinstance(config, dict):
        print("error: config root must be a JSON object", file=sys.stderr)
        return 1
    if args.freq_units == "hz":
        config = _convert_hz(copy.deepcopy(config))
    handler, _ = _COMMANDS[args.command]
    try:
        handler(config, args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
