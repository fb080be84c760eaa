"""Command-line entry point: ``optoshe <subcommand> [options]``.

Angles are degrees, detunings are in units of omega_b and shifts in units of
the probe wavelength. Coupling overrides ``--gcp``/``--lk`` are in units of g_mc.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__, optomech, output, spinhall, sweep, tmm
from .errors import ConfigError, OptoSHEError
from .params import CHOICES, RATE_FIELDS, SystemParams, params_from_mapping, validate

_PARAM_FIELDS = [f.name for f in fields(SystemParams)]


def _add_param_flags(ap: argparse.ArgumentParser) -> None:
    g = ap.add_argument_group("system parameters (override config)")
    g.add_argument("--config", type=Path, help="JSON config file")
    for name in _PARAM_FIELDS:
        if name in CHOICES:
            g.add_argument(f"--{name}", choices=CHOICES[name], default=None)
        else:
            g.add_argument(f"--{name}", type=float, default=None, metavar="X")
        if name in RATE_FIELDS:
            g.add_argument(f"--{name}_hz", type=float, default=None, metavar="HZ")
    g.add_argument("--gcp", type=float, default=None, help="g_cp in units of g_mc")
    g.add_argument("--lk", type=float, default=None, help="lambda_k in units of g_mc")


def resolve_params(args) -> SystemParams:
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config", "config top level must be a JSON object")
    for name in _PARAM_FIELDS:
        forms = [name] + ([f"{name}_hz"] if name in RATE_FIELDS else [])
        given = [f for f in forms if getattr(args, f) is not None]
        if len(given) > 1:
            raise ConfigError(name, f"--{name} given in more than one form")
        if given:
            for f in forms:
                data.pop(f, None)
            data[given[0]] = getattr(args, given[0])
    if args.gcp is not None and (args.g_cp is not None or args.g_cp_hz is not None):
        raise ConfigError("g_cp", "use either --g_cp or --gcp")
    if args.lk is not None and (args.lambda_k is not None or args.lambda_k_hz is not None):
        raise ConfigError("lambda_k", "use either --lambda_k or --lk")
    p = params_from_mapping(data)
    return validate(p.with_couplings(args.gcp, args.lk))


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _finish(args, p: SystemParams, files, spec: dict, t0: float) -> None:
    output.write_manifest(
        files[0],
        command=args.command,
        params=p.to_dict(),
        spec=spec,
        version=__version__,
        duration=time.perf_counter() - t0,
        files=files,
    )


# -- subcommands ------------------------------------------------------------


def cmd_response(args, p: SystemParams, t0: float) -> None:
    dps = np.linspace(args.dp_min, args.dp_max, args.points)
    resp = optomech.response_spectrum(p, dps)
    output.write_csv(args.out, ["dp_over_wb", "re_eout", "im_eout"], ((r.detuning, r.e_out.real, r.e_out.imag) for r in resp))
    _finish(args, p, [args.out], {"dp_min": args.dp_min, "dp_max": args.dp_max, "points": args.points}, t0)


def _eps2(args, p: SystemParams) -> complex:
    if args.eps2 is not None:
        return args.eps2
    return optomech.probe_response(p, args.dp).eps2


def cmd_reflectance(args, p: SystemParams, t0: float) -> None:
    th = np.linspace(args.theta_min, args.theta_max, args.points)
    stack = tmm.cavity_stack(p, _eps2(args, p))
    k = tmm.vacuum_wavenumber(p)
    rs = tmm.reflection(stack, np.radians(th), k, tmm.TE)
    rp = tmm.reflection(stack, np.radians(th), k, tmm.TM)
    with np.errstate(divide="ignore"):
        ratio = np.abs(rs) / np.abs(rp)
    rows = zip(th, np.abs(rs), np.angle(rs), np.abs(rp), np.angle(rp), ratio)
    output.write_csv(args.out, ["theta_deg", "abs_rs", "arg_rs", "abs_rp", "arg_rp", "ratio_sp"], rows)
    spec = {"dp": args.dp, "eps2": args.eps2, "theta_min": args.theta_min, "theta_max": args.theta_max, "points": args.points}
    _finish(args, p, [args.out], spec, t0)


def cmd_shift(args, p: SystemParams, t0: float) -> None:
    th = np.linspace(args.theta_min, args.theta_max, args.points)
    delta, rs, rp = sweep.shift_curve(p, args.dp, th, eps2=_eps2(args, p))
    with np.errstate(divide="ignore"):
        ratio = np.abs(rs) / np.abs(rp)
    rows = zip(th, delta, 0.0 - delta, ratio)
    output.write_csv(args.out, ["theta_deg", "delta_plus_over_lambda", "delta_minus_over_lambda", "ratio_sp"], rows)
    spec = {"dp": args.dp, "eps2": args.eps2, "theta_min": args.theta_min, "theta_max": args.theta_max, "points": args.points}
    _finish(args, p, [args.out], spec, t0)


def map_summary(p: SystemParams, res: sweep.SweepResult) -> dict:
    centers = sweep.find_transparency_windows(res.dps, res.absorption)
    widths = []
    for c in centers:
        try:
            widths.append(sweep.window_width(p, c))
        except ValueError:
            widths.append(None)
    bands = sweep.sign_flip_bands(res.dps, res.values, res.absorption, p.waist / p.wavelength)
    extrema = []
    for dp, ext in zip(res.dps, res.extrema):
        if ext is None:
            extrema.append({"dp_over_wb": dp, "max": None, "min": None})
        else:
            extrema.append(
                {
                    "dp_over_wb": dp,
                    "max": {"theta_deg": ext["max"][0], "value": ext["max"][1]},
                    "min": {"theta_deg": ext["min"][0], "value": ext["min"][1]},
                }
            )
    return {
        "grid": {"n_theta": int(res.thetas_deg.size), "n_dp": int(res.dps.size)},
        "dp_over_wb": res.dps.tolist(),
        "brewster_deg": res.brewster_deg,
        "extrema": extrema,
        "asymmetry": res.asymmetry,
        "window_centers": centers,
        "window_widths": widths,
        "sign_flip_bands": bands,
        "n_sign_flip_bands": len(bands),
        "failures": [{"i": i, "j": j, "reason": msg} for i, j, msg in res.failures],
    }


def cmd_map(args, p: SystemParams, t0: float) -> None:
    spec = sweep.SweepSpec(
        (args.theta_min, args.theta_max, args.theta_points),
        (args.dp_min, args.dp_max, args.dp_points),
    )
    res = sweep.run_map(p, spec, workers=args.workers)
    rows = ((res.thetas_deg[i], res.dps[j], res.values[i, j]) for j in range(res.dps.size) for i in range(res.thetas_deg.size))
    output.write_csv(args.out, ["theta_deg", "dp_over_wb", "delta_plus_over_lambda"], rows)
    summary = args.summary or Path(args.out).with_suffix(".json")
    output.write_json(summary, map_summary(p, res))
    _finish(args, p, [args.out, summary], spec.to_dict(), t0)


def cmd_brewster(args, p: SystemParams, t0: float) -> None:
    angle = sweep.find_brewster(p, args.dp, (args.bracket[0], args.bracket[1]))
    result = {"dp_over_wb": args.dp, "bracket_deg": list(args.bracket), "brewster_deg": angle}
    if args.out is None:
        sys.stdout.write(output.dumps(result))
        return
    output.write_json(args.out, result)
    _finish(args, p, [args.out], {"dp": args.dp, "bracket": list(args.bracket)}, t0)


def cmd_oracle(args, p: SystemParams, t0: float) -> None:
    theta = np.radians(args.theta)
    beam = spinhall.beam_from_params(p)
    stack = tmm.cavity_stack(p, _eps2(args, p))
    k = tmm.vacuum_wavenumber(p)
    rs = args.rs if args.rs is not None else tmm.reflection(stack, theta, k, tmm.TE)
    rp = args.rp if args.rp is not None else tmm.reflection(stack, theta, k, tmm.TM)
    if args.drp is not None:
        drp = args.drp
    else:
        drp, _ = spinhall.drp_dtheta(stack, theta, k)
    closed = spinhall.shift_closed_form(rs, rp, drp, theta, beam).delta_plus
    orc = spinhall.centroid_oracle(rs, rp, drp, theta, beam, n=args.grid_n)
    denom = max(abs(closed), abs(orc.delta_plus))
    rel = abs(orc.delta_plus - closed) / denom if denom > 0 else 0.0
    result = {
        "closed_form": closed,
        "oracle": orc.delta_plus,
        "oracle_coarse": orc.coarse_plus,
        "relative_error": rel,
        "grid_n": args.grid_n,
        "converged": orc.converged,
        "theta_deg": args.theta,
        "dp_over_wb": args.dp,
    }
    output.write_json(args.out, result)
    spec = {"dp": args.dp, "theta": args.theta, "grid_n": args.grid_n, "rs": args.rs, "rp": args.rp, "drp": args.drp}
    _finish(args, p, [args.out], spec, t0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="optoshe", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"optoshe {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("response", help="probe absorption/dispersion spectrum (CSV)")
    s.add_argument("--dp-min", type=float, default=-0.1)
    s.add_argument("--dp-max", type=float, default=0.1)
    s.add_argument("--points", type=int, default=401)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_response)

    s = sub.add_parser("reflectance", help="|r_s|, |r_p| and their ratio versus angle (CSV)")
    s.add_argument("--dp", type=float, default=0.0)
    s.add_argument("--eps2", type=_complex, default=None, help="override the intracavity permittivity")
    s.add_argument("--theta-min", type=float, default=50.0)
    s.add_argument("--theta-max", type=float, default=65.0)
    s.add_argument("--points", type=int, default=601)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_reflectance)

    s = sub.add_parser("shift", help="spin Hall shift versus angle (CSV)")
    s.add_argument("--dp", type=float, default=0.0)
    s.add_argument("--eps2", type=_complex, default=None)
    s.add_argument("--theta-min", type=float, default=50.0)
    s.add_argument("--theta-max", type=float, default=65.0)
    s.add_argument("--points", type=int, default=601)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_shift)

    s = sub.add_parser("map", help="shift over the (theta, dp) grid (CSV + JSON summary)")
    s.add_argument("--theta-min", type=float, default=50.0)
    s.add_argument("--theta-max", type=float, default=65.0)
    s.add_argument("--theta-points", type=int, default=601)
    s.add_argument("--dp-min", type=float, default=-0.1)
    s.add_argument("--dp-max", type=float, default=0.1)
    s.add_argument("--dp-points", type=int, default=401)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--out", required=True)
    s.add_argument("--summary", default=None, help="JSON summary path (default: OUT with .json suffix)")
    s.set_defaults(func=cmd_map)

    s = sub.add_parser("brewster", help="Brewster angle of the cavity at one detuning (JSON)")
    s.add_argument("--dp", type=float, default=0.0)
    s.add_argument("--bracket", type=float, nargs=2, default=(50.0, 65.0), metavar=("LO", "HI"))
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_brewster)

    s = sub.add_parser("oracle", help="closed-form shift against the centroid quadrature (JSON)")
    s.add_argument("--dp", type=float, default=0.0)
    s.add_argument("--theta", type=float, default=50.0, help="incidence angle in degrees")
    s.add_argument("--grid-n", type=int, default=1024)
    s.add_argument("--eps2", type=_complex, default=None)
    s.add_argument("--rs", type=_complex, default=None, help="synthetic r_s")
    s.add_argument("--rp", type=_complex, default=None, help="synthetic r_p")
    s.add_argument("--drp", type=_complex, default=None, help="synthetic d r_p / d theta (per rad)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_oracle)

    for s in sub.choices.values():
        _add_param_flags(s)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        p = resolve_params(args)
        args.func(args, p, t0)
    except OptoSHEError as exc:
        print(f"optoshe {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"optoshe {args.command}: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
