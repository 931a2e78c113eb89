"""Command-line interface.

Exit codes: 0 ok, 2 invalid input, 3 model degeneracy, 4 I/O failure,
5 resource limit.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bloch import build_population_generator, steady_state
from .errors import AutlerCavityError, ParameterError
from .oracle import FullModelConfig, atomic_marginal, oracle_steady_state, recommended_n_max, slow_eigenvalues
from .params import CONFIG_KEYS, ModelParams, load_config
from .spectrum import (
    build_coherence_generator,
    default_grid,
    extract_peaks,
    spectrum_trace,
    write_trace_csv,
)
from .sweeps import PRESETS, compare_eta, default_workers, get_preset, run_preset, sweep_steady_state

MAX_ORACLE_N = 2


def _add_param_flags(parser):
    group = parser.add_argument_group("model parameters (override --config and --preset)")
    for key in CONFIG_KEYS:
        group.add_argument("--" + key.replace("_", "-"), dest=key, default=None, metavar="X")
    parser.add_argument("--config", type=Path, help="key=value parameter file")
    parser.add_argument("--manifest", type=Path, help="where to write the run manifest")


def _resolve_params(args, preset_params: ModelParams | None = None) -> ModelParams:
    values = dict(preset_params.to_config()) if preset_params is not None else {}
    if args.config is not None:
        try:
            values.update(load_config(args.config))
        except OSError as exc:
            raise ParameterError(f"cannot read config file {args.config}: {exc.strerror}", key="config")
    for key in CONFIG_KEYS:
        raw = getattr(args, key)
        if raw is not None:
            values[key] = raw
    return ModelParams.from_config(values)


def _preset_params(name, eta_override):
    preset = get_preset(name)
    if eta_override is not None:
        try:
            eta = float(eta_override)
        except ValueError:
            raise ParameterError(f"eta: cannot parse {eta_override!r}", key="eta") from None
        for p in preset.variants:
            if p.eta == eta:
                return preset, p
    return preset, preset.variants[-1]


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _emit_manifest(args, argv, params, outputs):
    path = args.manifest
    if path is None and outputs:
        path = Path(str(outputs[0]) + ".manifest.json")
    if path is None:
        return
    manifest = {
        "subcommand": args.command,
        "argv": list(argv),
        "parameters": params.to_config() if params is not None else None,
        "inputs": [str(args.config)] if getattr(args, "config", None) else [],
        "outputs": [str(p) for p in outputs],
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "version": __version__,
    }
    _write_json(path, manifest)


def cmd_steady_state(args, argv):
    preset_params = _preset_params(args.preset, args.eta)[1] if args.preset else None
    params = _resolve_params(args, preset_params)
    ss = steady_state(params)
    print(f"p0       {ss.p0:.12g}")
    print(f"p1       {ss.p1:.12g}")
    print(f"p2       {ss.p2:.12g}")
    print(f"coh12_re {ss.coh12.real:.12g}")
    print(f"coh12_im {ss.coh12.imag:.12g}")
    outputs = []
    if args.json:
        _write_json(args.json, {"params": params.to_config(), "p0": ss.p0, "p1": ss.p1, "p2": ss.p2,
                                "coh12_re": ss.coh12.real, "coh12_im": ss.coh12.imag})
        outputs.append(args.json)
    _emit_manifest(args, argv, params, outputs)
    return 0


def _omega_grid(args, params):
    flags = (args.omega_min, args.omega_max, args.omega_steps)
    if all(f is None for f in flags):
        if args.preset:
            preset = get_preset(args.preset)
            if preset.kind == "spectrum":
                return preset.axis()
        return default_grid(params)
    if any(f is None for f in flags):
        raise ParameterError("--omega-min, --omega-max and --omega-steps go together", key="omega_steps")
    if args.omega_steps < 1:
        raise ParameterError("--omega-steps must be >= 1", key="omega_steps")
    if not args.omega_max > args.omega_min:
        raise ParameterError("--omega-max must exceed --omega-min", key="omega_max")
    return np.linspace(args.omega_min, args.omega_max, args.omega_steps + 1)


def cmd_spectrum(args, argv):
    preset_params = _preset_params(args.preset, args.eta)[1] if args.preset else None
    params = _resolve_params(args, preset_params)
    grid = _omega_grid(args, params)
    trace = spectrum_trace(params, grid)
    outputs = []
    if args.out:
        write_trace_csv(trace, args.out)
        outputs.append(args.out)
    print(f"{'center':>14} {'height':>14} {'fwhm':>14}")
    for peak in extract_peaks(trace):
        print(f"{peak.center:14.6f} {peak.height:14.6e} {peak.fwhm:14.6f}")
    _emit_manifest(args, argv, params, outputs)
    return 0


def cmd_sweep(args, argv):
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        raise ParameterError("--workers must be >= 1", key="workers")
    out_dir = Path(args.out_dir)
    outputs = []
    params = None
    if args.preset or args.all:
        names = list(PRESETS) if args.all else [args.preset]
        for name in names:
            run = run_preset(name, workers=workers)
            for result in run.results:
                outputs.extend(result.write(out_dir))
            if len(run.results) == 2:
                dev = compare_eta(run)
                print(f"{name}: eta deviation max={dev['max_pointwise']:.6g} integrated={dev['integrated']:.6g}")
            else:
                print(f"{name}: {len(run.results[0].axis)} points")
    else:
        params = _resolve_params(args)
        if args.delta_steps is None or args.delta_min is None or args.delta_max is None:
            raise ParameterError("custom sweeps need --delta-min, --delta-max and --delta-steps",
                                 key="delta_steps")
        if args.delta_steps < 1 or not args.delta_max > args.delta_min:
            raise ParameterError("need --delta-steps >= 1 and --delta-max > --delta-min", key="delta_steps")
        deltas = np.linspace(args.delta_min, args.delta_max, args.delta_steps + 1)
        result = sweep_steady_state(params, deltas, workers=workers, preset=args.name)
        outputs.extend(result.write(out_dir))
        print(f"{args.name}: {len(deltas)} points")
    _emit_manifest(args, argv, params, outputs)
    return 0


def _deviation(full, reduced):
    out = {}
    for name in ("p0", "p1", "p2", "coh12"):
        a, b = getattr(full, name), getattr(reduced, name)
        diff = abs(a - b)
        out[name] = {"abs": diff, "rel": diff / abs(b) if b != 0 else None}
    return out


def _state_dict(s):
    return {"p0": s.p0, "p1": s.p1, "p2": s.p2, "coh12_re": s.coh12.real, "coh12_im": s.coh12.imag}


def cmd_oracle_compare(args, argv):
    params = _resolve_params(args)
    if params.eta != 1.0 and not args.force_reduced_only:
        raise ParameterError("oracle comparison needs eta = 1 (or --force-reduced-only)", key="eta")
    if params.n_thermal > MAX_ORACLE_N and not args.force:
        raise ParameterError(f"n_thermal > {MAX_ORACLE_N} makes the oracle expensive; pass --force",
                             key="n_thermal")
    reduced = steady_state(params)
    report = {"params": params.to_config(), "reduced": _state_dict(reduced)}
    if params.eta == 1.0:
        n_max = args.n_max if args.n_max is not None else max(20, recommended_n_max(params.n_thermal))
        config = FullModelConfig(params, n_max, max_dim=args.max_dim)
        finer = FullModelConfig(params, n_max + 5, max_dim=args.max_dim)
        rho, residual = oracle_steady_state(config, return_residual=True)
        full = atomic_marginal(rho)
        full_fine = atomic_marginal(oracle_steady_state(finer))
        guesses = np.concatenate([
            build_population_generator(params).eigenvalues(),
            build_coherence_generator(params).eigenvalues(),
        ])
        full_eigs = slow_eigenvalues(config, guesses)
        report.update({
            "n_max": n_max,
            "residual": residual,
            "full": _state_dict(full),
            "deviation": _deviation(full, reduced),
            "convergence_delta": max(abs(getattr(full, k) - getattr(full_fine, k))
                                     for k in ("p0", "p1", "p2", "coh12")),
            "slow_rates": [
                {"reduced_re": g.real, "reduced_im": g.imag, "full_re": f.real, "full_im": f.imag,
                 "rel": abs(f - g) / abs(g.real)}
                for g, f in zip(guesses, full_eigs)
            ],
        })
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    outputs = []
    if args.json:
        Path(args.json).write_text(text, encoding="utf-8")
        outputs.append(args.json)
    sys.stdout.write(text)
    _emit_manifest(args, argv, params, outputs)
    return 0


def cmd_preset_list(args, argv):
    for name, preset in PRESETS.items():
        p = preset.variants[-1]
        etas = "/".join(f"{v.eta:g}" for v in preset.variants)
        extra = "delta sweep" if preset.kind == "steady_state" else f"delta={p.delta:g}"
        print(f"{name:7s} {preset.kind:12s} omega21={p.omega21:g} N={p.n_thermal:g} {extra} eta={etas}")
    return 0


def cmd_replay(args, argv):
    manifest = json.loads(Path(args.manifest_file).read_text(encoding="utf-8"))
    return main(manifest["argv"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="autler-cavity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("steady-state", help="atomic steady state of the reduced model")
    _add_param_flags(p)
    p.add_argument("--preset", help="start from a figure preset's parameters")
    p.add_argument("--json", type=Path)
    p.set_defaults(func=cmd_steady_state)

    p = sub.add_parser("spectrum", help="probe absorption spectrum as CSV")
    _add_param_flags(p)
    p.add_argument("--preset")
    p.add_argument("--omega-min", type=float)
    p.add_argument("--omega-max", type=float)
    p.add_argument("--omega-steps", type=int, help="number of grid intervals")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="run presets or a custom detuning sweep")
    _add_param_flags(p)
    p.add_argument("--preset")
    p.add_argument("--all", action="store_true", help="run every preset")
    p.add_argument("--delta-min", type=float)
    p.add_argument("--delta-max", type=float)
    p.add_argument("--delta-steps", type=int)
    p.add_argument("--name", default="custom")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle-compare", help="reduced model vs full atom+cavity model")
    _add_param_flags(p)
    p.add_argument("--n-max", type=int)
    p.add_argument("--max-dim", type=int, default=400)
    p.add_argument("--force", action="store_true", help="allow n_thermal > 2")
    p.add_argument("--force-reduced-only", action="store_true")
    p.add_argument("--json", type=Path)
    p.set_defaults(func=cmd_oracle_compare)

    p = sub.add_parser("preset", help="preset registry")
    psub = p.add_subparsers(dest="preset_command", required=True)
    pl = psub.add_parser("list")
    pl.set_defaults(func=cmd_preset_list)

    p = sub.add_parser("replay", help="re-run a manifest")
    p.add_argument("manifest_file", type=Path)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not hasattr(args, "manifest"):
        args.manifest = None
    try:
        return args.func(args, argv)
    except AutlerCavityError as exc:
        key = getattr(exc, "key", None)
        prefix = f"error [{key}]" if key else "error"
        print(f"{prefix}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
