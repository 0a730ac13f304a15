"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import reporting
from .errors import NumericalError, ValidationError

__all__ = ["build_parser", "main"]

COMMANDS = ("locate", "asymptotic", "solve", "glue", "criteria", "spectrum", "sweep", "figure")


def _global_options(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="JSON file with default parameters")
    p.add_argument("--out-dir", default=d, help="directory for result.json and CSV output")
    p.add_argument("--jobs", type=int, default=argparse.SUPPRESS if suppress else None,
                   help="worker processes for sweeps (default: available cores)")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS if suppress else False,
                   help="print the full JSON record")


def build_parser():
    p = argparse.ArgumentParser(prog="vortexray", description="Ring modes of vortex columns.")
    _global_options(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)
    glob = argparse.ArgumentParser(add_help=False)
    _global_options(glob, suppress=True)

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[glob])

    s = add("locate", "ring radius and wavenumber ratio")
    s.add_argument("--q", type=float, default=0.25)
    s.add_argument("--profile", help="profile JSON (overrides --q)")
    s.add_argument("--seed", type=float, nargs=2, metavar=("R0", "BETA"),
                   help="Newton seed for a general profile")

    s = add("asymptotic", "asymptotic eigenvalue and Taylor data")
    s.add_argument("--q", type=float, default=0.25)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, default=1)

    s = add("solve", "shooting eigen-solve")
    s.add_argument("--q", type=float, default=0.25)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--seed", type=float, nargs=2, metavar=("RE", "IM"))
    s.add_argument("--emit-phi", help="CSV path for the eigenfunction")

    s = add("glue", "inner-outer gluing solve")
    s.add_argument("--q", type=float, default=0.25)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--delta", type=float, default=0.125)
    s.add_argument("--D-out", dest="D_out", type=float, default=1.0)
    s.add_argument("--D-in", dest="D_in", type=float, default=None)
    s.add_argument("--emit-fields", action="store_true", help="write Psi and phi_out CSV")

    s = add("criteria", "stability criteria report")
    s.add_argument("--q", type=float, default=0.25)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--emit-semicircle", help="CSV path for the semicircle figure data")

    s = add("spectrum", "modal-operator spectrum")
    s.add_argument("--q", type=float, default=0.25)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--alpha", type=float, default=None, help="default beta * n")
    s.add_argument("--Ng", type=int, default=1024)
    s.add_argument("--R-max", dest="R_max", type=float, default=6.0)
    s.add_argument("--emit-eigs", help="CSV path for all eigenvalues")

    s = add("sweep", "shooting sweep over q x n x m")
    s.add_argument("--q", type=float, nargs="+", default=[0.25])
    s.add_argument("--n", type=int, nargs="*", required=True)
    s.add_argument("--m", type=int, nargs="+", default=[1])

    s = add("figure", "figure data (CSV plus plot script)")
    s.add_argument("--kind", required=True,
                   choices=["semicircle", "potential_regimes", "mode_profile"])
    s.add_argument("--q", type=float, default=0.25)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, default=1)
    return p


def _resolve(path, out_dir):
    if path is None:
        return None
    path = Path(path)
    if not path.is_absolute() and out_dir is not None:
        path = Path(out_dir) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _ring(q):
    from .ring import locate_batchelor
    from .profiles import BatchelorProfile
    return BatchelorProfile(q), locate_batchelor(q)


def _cmd_locate(a):
    from .profiles import load_profile
    from .ring import locate_batchelor, locate_general
    if a.profile:
        if not a.seed:
            raise ValidationError("a general profile needs --seed R0 BETA")
        ring = locate_general(load_profile(a.profile), tuple(a.seed))
    else:
        ring = locate_batchelor(a.q)
    return ring.to_dict(), []


def _cmd_asymptotic(a):
    from .asymptotics import mode_spec, taylor_coeffs, weber_mode
    P, R = _ring(a.q)
    spec = mode_spec(R, a.n, a.m)
    tc = taylor_coeffs(R, a.n, a.m)
    W = weber_mode(R, a.n, a.m)
    w = np.abs(W.values) ** 2
    from .radial import trapz_weights
    wq = trapz_weights(W.xi)
    width = float(np.sqrt(np.sum(wq * W.xi**2 * w) / np.sum(wq * w))) * a.n**-0.75
    return {"omega": spec.omega, "omega_app": spec.omega_app, "mu_m": spec.mu_m,
            "k0": tc.k0, "k2": tc.k2, "width": width, "n": a.n, "m": a.m}, []


def _cmd_solve(a):
    from .shooting import eigen_solve
    P, R = _ring(a.q)
    seed = complex(*a.seed) if a.seed else None
    rep = eigen_solve(P, R, a.n, a.m, seed=seed)
    arts = []
    if a.emit_phi:
        arts.append(rep.phi.to_csv(_resolve(a.emit_phi, a.out_dir)))
    return rep.summary(), arts


def _cmd_glue(a):
    from .gluing import GluingConfig, reduced_equation_solve
    P, R = _ring(a.q)
    cfg = GluingConfig(D_out=a.D_out, D_in=a.D_in, delta=a.delta, n=a.n)
    sol = reduced_equation_solve(P, R, a.n, a.m, cfg)
    arts = []
    if a.emit_fields:
        arts.append(sol.Psi.to_csv(_resolve("glue_psi.csv", a.out_dir)))
        arts.append(sol.phi_out.to_csv(_resolve("glue_phi_out.csv", a.out_dir)))
    return sol.summary(), arts


def _cmd_criteria(a):
    from .asymptotics import omega_asymptotic
    from .criteria import criteria_report
    P, R = _ring(a.q)
    modes = [omega_asymptotic(R, a.n, m) for m in range(1, 6)]
    res = criteria_report(P, R, a.n, modes)
    arts = []
    if a.emit_semicircle:
        target = _resolve(a.emit_semicircle, a.out_dir)
        out = reporting.emit_figure_data("semicircle", {"q": a.q, "n": a.n, "ring": R},
                                         target.parent)
        Path(out["csv"]).replace(target)
        arts += [target, out["script"]]
    return res, arts


def _cmd_spectrum(a):
    from .modal import assemble, most_unstable
    P, R = _ring(a.q)
    alpha = R.beta * a.n if a.alpha is None else a.alpha
    M = assemble(P, a.n, alpha, a.Ng, R_max=a.R_max, r_center=R.r0)
    lam, _, _, _, allam = most_unstable(M, return_spectrum=True)
    arts = []
    if a.emit_eigs:
        rows = [(z.real, z.imag) for z in sorted(allam, key=lambda z: -z.real)]
        arts.append(reporting.write_csv(_resolve(a.emit_eigs, a.out_dir), ["re", "im"], rows))
    return {"lambda_max": lam, "omega_equiv": 1j * lam, "n": a.n, "alpha": alpha,
            "N_g": a.Ng, "n_re_above_0.05": int(np.sum(np.abs(allam.real) > 0.05))}, arts


def _cmd_sweep(a):
    cfg = reporting.RunConfig.sweep(a.q, a.n, a.m)
    rec = reporting.run_sweep(cfg, a.out_dir, a.jobs or os.cpu_count() or 1)
    return rec.result, rec.artifacts


def _cmd_figure(a):
    inputs = {"q": a.q, "n": a.n, "m": a.m}
    if a.kind == "mode_profile":
        from .shooting import eigen_solve
        P, R = _ring(a.q)
        inputs.update(ring=R, report=eigen_solve(P, R, a.n, a.m))
    out = reporting.emit_figure_data(a.kind, inputs, a.out_dir or ".")
    return out["summary"], [out["csv"], out["script"]]


_DISPATCH = {name: globals()[f"_cmd_{name}"] for name in COMMANDS}


def _load_config(path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    return data


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        data = _load_config(args.config)
        section = dict(data.get(args.command, {})) if isinstance(data.get(args.command), dict) else {}
        flat = {k: v for k, v in data.items() if k not in COMMANDS}
        defaults = {k.replace("-", "_"): v for k, v in {**flat, **section}.items()}
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**defaults)
        parser.set_defaults(**{k: v for k, v in defaults.items()
                               if k in ("out_dir", "jobs", "json")})
        args = parser.parse_args(argv)
    return args


def _params(args):
    skip = {"config", "json", "jobs", "out_dir", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _parse(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = {"command": args.command, "schema_version": reporting.SCHEMA_VERSION,
           "params": _params(args)}
    rec = reporting.ResultRecord(args.command, reporting.config_hash(cfg), config=cfg)
    code = 0
    try:
        result, arts = _DISPATCH[args.command](args)
        rec.result, rec.artifacts = result, list(arts)
    except ValidationError as exc:
        rec.status, rec.error, code = "validation_error", _err(exc), 2
    except NumericalError as exc:
        rec.status, rec.error, code = "numerical_error", _err(exc), 3
    text = rec.to_json()
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "result.json").write_text(text + "\n", encoding="utf-8")
    if args.json:
        print(text)
    elif code == 0:
        _print_human(args.command, rec.to_dict()["result"])
    if code:
        print(f"error ({type_name(rec)}): {rec.error['message']}", file=sys.stderr)
    return code


def _err(exc):
    return {"type": type(exc).__name__, "message": str(exc)}


def type_name(rec):
    return rec.error["type"] if rec.error else ""


def _print_human(command, result):
    print(f"[{command}]")
    for k, v in (result or {}).items():
        if k == "rows":
            for row in v:
                print("  " + ", ".join(f"{c}={row[c]}" for c in reporting.SWEEP_COLUMNS))
            continue
        print(f"  {k}: {json.dumps(v) if isinstance(v, (dict, list)) else v}")


if __name__ == "__main__":
    sys.exit(main())
