"""Command-line front end: solve, verify, oracle, sweep and trace."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .eap_solver import solve
from .network import GameParams, compose_network
from .oracle import OracleConfig, kolmogorov_distance, solve_fixed_point
from .profile import CurveError, JointProfile
from .verifier import audit_structure, check_equilibrium, social_cost

PARAM_KEYS = ("topology", "mu1", "mu2", "lambda1", "lambda2", "gamma1", "gamma2")
EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class ConfigError(Exception):
    pass


def load_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    for key in PARAM_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def params_from(cfg: dict) -> GameParams:
    try:
        return GameParams.from_dict(cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid parameters: {exc!r}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_profile(path: str) -> JointProfile:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read profile {path}: {exc}") from exc
    if isinstance(data, dict) and "profiles" in data:
        data = data["profiles"]
    try:
        return JointProfile.from_json(data)
    except CurveError as exc:
        raise ConfigError(f"malformed profile {path}: {exc}") from exc


def cmd_solve(args) -> int:
    p = params_from(load_config(args))
    sol = solve(p)
    print(f"tag: {sol.tag.value}", file=sys.stderr if not args.out else sys.stdout)
    for k, v in sol.boundaries.to_json().items():
        print(f"  {k} = {v:.12g}", file=sys.stderr if not args.out else sys.stdout)
    _emit(json.dumps(sol.to_json(), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    p = params_from(load_config(args))
    if args.profile:
        jp = _load_profile(args.profile)
        sol = None
    else:
        sol = solve(p)
        jp = sol.profiles()[0]
    rep = check_equilibrium(jp.f1, jp.f2, p, eps=args.eps)
    out = {"equilibrium": rep.to_json()}
    passed = rep.passed
    if sol is not None:
        audit = audit_structure(sol, p)
        out["structure"] = audit.to_json()
        passed = passed and audit.passed
    out["passed"] = passed
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_oracle(args) -> int:
    p = params_from(load_config(args))
    cfg = OracleConfig(dt=args.dt, max_iters=args.iters)
    res = solve_fixed_point(p, cfg)
    diag = res.diagnostics()
    sol = solve(p)
    if sol.profile is not None:
        diag["distance_to_reference"] = [
            kolmogorov_distance(res.profile.curve(i), sol.profile.curve(i), res.profile.times)
            for i in (1, 2)
        ]
    diag["tag"] = sol.tag.value
    diag["config"] = cfg.to_json()
    out = {"diagnostics": diag, "profile": res.profile.to_json()}
    print(json.dumps(diag, indent=2), file=sys.stderr)
    _emit(json.dumps(out) + "\n", args.out)
    return EXIT_OK


def _sweep_axis(axis: list[str]) -> tuple[str, np.ndarray]:
    name, lo, hi, steps = axis[0], float(axis[1]), float(axis[2]), int(axis[3])
    if name not in PARAM_KEYS[1:]:
        raise ConfigError(f"cannot sweep {name!r}")
    if steps < 1:
        raise ConfigError("sweep needs at least one step")
    if steps == 1:
        return name, np.array([lo])
    return name, np.linspace(lo, hi, steps)


def cmd_sweep(args) -> int:
    base = load_config(args)
    axes = [_sweep_axis(a) for a in (args.axis or [])]
    if not axes:
        raise ConfigError("sweep needs --axis NAME LO HI STEPS")
    grids = np.meshgrid(*[v for _, v in axes], indexing="ij")
    names = [n for n, _ in axes]
    bnames = ["t1a", "t1f", "t2a", "t2f", "ta", "tf", "t_empty"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(PARAM_KEYS) + ["tag"] + bnames + ["social_cost"])
    for idx in np.ndindex(grids[0].shape):
        cfg = dict(base)
        for n, g in zip(names, grids):
            cfg[n] = float(g[idx])
        p = params_from(cfg)
        sol = solve(p)
        jp = sol.profiles()[0]
        sc = social_cost(jp.f1, jp.f2, p)
        b = sol.boundaries.to_json()
        row = [p.to_dict()[k] for k in PARAM_KEYS] + [sol.tag.value]
        row += ["" if b.get(k) is None else repr(b[k]) for k in bnames] + [repr(sc)]
        w.writerow(row)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_trace(args) -> int:
    p = params_from(load_config(args))
    jp = _load_profile(args.profile) if args.profile else solve(p).profiles()[0]
    tr = compose_network(jp.f1, jp.f2, p)
    _emit(tr.to_csv(rows=args.rows), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fluidgame", description="Fluid queueing-network equilibria.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON parameter document")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--topology", choices=["TandemCommon", "Parallel", "HDS", "HAS", "SingleQueue"])
        for key in PARAM_KEYS[1:]:
            sp.add_argument(f"--{key}", type=float)
        sp.add_argument("--seed", type=int, default=0)
        return sp

    common(sub.add_parser("solve", help="closed-form equilibrium")).set_defaults(func=cmd_solve)
    sp = common(sub.add_parser("verify", help="check a profile is an equilibrium"))
    sp.add_argument("--profile", help="profile JSON (default: the solved one)")
    sp.add_argument("--eps", type=float, default=1e-9)
    sp.set_defaults(func=cmd_verify)
    sp = common(sub.add_parser("oracle", help="numerical best-response fixed point"))
    sp.add_argument("--dt", type=float, default=0.01)
    sp.add_argument("--iters", type=int, default=OracleConfig.max_iters)
    sp.set_defaults(func=cmd_oracle)
    sp = common(sub.add_parser("sweep", help="regime map over parameter ranges"))
    sp.add_argument("--axis", nargs=4, action="append", metavar=("NAME", "LO", "HI", "STEPS"))
    sp.set_defaults(func=cmd_sweep)
    sp = common(sub.add_parser("trace", help="queue and cost trace as CSV"))
    sp.add_argument("--profile", help="profile JSON (default: the solved one)")
    sp.add_argument("--rows", type=int, default=1000)
    sp.set_defaults(func=cmd_trace)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
