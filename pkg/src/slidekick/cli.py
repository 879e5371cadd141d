"""Command-line front end: experiment harness and CSV emission.

Commands map one-to-one onto the library's experiment surfaces:

    slidekick simulate  --model normal-fold --profile poly(2) --eps 1e-3 ...
    slidekick poincare  --model normal-fold --profile linear --eps 1e-3 --y0 0.25 --probe -0.8
    slidekick exponent  --model normal-fold --profile poly(2) --eps-list 1e-6,3e-6,1e-5 ...
    slidekick inner     --p 2 --phi-p -3 --u-start -30
    slidekick manifold  --model normal-fold --profile poly(2) --eps 1e-4 --from-x -1
    slidekick bifurcate --family grazing-attracting --eps 1e-3 --mu -0.01:0.01:41
    slidekick friction  --model coulomb --eps 1e-3
    slidekick accept
    slidekick models list

Configuration can also come from a UTF-8 ``key = value`` file passed with
--config; explicit flags win.  All CSV output is comma-separated with a
header row, '.' decimals, LF line endings and 17 significant digits.
Everything is deterministic: identical configs give bit-identical files.

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np


class ConfigError(Exception):
    pass


_KNOWN_KEYS = {
    "model", "profile", "eps", "eps_list", "y0", "probe", "u_start", "p",
    "phi_p", "from_x", "to_v", "mu", "family", "start", "until_y", "t_max",
    "out", "variant", "nu",
}


@dataclass
class ExperimentConfig:
    """Flat key-value experiment configuration with file round-tripping."""

    values: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        values = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, val = (s.strip() for s in line.split("=", 1))
                if key not in _KNOWN_KEYS:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = val
        return cls(values)

    def to_text(self) -> str:
        return "".join(f"{k} = {self.values[k]}\n" for k in sorted(self.values))

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        values = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            key, val = (s.strip() for s in line.split("=", 1))
            values[key] = val
        return cls(values)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path, header: str, rows) -> None:
    out = sys.stdout if path is None else open(path, "w", encoding="utf-8", newline="\n")
    try:
        out.write(header + "\n")
        for row in rows:
            out.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    finally:
        if path is not None:
            out.close()


def _floats(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s.strip()]


def _mu_grid(text: str) -> np.ndarray:
    # a:b:n grid or a comma list
    if ":" in text:
        a, b, n = text.split(":")
        return np.linspace(float(a), float(b), int(n))
    return np.asarray(_floats(text))


def _apply_config(args: argparse.Namespace) -> None:
    if getattr(args, "config", None):
        cfg = ExperimentConfig.from_file(args.config)
        for key, val in cfg.values.items():
            if getattr(args, key, None) in (None, ""):
                setattr(args, key, val)


def cmd_simulate(args) -> int:
    from slidekick.fields import filippov_flow
    from slidekick.integrator import Section, integrate
    from slidekick.models import model
    from slidekick.regularization import RegularizedSystem, parse_profile, regularized_field

    desc = model(args.model)
    x0, y0 = _floats(args.start)
    until = Section(float(args.until_y), "all", id="target") if args.until_y is not None else float(args.t_max)
    if args.eps is None:
        traj = filippov_flow(desc.system, (x0, y0), until, t_max=float(args.t_max))
    else:
        R = RegularizedSystem(desc.system, parse_profile(args.profile), float(args.eps))
        traj = integrate(regularized_field(R), (x0, y0), until,
                         method="Radau", strip=R.epsilon, strip_center=R.offset,
                         t_max=float(args.t_max))
    traj.to_csv(args.out) if args.out else traj.to_csv("/dev/stdout")
    return 0


def cmd_poincare(args) -> int:
    from slidekick.models import model
    from slidekick.poincare import map_P_epsilon
    from slidekick.regularization import RegularizedSystem, parse_profile

    desc = model(args.model)
    fold = desc.fold()
    profile = parse_profile(args.profile)
    rows = []
    for eps in _floats(args.eps):
        R = RegularizedSystem(desc.system, profile, eps)
        for x in _floats(args.probe):
            r = map_P_epsilon(R, float(args.y0), x, fold=fold)
            rows.append((eps, x, r.x, r.time))
    _write_csv(args.out, "eps,x_in,x_out,transit_time", rows)
    return 0


def cmd_exponent(args) -> int:
    from slidekick.models import model
    from slidekick.poincare import fit_tangency_constants, landing_scan
    from slidekick.regularization import parse_profile

    desc = model(args.model)
    fold = desc.fold()
    profile = parse_profile(args.profile)
    y0 = float(args.y0)
    if desc.id == "normal-fold":
        from slidekick.poincare import normal_form_constants

        constants = normal_form_constants(y0)
    else:
        constants = fit_tangency_constants(desc.system.x_plus, fold, y0)
    scan = landing_scan(desc.system, profile, _floats(args.eps_list), y0,
                        float(args.probe), constants=constants)
    _write_csv(args.out, "eps,exit_x,deviation",
               list(zip(scan.epsilons, scan.exits, scan.deviations)))
    p = profile.p
    print(f"exit_slope={scan.exit_fit.slope:.6f} expected={p / (2 * p - 1):.6f} "
          f"r2={scan.exit_fit.r_squared:.6f}")
    print(f"deviation_slope={scan.deviation_fit.slope:.6f} expected={2 * p / (2 * p - 1):.6f} "
          f"r2={scan.deviation_fit.r_squared:.6f}")
    return 0


def cmd_inner(args) -> int:
    from slidekick.inner import distinguished_solution

    p = int(args.p)
    c_p = float(args.phi_p) / _factorial(p)
    sol = distinguished_solution(p, c_p, float(args.u_start) if args.u_start else None)
    _write_csv(args.out, "u,eta", list(zip(sol.u, sol.eta)))
    print(f"eta0_at_0={sol.eta_at_0:.12g} err={sol.estimated_error:.3g}")
    return 0


def _factorial(p: int) -> float:
    import math

    return float(math.factorial(p))


def cmd_manifold(args) -> int:
    from slidekick.models import model
    from slidekick.regularization import RegularizedSystem, parse_profile
    from slidekick.slow_manifold import expansion_terms, trace_manifold

    desc = model(args.model)
    profile = parse_profile(args.profile)
    eps = float(args.eps)
    R = RegularizedSystem(desc.system, profile, eps)
    tr = trace_manifold(R, float(args.from_x), float(args.to_v))
    exp = expansion_terms(profile)
    lower, upper = [], []
    for x, v in zip(tr.x, tr.v):
        if x < 0:
            m0 = exp.m0(x)
            lower.append(v - (m0 - 10.0 * eps))
            upper.append(m0 - v)
        else:
            lower.append(float("nan"))
            upper.append(float("nan"))
    _write_csv(args.out, "x,v,margin_lower,margin_upper",
               list(zip(tr.x, tr.v, lower, upper)))
    if tr.exit_x is not None:
        print(f"exit_x={tr.exit_x:.12g}")
    return 0


def cmd_bifurcate(args) -> int:
    from slidekick.bifurcation import grazing_sliding_scan, homoclinic_scan
    from slidekick.models import model
    from slidekick.regularization import parse_profile

    profile = parse_profile(args.profile)
    eps = float(args.eps)
    rows = []
    if args.family in ("grazing-attracting", "grazing-repelling"):
        variant = args.family.split("-")[1]
        desc = model("grazing-family", variant=variant)
        diag = grazing_sliding_scan(desc, profile, eps, _mu_grid(args.mu))
        for pt in diag.points:
            if pt.fixed_points:
                for fp in pt.fixed_points:
                    rows.append((pt.mu, fp.x, fp.stability, pt.gamma, pt.delta))
            else:
                rows.append((pt.mu, float("nan"), "absent", pt.gamma, pt.delta))
        if diag.collision_mu is not None:
            print(f"collision_mu={diag.collision_mu:.6g}")
    elif args.family in ("homoclinic", "homoclinic-hamiltonian"):
        nu = 0.0 if args.family.endswith("hamiltonian") else float(args.nu or 0.15)

        def make(mu_raw):
            from slidekick.models import model as _m

            return _m("saddle-homoclinic", mu=mu_raw, nu=nu, check=False)

        scan = homoclinic_scan(make, profile, eps, _mu_grid(args.mu), y0=float(args.y0))
        for p in scan.probes:
            rows.append((p.mu, p.fixed_point if p.fixed_point is not None else float("nan"),
                         "attracting" if p.exists else "absent", float("nan"), float("nan")))
        if scan.mu_tilde_star is not None:
            print(f"mu_tilde_star={scan.mu_tilde_star:.6g} alpha_plus={scan.alpha_plus:.6g}")
    else:
        raise ConfigError(f"unknown family {args.family!r}")
    _write_csv(args.out, "mu,fixed_point,stability,gamma,delta", rows)
    return 0


def cmd_friction(args) -> int:
    from slidekick.bifurcation import centre_semistability, stribeck_attractor
    from slidekick.models import model
    from slidekick.regularization import parse_profile

    desc = model(args.model)
    profile = parse_profile(args.profile)
    eps = float(args.eps)
    if args.model == "coulomb":
        rep = centre_semistability(desc, profile, eps, y0=float(args.y0))
        print(f"tangent_x={rep.x_tangent:.12g}")
        print(f"tangent_residual={rep.tangent_residual:.3g}")
        print(f"exterior_monotone={rep.exterior_monotone}")
        print(f"exterior_final_gaps={[float(f'{g:.3g}') for g in rep.exterior_final_gaps]}")
        print(f"interior_residuals={[float(f'{g:.3g}') for g in rep.interior_residuals]}")
    elif args.model == "stribeck":
        res = stribeck_attractor(desc, profile, eps, y0=float(args.y0))
        print(f"fixed_point={res.fixed_point:.12g} stability={res.stability} "
              f"n_fixed_points={res.n_fixed_points}")
        print(f"hausdorff_upper={res.hausdorff_upper:.6g} bound={5 * eps:.6g}")
    else:
        raise ConfigError("friction expects --model coulomb or stribeck")
    return 0


def cmd_accept(args) -> int:
    from slidekick.acceptance import format_table, run_all

    selection = None
    if args.only:
        selection = [f"criterion_{s.strip()}" for s in args.only.split(",")]
    results = run_all(selection)
    print(format_table(results))
    return 0 if all(r.passed for r in results) else 1


def cmd_models(args) -> int:
    from slidekick.models import list_models, model

    if args.action != "list":
        raise ConfigError("usage: slidekick models list")
    for mid in list_models():
        desc = model(mid, check=False)
        facts = {k: v for k, v in desc.facts.items() if isinstance(v, (int, float, str, bool, tuple))}
        print(f"{mid}: params={desc.params} facts={facts}")
        if desc.notes:
            print(f"    {desc.notes}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slidekick", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file; flags win")
        p.add_argument("--out", help="CSV output path (default: stdout)")

    p = sub.add_parser("simulate", help="integrate an orbit and export t,x,y,event")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--profile", default="linear")
    p.add_argument("--eps", help="regularize with this eps; omit for the Filippov flow")
    p.add_argument("--start", required=True, help="x,y")
    p.add_argument("--until-y", dest="until_y", type=float)
    p.add_argument("--t-max", dest="t_max", default="50.0")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("poincare", help="apply the fold map P_eps to probe points")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--profile", default="linear")
    p.add_argument("--eps", required=True, help="comma list")
    p.add_argument("--y0", default="0.25")
    p.add_argument("--probe", required=True, help="comma list of section abscissae")
    p.set_defaults(fn=cmd_poincare)

    p = sub.add_parser("exponent", help="fit the eps-scaling of exits and landings")
    common(p)
    p.add_argument("--model", default="normal-fold")
    p.add_argument("--profile", required=True)
    p.add_argument("--eps-list", dest="eps_list", required=True)
    p.add_argument("--y0", default="0.25")
    p.add_argument("--probe", default="-0.8")
    p.set_defaults(fn=cmd_exponent)

    p = sub.add_parser("inner", help="distinguished solution of the inner equation")
    common(p)
    p.add_argument("--p", required=True)
    p.add_argument("--phi-p", dest="phi_p", required=True, help="phi^(p)(1), e.g. -3")
    p.add_argument("--u-start", dest="u_start")
    p.set_defaults(fn=cmd_inner)

    p = sub.add_parser("manifold", help="trace the attracting Fenichel manifold")
    common(p)
    p.add_argument("--model", default="normal-fold")
    p.add_argument("--profile", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--from-x", dest="from_x", default="-1.0")
    p.add_argument("--to-v", dest="to_v", default="1.0")
    p.set_defaults(fn=cmd_manifold)

    p = sub.add_parser("bifurcate", help="parameter scans of the return map")
    common(p)
    p.add_argument("--family", required=True,
                   choices=["grazing-attracting", "grazing-repelling",
                            "homoclinic", "homoclinic-hamiltonian"])
    p.add_argument("--profile", default="linear")
    p.add_argument("--eps", required=True)
    p.add_argument("--mu", required=True, help="a:b:n grid or comma list (mu~ for homoclinic)")
    p.add_argument("--y0", default="0.25")
    p.add_argument("--nu")
    p.set_defaults(fn=cmd_bifurcate)

    p = sub.add_parser("friction", help="dry-friction experiments (coulomb, stribeck)")
    common(p)
    p.add_argument("--model", required=True, choices=["coulomb", "stribeck"])
    p.add_argument("--profile", default="poly(2)")
    p.add_argument("--eps", required=True)
    p.add_argument("--y0", default="0.25")
    p.set_defaults(fn=cmd_friction)

    p = sub.add_parser("accept", help="run the acceptance suite")
    p.add_argument("--only", help="comma list like 1,2,7a")
    p.set_defaults(fn=cmd_accept)

    p = sub.add_parser("models", help="model zoo")
    p.add_argument("action", choices=["list"])
    p.set_defaults(fn=cmd_models)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, 0 on --help; pass both through
        return int(exc.code or 0)
    try:
        _apply_config(args)
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
