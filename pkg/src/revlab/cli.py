"""Command-line front end: ``revlab evolve|weights|verify|fracdim|figures|nls``."""
from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    box_dimension,
    boundary_twist_residual,
    line_profile,
    parseval_norm,
    revival_residual,
    weierstrass_profile,
)
from .io import read_profile_csv, write_json, write_profile_csv
from .nls import NlsConfig, nls_evolve_quasi, smooth_state, strang_order
from .numbers import (
    ZERO,
    ONE,
    DispersionPolynomial,
    RationalTime,
    Surd,
    ThetaValue,
    as_turns,
    composition_plan,
    drift_exact,
    eval_P,
    parse_theta,
    parse_time,
    phase_factors,
    quasi_eigenvalue_exact,
    shifted_coefficients,
    transform_polynomial,
)
from .spectral import (
    SpectralState,
    analyze,
    box_coefficients_closed_form,
    box_profile,
    evolve_by_composition,
    evolve_composition,
    evolve_correspondence,
    evolve_periodic,
    evolve_quasi,
    evolve_second_order,
    revival_weights,
    second_order_wrapper,
    synthesize,
)

METHODS = ("direct", "correspondence", "composition")
SUITES = ("modes", "revival", "composition", "correspondence", "all")

# tolerances of the verification suites
TOL_MODES = 1e-12
TOL_REVIVAL = 1e-11
TOL_COMPOSITION = 1e-10
TOL_CORRESPONDENCE = 1e-9

FIGURE_PANELS = {
    "1": [("fig1_initial", None, None)],
    "2": [(f"fig2_n{n}", n, "1/4") for n in (3, 4, 5)],
    "3": [(f"fig3_n{n}", n, "sqrt(2)/4") for n in (3, 4, 5)],
    "4": [("fig4_theta_1_4", 2, "1/4"), ("fig4_theta_sqrt2_4", 2, "sqrt(2)/4")],
}


def _log(args, msg: str):
    if not getattr(args, "quiet", False):
        print(msg, file=sys.stderr)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("REVLAB_THREADS", "1")))
    except ValueError:
        return 1


# ------------------------------------------------------------ resolution

def resolve_polynomial(args) -> DispersionPolynomial:
    if args.P is not None:
        return DispersionPolynomial.parse(args.P)
    return DispersionPolynomial.monomial(args.monomial)


def _time_record(t) -> str:
    if isinstance(t, RationalTime):
        return f"{t.p}/{t.q}"
    return str(as_turns(t))


def initial_state(kind: str, J: int, theta: ThetaValue) -> SpectralState:
    if kind == "box":
        return box_coefficients_closed_form(theta, J)
    return analyze(read_profile_csv(kind), J, theta)


def evolve_with(method: str, u0: SpectralState, P: DispersionPolynomial, t) -> SpectralState:
    if method == "direct":
        return evolve_quasi(u0, P, t)
    if method == "correspondence":
        return evolve_correspondence(u0, P, t)
    if method == "composition":
        if P.order == 2:
            return second_order_wrapper(u0, list(P.alpha), t)
        return evolve_composition(u0, P, t)
    raise ValueError(f"unknown method {method!r}")


def run_evolution(P, theta, t, J, N, initial="box", method="direct"):
    """Evolve and synthesise; returns (profile, record) where record feeds the manifest."""
    u0 = initial_state(initial, J, theta)
    u = evolve_with(method, u0, P, t)
    profile = synthesize(u, N)
    n0, n1 = parseval_norm(u0), parseval_norm(u)
    results = {
        "norm_initial": n0,
        "norm_final": n1,
        "norm_relative_change": abs(n1 - n0) / n0 if n0 else 0.0,
        "boundary_twist_residual": boundary_twist_residual(u),
    }
    if method != "direct":
        ref = evolve_quasi(u0, P, t)
        results["coefficient_residual_vs_direct"] = revival_residual(ref, u)
        results["profile_residual_vs_direct"] = float(
            np.max(np.abs(synthesize(ref, N).samples - profile.samples)))
    params = {
        "P": list(P.alpha),
        "order": P.order,
        "theta": theta.text,
        "theta_kind": theta.kind,
        "time_turns": _time_record(t),
        "J": J,
        "N": N,
        "initial": initial,
        "method": method,
    }
    return u, profile, params, results


def manifest(command: str, params: dict, results: dict, started: float, **extra) -> dict:
    out = {"command": command, "version": __version__, "parameters": params, "results": results}
    out.update(extra)
    out["duration_s"] = round(time.perf_counter() - started, 6)
    return out


# -------------------------------------------------------------- commands

def cmd_evolve(args) -> int:
    started = time.perf_counter()
    P = resolve_polynomial(args)
    theta = parse_theta(args.theta)
    t = parse_time(args.time, raw=args.time_raw)
    N = args.grid or 4 * args.modes
    _log(args, f"evolving {P} with theta={theta.text}, J={args.modes}, N={N}")
    _, profile, params, results = run_evolution(P, theta, t, args.modes, N, args.initial, args.method)
    csv_path = write_profile_csv(f"{args.out}.csv", profile)
    man = manifest("evolve", params, results, started, profile=csv_path.name)
    write_json(f"{args.out}.json", man)
    _log(args, f"wrote {csv_path}")
    return 0


def weights_report(n: int, p: int, q: int) -> dict:
    w = revival_weights(n, p, q)
    j = np.arange(q)
    exact = phase_factors([ZERO] * n + [ONE], j, RationalTime(p, q))
    err = float(np.max(np.abs(w.multipliers(j) - exact)))
    return {
        "order": n,
        "p": p,
        "q": q,
        "weights_re": [float(v) for v in w.w.real],
        "weights_im": [float(v) for v in w.w.imag],
        "residue_identity_max_error": err,
    }


def cmd_weights(args) -> int:
    t = parse_time(args.time)
    if not isinstance(t, RationalTime):
        raise SystemExit("weights: --time must be a positive fraction p/q")
    p, q = t.p % t.q or 1, t.q
    rep = weights_report(args.order, p, q)
    text = json.dumps(rep, indent=2)
    if args.out:
        write_json(args.out, rep)
    print(text)
    return 0


def _check(name: str, params: dict, err: float, tol: float) -> dict:
    return {"identity": name, "parameters": params, "max_error": err,
            "tolerance": tol, "pass": bool(err < tol)}


def suite_modes(args) -> list[dict]:
    """Eigenvalue identity P(j + theta) = A(j) + s j + P(theta), exact, and
    closed-form box coefficients against an FFT of a fine box."""
    out = []
    for n in range(2, args.n_max + 1):
        P = DispersionPolynomial.monomial(n)
        for text in ("1/4", "sqrt(2)/4", "1/3"):
            th = parse_theta(text)
            A = transform_polynomial(P, th)
            s = drift_exact(P, th)
            pt = eval_P(P, th.exact)
            worst = 0.0
            for j in range(-20, 21):
                lhs = quasi_eigenvalue_exact(P, th, j)
                rhs = sum((c * Surd.of(j) ** e for e, c in enumerate(A.coefficients)), ZERO) + s * j + pt
                worst = max(worst, abs(float(lhs - rhs)))
            taylor = shifted_coefficients(P, th)
            binom = [pt, s] + list(A.exact)
            worst = max(worst, max(abs(float(a - b)) for a, b in zip(taylor, binom)))
            out.append(_check("eigenvalue-split", {"n": n, "theta": text}, worst, TOL_MODES))
    Nbox = 2 ** 20
    for text in ("1/4", "sqrt(2)/4"):
        th = parse_theta(text)
        cf = box_coefficients_closed_form(th, 64)
        # the quasi-periodic box is the same indicator; analyze demodulates it
        fft = analyze(box_profile(Nbox), 64, th)
        err = float(np.max(np.abs(cf.coeffs - fft.coeffs)))
        out.append(_check("box-coefficients", {"theta": text, "N": Nbox}, err, 1e-5))
    return out


def suite_revival(args) -> list[dict]:
    out = []
    for n in range(2, args.n_max + 1):
        worst, where = 0.0, None
        for q in range(1, args.q_max + 1):
            for p in range(1, q) if q > 1 else (1,):
                if math.gcd(p, q) != 1:
                    continue
                err = weights_report(n, p, q)["residue_identity_max_error"]
                if err >= worst:
                    worst, where = err, f"{p}/{q}"
        out.append(_check("revival-residue", {"n": n, "q_max": args.q_max, "worst_time": where},
                          worst, TOL_REVIVAL))
    return out


def random_polynomials(count: int, n_max: int, seed: int) -> list[DispersionPolynomial]:
    rng = random.Random(seed)
    polys = []
    while len(polys) < count:
        n = rng.randint(3, max(3, n_max))
        alpha = [rng.randint(-3, 3) for _ in range(n)] + [rng.choice([-2, -1, 1, 2])]
        polys.append(DispersionPolynomial(tuple(alpha)))
    return polys


def suite_composition(args) -> list[dict]:
    out = []
    thetas = ("1/4", "sqrt(2)/4", "2/3")
    times = ("1/3", "0.37", "5/7")
    rng = np.random.default_rng(args.seed)
    J = args.J
    for i, P in enumerate(random_polynomials(args.count, args.n_max, args.seed)):
        th = parse_theta(thetas[i % 3])
        t = parse_time(times[i % 3])
        z0 = SpectralState(rng.normal(size=2 * J + 1) + 1j * rng.normal(size=2 * J + 1))
        z0 = z0.with_coeffs(z0.coeffs / z0.norm())
        ref = evolve_periodic(z0, transform_polynomial(P, th), t)
        plan = composition_plan(P, th, t)
        got = evolve_by_composition(z0, plan, "revival-where-rational")
        err = float(np.max(np.abs(ref.coeffs - got.coeffs)))
        out.append(_check("composition", {"P": list(P.alpha), "theta": th.text,
                                          "time_turns": times[i % 3], "J": J}, err, TOL_COMPOSITION))
    return out


def suite_correspondence(args) -> list[dict]:
    out = []
    J = args.J
    j = np.arange(-J, J + 1)
    t = RationalTime(1, 3)
    for n in (3, 4, 5):
        P = DispersionPolynomial.monomial(n)
        for text in ("1/4", "sqrt(2)/4"):
            th = parse_theta(text)
            A = transform_polynomial(P, th)
            lhs = phase_factors(shifted_coefficients(P, th), j, t)
            rhs = (phase_factors(A.coefficients, j, t)
                   * phase_factors([eval_P(P, th.exact)], np.zeros(1, dtype=np.int64), t)[0]
                   * phase_factors([ZERO, drift_exact(P, th)], j, t))
            err = float(np.max(np.abs(lhs - rhs)))
            out.append(_check("correspondence", {"n": n, "theta": text, "J": J}, err,
                              TOL_CORRESPONDENCE))
            u0 = box_coefficients_closed_form(th, J)
            err2 = revival_residual(evolve_quasi(u0, P, t), evolve_correspondence(u0, P, t))
            out.append(_check("correspondence-evolution", {"n": n, "theta": text, "J": J}, err2,
                              TOL_CORRESPONDENCE))
    return out


SUITE_FUNCS = {
    "modes": suite_modes,
    "revival": suite_revival,
    "composition": suite_composition,
    "correspondence": suite_correspondence,
}


def cmd_verify(args) -> int:
    started = time.perf_counter()
    names = list(SUITE_FUNCS) if args.suite == "all" else [args.suite]
    checks = []
    for name in names:
        _log(args, f"suite {name}")
        for c in SUITE_FUNCS[name](args):
            c["suite"] = name
            checks.append(c)
    ok = all(c["pass"] for c in checks)
    params = {"suite": args.suite, "n_max": args.n_max, "q_max": args.q_max, "J": args.J,
              "count": args.count, "seed": args.seed}
    results = {"pass": ok, "failed": sum(not c["pass"] for c in checks),
               "max_error": max((c["max_error"] for c in checks), default=0.0)}
    rep = manifest("verify", params, results, started, checks=checks)
    if args.out:
        write_json(args.out, rep)
    if not args.quiet:
        for c in checks:
            tag = "PASS" if c["pass"] else "FAIL"
            print(f"{tag} {c['suite']:<15} {c['identity']:<25} {c['max_error']:.3e} "
                  f"< {c['tolerance']:.0e}  {json.dumps(c['parameters'])}")
        print("all passed" if ok else f"{results['failed']} check(s) failed")
    return 0 if ok else 1


def cmd_fracdim(args) -> int:
    started = time.perf_counter()
    N = args.grid or 4 * args.modes
    if args.calibration == "line":
        profile = line_profile(N)
        params = {"calibration": "line", "N": N}
    elif args.calibration == "weierstrass":
        profile = weierstrass_profile(N)
        params = {"calibration": "weierstrass", "H": 0.5, "N": N}
    else:
        P = resolve_polynomial(args)
        theta = parse_theta(args.theta)
        t = parse_time(args.time, raw=args.time_raw)
        _, profile, params, _ = run_evolution(P, theta, t, args.modes, N, args.initial, args.method)
        if args.out:
            write_profile_csv(f"{args.out}.csv", profile)
    part = "re" if args.calibration else args.part
    rep = box_dimension(profile, part).as_dict()
    params["part"] = part
    man = manifest("fracdim", params, rep, started)
    if args.out:
        write_json(f"{args.out}.json", man)
    print(json.dumps(rep if args.quiet else man, indent=2))
    return 0


def _figure_panel(name, n, theta_text, args):
    N = args.grid or 4 * args.modes
    if n is None:
        profile = box_profile(N)
        params = {"initial": "box", "N": N}
        results = {}
    else:
        P = DispersionPolynomial.monomial(n)
        _, profile, params, results = run_evolution(
            P, parse_theta(theta_text), RationalTime(1, 3), args.modes, N, "box", args.method)
    path = write_profile_csv(Path(args.outdir) / f"{name}.csv", profile)
    return {"panel": name, "file": path.name, "parameters": params, "results": results}


def cmd_figures(args) -> int:
    started = time.perf_counter()
    which = list(FIGURE_PANELS) if args.which == "all" else [args.which]
    panels = [p for w in which for p in FIGURE_PANELS[w]]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        futures = [pool.submit(_figure_panel, name, n, th, args) for name, n, th in panels]
        records = [f.result() for f in futures]
    for r in records:
        _log(args, f"wrote {r['file']}")
    params = {"which": args.which, "J": args.modes, "N": args.grid or 4 * args.modes,
              "method": args.method, "time_turns": "1/3"}
    write_json(Path(args.outdir) / "figures.json",
               manifest("figures", params, {"panels": len(records)}, started, panels=records))
    return 0


def cmd_nls(args) -> int:
    started = time.perf_counter()
    theta = parse_theta(args.theta)
    T = as_turns(parse_time(args.T, raw=args.time_raw)).seconds
    J = args.modes
    N = args.grid or 4 * J
    if args.initial == "smooth":
        u0 = smooth_state(J, theta, args.amplitude)
    else:
        u0 = initial_state(args.initial, J, theta)
        u0 = u0.with_coeffs(u0.coeffs * args.amplitude)
    cfg = NlsConfig(J, N, args.dt, T, theta)
    u = nls_evolve_quasi(u0, cfg)
    n0, n1 = u0.norm(), u.norm()
    results = {
        "mass_initial": n0,
        "mass_final": n1,
        "mass_relative_change": abs(n1 / n0 - 1.0) if n0 else 0.0,
        "steps": len(cfg.steps()),
        "boundary_twist_residual": boundary_twist_residual(u),
    }
    if args.check_linear:
        lin = nls_evolve_quasi(u0, NlsConfig(J, N, args.dt, T, theta, nonlinear=False))
        ref = evolve_second_order(u0, [0, 0, 1], T)
        results["linear_flow_residual"] = revival_residual(ref, lin)
    if args.check_order:
        results["strang"] = strang_order(u0.as_periodic(), min(T, 1.0) if T else 1.0, N=N)
    profile = synthesize(u, N)
    params = {"theta": theta.text, "theta_kind": theta.kind, "T": T, "dt": args.dt, "J": J,
              "N": N, "initial": args.initial, "amplitude": args.amplitude}
    csv_path = write_profile_csv(f"{args.out}.csv", profile)
    write_json(f"{args.out}.json", manifest("nls", params, results, started, profile=csv_path.name))
    _log(args, f"wrote {csv_path}; mass change {results['mass_relative_change']:.2e}")
    return 0


# ---------------------------------------------------------------- parser

def _add_evolve_flags(p: argparse.ArgumentParser, need_out: bool = True):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--P", help="dispersion coefficients a0,a1,...,an")
    g.add_argument("--monomial", type=int, default=3, help="use P = x**n (default 3)")
    p.add_argument("--theta", default="1/4", help="p/q, decimal, or sqrt(k)/m (default 1/4)")
    p.add_argument("--time", default="1/3", help="time in units of 2 pi (default 1/3)")
    p.add_argument("--time-raw", action="store_true", help="read --time in plain units")
    p.add_argument("--modes", type=int, default=1024, help="truncation J (default 1024)")
    p.add_argument("--grid", type=int, default=None, help="grid size N (default 4 J)")
    p.add_argument("--initial", default="box", help="box or a CSV file with x,re,im")
    p.add_argument("--method", choices=METHODS, default="direct")
    p.add_argument("--out", required=need_out, default=None, help="output prefix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="revlab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"revlab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", parents=[common], help="evolve initial data and write a profile")
    _add_evolve_flags(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("weights", parents=[common], help="revival weights of R_n(2 pi p/q)")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--time", required=True, help="p/q")
    p.add_argument("--out", default=None, help="optional JSON path")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("verify", parents=[common], help="run identity suites; exit 1 on any failure")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--q-max", type=int, default=64)
    p.add_argument("--J", type=int, default=1024)
    p.add_argument("--count", type=int, default=50, help="random polynomials (composition)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="JSON report path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fracdim", parents=[common], help="box-counting dimension of an evolved profile")
    _add_evolve_flags(p, need_out=False)
    p.add_argument("--part", choices=("re", "im"), default="re")
    p.add_argument("--calibration", choices=("line", "weierstrass"), default=None)
    p.set_defaults(func=cmd_fracdim)

    p = sub.add_parser("figures", parents=[common], help="write the profile CSVs of the four figures")
    p.add_argument("--which", choices=("1", "2", "3", "4", "all"), default="all")
    p.add_argument("--outdir", default="figures")
    p.add_argument("--modes", type=int, default=1024)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--method", choices=METHODS, default="direct")
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("nls", parents=[common], help="quasi-periodic cubic NLS by split stepping")
    p.add_argument("--theta", default="1/4")
    p.add_argument("--T", default="1/3", help="final time in units of 2 pi (default 1/3)")
    p.add_argument("--time-raw", action="store_true", help="read --T in plain units")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--modes", type=int, default=256)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--initial", default="smooth", help="smooth, box, or a CSV file")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--check-linear", action="store_true",
                   help="compare the linear part against the exact quadratic flow")
    p.add_argument("--check-order", action="store_true", help="estimate the Strang order")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_nls)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
    return 2


if __name__ == "__main__":
    sys.exit(main())
