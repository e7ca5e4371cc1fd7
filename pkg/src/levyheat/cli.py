"""Batch runner: ``levyheat SUBCOMMAND CONFIG [--out DIR] [--seed N] [--threads N] [--tol-override K=V]``.

Exit status: 0 when every requested check passes, 1 on a failed check,
2 on a configuration error, 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as lio
from . import measure, verify
from .config import Config, ConfigError, admissibility, load_config
from .frozen import AliasingError, GridError, SpaceTimeGrid, frozen_kernel
from .measure import DivergentIntegralError, InadmissibleCaseError, NoCertificateError
from .oracle import StiffnessError
from .parametrix import SeriesDivergenceError, heat_kernel

log = logging.getLogger("levyheat")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(verify._plain(obj), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _report(out: Path, checks, cfg: Config, parameters=None) -> int:
    verify.emit_report(checks, cfg.canonical(), cfg.seed, parameters, out / "report.json")
    bad = [c.name for c in checks if not c.passed]
    for c in checks:
        log.info("%-48s %s  residual=%.3g tol=%.3g", c.name, "pass" if c.passed else "FAIL", c.residual, c.tol)
    return EXIT_FAIL if bad else EXIT_PASS


# -- subcommands ----------------------------------------------------------------------

def cmd_profile(cfg: Config, out: Path, threads: int) -> int:
    profile = cfg.build_profile()
    cert = measure.estimate_scaling(profile)
    r = np.logspace(-4, 3, 141)
    h = measure.h_of(profile, r)
    K = measure.K_of(profile, r)
    hinv = measure.h_inverse(profile, 1.0 / r)
    lio.write_csv(out / "profile_table.csv", ["r", "h", "K", "h_inv_of_1_over_h"], zip(r, h, K, hinv))
    x = np.linspace(0.0, cfg.grid["l"], 257)
    rows = ((t, xx, v) for t in cfg.times() for xx, v in zip(x, measure.rho_radial(profile, t, x)))
    lio.write_csv(out / "rho.csv", ["t", "x", "rho"], rows)
    block = {"profile": profile.name, "params": dict(profile.params), "dimension": profile.dimension,
             "alpha_h": cert.alpha_h, "C_h": cert.C_h, "beta_h": cert.beta_h, "c_h": cert.c_h,
             "theta_h": cert.theta_h, "fit_residual": cert.fit_residual, "r_window": list(cert.r_window)}
    _write_json(out / "certificate.json", block)
    measure.check_profile(profile)
    log.info("certificate: alpha_h=%.6g C_h=%.6g theta_h=%.6g", cert.alpha_h, cert.C_h, cert.theta_h)
    return EXIT_PASS


def cmd_frozen(cfg: Config, out: Path, threads: int) -> int:
    profile, coeff, cert = admissibility(cfg)
    grid = cfg.build_grid()
    y = cfg.targets[0]
    tol = cfg.tolerances
    kf = frozen_kernel(profile, coeff, y, grid, cfg.case, tol_fft=tol["tol_fft"], neg_tol=tol["neg_tol"])
    kf.to_csv(out / "frozen.csv")
    kf.save(out / "frozen.bin")
    from .symbol import affine_exponent
    xi = grid.xi[1:]
    th = float(np.asarray(coeff.theta_at(y)).reshape(-1)[0])
    psi = np.asarray(affine_exponent(profile, coeff, cfg.case).at_theta(th, xi), complex)
    lio.write_csv(out / "exponent.csv", ["xi", "re_psi", "im_psi"], zip(xi, psi.real, psi.imag))
    checks = [verify.check_mass(kf, tol["mass_tol"], count_outside=grid.geometry == "line"),
              verify.check_nonnegativity(kf, tol["neg_tol"])]
    if _is_cauchy(profile, coeff, cfg.case):
        checks.append(closed_form_check(kf, cfg.checks["closed_form_window"], cfg.checks["closed_form_tol"],
                                        float(coeff.params.get("c0", 1.0))))
    return _report(out, checks, cfg, {"frozen": kf.meta})


def _is_cauchy(profile, coeff, case) -> bool:
    return (profile.name == "stable" and profile.dimension == 1 and profile.params.get("alpha") == 1.0
            and coeff.is_constant and case in ("P3", "P2") and profile.symmetric)


def closed_form_check(kf, window: float, tol: float, level: float = 1.0) -> verify.Check:
    """Relative error of an offset kernel against the Cauchy density (time level * t) over |x| <= window.

    On the torus the reference is the density wrapped onto the period 2L.
    """
    from .oracle import cauchy_closed_form, cauchy_periodic
    g = kf.grid
    m = np.abs(g.x) <= window
    worst = 0.0
    for k, t in enumerate(g.times):
        if g.geometry == "torus":
            exact = cauchy_periodic(level * t, g.x[m], 2 * g.L)
        else:
            exact = cauchy_closed_form(level * t, g.x[m])
        worst = max(worst, float(np.max(np.abs(kf.values[k, m] - exact) / exact)))
    return verify.Check("closed-form", "constant-coefficient kernel equals the stable density", None, worst, tol,
                        verify._grid_info(g), {"window": window})


def _kernels(cfg, profile, coeff, n, targets, threads, **kw):
    grid = cfg.build_grid(n=n)
    kw.setdefault("series_tol", cfg.tolerances["series_tol"])
    if coeff.is_constant:
        kw = {}
    return heat_kernel(profile, coeff, grid, cfg.case, targets=tuple(targets), **kw)


def cmd_parametrix(cfg: Config, out: Path, threads: int) -> int:
    profile, coeff, cert = admissibility(cfg)
    tol = cfg.tolerances
    kernels = _kernels(cfg, profile, coeff, None, cfg.targets, threads)
    checks = []
    prov = {}
    for i, k in enumerate(kernels):
        k.to_csv(out / f"kernel_{i}.csv")
        k.save(out / f"kernel_{i}.bin")
        prov[f"kernel_{i}"] = k.provenance
    k0 = kernels[0]
    ts, rows = verify.pde_residual(profile, coeff, k0, cfg.checks["epsilon"], cfg.case)
    lio.write_csv(out / "pde_residual.csv", ["t", "x", "residual_normalized"],
                  ((t, x, r) for t, row in zip(ts, rows) for x, r in zip(k0.grid.x, row)))
    jobs = [lambda: verify.check_mass(k0, tol["mass_tol"]),
            lambda: verify.check_nonnegativity(k0, tol["neg_tol"]),
            lambda: verify.check_pde(profile, coeff, k0, cfg.checks["epsilon"])]
    if k0.grid.geometry == "torus":
        s, t = cfg.checks["ck"]
        jobs.append(lambda: verify.check_chapman_kolmogorov(k0, s, t, tol["chk_tol"]))
        jobs.append(lambda: verify.check_integral_equation(k0, cfg.checks["ie_times"], 5 * tol["series_tol"]))
    checks = verify.run_checks(jobs, threads)
    return _report(out, checks, cfg, prov)


def main_suite(cfg: Config, profile, coeff, cert, threads: int = 1) -> tuple[list, dict]:
    """The property suite on the configured run: construction checks, fitted bounds, semigroup, controls."""
    if cfg.grid["geometry"] != "torus" or cfg.profile["dimension"] != 1:
        raise ConfigError("the main suite runs on the d=1 torus", "grid", "geometry")
    tol, ch = cfg.tolerances, cfg.checks
    n = cfg.grid["n"]
    y0 = cfg.targets[0]
    fine = _kernels(cfg, profile, coeff, n, [y0], threads)[0]
    coarse = _kernels(cfg, profile, coeff, n // 2, [y0], threads)[0]
    ys = ch["holder_targets"]
    fine_y = _kernels(cfg, profile, coeff, n, ys, threads)
    coarse_y = _kernels(cfg, profile, coeff, n // 2, ys, threads)
    s, t = ch["ck"]
    seed = cfg.seed
    sg_grid = cfg.build_grid(times=np.geomspace(ch["semigroup_t_min"], cfg.times()[-1], 13))
    jobs = [
        lambda: verify.check_mass(fine, tol["mass_tol"]),
        lambda: verify.check_chapman_kolmogorov(fine, s, t, tol["chk_tol"]),
        lambda: verify.check_nonnegativity(fine, tol["neg_tol"]),
        lambda: verify.check_integral_equation(fine, ch["ie_times"], 5 * tol["series_tol"]),
        lambda: verify.check_pde(profile, coeff, fine, ch["epsilon"]),
        lambda: verify.check_mol(profile, coeff, fine, ch["mol_t0"], ch["mol_dt"], ch["mol_n"], tol["mol_tol"]),
        lambda: verify.check_two_sided_bounds(coarse, fine, profile, ch["t0"]),
        lambda: verify.check_holder(coarse, fine, profile, ch["gammas"], "x", seed),
        lambda: verify.check_holder(coarse_y, fine_y, profile, ch["gammas"], "y", seed),
    ]
    beta = 1.0 if coeff.is_constant else coeff.beta
    if 1.0 - cert.alpha_h < min(beta, cert.alpha_h):
        jobs.append(lambda: verify.check_gradient(coarse, fine, profile))
    jobs.append(lambda: verify.check_semigroup(
        verify.semigroup_operator(profile, coeff, sg_grid, cfg.case, series_tol=tol["series_tol"])
        if not coeff.is_constant else verify.semigroup_operator(profile, coeff, sg_grid, cfg.case),
        sg_grid, None, tol["mass_tol"], tol["approach_tol"], tol["neg_tol"]))
    jobs.extend(negative_control_jobs(cfg, profile, coeff, coarse, fine, seed))
    params = {"T0": ch["t0"], "two_T0": 2 * ch["t0"], "alpha_h": cert.alpha_h, "C_h": cert.C_h,
              "theta_h": cert.theta_h, "provenance": fine.provenance}
    return verify.run_checks(jobs, threads), params


def negative_control_jobs(cfg, profile, coeff, coarse, fine, seed):
    tol, ch = cfg.tolerances, cfg.checks

    def leaking():
        # same spacing on a line box of half the width: the cropped kernel loses mass
        L = cfg.grid["l"] / 2
        from .symbol import constant
        g = SpaceTimeGrid(L, cfg.grid["n"] // 2, cfg.times(), geometry="line")
        kf = frozen_kernel(profile, constant(1.0), 0.0, g, cfg.case, check=False)
        return verify.negative_control(verify.check_mass(kf, tol["mass_tol"]))

    return [
        leaking,
        lambda: verify.negative_control(verify.check_two_sided_bounds(
            verify.shuffled(coarse, seed), verify.shuffled(fine, seed), profile, ch["t0"])),
        lambda: verify.negative_control(verify.check_holder(
            verify.discontinuous_surrogate(coarse), verify.discontinuous_surrogate(fine), profile,
            ch["gammas"], "x", seed)),
    ]


def appendix_suite(cfg: Config, profile, cert, threads: int = 1) -> list:
    ch, tol = cfg.checks, cfg.tolerances
    seed = cfg.seed
    jobs = [lambda: verify.check_bound_function_mass(profile, quad_tol=tol["quad_tol"]),
            lambda: verify.check_three_g(profile, cert, seed, ch["draws"]),
            lambda: verify.check_time_convolution(profile, seed, quad_tol=tol["quad_tol"]),
            lambda: verify.check_weighted_mass(profile, cert, seed, quad_tol=tol["quad_tol"])]
    if ch["convolutions"] and profile.dimension == 1:
        jobs.append(lambda: verify.check_convolutions(profile, cert, seed))
    return verify.run_checks(jobs, threads)


def cmd_verify(cfg: Config, out: Path, threads: int, suite: str | None = None) -> int:
    suite = suite or cfg.checks["suite"]
    profile, coeff, cert = admissibility(cfg)
    checks, params = [], {}
    if suite in ("appendix", "all"):
        checks += appendix_suite(cfg, profile, cert, threads)
    if suite in ("main", "all"):
        c, params = main_suite(cfg, profile, coeff, cert, threads)
        checks += c
    params["suite"] = suite
    return _report(out, checks, cfg, params)


def cmd_oracle(cfg: Config, out: Path, threads: int) -> int:
    from .oracle import mol_evolve
    profile, coeff, cert = admissibility(cfg)
    if cfg.grid["geometry"] != "torus":
        raise ConfigError("the method-of-lines oracle runs on the torus", "grid", "geometry")
    ch, tol = cfg.checks, cfg.tolerances
    k = _kernels(cfg, profile, coeff, None, cfg.targets[:1], threads)[0]
    c = verify.check_mol(profile, coeff, k, ch["mol_t0"], ch["mol_dt"], ch["mol_n"], tol["mol_tol"])
    stride = k.grid.n // ch["mol_n"]
    small = SpaceTimeGrid(k.grid.L, ch["mol_n"], np.array([ch["mol_dt"]]))
    start = k.values[k.grid.time_index(ch["mol_t0"]), ::stride]
    got = mol_evolve(profile, coeff, start, ch["mol_dt"], small, cfg.case)
    want = k.values[k.grid.time_index(ch["mol_t0"] + ch["mol_dt"]), ::stride]
    lio.write_csv(out / "oracle.csv", ["x", "p_kappa", "p_mol"], zip(small.x, want, got))
    return _report(out, [c], cfg, {"provenance": k.provenance})


COMMANDS = {"profile": cmd_profile, "frozen": cmd_frozen, "parametrix": cmd_parametrix,
            "verify": cmd_verify, "oracle-compare": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--seed", type=int, default=None, help="seed for randomized checks")
    common.add_argument("--threads", type=int, default=1, help="worker threads for independent checks")
    common.add_argument("--tol-override", action="append", default=[], metavar="KEY=VAL",
                        help="override a named tolerance; may be repeated")
    common.add_argument("-q", "--quiet", action="store_true")
    p = argparse.ArgumentParser(prog="levyheat", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("config", help="path to the experiment config")
        if name == "verify":
            sp.add_argument("--suite", choices=("main", "appendix", "all"), default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        cfg = load_config(args.config, args.tol_override, args.seed)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.command != "profile":
            admissibility(cfg)
    except (ConfigError, InadmissibleCaseError, NoCertificateError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "verify":
            return cmd_verify(cfg, out, args.threads, args.suite)
        return COMMANDS[args.command](cfg, out, args.threads)
    except (ConfigError, GridError, AliasingError, InadmissibleCaseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SeriesDivergenceError, StiffnessError, DivergentIntegralError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
