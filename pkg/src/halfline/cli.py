"""Command-line surface for reproducible experiments.

Exit codes: 0 success (including "no rate claimed"), 1 a rate or hypothesis
check failed, 2 configuration error.  Every CSV artifact starts with a
``# key=value ...`` comment carrying the full canonical config.
"""

import argparse
import math
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .corrections import h2_profile, h3_profile, make_correction
from .limits import (
    CLOSED_FORM_REGIMES,
    ContinuousLaw,
    closed_form_law,
    params_to_limit,
    wentzell_reference,
)
from .metric import (
    SubMeasure,
    distance_d,
    run_killed_ladder,
    run_rate_ladder,
)
from .testfunctions import backbone, build_family, family_member, verify_G2_G3
from .walk import (
    BoundaryParams,
    LatticeLaw,
    default_truncation,
    distribution_at,
    ensemble_at,
    sample_path,
)


def _write_csv(cfg, out_name, rows):
    directory = Path(cfg.out)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / out_name
    path.write_text("# " + cfg.canonical_line() + "\n"
                    + "\n".join(rows) + "\n")
    return path


def _params(cfg, n=None):
    return BoundaryParams(n=int(n if n is not None else cfg.n),
                          alpha=cfg.alpha, beta=cfg.beta, A=cfg.A, B=cfg.B)


def cmd_simulate(cfg):
    params = _params(cfg)
    x0 = math.floor(cfg.u * cfg.n)
    times, sites = sample_path(params, x0, cfg.t, cfg.seed)
    rows = ["time,site"]
    rows += [f"{float(tm)!r},{int(s)}" for tm, s in zip(times, sites)]
    path = _write_csv(cfg, "simulate.csv", rows)
    print(path)
    return 0


def cmd_distribution(cfg):
    params = _params(cfg)
    x0 = math.floor(cfg.u * cfg.n)
    M = default_truncation(cfg.n, cfg.t, cfg.u)
    if cfg.paths > 0:
        law = ensemble_at(params, x0, cfg.t, cfg.paths, cfg.seed, M=M,
                          threads=cfg.threads)
    else:
        law = distribution_at(params, x0, cfg.t, M)
    path = _write_csv(cfg, "distribution.csv", law.to_csv_rows())
    print(path)
    return 0


def cmd_reference(cfg):
    cond = params_to_limit(_params(cfg))
    if cond.regime in CLOSED_FORM_REGIMES:
        law = closed_form_law(cond, cfg.u, cfg.t, x_max=cfg.x_max, dx=cfg.dx)
    else:
        law = wentzell_reference(cond, cfg.u, cfg.t, x_max=cfg.x_max,
                                 dx=cfg.dx, dt=cfg.dt)
    path = _write_csv(cfg, "reference.csv", law.to_csv_rows())
    print(path)
    return 0


def cmd_rate(cfg):
    report = run_rate_ladder(cfg.alpha, cfg.beta, cfg.A, cfg.B, cfg.t, cfg.u,
                             n_values=cfg.ladder, K=cfg.K, J=cfg.J,
                             threads=cfg.threads)
    path = _write_csv(cfg, "rate.csv", report.to_csv_rows())
    print(report.summary())
    print(path)
    return 1 if report.passed is False else 0


def cmd_rate_killed(cfg):
    report = run_killed_ladder(cfg.alpha, cfg.beta, cfg.A, cfg.B, cfg.t,
                               cfg.u, n_values=cfg.ladder, K=cfg.K, J=cfg.J,
                               threads=cfg.threads)
    path = _write_csv(cfg, "rate-killed.csv", report.to_csv_rows())
    print(report.summary())
    print(path)
    return 1 if report.passed is False else 0


def _read_measure(path, n_flag):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read measure file: {exc}") from exc
    header_n = None
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                key, _, value = token.partition("=")
                if key == "n":
                    header_n = int(value)
            continue
        rows.append(line)
    if not rows:
        raise ConfigError(f"measure file {path} is empty")
    if rows[0] == "site,mass":
        n = n_flag if n_flag is not None else header_n
        if n is None:
            raise ConfigError(
                "lattice measure file has no recorded n; pass --n")
        return SubMeasure.from_lattice(
            LatticeLaw.from_csv_rows(rows[1:], int(n)))
    if rows[0].startswith("delta_atom"):
        return SubMeasure.from_continuous(ContinuousLaw.from_csv_rows(rows))
    raise ConfigError(f"unrecognized measure file format in {path}")


def cmd_metric(cfg, file_mu, file_nu, n_flag):
    mu = _read_measure(file_mu, n_flag)
    nu = _read_measure(file_nu, n_flag)
    cond = params_to_limit(_params(cfg))
    family = build_family(cond, cfg.K, cfg.J)
    value, bound = distance_d(mu, nu, family)
    print(f"d = {value!r}")
    print(f"truncation bound = {bound!r}")
    return 0


def _hypothesis_member(cond):
    if cond.regime == "reflected":
        return backbone(0)
    if cond.regime == "killed":
        return backbone(1)
    return family_member(cond, 0, 1)


def cmd_check_hypotheses(cfg):
    params = _params(cfg)
    cond = params_to_limit(params)
    killed = cond.regime == "killed"
    envelopes = verify_G2_G3(cond, killed=killed)
    print(f"G2 norm sum: {envelopes['norm_sum']:.6f} vs "
          f"{envelopes['norm_sum_expected']:.6f} "
          f"({'ok' if envelopes['norm_sum_ok'] else 'FAIL'})")
    print(f"G3 envelope exponents: Lf {envelopes['h1_exponent']:.3f} "
          f"(<= 2.2: {'ok' if envelopes['h1_exponent_ok'] else 'FAIL'}), "
          f"L2f {envelopes['h2_exponent']:.3f} "
          f"(<= 4.3: {'ok' if envelopes['h2_exponent_ok'] else 'FAIL'})")
    member = _hypothesis_member(cond)
    h3 = h3_profile(cfg.alpha, cfg.beta, cfg.A, cfg.B, member,
                    n_values=cfg.ladder)
    h2 = h2_profile(cfg.alpha, cfg.beta, cfg.A, cfg.B, member,
                    n_values=cfg.ladder)
    print(h3.summary())
    print(h2.summary())
    path = _write_csv(cfg, "hypotheses.csv", h2.to_csv_rows())
    print(path)
    checks = [envelopes["norm_sum_ok"], envelopes["h1_exponent_ok"],
              envelopes["h2_exponent_ok"], h3.ok, h2.ok]
    return 0 if all(checks) else 1


def _parse_regime(text):
    values = {}
    for chunk in text.split(","):
        key, sep, value = chunk.partition("=")
        key = key.strip()
        if not sep or key not in ("alpha", "beta", "A", "B"):
            raise ConfigError(
                "regime must look like alpha=..,beta=..,A=..,B=..")
        try:
            values[key] = float(value)
        except ValueError as exc:
            raise ConfigError(f"bad regime value for {key}") from exc
    return values


def _build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="TOML config file")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--out", help="output directory")
    shared.add_argument("--regime", help="alpha=..,beta=..,A=..,B=..")
    shared.add_argument("--n", type=int)
    shared.add_argument("--t", type=float)
    shared.add_argument("--u", type=float)
    shared.add_argument("--ladder", help="comma-separated n values")
    shared.add_argument("--K", type=int)
    shared.add_argument("--J", type=int)
    shared.add_argument("--paths", type=int)
    shared.add_argument("--threads", type=int)
    shared.add_argument("--x-max", dest="x_max", type=float)
    shared.add_argument("--dx", type=float)
    shared.add_argument("--dt", type=float)

    parser = argparse.ArgumentParser(
        prog="halfline",
        description="Boundary random walks, their Brownian limits, and "
                    "convergence-rate measurement")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[shared],
                   help="one exact walk path to time t")
    sub.add_parser("distribution", parents=[shared],
                   help="walk law at time t (exact, or Monte Carlo with "
                        "--paths)")
    sub.add_parser("reference", parents=[shared],
                   help="limit law at time t")
    sub.add_parser("rate", parents=[shared],
                   help="d(mu_n, mu) ladder with exponent check")
    sub.add_parser("rate-killed", parents=[shared],
                   help="shifted-walk ladder against the killed law")
    metric = sub.add_parser("metric", parents=[shared],
                            help="distance between two measure files")
    metric.add_argument("file_mu")
    metric.add_argument("file_nu")
    sub.add_parser("check-hypotheses", parents=[shared],
                   help="growth envelopes and correction-decay suites")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = {
            "seed": args.seed, "out": args.out, "n": args.n, "t": args.t,
            "u": args.u, "K": args.K, "J": args.J, "paths": args.paths,
            "threads": args.threads, "x_max": args.x_max, "dx": args.dx,
            "dt": args.dt,
        }
        if args.regime is not None:
            overrides.update(_parse_regime(args.regime))
        if args.ladder is not None:
            try:
                overrides["ladder"] = tuple(
                    int(v) for v in args.ladder.split(","))
            except ValueError as exc:
                raise ConfigError("ladder must be comma-separated "
                                  "integers") from exc
        cfg = load_config(args.config, overrides)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "distribution":
            return cmd_distribution(cfg)
        if args.command == "reference":
            return cmd_reference(cfg)
        if args.command == "rate":
            return cmd_rate(cfg)
        if args.command == "rate-killed":
            return cmd_rate_killed(cfg)
        if args.command == "metric":
            return cmd_metric(cfg, args.file_mu, args.file_nu, args.n)
        return cmd_check_hypotheses(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
