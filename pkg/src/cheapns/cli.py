"""Command line entry point: ``cheapns <subcommand> [flags]``.

Exit codes: 0 success, 1 operational error, 2 numeric blow-up (simulate),
3 failed inductive step (certify), 4 Picard iteration not contracting.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import __version__
from .besov import besov_norm, block_masses
from .certifier import (
    CertificateError,
    T_INF,
    build_certificate,
    noexist_partial_sums,
    t_k,
)
from .config import ExperimentConfig, coerce, load_config
from .profiles import profile_by_name
from .solver import SchemeSpec, picard_iterate, simulate
from .spectral import field_from_dict, field_to_dict, make_grid, scale

EXIT_OK, EXIT_ERROR, EXIT_BLOWUP, EXIT_STEP_FAIL, EXIT_PICARD = 0, 1, 2, 3, 4

# flag -> config attribute
_FLAGS = {
    "--dim": "dim", "--dxi": "dxi", "--xi-max": "xi_max", "--A": "A",
    "--A-log2": "A_log2", "--a": "a_list", "--dt": "dt", "--scheme": "scheme",
    "--T": "T", "--stride": "stride", "--bit-budget": "bit_budget",
    "--seed": "seed", "--k-max": "k_max", "--t": "t", "--K": "K_list",
    "--steps": "steps", "--iters": "iters", "--profile": "profile",
    "--field": "field", "--out": "out",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override it)")
    common.add_argument("--dump-config", action="store_true",
                        help="print the effective config as JSON and exit")
    for flag, dest in _FLAGS.items():
        common.add_argument(flag, dest=dest, default=None)
    parser = argparse.ArgumentParser(prog="cheapns", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("simulate", "integrate u0 = A*profile and write the trajectory CSV"),
        ("certify", "replay the cascade induction and print the verdict"),
        ("picard", "run the Picard fixed-point iteration and report residuals"),
        ("noexist", "tabulate the divergent partial sums S_K(t)"),
        ("norms", "Besov block table for a serialized field or named profile"),
        ("profile", "write a named profile as field JSON"),
    ]:
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    for dest in _FLAGS.values():
        raw = getattr(args, dest)
        if raw is not None:
            setattr(cfg, dest, coerce(dest, raw))
    return cfg.validate()


def _grid(cfg):
    return make_grid(cfg.dim, cfg.dxi, cfg.xi_max)


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(x) -> str:
    if x is None:
        return "-"
    if x == -math.inf:
        return "-inf"
    return f"{x:.10g}"


def cmd_simulate(cfg: ExperimentConfig) -> int:
    u0 = scale(profile_by_name(cfg.profile, _grid(cfg)), cfg.A)
    traj = simulate(u0, cfg.T, SchemeSpec(cfg.scheme, cfg.dt), stride=cfg.stride,
                    bit_budget=cfg.bit_budget, a_list=cfg.a_list)
    _emit(traj.to_csv(), cfg.out)
    print(f"termination={traj.termination_label()} steps={traj.steps}", file=sys.stderr)
    return EXIT_BLOWUP if traj.blew_up else EXIT_OK


def _certify_time(text):
    if text is None or text == "inf":
        return T_INF
    if text.startswith("t") and text[1:].isdigit():
        return t_k(int(text[1:]))
    return float(Fraction(text))


def _A_log2(cfg):
    if cfg.A_log2 is not None:
        return Fraction(cfg.A_log2)
    if cfg.A <= 0:
        raise ValueError("certify needs A > 0 (or --A-log2)")
    return math.log2(cfg.A)


def _certificate(A_log2, a, k_max, t):
    try:
        return build_certificate(A_log2, a, k_max, t), EXIT_OK
    except CertificateError as exc:
        print(str(exc), file=sys.stderr)
        return build_certificate(A_log2, a, k_max, t, strict=False), EXIT_STEP_FAIL


def cmd_certify(cfg: ExperimentConfig) -> int:
    """One certificate per smoothness index in ``a_list``."""
    A_log2 = _A_log2(cfg)
    t = _certify_time(cfg.t)
    status = EXIT_OK
    certs = []
    for a in cfg.a_list or [0.0]:
        cert, code = _certificate(A_log2, a, cfg.k_max, t)
        status = max(status, code)
        certs.append(cert)
        print(f"A_log2={_fmt(cert.A_log2)} a={a:g} t={_fmt(cert.t)}")
        print(f"{'k':>3} {'t_k':>14} {'alpha_log2':>18} {'margin_bits':>14} {'besov_lb_log2':>24}")
        for s in cert.stages:
            print(f"{s.k:>3} {_fmt(s.t_k):>14} {_fmt(s.alpha_log2):>18} "
                  f"{_fmt(s.step_margin_bits):>14} {_fmt(s.besov_lb_log2):>24}")
    print(f"verdict: {certs[0].verdict.value}")
    if cfg.out:
        doc = certs[0].to_dict() if len(certs) == 1 else [c.to_dict() for c in certs]
        with open(cfg.out, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return status


def cmd_picard(cfg: ExperimentConfig) -> int:
    u0 = scale(profile_by_name(cfg.profile, _grid(cfg)), cfg.A)
    res = picard_iterate(u0, cfg.T, cfg.steps, cfg.iters, bit_budget=cfg.bit_budget,
                         a_list=cfg.a_list)
    lines = ["iteration,residual_log2"]
    lines += [f"{m},{_fmt(r)}" for m, r in enumerate(res.residuals)]
    _emit("\n".join(lines) + "\n", cfg.out)
    geometric = all(d <= -1.0 for d in res.ratios_log2[1:])
    if res.status == "converged" or (res.status == "max_iter" and geometric):
        print(f"picard: {res.status} after {len(res.residuals)} iterations", file=sys.stderr)
        return EXIT_OK
    where = res.diverged_at if res.diverged_at is not None else len(res.residuals) - 1
    print(f"picard: {res.status} at iteration {where}", file=sys.stderr)
    return EXIT_PICARD


def cmd_noexist(cfg: ExperimentConfig) -> int:
    t = 0.1 if cfg.t is None else float(Fraction(cfg.t))
    if not t > 0:
        print(f"noexist needs t > 0 (got {t})", file=sys.stderr)
        return EXIT_ERROR
    Ks = sorted(set(cfg.K_list))
    sums = noexist_partial_sums(Ks, t)
    lines = ["K,S_K,S_K_over_K"] + [f"{K},{S:.17g},{S / K:.17g}" for K, S in zip(Ks, sums)]
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK


def _field(cfg):
    if cfg.field:
        with open(cfg.field) as fh:
            return field_from_dict(json.load(fh))
    return profile_by_name(cfg.profile, _grid(cfg))


def cmd_norms(cfg: ExperimentConfig) -> int:
    f = _field(cfg)
    blocks = block_masses(f)
    a_list = cfg.a_list
    lines = ["k," + ",".join(f"block_a={a:g}" for a in a_list)]
    profiles = [besov_norm(f, a, blocks) for a in a_list]
    for k in blocks:
        lines.append(f"{k}," + ",".join(_fmt(p.block_log2[k]) for p in profiles))
    lines.append("norm," + ",".join(_fmt(p.norm_log2) for p in profiles))
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK


def cmd_profile(cfg: ExperimentConfig) -> int:
    f = profile_by_name(cfg.profile, _grid(cfg))
    _emit(json.dumps(field_to_dict(f)) + "\n", cfg.out)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate, "certify": cmd_certify, "picard": cmd_picard,
    "noexist": cmd_noexist, "norms": cmd_norms, "profile": cmd_profile,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.dump_config:
            print(cfg.to_json())
            return EXIT_OK
        return COMMANDS[args.command](cfg)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
