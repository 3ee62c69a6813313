"""Command-line front end.

Subcommands: generate, observe, solve, witness, theory, exp1, exp2, cov.
Flags beat config-file entries beat built-in defaults; the config file is
flat ``key = value`` text with ``#`` comments and the keys equal the long
flag names with dashes turned into underscores.  Exit codes: 0 ok,
2 invalid input, 3 non-convergence.
"""

import argparse
import json
import sys

import numpy as np

from .errors import (EXIT_INVALID_INPUT, EXIT_NO_CONVERGENCE, EXIT_OK,
                     GenerationFailed, InvalidInput, NoConvergence,
                     RefusesToCertify)
from .experiments import (ExperimentConfig, run_data_mode, run_experiment1,
                          run_experiment2)
from .fmt import write_json
from .solver import SdpConfig, solution_to_dict, solve
from .synth import (generate_ground_truth, noise_spec, read_matrix_csv,
                    sample_observation, write_mask_csv, write_matrix_csv)
from .theory import theory_report, write_theory_report
from .witness import certify_solution


def _floats(text):
    return tuple(float(x) for x in str(text).split(","))


def _ints(text):
    return tuple(int(x) for x in str(text).split(","))


def read_config(path):
    cfg = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInput("%s:%d: expected key = value" % (path, ln))
            key, val = line.split("=", 1)
            cfg[key.strip()] = val.strip()
    return cfg


def _scan_config(argv):
    for i, item in enumerate(argv):
        if item == "--config" and i + 1 < len(argv):
            return read_config(argv[i + 1])
        if item.startswith("--config="):
            return read_config(item.split("=", 1)[1])
    return {}


class _Cmd:
    """A subparser whose argument defaults can come from the config file."""

    def __init__(self, sub, name, help_text, config):
        self.p = sub.add_parser(name, help=help_text)
        self.config = config
        self.p.add_argument("--config", help="flat key = value settings file")

    def add(self, flag, type_fn=str, default=None, **kw):
        key = flag.lstrip("-").replace("-", "_")
        if key in self.config:
            default = type_fn(self.config[key])
        self.p.add_argument(flag, type=type_fn, default=default, **kw)


def build_parser(config):
    ap = argparse.ArgumentParser(
        prog="spareig",
        description="sparse leading-eigenvector support recovery from "
                    "incomplete noisy symmetric matrices")
    sub = ap.add_subparsers(dest="command", required=True)

    c = _Cmd(sub, "generate", "draw a planted sparse-leading-eigenvector "
             "matrix", config)
    c.add("--d", int, 100, help="dimension")
    c.add("--s", int, 10, help="support size")
    c.add("--gap", float, 20.0, help="spectral gap")
    c.add("--seed", int, 0)
    c.add("--out", str, ".", help="output directory")

    c = _Cmd(sub, "observe", "apply the Bernoulli mask and bounded noise",
             config)
    c.add("--input", str, None, help="ground-truth matrix CSV")
    c.add("--p", float, 0.9, help="entry observation probability")
    c.add("--B", float, 5.0, help="noise bound")
    c.add("--sigma-normal", float, 0.1, help="parent normal std dev")
    c.add("--seed", int, 0)
    c.add("--out", str, ".")

    c = _Cmd(sub, "solve", "run the penalized semidefinite solver", config)
    c.add("--input", str, None, help="observed matrix CSV")
    c.add("--rho", float, 0.1, help="l1 penalty weight")
    c.add("--eta", float, 1e-3, help="support threshold on the diagonal")
    c.add("--tol", float, 1e-6, help="primal/dual relative tolerance")
    c.add("--max-iter", int, 20000)
    c.add("--out", str, ".")

    c = _Cmd(sub, "witness", "solve, then check the primal-dual certificate "
             "against known ground truth", config)
    c.add("--input", str, None, help="observed matrix CSV")
    c.add("--truth", str, None, help="ground_truth.json from `generate`")
    c.add("--rho", float, 0.1)
    c.add("--tol", float, 1e-6)
    c.add("--max-iter", int, 20000)
    c.add("--out", str, ".")

    c = _Cmd(sub, "theory", "evaluate the recovery-condition report for a "
             "known instance", config)
    c.add("--input", str, None, help="ground-truth matrix CSV")
    c.add("--truth", str, None, help="ground_truth.json from `generate`")
    c.add("--p", float, 0.9)
    c.add("--B", float, 5.0)
    c.add("--sigma-normal", float, 0.1)
    c.add("--rho", float, 0.1)
    c.add("--c", float, 1.0, help="confidence exponent")
    c.add("--out", str, ".")

    c = _Cmd(sub, "exp1", "recovery rate vs p and vs the rescaled parameter",
             config)
    c.add("--d-list", _ints, (20, 50, 100))
    c.add("--s-list", _ints, (5, 10, 20))
    c.add("--gap", float, 20.0)
    c.add("--p-list", _floats, (0.1, 0.3, 0.5, 0.7, 0.9))
    c.add("--rho", float, 0.1)
    c.add("--B", float, 5.0)
    c.add("--sigma-normal", float, 0.1)
    c.add("--trials", int, 30)
    c.add("--seed", int, 0, help="master seed")
    c.add("--grid", str, "slices", choices=("slices", "full"))
    c.add("--slice-d", int, 100)
    c.add("--slice-s", int, 10)
    c.add("--threads", int, 1)
    c.add("--out", str, ".")

    c = _Cmd(sub, "exp2", "recovery rate across spectral gaps and noise "
             "levels, best over the penalty list", config)
    c.add("--d", int, 100)
    c.add("--s", int, 50)
    c.add("--gap-list", _floats, (10.0, 30.0, 50.0))
    c.add("--p-list", _floats, (0.1, 0.3, 0.5, 0.7, 0.9))
    c.add("--rho-list", _floats, (0.1, 0.01))
    c.add("--B", float, 5.0)
    c.add("--sigma-normal-list", _floats, (0.1, 0.3, 0.5))
    c.add("--trials", int, 30)
    c.add("--seed", int, 0)
    c.add("--threads", int, 1)
    c.add("--out", str, ".")

    c = _Cmd(sub, "cov", "support selection on a data table with missing "
             "cells via pairwise-complete covariance", config)
    c.add("--input", str, None, help="CSV table, header row, NA/blank = "
          "missing")
    c.add("--rho", float, 2.0)
    c.add("--eta", float, 1e-3)
    c.add("--out", str, ".")
    return ap


def _need(args, name):
    if getattr(args, name) is None:
        raise InvalidInput("--%s is required" % name)
    return getattr(args, name)


def _outpath(args, fname):
    import os
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, fname)


def _load_truth(path):
    with open(path) as fh:
        truth = json.load(fh)
    J = np.asarray(truth["support"], dtype=int) - 1
    u1 = np.asarray(truth["u1"], dtype=float)
    return truth, J, u1


def cmd_generate(args):
    gt = generate_ground_truth(args.d, args.s, args.gap, args.seed)
    write_matrix_csv(_outpath(args, "M_star.csv"), gt.M_star)
    write_json(_outpath(args, "ground_truth.json"), {
        "d": gt.d, "s": gt.s, "gap": gt.spectral_gap, "seed": args.seed,
        "support": [int(i) + 1 for i in gt.support],
        "eigenvalues": gt.eigenvalues,
        "u1": gt.eigenvectors[:, 0],
    })
    print("wrote M_star.csv and ground_truth.json (d=%d s=%d gap=%g)"
          % (gt.d, gt.s, gt.spectral_gap))
    return EXIT_OK


def cmd_observe(args):
    M_star = read_matrix_csv(_need(args, "input"))
    noise = noise_spec(args.B, args.sigma_normal)
    obs = sample_observation(M_star, args.p, noise, args.seed)
    write_matrix_csv(_outpath(args, "M.csv"), obs.M)
    write_mask_csv(_outpath(args, "mask.csv"), obs.mask)
    write_json(_outpath(args, "observation.json"), {
        "p": args.p, "B": noise.B, "sigma_normal": noise.sigma_normal,
        "sigma2": noise.sigma2, "seed": args.seed,
        "observed_fraction": float(np.triu(obs.mask).sum()
                                   / (obs.M.shape[0] * (obs.M.shape[0] + 1) / 2)),
    })
    print("wrote M.csv, mask.csv, observation.json (p=%g)" % args.p)
    return EXIT_OK


def _solver_config(args):
    return SdpConfig()._replace(
        rho=args.rho, tol_primal=args.tol, tol_dual=args.tol,
        max_iter=args.max_iter,
        eta_support=getattr(args, "eta", SdpConfig().eta_support))


def cmd_solve(args):
    M = read_matrix_csv(_need(args, "input"))
    sol = solve(M, _solver_config(args))
    write_json(_outpath(args, "solution.json"), solution_to_dict(sol))
    write_matrix_csv(_outpath(args, "X_hat.csv"), sol.X_hat)
    print("objective %.10g  iterations %d  converged %s  support %s"
          % (sol.objective, sol.iterations, sol.converged,
             [int(i) + 1 for i in sol.J_hat]))
    return EXIT_OK if sol.converged else EXIT_NO_CONVERGENCE


def cmd_witness(args):
    M = read_matrix_csv(_need(args, "input"))
    _, J, u1 = _load_truth(_need(args, "truth"))
    args.eta = SdpConfig().eta_support
    sol = solve(M, _solver_config(args))
    result = certify_solution(M, J, np.sign(u1[J]), args.rho, sol)
    out = dict(result)
    out["solution"] = solution_to_dict(sol)
    write_json(_outpath(args, "witness.json"), out)
    print("certified %s  support_match %s  frobenius_gap %.3g"
          % (result["certified"], result["support_match"],
             result["frobenius_gap"]))
    return EXIT_OK


def cmd_theory(args):
    M_star = read_matrix_csv(_need(args, "input"))
    _, J, u1 = _load_truth(_need(args, "truth"))
    noise = noise_spec(args.B, args.sigma_normal)
    rep = theory_report(M_star, J, u1, args.p, noise.sigma2, noise.B,
                        args.rho, args.c)
    write_theory_report(_outpath(args, "theory.json"), rep)
    t1 = rep["theorem1"]
    print("margins: a %+.4g  b %+.4g  c %+.4g  all_satisfied %s"
          % (t1["margin_a"], t1["margin_b"], t1["margin_c"],
             t1["all_satisfied"]))
    return EXIT_OK


def cmd_exp1(args):
    cfg = ExperimentConfig(
        d_list=args.d_list, s_list=args.s_list, gap_list=(args.gap,),
        p_list=args.p_list, rho_list=(args.rho,), B=args.B,
        sigma_normal=args.sigma_normal, trials=args.trials,
        master_seed=args.seed, grid=args.grid, slice_d=args.slice_d,
        slice_s=args.slice_s)
    out = run_experiment1(cfg, args.out, threads=args.threads)
    print("exp1: %d families, %d trial rows -> %s"
          % (len(out["families"]), len(out["trials"]), args.out))
    return EXIT_OK


def cmd_exp2(args):
    cfg = ExperimentConfig(
        d_list=(args.d,), s_list=(args.s,), gap_list=args.gap_list,
        p_list=args.p_list, rho_list=args.rho_list, B=args.B,
        sigma_normal=args.sigma_normal_list, trials=args.trials,
        master_seed=args.seed, grid="full")
    out = run_experiment2(cfg, args.out, threads=args.threads)
    print("exp2: %d trial rows -> %s" % (len(out["trials"]), args.out))
    return EXIT_OK


def cmd_cov(args):
    report = run_data_mode(_need(args, "input"), args.rho, args.eta,
                           _outpath(args, "cov_support.json"))
    print("observed fraction %.4f over %d columns"
          % (report["observed_fraction"], report["columns"]))
    for name, val in zip(report["support_names"], report["support_diag"]):
        print("  %-24s diag %.6f" % (name, val))
    if not report["support_names"]:
        print("  (empty support -- penalty may be too large)")
    if not report["converged"]:
        print("solver did not converge after %d iterations"
              % report["iterations"], file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


_DISPATCH = {"generate": cmd_generate, "observe": cmd_observe,
             "solve": cmd_solve, "witness": cmd_witness,
             "theory": cmd_theory, "exp1": cmd_exp1, "exp2": cmd_exp2,
             "cov": cmd_cov}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = _scan_config(argv)
    except (InvalidInput, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INVALID_INPUT
    ap = build_parser(config)
    args = ap.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except (InvalidInput, GenerationFailed, OSError, ValueError,
            KeyError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INVALID_INPUT
    except (NoConvergence, RefusesToCertify) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
