"""Monte Carlo recovery-rate experiments and covariance data mode.

Trials are embarrassingly parallel; every trial draws from its own RNG
stream keyed by (master_seed, cell index, trial index), so output bytes do
not depend on the worker count or scheduling.  Rows are written in sorted
(cell, trial) order.
"""

import os
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import InvalidInput, RefusesToCertify
from .fmt import write_csv, write_json
from .solver import SdpConfig, extract_support, solve
from .svgplot import line_chart
from .synth import (generate_ground_truth, incomplete_covariance, noise_spec,
                    read_table_csv, sample_observation)
from .theory import rescaled_parameter
from .witness import certify_solution

ExperimentConfig = namedtuple(
    "ExperimentConfig",
    "d_list s_list gap_list p_list rho_list B sigma_normal trials "
    "master_seed grid slice_d slice_s")
ExperimentConfig.__new__.__defaults__ = (
    (20, 50, 100), (5, 10, 20), (20.0,), (0.1, 0.3, 0.5, 0.7, 0.9), (0.1,),
    5.0, 0.1, 30, 0, "slices", 100, 10)

TRIAL_COLUMNS = ["d", "s", "gap", "p", "rho", "B", "sigma_normal", "trial",
                 "seed", "recovered", "support_size", "iterations",
                 "converged", "certified", "rescaled"]


def _validate(cfg):
    for name in ("d_list", "s_list", "gap_list", "p_list", "rho_list"):
        if len(getattr(cfg, name)) == 0:
            raise InvalidInput("%s must be nonempty" % name)
    if cfg.trials < 1:
        raise InvalidInput("trials must be >= 1")
    if any(not (0 < p < 1) for p in cfg.p_list):
        raise InvalidInput("experiment p values must lie in (0, 1)")
    if cfg.grid not in ("slices", "full"):
        raise InvalidInput("grid must be 'slices' or 'full'")


def _families(cfg):
    """(d, s) pairs: the two one-parameter slices, or the full product."""
    if cfg.grid == "full":
        fams = [(d, s) for d in cfg.d_list for s in cfg.s_list if s <= d]
    else:
        fams = [(cfg.slice_d, s) for s in cfg.s_list if s <= cfg.slice_d]
        fams += [(d, cfg.slice_s) for d in cfg.d_list
                 if cfg.slice_s <= d and (d, cfg.slice_s) not in fams]
    if not fams:
        raise InvalidInput("no feasible (d, s) pairs in the grid")
    return fams


def run_trial(cell_idx, trial, d, s, gap, p, rho, noise, master_seed):
    """One generate/observe/solve/certify pass; returns a TRIAL_COLUMNS row."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(cell_idx, trial))
    seed_id = int(ss.generate_state(1, np.uint64)[0])
    rng = np.random.default_rng(ss)
    gt = generate_ground_truth(d, s, gap, rng)
    obs = sample_observation(gt, p, noise, rng)
    sol = solve(obs.M, SdpConfig()._replace(rho=rho))
    recovered = bool(sol.converged) and np.array_equal(sol.J_hat, gt.support)
    certified = False
    if sol.converged:
        signs = np.sign(gt.eigenvectors[gt.support, 0])
        try:
            certified = certify_solution(obs.M, gt.support, signs, rho,
                                         sol)["certified"]
        except RefusesToCertify:
            certified = False
    resc = rescaled_parameter(gt.M_star, gt.support, p) if s >= 2 \
        else float("nan")
    return [d, s, gap, p, rho, noise.B, noise.sigma_normal, trial, seed_id,
            recovered, len(sol.J_hat), sol.iterations, bool(sol.converged),
            bool(certified), resc]


def _run_cells(cells, trials, master_seed, noise, threads):
    jobs = [(ci, t) + cell for ci, cell in enumerate(cells)
            for t in range(trials)]
    results = {}
    if threads is None or threads <= 1:
        for job in jobs:
            ci, t = job[0], job[1]
            results[(ci, t)] = run_trial(*job, noise=noise,
                                         master_seed=master_seed)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = {pool.submit(run_trial, *job, noise=noise,
                                master_seed=master_seed): (job[0], job[1])
                    for job in jobs}
            for fut, key in futs.items():
                results[key] = fut.result()
    return [results[key] for key in sorted(results)]


def _sigma_values(cfg):
    sn = cfg.sigma_normal
    return tuple(sn) if isinstance(sn, (tuple, list)) else (sn,)


def _cell_rates(rows, key_fields):
    """Group trial rows by the named columns; mean recovery and rescaled."""
    idx = {name: TRIAL_COLUMNS.index(name) for name in TRIAL_COLUMNS}
    groups = {}
    for row in rows:
        key = tuple(row[idx[f]] for f in key_fields)
        groups.setdefault(key, []).append(row)
    out = {}
    for key, grp in sorted(groups.items()):
        rec = [r[idx["recovered"]] for r in grp]
        resc = [r[idx["rescaled"]] for r in grp]
        resc = [v for v in resc if np.isfinite(v)]
        out[key] = {
            "rate": float(np.mean(rec)),
            "mean_rescaled": float(np.mean(resc)) if resc else float("nan"),
            "n_trials": len(grp),
            "n_unconverged": sum(1 for r in grp if not r[idx["converged"]]),
        }
    return out


def run_experiment1(cfg, out_dir, threads=None):
    """Recovery rate vs sampling probability and vs the rescaled parameter,
    over (d, s) families at a fixed gap / noise level / penalty."""
    _validate(cfg)
    noise = noise_spec(cfg.B, _sigma_values(cfg)[0])
    gap = cfg.gap_list[0]
    rho = cfg.rho_list[0]
    fams = _families(cfg)
    cells = [(d, s, gap, p, rho) for (d, s) in fams for p in cfg.p_list]
    rows = _run_cells(cells, cfg.trials, cfg.master_seed, noise, threads)

    os.makedirs(out_dir, exist_ok=True)
    write_csv(os.path.join(out_dir, "exp1_trials.csv"), TRIAL_COLUMNS, rows)

    rates = _cell_rates(rows, ("d", "s", "p"))
    rate_rows = [[d, s, gap, p, rho, v["n_trials"], v["rate"],
                  v["mean_rescaled"], v["n_unconverged"]]
                 for (d, s, p), v in rates.items()]
    write_csv(os.path.join(out_dir, "exp1_rates.csv"),
              ["d", "s", "gap", "p", "rho", "n_trials", "rate",
               "mean_rescaled", "n_unconverged"], rate_rows)

    series_p, series_r = [], []
    for (d, s) in fams:
        pts = [(p, rates[(d, s, p)]) for p in sorted(cfg.p_list)]
        label = "d=%d s=%d" % (d, s)
        series_p.append({"label": label, "x": [q[0] for q in pts],
                         "y": [q[1]["rate"] for q in pts]})
        collapse = sorted((v["mean_rescaled"], v["rate"]) for _, v in pts)
        series_r.append({"label": label, "x": [q[0] for q in collapse],
                         "y": [q[1] for q in collapse]})
    line_chart(os.path.join(out_dir, "exp1_rate_vs_p.svg"), series_p,
               title="exact recovery rate vs sampling probability",
               xlabel="p", ylabel="recovery rate", y_range=(0.0, 1.0))
    line_chart(os.path.join(out_dir, "exp1_rate_vs_rescaled.svg"), series_r,
               title="exact recovery rate vs rescaled parameter",
               xlabel="rescaled parameter", ylabel="recovery rate",
               y_range=(0.0, 1.0))
    return {"trials": rows, "rates": rates, "families": fams}


def run_experiment2(cfg, out_dir, threads=None):
    """Rate vs p across spectral gaps and noise levels at fixed (d, s),
    keeping the best rate over the penalty list for each cell."""
    _validate(cfg)
    d = cfg.d_list[0]
    s = cfg.s_list[0]
    if s > d:
        raise InvalidInput("need s <= d")
    sigma_values = _sigma_values(cfg)
    cells = []
    for sn in sigma_values:
        for gap in cfg.gap_list:
            for p in cfg.p_list:
                for rho in cfg.rho_list:
                    cells.append((d, s, gap, p, rho, sn))

    jobs = [(ci, t) + cell[:5] for ci, cell in enumerate(cells)
            for t in range(cfg.trials)]
    noises = {sn: noise_spec(cfg.B, sn) for sn in sigma_values}
    results = {}

    def work(job, sn):
        return run_trial(*job, noise=noises[sn], master_seed=cfg.master_seed)

    pairs = [(job, cells[job[0]][5]) for job in jobs]
    if threads is None or threads <= 1:
        for job, sn in pairs:
            results[(job[0], job[1])] = work(job, sn)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = {pool.submit(work, job, sn): (job[0], job[1])
                    for job, sn in pairs}
            for fut, key in futs.items():
                results[key] = fut.result()
    rows = [results[key] for key in sorted(results)]

    os.makedirs(out_dir, exist_ok=True)
    write_csv(os.path.join(out_dir, "exp2_trials.csv"), TRIAL_COLUMNS, rows)

    rates = _cell_rates(rows, ("sigma_normal", "gap", "p", "rho"))
    best = {}
    for (sn, gap, p, rho), v in rates.items():
        cur = best.get((sn, gap, p))
        if cur is None or v["rate"] > cur["rate"]:
            best[(sn, gap, p)] = {"rate": v["rate"], "rho": rho,
                                  "n_trials": v["n_trials"],
                                  "n_unconverged": v["n_unconverged"]}
    rate_rows = [[sn, gap, p, v["rho"], v["n_trials"], v["rate"],
                  v["n_unconverged"]]
                 for (sn, gap, p), v in sorted(best.items())]
    write_csv(os.path.join(out_dir, "exp2_rates.csv"),
              ["sigma_normal", "gap", "p", "best_rho", "n_trials", "rate",
               "n_unconverged"], rate_rows)

    sn_values = sorted(set(k[0] for k in best))
    for sn in sn_values:
        series = []
        for gap in cfg.gap_list:
            pts = [(p, best[(sn, gap, p)]["rate"]) for p in sorted(cfg.p_list)]
            series.append({"label": "gap=%g" % gap,
                           "x": [q[0] for q in pts], "y": [q[1] for q in pts]})
        line_chart(os.path.join(out_dir, "exp2_sigma_%g.svg" % sn), series,
                   title="recovery rate, noise level %g" % sn,
                   xlabel="p", ylabel="recovery rate", y_range=(0.0, 1.0))
    return {"trials": rows, "best": best}


def run_data_mode(table_path, rho, eta, out_path=None):
    """Pairwise-complete covariance from a table with missing cells, then the
    penalized solve; reports the selected columns by name."""
    names, table = read_table_csv(table_path)
    cov = incomplete_covariance(table)
    sol = solve(cov["C"], SdpConfig()._replace(rho=rho, eta_support=eta))
    support = extract_support(sol.X_hat, eta)
    report = {
        "columns": len(names),
        "rows": table.shape[0],
        "observed_fraction": cov["observed_fraction"],
        "empty_columns": [int(i) + 1 for i in cov["empty_columns"]],
        "rho": float(rho),
        "eta": float(eta),
        "objective": sol.objective,
        "iterations": sol.iterations,
        "converged": bool(sol.converged),
        "support": [int(i) + 1 for i in support],
        "support_names": [names[i] for i in support],
        "support_diag": [float(sol.X_hat[i, i]) for i in support],
    }
    if out_path is not None:
        write_json(out_path, report)
    return report
