"""ADMM solver for  max <M, X> - rho*||X||_{1,1}  over {X psd, tr X = 1},
support extraction from diag(X), and the KKT system check."""

from collections import namedtuple

import numpy as np

from .errors import InvalidInput
from .fmt import write_json
from .linalg import (check_symmetric, project_spectraplex, soft_threshold,
                     sym_eig)

SdpConfig = namedtuple(
    "SdpConfig", "rho tau tol_primal tol_dual max_iter eta_support")
SdpConfig.__new__.__defaults__ = (0.1, 1.0, 1e-6, 1e-6, 20000, 1e-3)

SdpSolution = namedtuple(
    "SdpSolution",
    "X_hat J_hat objective iterations primal_residual dual_residual converged "
    "config tau_final merit_tail")

_BALANCE_RATIO = 10.0
_BALANCE_FACTOR = 2.0


def _validate_config(cfg):
    if cfg.rho < 0:
        raise InvalidInput("rho must be >= 0")
    if cfg.tau <= 0 or cfg.tol_primal <= 0 or cfg.tol_dual <= 0:
        raise InvalidInput("tau and tolerances must be positive")
    if cfg.max_iter < 1:
        raise InvalidInput("max_iter must be >= 1")
    if not (0 < cfg.eta_support < 1):
        raise InvalidInput("eta_support must be in (0, 1)")


def objective_value(M, X, rho):
    return float((M * X).sum() - rho * np.abs(X).sum())


def solve(M, cfg=SdpConfig(), balance=True):
    """Run ADMM with consensus splitting X = Y.

    X-step projects Y - U + M/tau onto the spectraplex, Y-step soft-thresholds
    X + U at rho/tau, U accumulates X - Y.  Optional residual balancing
    doubles/halves tau when one relative residual exceeds the other by 10x
    (the scaled dual U is rescaled so the unscaled dual tau*U is preserved).

    Returns an SdpSolution; converged=False simply reports the residuals at
    the iteration cap and leaves the decision to the caller.
    """
    M = check_symmetric(M, "M")
    _validate_config(cfg)
    d = M.shape[0]
    tau = float(cfg.tau)
    X = np.eye(d) / d
    Y = X.copy()
    U = np.zeros((d, d))
    merit_tail = []
    r_rel = s_rel = float("inf")
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        X = project_spectraplex(Y - U + M / tau)
        Y_prev = Y
        Y = soft_threshold(X + U, cfg.rho / tau)
        U = U + X - Y

        r_rel = np.linalg.norm(X - Y) / max(
            1.0, np.linalg.norm(X), np.linalg.norm(Y))
        s_rel = tau * np.linalg.norm(Y - Y_prev) / max(
            1.0, tau * np.linalg.norm(U))
        merit_tail.append(objective_value(M, X, cfg.rho))
        if len(merit_tail) > 11:
            merit_tail.pop(0)
        if r_rel <= cfg.tol_primal and s_rel <= cfg.tol_dual:
            # Residuals alone can pass while the objective still drifts a
            # little faster than tol per window, so also wait for the merit
            # to flatten out (relative to its own scale) before stopping.
            spread = max(merit_tail) - min(merit_tail)
            if spread < cfg.tol_primal * max(1.0, abs(merit_tail[-1])):
                converged = True
                break
            continue
        if balance:
            if r_rel > _BALANCE_RATIO * s_rel:
                tau *= _BALANCE_FACTOR
                U = U / _BALANCE_FACTOR
            elif s_rel > _BALANCE_RATIO * r_rel:
                tau /= _BALANCE_FACTOR
                U = U * _BALANCE_FACTOR

    J_hat = extract_support(X, cfg.eta_support)
    return SdpSolution(X, J_hat, objective_value(M, X, cfg.rho), it,
                       float(r_rel), float(s_rel), converged, cfg, tau,
                       list(merit_tail))


def extract_support(X, eta):
    """Indices i with X[i,i] > eta (0-based, sorted)."""
    X = check_symmetric(X, "X")
    return np.nonzero(np.diag(X) > eta)[0]


def kkt_check(M, X_hat, Z_hat, mu_hat, J, rho, tol=1e-8):
    """Evaluate the seven optimality conditions for a candidate primal/dual
    triple (X_hat, Z_hat, mu_hat) at penalty rho.

    Each condition is reported as {"residual", "pass"}; "pass" means the
    residual is within tol (strict feasibility of the off-support dual is
    checked strictly against 1).  Overall pass = all seven.

    Conditions: (1) X_hat[J,J] psd with unit trace; (2) M[J,J] - rho*Z[J,J]
    <= mu*I; (3) M - rho*Z <= mu*I; (4) Z[J,J] is a subgradient of |X_hat|
    on the support block; (5) |Z| < 1 strictly off the support block;
    (6) (M[J,J] - rho*Z[J,J]) X_hat[J,J] = mu * X_hat[J,J];
    (7) (M[Jc,J] - rho*Z[Jc,J]) X_hat[J,J] = 0.
    """
    M = check_symmetric(M, "M")
    X_hat = check_symmetric(X_hat, "X_hat")
    Z_hat = check_symmetric(Z_hat, "Z_hat")
    d = M.shape[0]
    J = np.asarray(J, dtype=int)
    Jc = np.setdiff1d(np.arange(d), J)
    jj = np.ix_(J, J)
    mu_hat = float(mu_hat)

    XJ = X_hat[jj]
    AJ = M[jj] - rho * Z_hat[jj]
    A = M - rho * Z_hat

    lam_min_XJ = sym_eig(XJ).eigenvalues[-1]
    r1 = max(max(-lam_min_XJ, 0.0), abs(np.trace(XJ) - 1.0))
    r2 = sym_eig(AJ).eigenvalues[0] - mu_hat
    r3 = sym_eig(A).eigenvalues[0] - mu_hat

    # subgradient of the entrywise absolute value on the support block:
    # sign(x) where x is nonzero, anything in [-1, 1] where x is zero
    ZJ = Z_hat[jj]
    nz = np.abs(XJ) > tol
    r4 = 0.0
    if nz.any():
        r4 = float(np.abs(ZJ[nz] - np.sign(XJ[nz])).max())
    if (~nz).any():
        r4 = max(r4, float(np.maximum(np.abs(ZJ[~nz]) - 1.0, 0.0).max()))

    off = np.ones((d, d), dtype=bool)
    off[jj] = False
    max_off = float(np.abs(Z_hat[off]).max()) if off.any() else 0.0
    r5 = max_off - 1.0  # negative means strictly feasible

    r6 = float(np.linalg.norm(AJ @ XJ - mu_hat * XJ))
    r7 = float(np.linalg.norm((M[np.ix_(Jc, J)] - rho * Z_hat[np.ix_(Jc, J)]) @ XJ)) \
        if Jc.size else 0.0

    conds = {
        "primal_feasible": {"residual": float(r1), "pass": r1 <= tol},
        "psd_support_block": {"residual": float(r2), "pass": r2 <= tol},
        "psd_full": {"residual": float(r3), "pass": r3 <= tol},
        "subgradient_on_support": {"residual": float(r4), "pass": r4 <= tol},
        "strict_dual_off_support": {"residual": float(r5), "pass": max_off < 1.0},
        "eigen_equation_support": {"residual": r6, "pass": r6 <= tol},
        "eigen_equation_cross": {"residual": r7, "pass": r7 <= tol},
    }
    conds["pass"] = all(c["pass"] for c in conds.values() if isinstance(c, dict))
    return conds


def solution_to_dict(sol):
    """JSON-ready view of a solution; support uses 1-based indices."""
    return {
        "objective": sol.objective,
        "iterations": int(sol.iterations),
        "converged": bool(sol.converged),
        "support": [int(i) + 1 for i in sol.J_hat],
        "diag": [float(x) for x in np.diag(sol.X_hat)],
    }


def write_solution(path, sol):
    write_json(path, solution_to_dict(sol))
