"""Primal-dual witness: construct a candidate (z, x, w) triple from
(M, J, signs, rho), check the four certification conditions, and certify
that a solver solution equals the witness primal."""

from collections import namedtuple

import numpy as np

from .errors import InvalidInput, RefusesToCertify
from .fmt import write_json
from .linalg import check_symmetric, sym_eig

WitnessTriple = namedtuple("WitnessTriple", "z_hat x_hat w_hat lambda_hat")

DEFAULT_TOL_GAP = 1e-8


def _signs(u1_signs):
    z = np.sign(np.asarray(u1_signs, dtype=float))
    if (z == 0).any():
        raise InvalidInput("u1_signs must be nonzero on the support")
    return z


def _check_J(J, d):
    J = np.asarray(J, dtype=int)
    if J.size < 1 or J.min() < 0 or J.max() >= d or np.unique(J).size != J.size:
        raise InvalidInput("J must be a nonempty set of indices in [0, d)")
    return J


def construct(M, J, u1_signs, rho):
    """Build the witness triple.

    z carries the signs of the true leading eigenvector on J; x is the
    leading eigenvector of M[J,J] - rho*z*z', sign-normalized so that
    sum_i z_i x_i >= 0; w = M[Jc,J] x / (rho*||x||_1);
    lambda is the leading eigenvalue of the penalized support block.
    """
    M = check_symmetric(M, "M")
    d = M.shape[0]
    J = _check_J(J, d)
    if not (rho > 0):
        raise InvalidInput("witness construction needs rho > 0 (w is undefined at 0)")
    z = _signs(u1_signs)
    if z.size != J.size:
        raise InvalidInput("u1_signs must have one entry per support index")

    B = M[np.ix_(J, J)] - rho * np.outer(z, z)
    w_eig = sym_eig(B)
    x = w_eig.eigenvectors[:, 0].copy()
    if float(z @ x) < 0:
        x = -x
    Jc = np.setdiff1d(np.arange(d), J)
    w = M[np.ix_(Jc, J)] @ x / (rho * np.abs(x).sum())
    return WitnessTriple(z, x, w, float(w_eig.eigenvalues[0]))


def embed_vector(z, w, J, d):
    """Interleave the support/off-support parts into one length-d vector."""
    v = np.zeros(d)
    J = np.asarray(J, dtype=int)
    v[J] = z
    v[np.setdiff1d(np.arange(d), J)] = w
    return v


def witness_primal(triple, J, d):
    """The certified primal candidate: x x' on J x J, zero elsewhere."""
    P = np.zeros((d, d))
    P[np.ix_(J, J)] = np.outer(triple.x_hat, triple.x_hat)
    return P


def full_certificate(triple, J, d):
    """(Z_hat, mu_hat) for the KKT check: Z = v v' with v = (z, w) interleaved,
    mu = the witness leading eigenvalue."""
    v = embed_vector(triple.z_hat, triple.w_hat, J, d)
    return np.outer(v, v), triple.lambda_hat


def check(triple, M, J, u1_signs, rho, tol_eq=None, tol_gap=DEFAULT_TOL_GAP):
    """Evaluate the four certification conditions.

    1. sign(x_i) agrees with the true signs on all of J,
    2. ||w||_inf < 1 (defined as 0 when Jc is empty),
    3. the leading eigenvalues of the penalized support block and of the
       full penalized matrix M - rho*(z,w)(z,w)' agree within tol_eq
       (default 1e-8 * (1 + |lambda|); exact equality is a zero-measure
       statement, so a tolerance is unavoidable),
    4. the penalized support block has a strict spectral gap > tol_gap.

    certified = all four.
    """
    M = check_symmetric(M, "M")
    d = M.shape[0]
    J = _check_J(J, d)
    z = _signs(u1_signs)
    x = triple.x_hat
    w = triple.w_hat

    worst = float((z * x).min())
    worst_idx = int(np.argmin(z * x))
    cond1 = worst > 0.0

    winf = float(np.abs(w).max()) if w.size else 0.0
    cond2 = winf < 1.0

    # recompute both penalized leading eigenvalues from scratch
    BJ = M[np.ix_(J, J)] - rho * np.outer(z, z)
    wB = sym_eig(BJ).eigenvalues
    lam_block = float(wB[0])
    v = embed_vector(z, w, J, d)
    lam_full = float(sym_eig(M - rho * np.outer(v, v)).eigenvalues[0])
    if tol_eq is None:
        tol_eq = 1e-8 * (1.0 + abs(lam_block))
    eig_diff = abs(lam_block - lam_full)
    cond3 = eig_diff <= tol_eq

    gap = float(wB[0] - wB[1]) if wB.size > 1 else float("inf")
    cond4 = gap > tol_gap

    return {
        "cond1_sign_match": {"pass": cond1, "worst_value": worst,
                             "worst_index": worst_idx},
        "cond2_winf": {"pass": cond2, "value": winf},
        "cond3_eig_equal": {"pass": cond3, "value": eig_diff, "tol": float(tol_eq),
                            "lambda_block": lam_block, "lambda_full": lam_full},
        "cond4_gap": {"pass": cond4, "value": gap, "tol": float(tol_gap)},
        "certified": cond1 and cond2 and cond3 and cond4,
    }


def certify_solution(M, J, u1_signs, rho, solution):
    """Certified => the solver's X_hat must equal the witness primal.

    Returns {"certified", "support_match", "frobenius_gap", "report"}.
    Raises RefusesToCertify for unconverged solutions.

    On top of the four analytic conditions of `check`, certification here
    demands that the witness primal itself clears the solution's diagonal
    support threshold on all of J.  The analytic conditions speak about
    exact supports (any nonzero entry counts); the solver's support rule
    thresholds at eta, so a valid certificate whose x_hat has an entry with
    x_hat_i^2 <= eta would still leave the extracted support short of J.
    That threshold check is reported separately as "support_above_eta".
    """
    if not solution.converged:
        raise RefusesToCertify("solution did not converge; not certifying")
    M = check_symmetric(M, "M")
    d = M.shape[0]
    J = _check_J(J, d)
    triple = construct(M, J, u1_signs, rho)
    report = check(triple, M, J, u1_signs, rho)
    eta = solution.config.eta_support
    above_eta = bool((triple.x_hat ** 2 > eta).all())
    support_match = np.array_equal(np.sort(J), np.asarray(solution.J_hat))
    fro = float(np.linalg.norm(solution.X_hat - witness_primal(triple, J, d)))
    return {
        "certified": bool(report["certified"] and above_eta),
        "support_above_eta": above_eta,
        "support_match": bool(support_match),
        "frobenius_gap": fro,
        "report": report,
    }


def write_report(path, report):
    write_json(path, report)
