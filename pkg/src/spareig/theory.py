"""Closed-form recovery theory: coherence parameters, concentration
constants, the three main condition margins, both corollary reports and the
rescaled parameter used in the synthetic experiments.

Margins are signed, positive = condition satisfied.  Block conventions:
for an index set J on a symmetric d x d matrix, the three sub-blocks are
M[J,J], M[Jc,J] (rows off support, columns on) and M[Jc,Jc].
"""

import math

import numpy as np

from .errors import InvalidInput
from .fmt import write_json
from .linalg import check_symmetric, norms, sym_eig


def _blocks(M_star, J):
    M_star = check_symmetric(M_star, "M_star")
    d = M_star.shape[0]
    J = np.asarray(J, dtype=int)
    if J.size < 1 or J.min() < 0 or J.max() >= d or np.unique(J).size != J.size:
        raise InvalidInput("J must be a nonempty set of indices in [0, d)")
    Jc = np.setdiff1d(np.arange(d), J)
    return M_star, d, np.sort(J), Jc


def support_gap(M_JJ):
    """lambda_1 - lambda_2 of the support block (lambda_2 := 0 for a 1x1 block)."""
    w = sym_eig(M_JJ).eigenvalues
    lam1 = float(w[0])
    lam2 = float(w[1]) if w.size > 1 else 0.0
    return lam1, lam2, lam1 - lam2


def coherence(M_star, J):
    """The four coherence ratios of the three sub-blocks.

    mu0 = max-entry over spectral gap of M[J,J]; mu1 = max-entry over max
    column 2-norm of M[J,J]; mu2 and mu3 are the min-of-ratios forms on the
    cross and off blocks.  All-zero (or otherwise degenerate) blocks give
    mu = 1.0 with the block named in "degenerate".  The documented bounds
    are evaluated into "bounds_ok" rather than enforced: they hold for the
    planted instances this library generates, and a False flag on real data
    signals either a computation bug or an instance outside the theory.
    """
    M_star, d, J, Jc = _blocks(M_star, J)
    s = J.size
    degenerate = []

    A_JJ = M_star[np.ix_(J, J)]
    lam1, lam2, lbar = support_gap(A_JJ)
    n_JJ = norms(A_JJ)
    if lbar > 0:
        mu0 = n_JJ["max"] / lbar
    else:
        mu0 = 1.0
        degenerate.append("mu0")
    if n_JJ["two_inf"] > 0:
        mu1 = n_JJ["max"] / n_JJ["two_inf"]
    else:
        mu1 = 1.0
        degenerate.append("mu1")

    if Jc.size == 0:
        mu2 = mu3 = 1.0
        degenerate += ["mu2", "mu3"]
    else:
        A_cJ = M_star[np.ix_(Jc, J)]
        n_cJ = norms(A_cJ)
        n_Jc = norms(A_cJ.T)
        if n_cJ["max"] > 0:
            mu2 = min(n_cJ["max"] / n_cJ["frobenius"],
                      max(n_cJ["max"] / n_cJ["two_inf"],
                          n_cJ["max"] / n_Jc["two_inf"]),
                      n_cJ["max"] / n_Jc["inf_two"])
        else:
            mu2 = 1.0
            degenerate.append("mu2")
        A_cc = M_star[np.ix_(Jc, Jc)]
        n_cc = norms(A_cc)
        if n_cc["max"] > 0:
            mu3 = min(n_cc["max"] / n_cc["spectral"],
                      n_cc["max"] / n_cc["two_inf"])
        else:
            mu3 = 1.0
            degenerate.append("mu3")

    bounds_ok = {
        "mu0": ("mu0" in degenerate) or (1.0 / s - 1e-12 <= mu0 <= 1.0 + 1e-12),
        "mu1": ("mu1" in degenerate)
        or (1.0 / math.sqrt(s) - 1e-12 <= mu1 <= 1.0 + 1e-12),
        "mu2": ("mu2" in degenerate) or Jc.size == 0
        or (1.0 / math.sqrt(s * Jc.size) - 1e-12 <= mu2 <= 1.0 + 1e-12),
        "mu3": ("mu3" in degenerate) or Jc.size == 0
        or (1.0 / Jc.size - 1e-12 <= mu3 <= 1.0 + 1e-12),
    }
    return {"mu0": float(mu0), "mu1": float(mu1), "mu2": float(mu2),
            "mu3": float(mu3), "degenerate": degenerate, "bounds_ok": bounds_ok}


def bernstein_constants(M_star, J, p, sigma2, B, c=1.0):
    """The six per-block concentration scales R1..R6 and the three combined
    constants K1..K3 at confidence exponent c.

    R's pair a bounded-part max{(1-p)*max-norm + B, p*max-norm} with a
    variance part sqrt(p(1-p))*column-2-norm + sqrt(p * n * sigma2); the K's
    combine them with the log of the effective dimension.  With an empty
    off-support part (s == d) the cross/off R's and K2, K3 are undefined
    and reported as nan with a flag.
    """
    if not (0 < p <= 1):
        raise InvalidInput("p must be in (0, 1]")
    if sigma2 < 0 or B < 0 or c <= 0:
        raise InvalidInput("need sigma2 >= 0, B >= 0, c > 0")
    M_star, d, J, Jc = _blocks(M_star, J)
    s = J.size

    n_JJ = norms(M_star[np.ix_(J, J)])
    R1 = max((1 - p) * n_JJ["max"] + B, p * n_JJ["max"])
    R2 = math.sqrt(p * (1 - p)) * n_JJ["two_inf"] + math.sqrt(p * s * sigma2)
    K1 = (c + 1) * R1 * math.log(2 * s) \
        + math.sqrt(2 * (c + 1)) * R2 * math.sqrt(math.log(2 * s))

    undefined = []
    if Jc.size == 0:
        R3 = R4 = R5 = R6 = K2 = K3 = float("nan")
        undefined = ["R3", "R4", "R5", "R6", "K2", "K3"]
    else:
        n_cJ = norms(M_star[np.ix_(Jc, J)])
        n_Jc = norms(M_star[np.ix_(J, Jc)])
        n_cc = norms(M_star[np.ix_(Jc, Jc)])
        R3 = max((1 - p) * n_cJ["max"] + B, p * n_cJ["max"])
        R4 = max(
            math.sqrt(p * (1 - p)) * n_cJ["two_inf"]
            + math.sqrt(p * Jc.size * sigma2),
            math.sqrt(p * (1 - p)) * n_Jc["two_inf"]
            + math.sqrt(p * s * sigma2))
        R5 = max((1 - p) * n_cc["max"] + B, p * n_cc["max"])
        R6 = math.sqrt(p * (1 - p)) * n_cc["two_inf"] \
            + math.sqrt(p * Jc.size * sigma2)
        K2 = (c + 1) * R3 * math.log(d) \
            + math.sqrt(2 * (c + 1)) * R4 * math.sqrt(math.log(d))
        K3 = (c + 1) * R5 * math.log(2 * Jc.size) \
            + math.sqrt(2 * (c + 1)) * R6 * math.sqrt(math.log(2 * Jc.size))

    return {"R1": float(R1), "R2": float(R2), "R3": float(R3), "R4": float(R4),
            "R5": float(R5), "R6": float(R6), "K1": float(K1), "K2": float(K2),
            "K3": float(K3), "c": float(c), "undefined": undefined}


def success_prob_bound(d, s, c):
    """1 - s^-c - d^-c - (2s)^-c - (2(d-s))^-c (the last term needs s < d)."""
    out = 1.0 - s ** (-c) - d ** (-c) - (2 * s) ** (-c)
    if d - s > 0:
        out -= (2 * (d - s)) ** (-c)
    else:
        out = float("-inf")
    return out


def theorem1_margins(M_star, J, u1, p, sigma2, B, rho, c=1.0):
    """Signed margins of the three sufficient conditions (positive = holds).

    A: min_i |u1_i| - 2*sqrt(2)*(K1 + rho*s) / (p * gap(M[J,J]))
    B: rho - [2*sqrt(p*s^c*((1-p)*||M[Jc,J]||_F^2 + (d-s)*s*sigma2))
              + p*||M[Jc,J]||_max]
    C: {p*gap - 2K1 - 2*rho*s} * {p*(lam1(M[J,J]) - lam1(M[Jc,Jc]))
       - K1 - K3 - rho*d} - (K2 + p*||M[Jc,J]||_2)^2 * (1 + sqrt(s))^2

    Empty off-support blocks (s == d) contribute zero norms and K2 = K3 = 0
    so the margins stay finite.  Also returns the success probability bound.
    """
    M_star, d, J, Jc = _blocks(M_star, J)
    s = J.size
    u1 = np.asarray(u1, dtype=float)
    lam1, lam2, lbar = support_gap(M_star[np.ix_(J, J)])
    if lbar <= 0:
        raise InvalidInput("support block must have a positive spectral gap")
    umin = float(np.abs(u1[J]).min())
    bc = bernstein_constants(M_star, J, p, sigma2, B, c)
    K1 = bc["K1"]
    if Jc.size == 0:
        K2 = K3 = 0.0
        fro_cJ = max_cJ = spec_cJ = 0.0
        lam1_cc = 0.0
    else:
        K2, K3 = bc["K2"], bc["K3"]
        n_cJ = norms(M_star[np.ix_(Jc, J)])
        fro_cJ, max_cJ, spec_cJ = n_cJ["frobenius"], n_cJ["max"], n_cJ["spectral"]
        lam1_cc = float(sym_eig(M_star[np.ix_(Jc, Jc)]).eigenvalues[0])

    margin_a = umin - 2 * math.sqrt(2) * (K1 + rho * s) / (p * lbar)
    thresh_b = 2 * math.sqrt(
        p * s ** c * ((1 - p) * fro_cJ ** 2 + Jc.size * s * sigma2)) \
        + p * max_cJ
    margin_b = rho - thresh_b
    factor1 = p * lbar - 2 * K1 - 2 * rho * s
    factor2 = p * (lam1 - lam1_cc) - K1 - K3 - rho * d
    margin_c = factor1 * factor2 - (K2 + p * spec_cJ) ** 2 * (1 + math.sqrt(s)) ** 2

    return {
        "margin_a": float(margin_a),
        "margin_b": float(margin_b),
        "margin_c": float(margin_c),
        "all_satisfied": margin_a > 0 and margin_b > 0 and margin_c > 0,
        "success_prob_bound": success_prob_bound(d, s, c),
        "constants": bc,
        "gap": lbar,
    }


def corollary1_report(M_star, J, p, rho, slack=1.0, theta_band=(0.1, 10.0)):
    """Finite-instance readings of the five asymptotic noiseless conditions.

    Each condition f = o(g) (or Theta(g)) is reported as the ratio f/g; a
    ratio below `slack` (inside `theta_band` for the last one) is flagged
    consistent.  Zero numerators give ratio 0; terms with vanishing blocks
    drop out of inner minima as +inf.  Asymptotics are not decidable at a
    single instance, so these are diagnostics, not proofs.
    """
    M_star, d, J, Jc = _blocks(M_star, J)
    s = J.size
    mu = coherence(M_star, J)
    _, _, lbar = support_gap(M_star[np.ix_(J, J)])
    if lbar <= 0:
        raise InvalidInput("support block must have a positive spectral gap")
    max_cJ = norms(M_star[np.ix_(Jc, J)])["max"] if Jc.size else 0.0
    max_cc = norms(M_star[np.ix_(Jc, Jc)])["max"] if Jc.size else 0.0

    r1 = mu["mu0"] * math.sqrt(s) * math.log(s)

    denom2 = (lbar / s) * min(mu["mu2"], 1.0 / s,
                              math.sqrt(s) / math.log(d)) if d > 1 else float("inf")
    r2 = max_cJ / denom2 if denom2 > 0 else (0.0 if max_cJ == 0 else float("inf"))

    if Jc.size >= 2:
        denom3 = lbar * min(mu["mu3"], 1.0 / math.log(Jc.size))
    elif Jc.size == 1:
        denom3 = lbar * mu["mu3"]  # log(d-s) = 0 would void the second term
    else:
        denom3 = float("inf")
    r3 = max_cc / denom3 if denom3 > 0 else (0.0 if max_cc == 0 else float("inf"))

    terms = [mu["mu1"] * math.sqrt(math.log(s))] if s >= 2 else []
    if max_cJ > 0:
        terms.append(lbar * mu["mu2"] / max_cJ
                     * min(1.0 / (s ** 2 * math.sqrt(s)),
                           1.0 / (s * math.sqrt(s * Jc.size))))
    if max_cc > 0 and Jc.size >= 2:
        terms.append(lbar * mu["mu3"] / max_cc / math.sqrt(math.log(Jc.size)))
    denom4 = min(terms) if terms else float("inf")
    lhs4 = math.sqrt((1 - p) / p)
    r4 = lhs4 / denom4 if denom4 > 0 else float("inf")

    r5 = rho * s ** 2 / (p * lbar)

    return {
        "ratio_mu0": {"value": float(r1), "ok": r1 < slack},
        "ratio_cross_max": {"value": float(r2), "ok": r2 < slack},
        "ratio_off_max": {"value": float(r3), "ok": r3 < slack},
        "ratio_sampling": {"value": float(r4), "ok": r4 < slack},
        "ratio_rho_theta": {"value": float(r5),
                            "ok": theta_band[0] <= r5 <= theta_band[1]},
        "slack": float(slack),
        "theta_band": [float(theta_band[0]), float(theta_band[1])],
        "p_at_least_half": p >= 0.5,
    }


def corollary2_report(lambda1, u1, J, d, p, sigma2, B, rho):
    """Rank-one noise-budget conditions: the a1/a2 constants, two sign-pattern
    ratios, the admissible noise bound on B, the two-sided rho window and the
    closing s-d inequality.  Margins are signed, positive (or zero for the
    non-strict ones) = satisfied."""
    if not (lambda1 > 0):
        raise InvalidInput("lambda1 must be positive")
    if not (0 < p <= 1):
        raise InvalidInput("p must be in (0, 1]")
    J = np.asarray(J, dtype=int)
    s = J.size
    if s < 1 or s >= d:
        raise InvalidInput("need 1 <= s < d")
    u1 = np.asarray(u1, dtype=float)
    uJ = np.abs(u1[J])
    if (uJ == 0).any():
        raise InvalidInput("u1 must be nonzero on J")
    umax = float(uJ.max())
    umin = float(uJ.min())
    maxprod = umax * umax  # max_{i,j in J} |u_i u_j| including i == j

    ds = d - s
    log2s = math.log(2 * s)
    a1 = (2 - 1 / p) * math.log(d) / (8 * math.sqrt(2) * log2s) \
        + math.sqrt(max(ds, s)) * math.sqrt(math.log(d)) / (16 * s ** 2 * math.sqrt(ds))
    a2 = (2 - 1 / p) * math.log(2 * ds) / (8 * math.sqrt(2) * log2s) \
        + math.sqrt(math.log(2 * ds)) / (16 * s ** 2)

    m_pattern = 1.0 / (16 * math.sqrt(2) * log2s) - maxprod / umin
    if p < 1:
        m_flat = math.sqrt(p / (1 - p)) / (16 * math.sqrt(2) * math.sqrt(log2s)) \
            - umax / umin
    else:
        m_flat = float("inf")
    m_noise = (2 * p - 1) * lambda1 * maxprod - B

    rho_lo = 2 * math.sqrt(2) * math.sqrt(p * sigma2 * s ** 2 * ds)
    rho_hi = p * lambda1 * umin / (8 * math.sqrt(2) * s)
    m_rho_lo = rho - rho_lo   # strict
    m_rho_hi = rho_hi - rho   # non-strict

    q = (4 - ds / s - 8 * math.sqrt(2) * a2) ** 2 \
        + 512 * a1 ** 2 * (1 + math.sqrt(s)) ** 2
    num = 12 + ds / s + 8 * math.sqrt(2) * a2 - math.sqrt(q)
    den = 4 * math.sqrt(2) + math.sqrt(2) * ds / s + 16 * a2 \
        - 16 * math.sqrt(2) * a1 ** 2 * (1 + math.sqrt(s)) ** 2
    gate_rhs = num / den if den != 0 else math.copysign(float("inf"), num)
    m_gate = gate_rhs - 1.0 / math.sqrt(s)

    satisfied = (m_pattern >= 0 and m_flat >= 0 and m_noise >= 0
                 and m_rho_lo > 0 and m_rho_hi >= 0 and m_gate >= 0)
    return {
        "a1": float(a1),
        "a2": float(a2),
        "margin_sign_pattern": float(m_pattern),
        "margin_flatness": float(m_flat),
        "margin_noise_bound": float(m_noise),
        "margin_rho_lower": float(m_rho_lo),
        "margin_rho_upper": float(m_rho_hi),
        "margin_size_gate": float(m_gate),
        "rho_window": [float(rho_lo), float(rho_hi)],
        "window_nonempty": rho_hi > rho_lo,
        "out_of_regime": p < 0.5,
        "all_satisfied": bool(satisfied),
        "success_prob_bound": success_prob_bound(d, s, 1.0),
    }


def rescaled_parameter(M_star, J, p):
    """sqrt(p/(1-p)) times the minimum of three coherence/gap composites.

    Strictly increasing in p for a fixed matrix.  Terms whose off-support
    block vanishes drop out of the min (they bound nothing); p = 1 returns
    +inf.  Needs s >= 2 so that log s > 0.
    """
    if not (0 < p <= 1):
        raise InvalidInput("p must be in (0, 1]")
    M_star, d, J, Jc = _blocks(M_star, J)
    s = J.size
    if s < 2:
        raise InvalidInput("rescaled parameter needs s >= 2")
    if p == 1:
        return float("inf")
    mu = coherence(M_star, J)
    _, _, lbar = support_gap(M_star[np.ix_(J, J)])
    terms = [mu["mu1"] * math.sqrt(math.log(s))]
    if Jc.size:
        max_cJ = norms(M_star[np.ix_(Jc, J)])["max"]
        if max_cJ > 0:
            terms.append(lbar * mu["mu2"] / max_cJ
                         * min(1.0 / (s ** 2 * math.sqrt(s)),
                               1.0 / (s * math.sqrt(s * Jc.size))))
        max_cc = norms(M_star[np.ix_(Jc, Jc)])["max"]
        if max_cc > 0 and Jc.size >= 2:
            terms.append(lbar * mu["mu3"] / max_cc
                         / math.sqrt(math.log(Jc.size)))
    return float(math.sqrt(p / (1 - p)) * min(terms))


def theory_report(M_star, J, u1, p, sigma2, B, rho, c=1.0):
    """One-stop report: coherence, constants, margins, both corollary views
    and the rescaled parameter (None outside its p/s domain)."""
    M_star, d, J, Jc = _blocks(M_star, J)
    s = J.size
    lam1_full = float(sym_eig(M_star).eigenvalues[0])
    rank1_residual = float(np.linalg.norm(
        M_star - lam1_full * np.outer(u1, u1))) if lam1_full > 0 else float("inf")
    rep = {
        "d": int(d), "s": int(s), "p": float(p), "sigma2": float(sigma2),
        "B": float(B), "rho": float(rho), "c": float(c),
        "coherence": coherence(M_star, J),
        "theorem1": theorem1_margins(M_star, J, u1, p, sigma2, B, rho, c),
        "corollary1": corollary1_report(M_star, J, p, rho),
    }
    if 0 < s < d and lam1_full > 0:
        rep["corollary2"] = corollary2_report(lam1_full, u1, J, d, p, sigma2,
                                              B, rho)
        rep["corollary2"]["rank1_residual"] = rank1_residual
    if s >= 2 and p < 1:
        rep["rescaled"] = rescaled_parameter(M_star, J, p)
    else:
        rep["rescaled"] = None
    return rep


def write_theory_report(path, report):
    write_json(path, report)
