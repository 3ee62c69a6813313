"""Ground-truth generation, the incomplete/noisy observation model, and
pairwise-complete covariance ingestion for data tables with missing cells."""

import csv
import math
from collections import namedtuple

import numpy as np

from .errors import GenerationFailed, InvalidInput
from .fmt import fnum
from .linalg import symmetrize

GroundTruth = namedtuple(
    "GroundTruth", "d s support eigenvalues eigenvectors spectral_gap M_star")
# support: sorted 0-based index array; eigenvectors: columns, u1 = column 0

NoiseSpec = namedtuple("NoiseSpec", "B sigma_normal sigma2")

Observation = namedtuple("Observation", "M mask p")

_RESAMPLE_CAP = 100


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def truncated_variance(B, sigma_normal):
    """Variance of a zero-mean normal(0, sigma_normal^2) truncated to [-B, B].

    Closed form: sigma_normal^2 * (1 - 2*alpha*phi(alpha)/(2*Phi(alpha)-1))
    with alpha = B/sigma_normal.  The theory consumes this variance, not the
    parent's, so it is computed exactly rather than estimated.
    """
    if B < 0 or sigma_normal < 0:
        raise InvalidInput("noise parameters must be nonnegative")
    if B == 0 or sigma_normal == 0:
        return 0.0
    alpha = B / sigma_normal
    phi = math.exp(-0.5 * alpha * alpha) / math.sqrt(2.0 * math.pi)
    Z = math.erf(alpha / math.sqrt(2.0))  # = 2*Phi(alpha) - 1
    return sigma_normal ** 2 * (1.0 - 2.0 * alpha * phi / Z)


def noise_spec(B, sigma_normal):
    """Build a NoiseSpec; the truncated variance sigma2 is derived."""
    return NoiseSpec(float(B), float(sigma_normal),
                     truncated_variance(B, sigma_normal))


def sample_truncated_normal(rng, n, noise):
    """n i.i.d. draws from normal(0, sigma_normal^2) conditioned on [-B, B].

    Rejection sampling in vectorized rounds; the draw sequence depends only
    on the rng state, so results are reproducible.
    """
    if noise.B == 0 or noise.sigma_normal == 0:
        return np.zeros(n)
    out = np.empty(n)
    todo = np.arange(n)
    for _ in range(10000):
        if todo.size == 0:
            return out
        draw = rng.normal(0.0, noise.sigma_normal, todo.size)
        ok = np.abs(draw) <= noise.B
        out[todo[ok]] = draw[ok]
        todo = todo[~ok]
    raise GenerationFailed(
        "truncated normal rejection sampling did not finish "
        "(B/sigma_normal = %g is too small)" % (noise.B / noise.sigma_normal))


def generate_ground_truth(d, s, gap, seed):
    """Random symmetric matrix with a planted sparse leading eigenvector.

    lambda_2..lambda_d are i.i.d. standard normal sorted descending and
    lambda_1 = lambda_2 + gap (adjusted so the float difference is exactly
    gap).  u1 lives on a uniformly random support of size s with i.i.d.
    signs and magnitudes uniform on [1/(2 sqrt s), 2/(2 sqrt s)] before
    normalization; the floor min |u1_i| >= 1/(2 sqrt s) is re-checked after
    normalizing.  The remaining eigenvectors orthogonalize random Gaussian
    vectors against u1.
    """
    if not (1 <= s <= d):
        raise InvalidInput("need 1 <= s <= d, got s=%r d=%r" % (s, d))
    if not (gap > 0):
        raise InvalidInput("gap must be positive, got %r" % gap)
    rng = _as_rng(seed)

    if d == 1:
        lam = np.array([float(gap)])
    else:
        rest = np.sort(rng.standard_normal(d - 1))[::-1]
        lam = np.concatenate([[rest[0] + gap], rest])
        # nudge lambda_2 so that fl(lambda_1 - lambda_2) == gap exactly
        for _ in range(10):
            if lam[0] - lam[1] == gap:
                break
            lam[1] = lam[0] - gap
            lam[0] = lam[1] + gap
        if lam[0] - lam[1] != gap or np.any(np.diff(lam) > 0):
            raise GenerationFailed("could not realize the exact spectral gap")

    support = np.sort(rng.choice(d, size=s, replace=False))
    floor = 1.0 / (2.0 * math.sqrt(s))
    for _ in range(_RESAMPLE_CAP):
        mags = rng.uniform(floor, 2.0 * floor, size=s)
        signs = rng.choice([-1.0, 1.0], size=s)
        v = signs * mags
        v = v / np.linalg.norm(v)
        if np.abs(v).min() >= floor:
            break
    else:
        raise GenerationFailed("could not satisfy the magnitude floor on u1")

    u1 = np.zeros(d)
    u1[support] = v

    if d > 1:
        G = rng.standard_normal((d, d - 1))
        Q, _ = np.linalg.qr(np.column_stack([u1, G]))
        U = np.column_stack([u1, Q[:, 1:]])
    else:
        U = u1.reshape(1, 1).copy()

    M_star = symmetrize((U * lam) @ U.T)
    return GroundTruth(d, s, support, lam, U, float(gap), M_star)


def sample_observation(gt, p, noise, seed):
    """Observe each upper-triangle entry (i <= j) of M* independently.

    Each entry is kept with probability p and carries additive truncated
    normal noise; (i, j) and (j, i) always agree, and unobserved entries
    are zero.  Noise applies to the diagonal too.  gt may be a GroundTruth
    or a plain symmetric matrix.
    """
    if not (0 < p <= 1):
        raise InvalidInput("observation probability must be in (0, 1], got %r" % p)
    M_star = gt.M_star if hasattr(gt, "M_star") else np.asarray(gt, dtype=float)
    d = M_star.shape[0]
    rng = _as_rng(seed)
    iu = np.triu_indices(d)
    n = iu[0].size
    eps = sample_truncated_normal(rng, n, noise)
    delta = rng.random(n) < p
    vals = np.where(delta, M_star[iu] + eps, 0.0)

    M = np.zeros((d, d))
    M[iu] = vals
    M = M + M.T - np.diag(np.diag(M))
    mask = np.zeros((d, d), dtype=bool)
    mask[iu] = delta
    mask = mask | mask.T
    return Observation(M, mask, float(p))


def incomplete_covariance(table):
    """Pairwise-complete covariance of a data table with missing cells.

    table: n x m array with NaN marking missing cells.  Entry (j, k) is the
    sample covariance over the rows where both columns are present, using
    means over those same rows and a (count - 1) denominator.  Entries with
    fewer than two joint observations are masked out (value 0).

    Returns {"C", "mask", "observed_fraction", "empty_columns"}.
    """
    V = np.asarray(table, dtype=float)
    if V.ndim != 2 or V.shape[0] < 2:
        raise InvalidInput("need a 2-d table with at least 2 rows")
    present = np.isfinite(V)
    N = present.astype(float)
    V0 = np.where(present, V, 0.0)

    counts = N.T @ N                    # joint observation counts
    S_xy = V0.T @ V0                    # sum of x*y over joint rows
    S_x = V0.T @ N                      # S_x[j,k] = sum of column j over joint rows

    with np.errstate(invalid="ignore", divide="ignore"):
        C = (S_xy - S_x * S_x.T / counts) / (counts - 1.0)
    mask = counts >= 2
    C = np.where(mask, C, 0.0)
    C = symmetrize(np.where(np.isfinite(C), C, 0.0))
    mask = mask & mask.T
    empty = [j for j in range(V.shape[1]) if not present[:, j].any()]
    return {
        "C": C,
        "mask": mask,
        "observed_fraction": float(mask.mean()),
        "empty_columns": empty,
    }


# ---- CSV interfaces -------------------------------------------------------
# matrices: d rows x d columns, floats with 17 significant digits, LF endings
# masks: same shape, 0/1
# data tables: header row; empty cell or "NA" means missing


def write_matrix_csv(path, M):
    M = np.asarray(M, dtype=float)
    with open(path, "w", newline="\n") as fh:
        for row in M:
            fh.write(",".join(fnum(x) for x in row) + "\n")


def read_matrix_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if rec:
                rows.append([float(x) for x in rec])
    M = np.array(rows, dtype=float)
    if M.ndim != 2:
        raise InvalidInput("%s: not a rectangular matrix" % path)
    return M


def write_mask_csv(path, mask):
    with open(path, "w", newline="\n") as fh:
        for row in np.asarray(mask):
            fh.write(",".join("1" if v else "0" for v in row) + "\n")


def read_table_csv(path):
    """Read a data table: first row is the header, blank or NA cells are
    missing.  Returns (column_names, values with NaN for missing)."""
    with open(path, newline="") as fh:
        rdr = csv.reader(fh)
        try:
            names = next(rdr)
        except StopIteration:
            raise InvalidInput("%s: empty file" % path)
        rows = []
        for rec in rdr:
            if not rec:
                continue
            row = []
            for cell in rec:
                cell = cell.strip()
                row.append(float("nan") if cell in ("", "NA") else float(cell))
            rows.append(row)
    if len(rows) < 2:
        raise InvalidInput("%s: need at least 2 data rows" % path)
    width = len(names)
    if any(len(r) != width for r in rows):
        raise InvalidInput("%s: ragged rows" % path)
    return names, np.array(rows, dtype=float)
