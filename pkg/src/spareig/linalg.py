"""Dense symmetric linear algebra: eigendecomposition, the norm zoo,
spectraplex projection and entrywise soft-thresholding.

Matrices are plain numpy arrays.  Symmetric inputs are required to be
bit-exact symmetric (A[i,j] == A[j,i]); use symmetrize() after any
operation that can break that, e.g. reassembling V*diag(w)*V'.
"""

from collections import namedtuple

import numpy as np

from .errors import InvalidInput, NoConvergence

EigenDecomposition = namedtuple("EigenDecomposition", "eigenvalues eigenvectors")

EPS_EIG = 1e-10


def symmetrize(A):
    """Return (A + A') / 2, which is bit-exact symmetric."""
    return (A + A.T) / 2.0


def check_symmetric(A, name="matrix"):
    """Validate a square, finite, bit-exact symmetric array and return it."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise InvalidInput("%s must be square d x d with d >= 1, got shape %s"
                           % (name, (A.shape,)))
    if not np.isfinite(A).all():
        raise InvalidInput("%s has non-finite entries" % name)
    if not np.array_equal(A, A.T):
        raise InvalidInput("%s is not symmetric (bit-exact check)" % name)
    return A


def sym_eig(A):
    """Full eigendecomposition of a symmetric matrix.

    Returns EigenDecomposition(eigenvalues, eigenvectors) with eigenvalues
    sorted descending (stable order on ties) and eigenvector columns paired
    with them.  Sign convention: in each column the first component of
    largest absolute value is made nonnegative, so the decomposition is
    deterministic for a fixed input.
    """
    A = check_symmetric(A)
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as e:
        raise NoConvergence("eigendecomposition failed to converge: %s" % e)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    V = V[:, order].copy()
    for k in range(V.shape[1]):
        j = int(np.argmax(np.abs(V[:, k])))  # argmax takes the first maximizer
        if V[j, k] < 0:
            V[:, k] = -V[:, k]
    return EigenDecomposition(w, V)


def norms(A):
    """All matrix norms used by the theory, for a (possibly rectangular) block.

    Returns a dict with keys:
      spectral  - largest singular value (largest |eigenvalue| if symmetric)
      frobenius
      l11       - sum of |entries|
      max       - max |entry|
      two_inf   - max column 2-norm
      one_inf   - max column 1-norm
      inf_two   - sqrt( sum over columns of (max |entry| in column)^2 )
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2 or A.size == 0:
        raise InvalidInput("norms: empty or non-2d view")
    if not np.isfinite(A).all():
        raise InvalidInput("norms: non-finite entries")
    absA = np.abs(A)
    if A.shape[0] == A.shape[1] and np.array_equal(A, A.T):
        w = sym_eig(A).eigenvalues
        spectral = float(max(abs(w[0]), abs(w[-1])))
    else:
        # singular values via the Gram matrix on the smaller side
        G = A.T @ A if A.shape[1] <= A.shape[0] else A @ A.T
        lam = sym_eig(symmetrize(G)).eigenvalues[0]
        spectral = float(np.sqrt(max(lam, 0.0)))
    return {
        "spectral": spectral,
        "frobenius": float(np.sqrt((A * A).sum())),
        "l11": float(absA.sum()),
        "max": float(absA.max()),
        "two_inf": float(np.sqrt((A * A).sum(axis=0).max())),
        "one_inf": float(absA.sum(axis=0).max()),
        "inf_two": float(np.sqrt((absA.max(axis=0) ** 2).sum())),
    }


def project_simplex(v):
    """Euclidean projection of a vector onto the probability simplex.

    Sort-based O(n log n): find the largest k such that the top-k entries
    stay positive after the common shift, then shift and clip.
    """
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, v.size + 1)
    pos = u - (css - 1.0) / k > 0
    idx = np.nonzero(pos)[0][-1]
    theta = (css[idx] - 1.0) / (idx + 1.0)
    return np.maximum(v - theta, 0.0)


def project_spectraplex(S):
    """Frobenius projection onto {X : X >= 0 (psd), tr X = 1}.

    Eigendecompose, project the eigenvalue vector onto the probability
    simplex, recompose.  Idempotent; output is bit-exact symmetric.
    """
    w, V = sym_eig(S)
    w_proj = project_simplex(w)
    return symmetrize((V * w_proj) @ V.T)


def soft_threshold(A, t):
    """Entrywise sign(a) * max(|a| - t, 0).  Preserves symmetry."""
    if t < 0:
        raise InvalidInput("soft_threshold: t must be >= 0, got %r" % t)
    A = np.asarray(A, dtype=float)
    return np.sign(A) * np.maximum(np.abs(A) - t, 0.0)
